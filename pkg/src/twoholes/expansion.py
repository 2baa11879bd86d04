"""Expansion of u[rho1, rho2] around (0, 0) when r* = 0 (n = 2).

Coefficients are indexed by (j, k) for d^j/d rho1^j d^k/d rho2^k at (0, 0).
With F_j = int f_j and S the fundamental solution,

    u[rho1, rho2](x) = u00(x) + rho1 rho2 (u11(x) + S(x) (F_1 + F_2))
                     + rho1^2 rho2 (u21(x) / 2 - grad S(x) . (p1 F_1 + p2 F_2))
                     + O(rho1^3 rho2 + rho1^2 rho2^2 + rho1 rho2^3),

where u_jk = v+[outer, theta_o_jk] + xi_jk. Each coefficient solves its own
boundary integral equation; :func:`fd_coefficients` provides the independent
finite-difference estimates from full solves.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .geometry import GeometryError, sample_curve
from .mixed import factor, solve_refined
from .orders import OrderFit, fit_order
from .potentials import (
    adjoint_double_layer_self,
    assemble_single_layer_self,
    fundamental_solution,
    single_layer_matrix,
)
from .quadrature import trapezoid_rule
from .representation import HarmonicField, outer_field, solve_field
from .rescaled import DensityQuadruple, solve_densities

FD_STEP = 1e-2
MEAN_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Base:
    quad: DensityQuadruple
    u00: HarmonicField


def _require_r_star_zero(config):
    if config.r_star != 0:
        raise GeometryError("the expansion around (0, 0) needs r* = 0")


def compute_base(config) -> Base:
    """The quadruple at (0, 0) and u00 = v+[outer, theta_o] + xi (the limit field)."""
    _require_r_star_zero(config)
    q = solve_densities(config, 0.0, 0.0)
    return Base(q, outer_field(config.outer, q.theta_o.values, q.xi))


def hessian_moment(config, theta_o) -> np.ndarray:
    """H[h, k] = int_outer d_h d_k S(y) theta_o(y) dsigma_y (smooth, 0 is not on the curve)."""
    o = sample_curve(config.outer, config.M)
    hess = fundamental_solution(o.points, 2)
    return np.einsum("ihk,i->hk", hess, o.weights * np.asarray(theta_o))


def _hole_solve(config, j: int, rhs) -> np.ndarray:
    """Solve (1/2 + K*) theta = rhs on reference hole j."""
    M = config.M
    A = 0.5 * np.eye(M) + adjoint_double_layer_self(config.holes[j - 1], trapezoid_rule(M))
    lu, _ = factor(A)
    return solve_refined(A, lu, np.asarray(rhs, dtype=float))


def _outer_solve(config, rhs) -> tuple:
    """Solve V theta + xi = rhs with int theta = 0 on the outer curve."""
    M = config.M
    o = sample_curve(config.outer, M)
    A = np.zeros((M + 1, M + 1))
    A[:M, :M] = assemble_single_layer_self(config.outer, trapezoid_rule(M))
    A[:M, M] = 1.0
    A[M, :M] = o.weights
    lu, _ = factor(A)
    x = solve_refined(A, lu, np.concatenate([rhs, [0.0]]))
    return x[:M], float(x[M])


@dataclass(frozen=True, eq=False)
class FirstOrder:
    theta_i1_10: np.ndarray
    theta_i2_10: np.ndarray
    theta_i1_01: np.ndarray
    theta_i2_01: np.ndarray


def compute_first_order(config, base: Base) -> FirstOrder:
    """d/d rho1 and d/d rho2 of the hole densities at (0, 0).

    (1/2 + K*) theta_j_10 = -p_j^T H nu(t)
    (1/2 + K*) theta_j_01 = -grad S(p_j - p_l) . nu(t) F_l
    """
    H = hessian_moment(config, base.quad.theta_o.values)
    out = {}
    for j in (1, 2):
        l = 3 - j
        s = sample_curve(config.holes[j - 1], config.M)
        pj, pl = config.centers[j - 1], config.centers[l - 1]
        rhs10 = -(s.normals @ (H.T @ pj))
        grad = fundamental_solution(pj - pl, 1)
        rhs01 = -(s.normals @ grad) * config.fluxes[l - 1]
        out[f"theta_i{j}_10"] = _hole_solve(config, j, rhs10)
        out[f"theta_i{j}_01"] = _hole_solve(config, j, rhs01)
    first = FirstOrder(**out)
    for name, v in out.items():
        j = int(name[7])
        integral = float(sample_curve(config.holes[j - 1], config.M).weights @ v)
        if abs(integral) > MEAN_TOL * max(1.0, np.max(np.abs(v))):
            raise ArithmeticError(f"{name} should have zero integral, got {integral:.3e}")
    return first


@dataclass(frozen=True, eq=False)
class MixedOrder:
    theta_o_11: np.ndarray
    xi_11: float
    theta_o_21: np.ndarray
    xi_21: float
    u11: HarmonicField
    u21: HarmonicField


def compute_mixed_order(config, base: Base, first: FirstOrder | None = None) -> MixedOrder:
    """Outer coefficients of rho1 rho2 and rho1^2 rho2 (times 1 and 2 respectively).

    V theta_o_11 + xi_11 = -S(x) (F_1 + F_2)
    V theta_o_21 + xi_21 = 2 grad S(x) . (p1 F_1 + p2 F_2)
    """
    o = sample_curve(config.outer, config.M)
    F = sum(config.fluxes)
    P = sum(p * f for p, f in zip(config.centers, config.fluxes))
    th11, xi11 = _outer_solve(config, -fundamental_solution(o.points, 0) * F)
    th21, xi21 = _outer_solve(config, 2.0 * fundamental_solution(o.points, 1) @ P)
    return MixedOrder(th11, xi11, th21, xi21, outer_field(config.outer, th11, xi11), outer_field(config.outer, th21, xi21))


@dataclass(frozen=True, eq=False)
class ExpansionCoefficients:
    config: object
    base: Base
    first: FirstOrder
    mixed: MixedOrder

    @property
    def u00(self):
        return self.base.u00

    @property
    def u11(self):
        return self.mixed.u11

    @property
    def u21(self):
        return self.mixed.u21

    def as_dict(self) -> dict:
        return {
            "theta_i1_10": self.first.theta_i1_10,
            "theta_i2_10": self.first.theta_i2_10,
            "theta_i1_01": self.first.theta_i1_01,
            "theta_i2_01": self.first.theta_i2_01,
            "theta_o_11": self.mixed.theta_o_11,
            "xi_11": self.mixed.xi_11,
            "theta_o_21": self.mixed.theta_o_21,
            "xi_21": self.mixed.xi_21,
        }


def compute_coefficients(config) -> ExpansionCoefficients:
    base = compute_base(config)
    first = compute_first_order(config, base)
    return ExpansionCoefficients(config, base, first, compute_mixed_order(config, base, first))


@dataclass(frozen=True, eq=False)
class ExpansionEvaluation:
    value: np.ndarray
    u00: np.ndarray
    order_11: np.ndarray
    order_21: np.ndarray


def expansion_eval(coeffs: ExpansionCoefficients, rho1: float, rho2: float, x) -> ExpansionEvaluation:
    """Two-term expansion at points x of the outer domain (x != 0)."""
    cfg = coeffs.config
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    F = sum(cfg.fluxes)
    P = sum(p * f for p, f in zip(cfg.centers, cfg.fluxes))
    S = fundamental_solution(pts, 0)
    dS = fundamental_solution(pts, 1)
    a = coeffs.u00(pts)
    b = rho1 * rho2 * (coeffs.u11(pts) + S * F)
    c = rho1**2 * rho2 * (0.5 * coeffs.u21(pts) - dS @ P)
    return ExpansionEvaluation(a + b + c, a, b, c)


# ---------------------------------------------------------------- finite differences


def _state(config, rho1, rho2) -> np.ndarray:
    return solve_densities(config, rho1, rho2).vector


class _Cache:
    """Full solves keyed by (rho1, rho2); optional thread pool for prefetching."""

    def __init__(self, config, workers=None):
        self.config = config
        self.store = {}
        self.workers = workers

    def prefetch(self, pairs):
        todo = [p for p in dict.fromkeys(pairs) if p not in self.store]
        if self.workers and self.workers > 1:
            with ThreadPoolExecutor(self.workers) as ex:
                for p, v in zip(todo, ex.map(lambda pr: _state(self.config, *pr), todo)):
                    self.store[p] = v
        else:
            for p in todo:
                self.store[p] = _state(self.config, *p)

    def __call__(self, a, b):
        key = (float(a), float(b))
        if key not in self.store:
            self.store[key] = _state(self.config, *key)
        return self.store[key]


def _d1(F, h, axis):
    e = (h, 0.0) if axis == 0 else (0.0, h)
    return (F(*e) - F(-e[0], -e[1])) / (2 * h)


def _d11(F, h):
    return (F(h, h) - F(h, -h) - F(-h, h) + F(-h, -h)) / (4 * h * h)


def _d21(F, h):
    def d2(k):
        return (F(h, k) - 2 * F(0.0, k) + F(-h, k)) / (h * h)

    return (d2(h) - d2(-h)) / (2 * h)


def _d12(F, h):
    return _d21(lambda a, b: F(b, a), h)


def richardson(D, h):
    """Second-order central stencil improved with one Richardson step over {h, h/2}."""
    return (4.0 * D(h / 2) - D(h)) / 3.0


def fd_coefficients(config, h: float = FD_STEP, workers=None) -> dict:
    """Finite-difference estimates of the coefficients from full solves at (0, 0).

    Returns arrays for the hole densities, (theta_o, xi) pairs for the outer
    coefficients, and the derivatives expected to vanish.
    """
    _require_r_star_zero(config)
    M = config.M
    F = _Cache(config, workers)
    pts = []
    for s in (h, h / 2):
        pts += [(s, 0.0), (-s, 0.0), (0.0, s), (0.0, -s)]
        pts += [(a, b) for a in (s, -s, 0.0) for b in (s, -s)]
    F.prefetch(pts)
    d10 = richardson(lambda s: _d1(F, s, 0), h)
    d01 = richardson(lambda s: _d1(F, s, 1), h)
    d11 = richardson(lambda s: _d11(F, s), h)
    d21 = richardson(lambda s: _d21(F, s), h)
    d12 = richardson(lambda s: _d12(F, s), h)
    h1, h2, o = slice(0, M), slice(M, 2 * M), slice(2 * M, 3 * M)
    return {
        "theta_i1_10": d10[h1],
        "theta_i2_10": d10[h2],
        "theta_i1_01": d01[h1],
        "theta_i2_01": d01[h2],
        "theta_o_11": d11[o],
        "xi_11": d11[-1],
        "theta_o_21": d21[o],
        "xi_21": d21[-1],
        "theta_o_10": d10[o],
        "theta_o_01": d01[o],
        "theta_o_12": d12[o],
        "xi_12": d12[-1],
    }


#: coefficients with smaller sup norm are treated as zero and compared absolutely
ZERO_COEFFICIENT = 1e-8


def relative_error(a, b) -> float:
    """sup|a - b| / sup|a|, with ``a`` the equation-based value.

    When ``a`` is (numerically) zero the absolute difference is returned.
    """
    a, b = np.atleast_1d(a), np.atleast_1d(b)
    ref = np.max(np.abs(a))
    diff = np.max(np.abs(a - b))
    return float(diff / ref) if ref > ZERO_COEFFICIENT else float(diff)


def compare_with_fd(coeffs: ExpansionCoefficients, fd: dict | None = None, h: float = FD_STEP) -> dict:
    """Relative sup-norm differences between equation-based and FD coefficients.

    Outer coefficients are compared as the concatenated pair (theta_o, xi).
    """
    fd = fd or fd_coefficients(coeffs.config, h)
    c = coeffs.as_dict()
    out = {k: relative_error(c[k], fd[k]) for k in ("theta_i1_10", "theta_i2_10", "theta_i1_01", "theta_i2_01")}
    for tag in ("11", "21"):
        eq = np.concatenate([c[f"theta_o_{tag}"], [c[f"xi_{tag}"]]])
        est = np.concatenate([fd[f"theta_o_{tag}"], [fd[f"xi_{tag}"]]])
        out[f"outer_{tag}"] = relative_error(eq, est)
    return out


@dataclass(frozen=True)
class VanishingReport:
    theta_o_10: float
    theta_o_01: float
    theta_o_12: float
    xi_12: float

    def max(self) -> float:
        return max(self.theta_o_10, self.theta_o_01, self.theta_o_12, self.xi_12)


def verify_vanishing_coefficients(config, fd: dict | None = None, h: float = FD_STEP) -> VanishingReport:
    """Sup norms of FD estimates of coefficients that vanish in 2-D."""
    fd = fd or fd_coefficients(config, h)
    return VanishingReport(
        float(np.max(np.abs(fd["theta_o_10"]))),
        float(np.max(np.abs(fd["theta_o_01"]))),
        float(np.max(np.abs(fd["theta_o_12"]))),
        float(abs(fd["xi_12"])),
    )


@dataclass(frozen=True)
class RemainderFit:
    ts: tuple
    errors: tuple
    fit: OrderFit


def remainder_order(config, x, ts, coeffs: ExpansionCoefficients | None = None, against: str = "expansion") -> RemainderFit:
    """Fitted order of |u[t, t](x) - expansion(t, t, x)| (or of |u - u00| with
    ``against='u00'``) over the decreasing sequence ``ts``."""
    ts = tuple(float(t) for t in ts)
    if len(ts) < 3 or any(b >= a for a, b in zip(ts, ts[1:])):
        raise ValueError("need at least three decreasing t values")
    coeffs = coeffs or compute_coefficients(config)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    errs = []
    for t in ts:
        u = solve_field(config, t, t)(x)
        ref = coeffs.u00(x) if against == "u00" else expansion_eval(coeffs, t, t, x).value
        errs.append(float(np.max(np.abs(u - ref))))
    return RemainderFit(ts, tuple(errs), fit_order(list(zip(ts, errs))))


def hole_sum(config, rho1: float, rho2: float, x, quad: DensityQuadruple | None = None) -> np.ndarray:
    """sum_j int S(x - rho1 p_j - rho1 rho2 s) Theta_j(s) dsigma_s from a full solve."""
    quad = quad or solve_densities(config, rho1, rho2)
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    out = np.zeros(len(pts))
    for c, p, th in zip(config.holes, config.centers, quad.holes):
        s = sample_curve(c, config.M)
        out += single_layer_matrix(pts, rho1 * p + rho1 * rho2 * s.points, s.weights * th.values).sum(axis=1)
    return out


def hole_sum_expansion(config, rho1: float, x) -> np.ndarray:
    """S(x) (F_1 + F_2) - rho1 grad S(x) . (p1 F_1 + p2 F_2)."""
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    F = sum(config.fluxes)
    P = sum(p * f for p, f in zip(config.centers, config.fluxes))
    return fundamental_solution(pts, 0) * F - rho1 * (fundamental_solution(pts, 1) @ P)
