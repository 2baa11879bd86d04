"""The two-parameter system on the fixed reference boundaries.

For parameters (rho1, rho2) the physical holes are rho1 p_j + rho1 rho2 hole_j.
Writing the hole densities on the reference curves turns the mixed problem
into a system whose entries depend analytically on (rho1, rho2), including
the degenerate pair (0, r*). In 2-D the scale prefactors are

    rho2^(n-1) = rho2          on the cross-hole blocks,
    (rho1 rho2)^(n-1) = rho1 rho2  on the hole contributions to the outer row.

Both parameters may be negative (used by two-sided difference stencils);
the kernels stay finite as long as the placed holes remain separated.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .geometry import GeometryError, sample_curve, validate_configuration
from .mixed import Placement, evaluate_mixed_solution, factor, solve_mixed, solve_refined
from .potentials import (
    BoundaryDensity,
    adjoint_double_layer_matrix,
    adjoint_double_layer_self,
    assemble_single_layer_self,
    single_layer_matrix,
)
from .quadrature import trapezoid_rule

DIM = 2
INTF_TOL = 1e-10
MEAN_ZERO_TOL = 1e-12
#: minimal separation of the two holes at scale rho2, in node spacings
ADMISSIBILITY_SPACINGS = 3


class InvariantViolation(RuntimeError):
    """A solved quadruple violates an identity it must satisfy."""


@dataclass(frozen=True, eq=False)
class LambdaSystem:
    rho1: float
    rho2: float
    matrix: np.ndarray
    rhs: np.ndarray
    M: int


def admissibility_margin(config, rho2: float) -> float:
    spacing = max(sample_curve(h, config.M).spacing for h in config.holes)
    return ADMISSIBILITY_SPACINGS * abs(rho2) * spacing


def check_admissible(config, rho1: float, rho2: float) -> None:
    report = validate_configuration(config, rho1, rho2, margin=admissibility_margin(config, rho2))
    if not report.ok:
        msgs = "; ".join(f"({v.condition}) {v.message}" for v in report.violations)
        raise GeometryError(f"(rho1, rho2) = ({rho1:g}, {rho2:g}) is not admissible: {msgs}")


def assemble_lambda(config, rho1: float, rho2: float, check: bool = True) -> LambdaSystem:
    """Matrix and right-hand side of the (3M + 1)-square system at (rho1, rho2).

    Unknown order: (theta_1, theta_2, theta_o, xi); the last row imposes
    int theta_o = 0.
    """
    if check:
        check_admissible(config, rho1, rho2)
    M = config.M
    rule = trapezoid_rule(M)
    h = [sample_curve(c, M) for c in config.holes]
    o = sample_curve(config.outer, M)
    p = config.centers
    cross = rho2 ** (DIM - 1)
    hole_pref = (rho1 * rho2) ** (DIM - 1)

    A = np.zeros((3 * M + 1, 3 * M + 1))
    blk = [slice(0, M), slice(M, 2 * M), slice(2 * M, 3 * M)]
    for j in range(2):
        l = 1 - j
        A[blk[j], blk[j]] = 0.5 * np.eye(M) + adjoint_double_layer_self(config.holes[j], rule)
        # grad S((p_j - p_l) + rho2 (t - s)) . nu(t), written with placed points
        A[blk[j], blk[l]] = adjoint_double_layer_matrix(
            p[j] + rho2 * h[j].points, h[j].normals, p[l] + rho2 * h[l].points, cross * h[l].weights
        )
        A[blk[j], blk[2]] = adjoint_double_layer_matrix(
            rho1 * p[j] + rho1 * rho2 * h[j].points, h[j].normals, o.points, o.weights
        )
        A[blk[2], blk[j]] = single_layer_matrix(
            o.points, rho1 * p[j] + rho1 * rho2 * h[j].points, hole_pref * h[j].weights
        )
    A[blk[2], blk[2]] = assemble_single_layer_self(config.outer, rule)
    A[blk[2], -1] = 1.0
    A[-1, blk[2]] = o.weights
    f1, f2, g = config.samples()
    b = np.concatenate([f1, f2, g, [0.0]])
    return LambdaSystem(float(rho1), float(rho2), A, b, M)


@dataclass(frozen=True, eq=False)
class DensityQuadruple:
    """(theta_1, theta_2, theta_o, xi) solving the system at (rho1, rho2)."""

    theta_i1: BoundaryDensity
    theta_i2: BoundaryDensity
    theta_o: BoundaryDensity
    xi: float
    rho1: float
    rho2: float
    condition: float = np.nan
    intf_error: tuple = (np.nan, np.nan)
    mean_error: float = np.nan

    @property
    def holes(self):
        return (self.theta_i1, self.theta_i2)

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.theta_i1.values, self.theta_i2.values, self.theta_o.values, [self.xi]])


def quadruple_from_vector(config, x, rho1, rho2, condition=np.nan, check=True) -> DensityQuadruple:
    M = config.M
    th1 = BoundaryDensity(config.hole1, x[:M])
    th2 = BoundaryDensity(config.hole2, x[M:2 * M])
    tho = BoundaryDensity(config.outer, x[2 * M:3 * M])
    fl = config.fluxes
    intf = tuple(abs(t.integral() - f) for t, f in zip((th1, th2), fl))
    length = float(np.sum(sample_curve(config.outer, M).weights))
    mean = abs(tho.integral()) / (max(np.max(np.abs(tho.values)), 1.0) * length)
    if check:
        for j, (err, f) in enumerate(zip(intf, fl), start=1):
            if err > INTF_TOL * max(1.0, abs(f)):
                raise InvariantViolation(f"int theta_{j} differs from int f_{j} by {err:.3e}")
        if mean > MEAN_ZERO_TOL:
            raise InvariantViolation(f"theta_o is not mean-zero (relative integral {mean:.3e})")
    return DensityQuadruple(th1, th2, tho, float(x[-1]), float(rho1), float(rho2), condition, intf, mean)


def solve_densities(config, rho1: float, rho2: float, check: bool = True) -> DensityQuadruple:
    """Solve the rescaled system at (rho1, rho2) and check its identities."""
    sysm = assemble_lambda(config, rho1, rho2, check=check)
    lu, cond = factor(sysm.matrix)
    x = solve_refined(sysm.matrix, lu, sysm.rhs)
    return quadruple_from_vector(config, x, rho1, rho2, cond, check=check)


def solve_limit_quadruple(config) -> DensityQuadruple:
    """The quadruple at the degenerate pair (0, r*)."""
    return solve_densities(config, 0.0, config.r_star)


def solve_many(config, pairs, workers: int | None = None, check: bool = True) -> list:
    """Independent solves over a list of (rho1, rho2); threads when ``workers`` > 1."""
    pairs = [tuple(map(float, pr)) for pr in pairs]
    if not workers or workers <= 1:
        return [solve_densities(config, a, b, check=check) for a, b in pairs]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda pr: solve_densities(config, pr[0], pr[1], check=check), pairs))


def physical_placements(config, rho1: float, rho2: float) -> tuple:
    """The physical holes rho1 p_j + rho1 rho2 hole_j as mixed-solver placements."""
    if not (rho1 > 0 and rho2 > 0):
        raise GeometryError("physical holes need rho1 > 0 and rho2 > 0")
    return tuple(Placement(c, tuple(rho1 * np.asarray(p)), rho1 * rho2) for c, p in zip(config.holes, config.centers))


def solve_physical(config, rho1: float, rho2: float):
    """Solve the same problem directly on the physical geometry.

    The Neumann data on the physical hole j at x is f_j((x - rho1 p_j) / (rho1 rho2)),
    i.e. the same nodal samples as on the reference curve.
    """
    f1, f2, g = config.samples()
    return solve_mixed(physical_placements(config, rho1, rho2), config.outer, [f1, f2], g, config.M)


def physical_densities(config, quad: DensityQuadruple) -> tuple:
    """Push the quadruple to the physical geometry: mu on hole j is theta_j pulled back."""
    return (quad.theta_i1.values, quad.theta_i2.values), quad.theta_o.values, quad.xi


def equivalence_error(config, rho1: float, rho2: float, targets) -> float:
    """Largest difference of the rescaled and the direct physical field at targets."""
    from .representation import build_field

    quad = solve_densities(config, rho1, rho2)
    direct = solve_physical(config, rho1, rho2)
    u1 = build_field(config, rho1, rho2, quad).evaluate(targets)
    u2 = evaluate_mixed_solution(direct, targets)
    return float(np.max(np.abs(u1 - u2)))


@dataclass(frozen=True)
class AdmissibleBox:
    """Largest tested rectangle [-rho1_max, rho1_max] x [rho2_min, rho2_max]."""

    rho1_max: float
    rho2_min: float
    rho2_max: float
    samples: int


def admissible_box(config, rho1_candidates=None, rho2_half_widths=None, samples: int = 5) -> AdmissibleBox:
    """Empirical admissible rectangle around (0, r*).

    A rectangle is accepted when every point of a ``samples`` x ``samples``
    grid over it passes the geometric admissibility check used before solves.
    """
    rs = config.r_star
    rho1_candidates = rho1_candidates or [0.4, 0.2, 0.1, 0.05, 0.02, 0.01]
    rho2_half_widths = rho2_half_widths or [0.4, 0.2, 0.1, 0.05, 0.02, 0.01]

    def ok(a, b):
        for r1 in np.linspace(-a, a, samples):
            for r2 in np.linspace(rs - b, rs + b, samples):
                report = validate_configuration(config, r1, r2, margin=admissibility_margin(config, r2))
                if not report.ok:
                    return False
        return True

    for a in sorted(rho1_candidates, reverse=True):
        for b in sorted(rho2_half_widths, reverse=True):
            if ok(a, b):
                return AdmissibleBox(a, rs - b, rs + b, samples)
    return AdmissibleBox(0.0, rs, rs, samples)
