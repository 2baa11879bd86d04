"""The solution field built from a density quadruple and its scaled views.

With F_j = int f_j and n = 2 the raw values carry explicit logarithms:

    micro:   u(rho1 t)                    = U_m  + rho1 rho2 log(rho1) (F_1 + F_2) / (2 pi)
    layer j: u(rho1 p_j + rho1 rho2 t)    = U_j  + rho1 rho2 (log(rho1 rho2) F_j + log(rho1) F_l) / (2 pi)

The analytic parts U_m, U_j are obtained by subtracting those terms from
the full field, so all views are rearrangements of a single evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .geometry import INSIDE, OUTSIDE, Curve, GeometryError, default_guard, classify_points, NEAR_BOUNDARY
from .potentials import GuardBandError, check_guard, layer_values
from .rescaled import solve_densities

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class LayerTerm:
    """prefactor * int S(x - offset - scale y) density(y) dsigma_y on the reference curve.

    ``region`` is where targets must lie relative to the placed curve.
    """

    curve: Curve
    offset: np.ndarray
    scale: float
    density: np.ndarray
    prefactor: float = 1.0
    region: str = OUTSIDE

    @property
    def active(self) -> bool:
        return self.prefactor != 0.0


@dataclass(frozen=True, eq=False)
class HarmonicField:
    """A sum of layer potentials plus a constant."""

    terms: tuple
    constant: float = 0.0

    def check(self, points, refine=None) -> None:
        for term in self.terms:
            if term.active:
                M = refine or len(term.density)
                check_guard(term.curve, M, term.offset, term.scale, points, region=term.region)

    def evaluate(self, points, order: int = 0, check: bool = True, refine: int | None = None) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if check:
            self.check(pts, refine)
        out = np.zeros(len(pts)) if order == 0 else np.zeros((len(pts), 2))
        for term in self.terms:
            if term.active:
                out = out + term.prefactor * layer_values(
                    term.curve, term.offset, term.scale, term.density, pts, order, measure_scale=1.0, refine=refine
                )
        if order == 0:
            out = out + self.constant
        return out

    def gradient(self, points, check: bool = True, refine: int | None = None) -> np.ndarray:
        return self.evaluate(points, order=1, check=check, refine=refine)

    __call__ = evaluate


def outer_field(outer: Curve, density, constant: float) -> HarmonicField:
    """v+[outer, density] + constant."""
    return HarmonicField((LayerTerm(outer, np.zeros(2), 1.0, np.asarray(density, float), 1.0, INSIDE),), float(constant))


def build_field(config, rho1: float, rho2: float, quad) -> HarmonicField:
    """u[rho1, rho2] from the quadruple solved at the same parameters."""
    if not (np.isclose(quad.rho1, rho1, rtol=0, atol=0) and np.isclose(quad.rho2, rho2, rtol=0, atol=0)):
        raise ValueError(f"quadruple solved at ({quad.rho1}, {quad.rho2}), not ({rho1}, {rho2})")
    pref = (rho1 * rho2) ** (2 - 1)
    terms = [
        LayerTerm(c, rho1 * p, rho1 * rho2, th.values, pref, OUTSIDE)
        for c, p, th in zip(config.holes, config.centers, quad.holes)
    ]
    terms.append(LayerTerm(config.outer, np.zeros(2), 1.0, quad.theta_o.values, 1.0, INSIDE))
    return HarmonicField(tuple(terms), quad.xi)


def solve_field(config, rho1: float, rho2: float) -> HarmonicField:
    return build_field(config, rho1, rho2, solve_densities(config, rho1, rho2))


def eval_macroscopic(field: HarmonicField, points) -> np.ndarray:
    """u at fixed points of the outer domain, away from 0 and the holes."""
    return field.evaluate(points)


class ScaledValue(NamedTuple):
    analytic: np.ndarray
    log_coefficients: tuple
    raw: np.ndarray


def _xlogy(a: float, b: float) -> float:
    """a log b with the convention 0 log 0 = 0."""
    return 0.0 if a == 0 else a * np.log(b)


def _require_nonnegative(rho1, rho2):
    if rho1 < 0 or rho2 < 0:
        raise ValueError("scaled views need rho1 >= 0 and rho2 >= 0")


def _check_t_points(curve, offset, scale, tpts, M, region) -> None:
    if scale == 0:
        band = 0.0
        cls = classify_points(curve, tpts, M=M, offset=offset, scale=0.0, band=band)
        if np.any(cls == NEAR_BOUNDARY):
            raise GuardBandError("t-point coincides with a collapsed hole")
        return
    cls = classify_points(curve, tpts, M=M, offset=offset, scale=scale, band=default_guard(curve, M, scale))
    if np.any(cls == NEAR_BOUNDARY) or np.any(cls != region):
        raise GuardBandError(f"t-points must lie {region} the scaled hole, outside its guard band")


def eval_microscopic(field: HarmonicField, config, rho1: float, rho2: float, tpoints) -> ScaledValue:
    """Values at x = rho1 t split into the analytic part and the log coefficient
    (F_1 + F_2) / (2 pi) multiplying rho1 rho2 log rho1."""
    _require_nonnegative(rho1, rho2)
    t = np.atleast_2d(np.asarray(tpoints, dtype=float))
    for c, p in zip(config.holes, config.centers):
        _check_t_points(c, p, rho2, t, config.M, OUTSIDE)
    raw = field.evaluate(rho1 * t)
    coef = sum(config.fluxes) / TWO_PI
    analytic = raw - _xlogy(rho1 * rho2, rho1) * coef
    return ScaledValue(analytic, (coef,), raw)


def eval_boundary_layer(field: HarmonicField, config, j: int, rho1: float, rho2: float, tpoints) -> ScaledValue:
    """Values at x = rho1 p_j + rho1 rho2 t; coefficients (F_j, F_l) / (2 pi)
    multiply rho1 rho2 log(rho1 rho2) and rho1 rho2 log(rho1)."""
    if j not in (1, 2):
        raise ValueError("j must be 1 or 2")
    _require_nonnegative(rho1, rho2)
    l = 3 - j
    t = np.atleast_2d(np.asarray(tpoints, dtype=float))
    pj, pl = config.centers[j - 1], config.centers[l - 1]
    _check_t_points(config.holes[j - 1], np.zeros(2), 1.0, t, config.M, OUTSIDE)
    if rho2 != 0:
        _check_t_points(config.holes[l - 1], (pl - pj) / rho2, 1.0, t, config.M, OUTSIDE)
    raw = field.evaluate(rho1 * pj + rho1 * rho2 * t)
    cj = config.fluxes[j - 1] / TWO_PI
    cl = config.fluxes[l - 1] / TWO_PI
    r = rho1 * rho2
    analytic = raw - (_xlogy(r, r) * cj + _xlogy(r, rho1) * cl)
    return ScaledValue(analytic, (cj, cl), raw)


@dataclass(frozen=True)
class EtaSpec:
    """eta(eps) = c eps^beta with 0 < beta <= 1, or a tabulated function with declared r*."""

    c: float = 1.0
    beta: float = 0.5
    func: Callable | None = None
    declared_r_star: float | None = None

    def __post_init__(self):
        if self.func is None:
            if not self.c > 0:
                raise ValueError("eta needs c > 0")
            if not 0 < self.beta <= 1:
                raise ValueError("eta needs 0 < beta <= 1")
        elif self.declared_r_star is None:
            raise ValueError("a tabulated eta must declare its r*")

    def __call__(self, eps: float) -> float:
        if self.func is not None:
            return float(self.func(eps))
        return self.c * eps**self.beta

    @property
    def r_star(self) -> float:
        if self.func is not None:
            return float(self.declared_r_star)
        return 1.0 / self.c if self.beta == 1 else 0.0

    @classmethod
    def parse(cls, text: str) -> "EtaSpec":
        c, beta = (float(v) for v in text.split(","))
        return cls(c, beta)


@dataclass(frozen=True, eq=False)
class EpsilonResult:
    eps: float
    rho1: float
    rho2: float
    view: str
    raw: np.ndarray
    correction: np.ndarray
    analytic: np.ndarray


def eval_epsilon_regime(config, eta_spec: EtaSpec, eps: float, view: str, points, j: int | None = None) -> EpsilonResult:
    """Evaluate a view at (rho1, rho2) = (eta(eps), eps / eta(eps)).

    ``correction`` is the exact logarithmic term contained in ``raw``:
    eps log(eta) (F_1 + F_2) / (2 pi) for the micro view and
    eps (log(eps) F_j + log(eta) F_l) / (2 pi) for the layer view.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if abs(config.r_star - eta_spec.r_star) > 1e-12:
        config = config.with_r_star(eta_spec.r_star)
    eta = eta_spec(eps)
    rho1, rho2 = eta, eps / eta
    try:
        field = solve_field(config, rho1, rho2)
    except GeometryError as exc:
        raise GeometryError(f"eps = {eps:g} is not admissible for this eta: {exc}") from exc
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if view == "macro":
        raw = eval_macroscopic(field, pts)
        corr = np.zeros_like(raw)
    elif view == "micro":
        sv = eval_microscopic(field, config, rho1, rho2, pts)
        raw = sv.raw
        corr = np.full_like(raw, eps * np.log(eta) * sv.log_coefficients[0])
    elif view == "layer":
        if j is None:
            raise ValueError("the layer view needs j")
        sv = eval_boundary_layer(field, config, j, rho1, rho2, pts)
        cj, cl = sv.log_coefficients
        raw = sv.raw
        corr = np.full_like(raw, eps * (np.log(eps) * cj + np.log(eta) * cl))
    else:
        raise ValueError(f"unknown view {view!r}")
    return EpsilonResult(eps, rho1, rho2, view, raw, corr, raw - corr)
