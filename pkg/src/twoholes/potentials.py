"""Laplace kernel S(x) = log|x| / (2 pi) and discrete layer operators.

Densities are sampled in x-space at the parameter nodes; the speed |x'(s)|
(and any scale of an affinely placed curve) is part of the operators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import resample

from .geometry import (
    Curve,
    GeometryError,
    NEAR_BOUNDARY,
    classify_points,
    default_guard,
    distance_to_curve,
    placements_disjoint,
    sample_curve,
)
from .quadrature import trapezoid_rule

TWO_PI = 2.0 * np.pi
SINGULAR_FLOOR = 1e-14


class SingularEvaluation(ValueError):
    """Kernel requested at (or numerically at) the origin."""


class GuardBandError(GeometryError):
    """Target too close to a source curve for plain trapezoid evaluation."""


def fundamental_solution(x, order: int = 0):
    """S, grad S or the hessian of S at ``x`` (shape (..., 2))."""
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    if np.any(r2 <= SINGULAR_FLOOR**2):
        raise SingularEvaluation("fundamental solution evaluated at |x| <= 1e-14")
    if order == 0:
        return np.log(r2) / (2.0 * TWO_PI)
    if order == 1:
        return x / (TWO_PI * r2[..., None])
    if order == 2:
        eye = np.eye(2)
        outer = x[..., :, None] * x[..., None, :]
        return (eye * r2[..., None, None] - 2.0 * outer) / (TWO_PI * r2[..., None, None] ** 2)
    raise ValueError(f"order must be 0, 1 or 2, got {order}")


def _diff(targets, sources):
    return np.asarray(targets, dtype=float)[:, None, :] - np.asarray(sources, dtype=float)[None, :, :]


def single_layer_matrix(targets, sources, weights) -> np.ndarray:
    """Off-curve trapezoid matrix  A[i, k] = S(x_i - y_k) w_k."""
    d = _diff(targets, sources)
    r2 = np.sum(d * d, axis=2)
    return np.log(r2) / (2.0 * TWO_PI) * np.asarray(weights)[None, :]


def single_layer_gradient(targets, sources, weights) -> np.ndarray:
    """Target gradient of the single layer matrix, shape (Nt, Ns, 2)."""
    d = _diff(targets, sources)
    r2 = np.sum(d * d, axis=2)
    return d / (TWO_PI * r2[..., None]) * np.asarray(weights)[None, :, None]


def adjoint_double_layer_matrix(targets, target_normals, sources, weights) -> np.ndarray:
    """A[i, k] = grad S(x_i - y_k) . nu_i  w_k (no singularity handling)."""
    d = _diff(targets, sources)
    r2 = np.sum(d * d, axis=2)
    num = np.einsum("ikc,ic->ik", d, np.asarray(target_normals, dtype=float))
    return num / (TWO_PI * r2) * np.asarray(weights)[None, :]


def assemble_single_layer_self(curve: Curve, rule) -> np.ndarray:
    """On-curve single layer with the logarithmic part integrated exactly.

    S(x(t) - x(s)) = log(4 sin^2((t-s)/2)) / (4 pi) + L(t, s) / (4 pi) with
    L(t, s) = log(|x(t) - x(s)|^2 / (4 sin^2((t-s)/2))) smooth and L(t, t) = log|x'(t)|^2.
    """
    M = rule.M
    s = sample_curve(curve, M)
    d = s.points[:, None, :] - s.points[None, :, :]
    r2 = np.sum(d * d, axis=2)
    tau = s.t[:, None] - s.t[None, :]
    sin2 = 4.0 * np.sin(0.5 * tau) ** 2
    off = ~np.eye(M, dtype=bool)
    L = np.empty((M, M))
    L[off] = np.log(r2[off] / sin2[off])
    L[~off] = np.log(s.speed**2)
    V = (rule.log_weights + rule.weights[None, :] * L) / (4.0 * np.pi)
    return V * s.speed[None, :]


def adjoint_double_layer_self(curve: Curve, rule) -> np.ndarray:
    """K*[mu](x_i) on the curve itself; the diagonal uses the limit kappa / (4 pi)."""
    s = sample_curve(curve, rule.M)
    d = s.points[:, None, :] - s.points[None, :, :]
    r2 = np.sum(d * d, axis=2)
    np.fill_diagonal(r2, 1.0)
    K = np.einsum("ikc,ic->ik", d, s.normals) / (TWO_PI * r2)
    np.fill_diagonal(K, s.curvature / (4.0 * np.pi))
    return K * s.weights[None, :]


def gauss_defect(K: np.ndarray, weights) -> np.ndarray:
    """Pointwise defect of the identity  int K*[mu] dsigma = (1/2) int mu dsigma.

    Entry k is (sum_i w_i K*[i, k]) / w_k - 1/2, i.e. the double layer of the
    constant 1 at node k minus its on-curve value 1/2. It vanishes on every
    smooth closed curve, while the row sums of K* equal 1/2 only on circles.
    """
    w = np.asarray(weights, dtype=float)
    return (w @ K) / w - 0.5


def assemble_adjoint_double_layer(
    target_curve: Curve,
    source_curve: Curve,
    target_offset=(0.0, 0.0),
    target_scale: float = 1.0,
    source_offset=(0.0, 0.0),
    source_scale: float = 1.0,
    rule=None,
) -> np.ndarray:
    """K* between affinely placed curves X = a + s x(t), Y = b + r y(s).

    The physical measure |r| |y'(s)| ds is used; normals are those of the
    placed target (equal to the reference normals for positive scale).
    """
    M = rule.M if rule is not None else 128
    rule = rule or trapezoid_rule(M)
    to = np.asarray(target_offset, dtype=float)
    so = np.asarray(source_offset, dtype=float)
    same = (
        target_curve == source_curve
        and np.array_equal(to, so)
        and target_scale == source_scale
    )
    if same:
        if target_scale <= 0:
            raise GeometryError("self interaction needs a positive scale")
        # K* kernel times measure is invariant under similarity maps
        return adjoint_double_layer_self(target_curve, rule)
    if not placements_disjoint(target_curve, to, target_scale, source_curve, so, source_scale, M):
        raise GeometryError("mapped target and source curves intersect")
    ts = sample_curve(target_curve, M)
    ss = sample_curve(source_curve, M)
    normals = ts.normals * np.sign(target_scale)
    return adjoint_double_layer_matrix(
        ts.mapped(to, target_scale), normals, ss.mapped(so, source_scale), abs(source_scale) * ss.weights
    )


@dataclass(frozen=True, eq=False)
class BoundaryDensity:
    """Density samples at the M parameter nodes of ``curve`` (x-space values)."""

    curve: Curve
    values: np.ndarray
    mean_zero: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if self.mean_zero:
            s = sample_curve(self.curve, len(v))
            length = float(np.sum(s.weights))
            scale = max(float(np.max(np.abs(v))) if v.size else 0.0, 1.0)
            if abs(self.integral()) > 1e-12 * scale * length:
                raise ValueError(f"density is not mean-zero: integral {self.integral():.3e}")

    @property
    def M(self) -> int:
        return len(self.values)

    def integral(self) -> float:
        return float(np.dot(sample_curve(self.curve, self.M).weights, self.values))


def check_guard(curve: Curve, M: int, offset, scale, targets, band=None, region=None) -> None:
    """Refuse targets in the guard band (or on the wrong side) of a placed curve."""
    if scale == 0:
        return
    if band is None:
        band = default_guard(curve, M, scale)
    cls = classify_points(curve, targets, M=M, offset=offset, scale=scale, band=band)
    bad = cls == NEAR_BOUNDARY
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        dist = distance_to_curve(curve, np.atleast_2d(targets)[i], M=M, offset=offset, scale=scale)[0]
        raise GuardBandError(
            f"target {np.atleast_2d(targets)[i]} is {dist:.3e} from a source curve (guard band {band:.3e})"
        )
    if region is not None:
        wrong = cls != region
        if np.any(wrong):
            i = int(np.flatnonzero(wrong)[0])
            raise GuardBandError(f"target {np.atleast_2d(targets)[i]} is not {region} the placed curve")


def refine_density(values, M: int | None) -> np.ndarray:
    """Trigonometric interpolation of nodal values onto M equispaced nodes."""
    values = np.asarray(values, dtype=float)
    if M is None or M == len(values):
        return values
    if M < len(values):
        raise ValueError("refinement must not reduce the node count")
    return resample(values, M)


def layer_values(curve, offset, scale, values, targets, order=0, measure_scale=None, refine=None):
    """Trapezoid single layer of ``values`` placed at offset + scale * curve.

    The measure is the reference one times ``measure_scale`` (default |scale|).
    With ``refine`` the density is first interpolated onto that many nodes,
    which extends the accurate range of the plain rule towards the curve.
    No guard check is made here.
    """
    values = refine_density(values, refine)
    s = sample_curve(curve, len(values))
    if measure_scale is None:
        measure_scale = abs(scale)
    w = measure_scale * s.weights * values
    src = s.mapped(offset, scale)
    pts = np.atleast_2d(np.asarray(targets, dtype=float))
    if order == 0:
        return single_layer_matrix(pts, src, w).sum(axis=1)
    if order == 1:
        return single_layer_gradient(pts, src, w).sum(axis=1)
    raise ValueError("order must be 0 or 1")


def eval_layer_potential(
    source_curve, offset, scale, density, targets, order: int = 0, band=None, refine: int | None = None
):
    """Single layer of ``density`` on offset + scale * curve at off-curve targets.

    Uses the physical measure |scale| |y'(s)| ds; targets inside the guard band
    (five node spacings of the evaluation grid) raise :class:`GuardBandError`.
    """
    values = density.values if isinstance(density, BoundaryDensity) else np.asarray(density, dtype=float)
    pts = np.atleast_2d(np.asarray(targets, dtype=float))
    check_guard(source_curve, refine or len(values), offset, scale, pts, band=band)
    return layer_values(source_curve, offset, scale, values, pts, order, refine=refine)
