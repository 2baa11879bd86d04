"""Closed analytic curves, membership tests and configuration checks.

Every boundary is a trigonometric polynomial

    x_i(t) = sum_m a_im cos(m t) + b_im sin(m t),   t in [0, 2 pi),

traversed counterclockwise, so circles and ellipses are special cases and
all derivatives are available in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

INSIDE = "inside"
OUTSIDE = "outside"
NEAR_BOUNDARY = "near-boundary"

#: number of node spacings in the default guard band
GUARD_SPACINGS = 5
#: nodes used for membership tests when no discretization is given
MEMBERSHIP_NODES = 256


class GeometryError(ValueError):
    """Raised for invalid curves or inadmissible placements."""


@dataclass(frozen=True)
class Curve:
    """Counterclockwise trigonometric curve.

    ``coeffs`` has shape (2, 2, K+1): ``coeffs[i, 0, m]`` multiplies
    cos(m t) in component i and ``coeffs[i, 1, m]`` multiplies sin(m t).
    Stored as nested tuples so that curves are hashable.
    """

    kind: str
    coeffs: tuple
    label: str = ""

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=float)

    @property
    def center(self) -> np.ndarray:
        return self.array[:, 0, 0].copy()

    def _series(self, t, order):
        c = self.array
        t = np.asarray(t, dtype=float)
        m = np.arange(c.shape[2])
        mt = np.multiply.outer(t, m)
        cos, sin = np.cos(mt), np.sin(mt)
        # d^k/dt^k of (cos, sin)(m t), k mod 4
        k = order % 4
        fac = m.astype(float) ** order
        if k == 0:
            bc, bs = cos, sin
        elif k == 1:
            bc, bs = -sin, cos
        elif k == 2:
            bc, bs = -cos, -sin
        else:
            bc, bs = sin, -cos
        out = np.stack(
            [bc @ (fac * c[i, 0]) + bs @ (fac * c[i, 1]) for i in range(2)], axis=-1
        )
        return out

    def point(self, t) -> np.ndarray:
        return self._series(t, 0)

    def derivative(self, t, order: int = 1) -> np.ndarray:
        return self._series(t, order)

    def speed(self, t) -> np.ndarray:
        return np.linalg.norm(self.derivative(t), axis=-1)

    def normal(self, t) -> np.ndarray:
        """Outward unit normal (x2', -x1') / |x'|."""
        d = self.derivative(t)
        n = np.stack([d[..., 1], -d[..., 0]], axis=-1)
        return n / np.linalg.norm(d, axis=-1)[..., None]

    def curvature(self, t) -> np.ndarray:
        d1 = self.derivative(t, 1)
        d2 = self.derivative(t, 2)
        cross = d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]
        return cross / np.linalg.norm(d1, axis=-1) ** 3

    def sample(self, M: int) -> "CurveSample":
        return sample_curve(self, M)


@dataclass(frozen=True, eq=False)
class CurveSample:
    """A curve evaluated at the M equispaced nodes t_k = 2 pi k / M."""

    curve: Curve
    M: int
    t: np.ndarray
    points: np.ndarray
    tangent: np.ndarray
    speed: np.ndarray
    normals: np.ndarray
    curvature: np.ndarray
    weights: np.ndarray = field(repr=False)

    @property
    def spacing(self) -> float:
        """Largest physical distance between consecutive nodes."""
        return float(np.max(np.linalg.norm(np.roll(self.points, -1, 0) - self.points, axis=1)))

    def mapped(self, offset=(0.0, 0.0), scale=1.0) -> np.ndarray:
        return np.asarray(offset, dtype=float) + scale * self.points


@lru_cache(maxsize=256)
def sample_curve(curve: Curve, M: int) -> CurveSample:
    t = 2.0 * np.pi * np.arange(M) / M
    d = curve.derivative(t)
    speed = np.linalg.norm(d, axis=1)
    s = CurveSample(
        curve=curve,
        M=M,
        t=t,
        points=curve.point(t),
        tangent=d,
        speed=speed,
        normals=curve.normal(t),
        curvature=curve.curvature(t),
        weights=2.0 * np.pi / M * speed,
    )
    for a in (s.t, s.points, s.tangent, s.speed, s.normals, s.curvature, s.weights):
        a.flags.writeable = False
    return s


def _freeze(c: np.ndarray) -> tuple:
    return tuple(tuple(tuple(float(v) for v in row) for row in comp) for comp in c)


def make_circle(center, radius: float) -> Curve:
    if not radius > 0:
        raise GeometryError(f"radius must be positive, got {radius}")
    c = np.zeros((2, 2, 2))
    c[:, 0, 0] = center
    c[0, 0, 1] = radius
    c[1, 1, 1] = radius
    return Curve("circle", _freeze(c), label=f"circle(r={radius:g})")


def make_ellipse(center, a: float, b: float) -> Curve:
    if not (a > 0 and b > 0):
        raise GeometryError(f"semiaxes must be positive, got {(a, b)}")
    c = np.zeros((2, 2, 2))
    c[:, 0, 0] = center
    c[0, 0, 1] = a
    c[1, 1, 1] = b
    return Curve("ellipse", _freeze(c), label=f"ellipse({a:g},{b:g})")


def make_trig_curve(fourier_coeffs, check_nodes: int = 4096, label: str = "") -> Curve:
    """Build a curve from Fourier coefficients.

    ``fourier_coeffs`` is either an array of shape (2, 2, K+1) (see
    :class:`Curve`) or a mapping with keys ``x_cos``, ``x_sin``, ``y_cos``,
    ``y_sin`` holding coefficient lists indexed by frequency.

    The result is checked for positive speed, simplicity and counterclockwise
    orientation on ``check_nodes`` samples.
    """
    if isinstance(fourier_coeffs, dict):
        keys = ("x_cos", "x_sin", "y_cos", "y_sin")
        unknown = set(fourier_coeffs) - set(keys)
        if unknown:
            raise GeometryError(f"unknown coefficient keys {sorted(unknown)}")
        K = max(len(fourier_coeffs.get(k, [])) for k in keys)
        c = np.zeros((2, 2, max(K, 2)))
        for i, comp in enumerate("xy"):
            for j, kind in enumerate(("cos", "sin")):
                vals = fourier_coeffs.get(f"{comp}_{kind}", [])
                c[i, j, : len(vals)] = vals
    else:
        c = np.array(fourier_coeffs, dtype=float)
        if c.ndim != 3 or c.shape[:2] != (2, 2):
            raise GeometryError(f"expected coefficients of shape (2, 2, K+1), got {c.shape}")
    c[:, 1, 0] = 0.0
    curve = Curve("trigonometric", _freeze(c), label=label or "trig")
    check_curve(curve, check_nodes)
    return curve


def check_curve(curve: Curve, nodes: int = 4096) -> None:
    """Reject vanishing speed, node-level self-intersection, clockwise orientation."""
    t = 2.0 * np.pi * np.arange(nodes) / nodes
    speed = curve.speed(t)
    if np.min(speed) <= 1e-12 * max(np.max(speed), 1.0):
        raise GeometryError("vanishing speed detected at sample nodes")
    if signed_area(curve, nodes) <= 0:
        raise GeometryError("curve must be counterclockwise")
    x = curve.point(t)
    step = np.linalg.norm(np.roll(x, -1, 0) - x, axis=1)
    floor = 0.5 * np.min(step)
    # pairwise distances in blocks to bound memory
    idx = np.arange(nodes)
    for start in range(0, nodes, 512):
        rows = idx[start : start + 512]
        d = np.linalg.norm(x[rows, None, :] - x[None, :, :], axis=2)
        gap = np.abs(rows[:, None] - idx[None, :])
        gap = np.minimum(gap, nodes - gap)
        if np.any(d[gap >= 2] <= floor):
            raise GeometryError("self-intersection detected at sample nodes")


def signed_area(curve: Curve, nodes: int = 512) -> float:
    """Shoelace integral (1/2) int (x1 x2' - x2 x1') dt by the trapezoid rule."""
    t = 2.0 * np.pi * np.arange(nodes) / nodes
    x, d = curve.point(t), curve.derivative(t)
    return float(np.pi / nodes * np.sum(x[:, 0] * d[:, 1] - x[:, 1] * d[:, 0]))


def _segment_distance(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    a = poly
    b = np.roll(poly, -1, 0)
    ab = b - a
    ap = points[:, None, :] - a[None, :, :]
    s = np.clip(np.sum(ap * ab, axis=2) / np.sum(ab * ab, axis=1), 0.0, 1.0)
    closest = a[None] + s[..., None] * ab[None]
    return np.min(np.linalg.norm(points[:, None, :] - closest, axis=2), axis=1)


def _winding(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    a = poly[None, :, :] - points[:, None, :]
    b = np.roll(poly, -1, 0)[None, :, :] - points[:, None, :]
    cross = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    dot = np.sum(a * b, axis=2)
    return np.sum(np.arctan2(cross, dot), axis=1) / (2.0 * np.pi)


def default_guard(curve: Curve, M: int, scale: float = 1.0) -> float:
    return GUARD_SPACINGS * abs(scale) * sample_curve(curve, M).spacing


def classify_points(
    curve: Curve,
    points,
    M: int = MEMBERSHIP_NODES,
    offset=(0.0, 0.0),
    scale: float = 1.0,
    band: float | None = None,
) -> np.ndarray:
    """Vectorized :func:`contains_point` on the curve ``offset + scale * curve``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if band is None:
        band = default_guard(curve, M, scale)
    if scale == 0:
        poly = np.asarray(offset, dtype=float)[None, :]
        dist = np.linalg.norm(pts - poly, axis=1)
        out = np.full(len(pts), OUTSIDE, dtype=object)
        out[dist <= band] = NEAR_BOUNDARY
        return out
    poly = sample_curve(curve, M).mapped(offset, scale)
    # a negative scale reverses no orientation (point reflection), winding is still +1
    wind = _winding(pts, poly)
    dist = _segment_distance(pts, poly)
    out = np.where(np.abs(wind) > 0.5, INSIDE, OUTSIDE).astype(object)
    out[dist <= band] = NEAR_BOUNDARY
    return out


def contains_point(curve: Curve, x, M: int = MEMBERSHIP_NODES, band: float | None = None) -> str:
    """Classify ``x`` as inside, outside or near-boundary of ``curve``."""
    return str(classify_points(curve, x, M=M, band=band)[0])


def distance_to_curve(curve: Curve, points, M: int = MEMBERSHIP_NODES, offset=(0.0, 0.0), scale=1.0):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if scale == 0:
        return np.linalg.norm(pts - np.asarray(offset, dtype=float), axis=1)
    return _segment_distance(pts, sample_curve(curve, M).mapped(offset, scale))


def placements_disjoint(c1, o1, s1, c2, o2, s2, M: int, margin: float = 0.0) -> bool:
    """True when the closed sets o1 + s1 cl(c1) and o2 + s2 cl(c2) are disjoint.

    Separation must exceed ``margin``. A zero scale collapses a set to its offset.
    """
    def nodes(c, o, s):
        return sample_curve(c, M).mapped(o, s) if s != 0 else np.asarray(o, float)[None, :]

    p1, p2 = nodes(c1, o1, s1), nodes(c2, o2, s2)
    if s2 != 0:
        if np.min(_segment_distance(p1, p2)) <= margin:
            return False
        if np.any(np.abs(_winding(p1, p2)) > 0.5):
            return False
    elif np.min(np.linalg.norm(p1 - p2, axis=1)) <= margin:
        return False
    if s1 != 0:
        if np.min(_segment_distance(p2, p1)) <= margin:
            return False
        if np.any(np.abs(_winding(p2, p1)) > 0.5):
            return False
    return True


def placement_inside(inner, o, s, outer: Curve, M: int, margin: float = 0.0) -> bool:
    """True when o + s cl(inner) lies in the open region bounded by ``outer``."""
    pts = sample_curve(inner, M).mapped(o, s) if s != 0 else np.asarray(o, float)[None, :]
    poly = sample_curve(outer, M).points
    if np.any(np.abs(_winding(pts, poly)) < 0.5):
        return False
    return bool(np.min(_segment_distance(pts, poly)) > margin)


@dataclass(frozen=True)
class Violation:
    condition: str
    message: str


@dataclass(frozen=True)
class ConfigurationReport:
    rho1: float
    rho2: float
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def failed(self, condition: str) -> bool:
        return any(v.condition == condition for v in self.violations)


def validate_configuration(config, rho1: float, rho2: float, margin: float = 0.0) -> ConfigurationReport:
    """Check the admissibility of (rho1, rho2) for ``config``.

    (a) p1 + rho2 cl(hole1) and p2 + rho2 cl(hole2) are disjoint (with ``margin``);
    (b) rho1 p_j + rho1 rho2 cl(hole_j) lie inside the outer domain.
    Never raises; returns the list of failed conditions.
    """
    M = config.M
    out = []
    if not placements_disjoint(
        config.hole1, config.p1, rho2, config.hole2, config.p2, rho2, M, margin=margin
    ):
        out.append(Violation("a", f"scaled holes p_j + {rho2:g} cl(hole_j) intersect or are closer than {margin:g}"))
    if rho1 != 0:
        for j, (hole, p) in enumerate(((config.hole1, config.p1), (config.hole2, config.p2)), start=1):
            if not placement_inside(hole, rho1 * np.asarray(p), rho1 * rho2, config.outer, M):
                out.append(Violation("b", f"hole {j} at scale {rho1 * rho2:g} is not inside the outer domain"))
    return ConfigurationReport(float(rho1), float(rho2), tuple(out))
