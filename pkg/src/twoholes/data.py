"""Boundary data functions f_1, f_2 (Neumann, on reference holes) and g (Dirichlet).

A data function is evaluated on a curve at parameter values ``t``; kinds that
depend on position use the curve point, kinds that depend on the parameter
use ``t`` directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DataSpecError(ValueError):
    pass


@dataclass(frozen=True)
class Constant:
    value: float = 0.0

    def __call__(self, curve, t):
        return np.full(np.shape(t), float(self.value))

    def to_dict(self):
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class Fourier:
    """sum_m cos_m cos(m t) + sin_m sin(m t) in the boundary parameter."""

    cos: tuple = ()
    sin: tuple = ()

    def __call__(self, curve, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for m, a in enumerate(self.cos):
            out += a * np.cos(m * t)
        for m, b in enumerate(self.sin):
            out += b * np.sin(m * t)
        return out

    def to_dict(self):
        return {"kind": "fourier", "cos": list(self.cos), "sin": list(self.sin)}


@dataclass(frozen=True)
class PointSourceTrace:
    """Trace of amplitude * log|x - q|, or its outward normal derivative."""

    q: tuple
    amplitude: float = 1.0
    normal: bool = False

    def __call__(self, curve, t):
        x = curve.point(t)
        d = x - np.asarray(self.q, dtype=float)
        r2 = np.sum(d * d, axis=-1)
        if np.any(r2 < 1e-24):
            raise DataSpecError("point source lies on the boundary")
        if self.normal:
            return self.amplitude * np.sum(d * curve.normal(t), axis=-1) / r2
        return self.amplitude * 0.5 * np.log(r2)

    def to_dict(self):
        return {"kind": "point-source-trace", "q": list(self.q), "amplitude": self.amplitude, "normal": self.normal}


@dataclass(frozen=True)
class HarmonicPolynomial:
    """Trace of Re(sum_k c_k z^k), z = x1 + i x2, c_k complex given as (re, im).

    ``normal=True`` gives the outward normal derivative instead.
    """

    terms: tuple = ()  # ((k, re, im), ...)
    normal: bool = False

    def __call__(self, curve, t):
        x = curve.point(t)
        z = x[..., 0] + 1j * x[..., 1]
        if not self.normal:
            return np.real(sum((re + 1j * im) * z**k for k, re, im in self.terms))
        # grad Re(c z^k) = (Re, -Im)(k c z^{k-1})
        dz = sum((re + 1j * im) * k * z ** (k - 1) for k, re, im in self.terms if k > 0)
        dz = dz + 0j * z
        nu = curve.normal(t)
        return np.real(dz) * nu[..., 0] - np.imag(dz) * nu[..., 1]

    def to_dict(self):
        return {"kind": "harmonic-polynomial", "terms": [list(tt) for tt in self.terms], "normal": self.normal}


@dataclass(frozen=True)
class Table:
    """Samples at equispaced parameters, trigonometrically interpolated."""

    values: tuple

    def __call__(self, curve, t):
        v = np.asarray(self.values, dtype=float)
        n = len(v)
        c = np.fft.rfft(v) / n
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, c[0].real)
        kmax = len(c) - 1
        for k in range(1, len(c)):
            w = 1.0 if (n % 2 == 1 or k < kmax) else 0.5
            out += 2 * w * (c[k].real * np.cos(k * t) - c[k].imag * np.sin(k * t))
        return out

    def to_dict(self):
        return {"kind": "custom-table", "values": list(self.values)}


@dataclass(frozen=True)
class Sum:
    parts: tuple

    def __call__(self, curve, t):
        return sum(p(curve, t) for p in self.parts)

    def to_dict(self):
        return {"kind": "sum", "parts": [p.to_dict() for p in self.parts]}


def data_function(spec) -> object:
    """Build a data function from its JSON-style description."""
    if isinstance(spec, (int, float)):
        return Constant(float(spec))
    if not isinstance(spec, dict) or "kind" not in spec:
        raise DataSpecError(f"data function needs a 'kind': {spec!r}")
    kind = spec["kind"]
    if kind == "constant":
        return Constant(float(spec.get("value", 0.0)))
    if kind == "fourier":
        return Fourier(tuple(map(float, spec.get("cos", ()))), tuple(map(float, spec.get("sin", ()))))
    if kind == "point-source-trace":
        q = spec.get("q")
        if q is None or len(q) != 2:
            raise DataSpecError("point-source-trace needs a source location q")
        return PointSourceTrace(tuple(map(float, q)), float(spec.get("amplitude", 1.0)), bool(spec.get("normal", False)))
    if kind == "harmonic-polynomial":
        terms = tuple((int(k), float(re), float(im)) for k, re, im in spec.get("terms", ()))
        return HarmonicPolynomial(terms, bool(spec.get("normal", False)))
    if kind == "custom-table":
        vals = spec.get("values")
        if not vals:
            raise DataSpecError("custom-table needs values")
        return Table(tuple(map(float, vals)))
    if kind == "sum":
        return Sum(tuple(data_function(p) for p in spec["parts"]))
    raise DataSpecError(f"unknown data function kind {kind!r}")


def check_point_source(fn, curve, region: str = "interior", M: int = 256) -> None:
    """A point-source trace must be harmonic on ``region`` of ``curve``.

    For Dirichlet data on the outer boundary the region is the interior, so q
    must lie outside; for Neumann data on a hole it is the exterior, so q must
    lie inside the hole.
    """
    from .geometry import INSIDE, OUTSIDE, classify_points

    wanted = OUTSIDE if region == "interior" else INSIDE
    parts = fn.parts if isinstance(fn, Sum) else (fn,)
    for p in parts:
        if isinstance(p, PointSourceTrace):
            if classify_points(curve, p.q, M=M, band=0.0)[0] != wanted:
                raise DataSpecError(f"point source {p.q} must lie {wanted} the curve")
