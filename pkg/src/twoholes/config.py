"""Problem configuration: three boundaries, hole centers, r*, data and M."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path

import numpy as np

from .data import check_point_source, data_function
from .geometry import (
    INSIDE,
    Curve,
    GeometryError,
    classify_points,
    make_circle,
    make_ellipse,
    make_trig_curve,
    placements_disjoint,
)


@dataclass(frozen=True)
class ProblemConfig:
    """The tuple (outer, hole1, hole2, p1, p2, r*, f1, f2, g) plus node count M.

    Holes are given in reference position (containing the origin); the
    physical holes are rho1 p_j + rho1 rho2 hole_j.
    """

    outer: Curve
    hole1: Curve
    hole2: Curve
    p1: tuple
    p2: tuple
    r_star: float = 0.0
    f1: object = None
    f2: object = None
    g: object = None
    M: int = 128
    source: dict | None = None

    def __post_init__(self):
        object.__setattr__(self, "p1", tuple(map(float, self.p1)))
        object.__setattr__(self, "p2", tuple(map(float, self.p2)))
        if self.M % 2 or self.M < 8:
            raise GeometryError(f"M must be even and at least 8, got {self.M}")
        if self.r_star < 0:
            raise GeometryError("r_star must be nonnegative")
        for name in ("outer", "hole1", "hole2"):
            if classify_points(getattr(self, name), (0.0, 0.0), M=self.M, band=0.0)[0] != INSIDE:
                raise GeometryError(f"the origin must lie inside {name}")
        if np.allclose(self.p1, self.p2, rtol=0, atol=0):
            raise GeometryError("p1 and p2 must differ")
        for name in ("p1", "p2"):
            if classify_points(self.outer, getattr(self, name), M=self.M, band=0.0)[0] != INSIDE:
                raise GeometryError(f"{name} must lie inside the outer domain")
        if not placements_disjoint(self.hole1, self.p1, self.r_star, self.hole2, self.p2, self.r_star, self.M):
            raise GeometryError("p1 + r* cl(hole1) and p2 + r* cl(hole2) intersect")
        for name in ("f1", "f2", "g"):
            if getattr(self, name) is None:
                object.__setattr__(self, name, data_function(0.0))
        check_point_source(self.g, self.outer, "interior", self.M)
        check_point_source(self.f1, self.hole1, "exterior", self.M)
        check_point_source(self.f2, self.hole2, "exterior", self.M)

    @property
    def holes(self):
        return (self.hole1, self.hole2)

    @property
    def centers(self):
        return (np.array(self.p1), np.array(self.p2))

    @property
    def neumann(self):
        return (self.f1, self.f2)

    def with_nodes(self, M: int) -> "ProblemConfig":
        return replace(self, M=M)

    def with_r_star(self, r_star: float) -> "ProblemConfig":
        return replace(self, r_star=r_star)

    def samples(self):
        """(f1, f2, g) sampled at the M nodes of their curves."""
        t = 2.0 * np.pi * np.arange(self.M) / self.M
        return (
            np.asarray(self.f1(self.hole1, t), dtype=float),
            np.asarray(self.f2(self.hole2, t), dtype=float),
            np.asarray(self.g(self.outer, t), dtype=float),
        )

    def flux(self, j: int) -> float:
        """Discrete integral of f_j over the reference hole boundary."""
        from .geometry import sample_curve

        hole = self.holes[j - 1]
        s = sample_curve(hole, self.M)
        return float(np.dot(s.weights, self.neumann[j - 1](hole, s.t)))

    @cached_property
    def fluxes(self) -> tuple:
        return (self.flux(1), self.flux(2))

    def to_dict(self) -> dict:
        if self.source is not None:
            d = dict(self.source)
            d["M"] = self.M
            d["r_star"] = self.r_star
            return d
        return {
            "outer": _curve_dict(self.outer),
            "hole1": _curve_dict(self.hole1),
            "hole2": _curve_dict(self.hole2),
            "p1": list(self.p1),
            "p2": list(self.p2),
            "r_star": self.r_star,
            "f1": self.f1.to_dict(),
            "f2": self.f2.to_dict(),
            "g": self.g.to_dict(),
            "M": self.M,
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _curve_dict(c: Curve) -> dict:
    a = c.array
    return {
        "kind": "trigonometric",
        "x_cos": a[0, 0].tolist(),
        "x_sin": a[0, 1].tolist(),
        "y_cos": a[1, 0].tolist(),
        "y_sin": a[1, 1].tolist(),
    }


def curve_from_dict(d: dict) -> Curve:
    kind = d.get("kind")
    center = d.get("center", (0.0, 0.0))
    if kind == "circle":
        return make_circle(center, float(d["radius"]))
    if kind == "ellipse":
        a, b = d["semiaxes"]
        return make_ellipse(center, float(a), float(b))
    if kind == "trigonometric":
        return make_trig_curve({k: d[k] for k in ("x_cos", "x_sin", "y_cos", "y_sin") if k in d})
    raise GeometryError(f"unknown curve kind {kind!r}")


def config_from_dict(d: dict, M: int | None = None) -> ProblemConfig:
    required = ("outer", "hole1", "hole2", "p1", "p2")
    missing = [k for k in required if k not in d]
    if missing:
        raise GeometryError(f"config is missing {missing}")
    return ProblemConfig(
        outer=curve_from_dict(d["outer"]),
        hole1=curve_from_dict(d["hole1"]),
        hole2=curve_from_dict(d["hole2"]),
        p1=d["p1"],
        p2=d["p2"],
        r_star=float(d.get("r_star", 0.0)),
        f1=data_function(d.get("f1", 0.0)),
        f2=data_function(d.get("f2", 0.0)),
        g=data_function(d.get("g", 0.0)),
        M=int(M if M is not None else d.get("M", 128)),
        source={k: v for k, v in d.items() if k != "points"},
    )


def load_config(path, M: int | None = None) -> ProblemConfig:
    with open(path, encoding="utf-8") as fh:
        return config_from_dict(json.load(fh), M=M)


DEFAULT_CONFIG_PATH = Path(__file__).with_name("configs") / "default.json"


def default_config(M: int | None = None) -> ProblemConfig:
    """Unit-disc outer domain, a disc and an ellipse hole, g = x1^2 - x2^2 + 1."""
    return load_config(DEFAULT_CONFIG_PATH, M=M)
