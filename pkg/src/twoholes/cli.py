"""Command-line driver writing CSV result tables.

    twoholes solve     --config cfg.json --out DIR [--grid 0.1,0.05] [--nodes M]
    twoholes converge  --config cfg.json --out DIR [--eta c,beta] [--grid eps1,eps2,...]
    twoholes expand    --config cfg.json --out DIR [--grid t1,t2,t3]
    twoholes validate  --config cfg.json --out DIR

Every CSV starts with ``#`` metadata lines (version, config hash, M, grid);
data rows contain no timestamps, so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import DEFAULT_CONFIG_PATH, config_from_dict
from .geometry import GeometryError, sample_curve, validate_configuration
from .mixed import Placement, evaluate_mixed_solution, solve_mixed
from .orders import fit_order
from .potentials import adjoint_double_layer_self, gauss_defect
from .quadrature import trapezoid_rule
from .representation import (
    EtaSpec,
    build_field,
    eval_boundary_layer,
    eval_epsilon_regime,
    eval_macroscopic,
    eval_microscopic,
    solve_field,
)
from .rescaled import admissible_box, equivalence_error, solve_densities

DEFAULT_POINTS = {
    "macro": [[0.6, 0.3], [-0.5, -0.4]],
    "micro": [[0.0, 0.6]],
    "layer": [[1, -2.0, 0.0], [2, 0.0, 1.5]],
}


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "pass" if v else "FAIL"
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


@dataclass
class ExperimentSpec:
    mode: str
    config_path: Path
    out: Path
    nodes: int | None = None
    eta: EtaSpec | None = None
    grid: tuple | None = None

    def load(self):
        with open(self.config_path, encoding="utf-8") as fh:
            raw = json.load(fh)
        cfg = config_from_dict(raw, M=self.nodes)
        points = {**DEFAULT_POINTS, **raw.get("points", {})}
        return cfg, points


def write_csv(path: Path, spec: ExperimentSpec, cfg, header, rows, extra=()) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# artifact {__version__}\n")
        fh.write(f"# mode {spec.mode}\n")
        fh.write(f"# config_sha256 {cfg.digest()}\n")
        fh.write(f"# M {cfg.M}\n")
        fh.write(f"# grid {','.join(fmt(g) for g in spec.grid or ())}\n")
        for line in extra:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def check_grid(cfg, pairs) -> None:
    """Every sweep point must be admissible before any solve."""
    for a, b in pairs:
        report = validate_configuration(cfg, a, b)
        if not report.ok:
            raise GeometryError(f"grid point ({a:g}, {b:g}) violates condition(s) {[v.condition for v in report.violations]}")


# ------------------------------------------------------------------ modes


def run_solve(spec: ExperimentSpec) -> int:
    cfg, points = spec.load()
    spec.grid = spec.grid or (0.1,)
    pairs = [(t, t) for t in spec.grid]
    check_grid(cfg, pairs)
    rows = []
    for r1, r2 in pairs:
        q = solve_densities(cfg, r1, r2)
        field = build_field(cfg, r1, r2, q)
        for x in points["macro"]:
            u = eval_macroscopic(field, [x])[0]
            rows.append((r1, r2, "macro", "", x[0], x[1], u, u, 0.0, q.condition))
        for t in points["micro"]:
            sv = eval_microscopic(field, cfg, r1, r2, [t])
            rows.append((r1, r2, "micro", "", t[0], t[1], sv.raw[0], sv.analytic[0], sv.raw[0] - sv.analytic[0], q.condition))
        for j, *t in points["layer"]:
            sv = eval_boundary_layer(field, cfg, int(j), r1, r2, [t])
            rows.append((r1, r2, "layer", int(j), t[0], t[1], sv.raw[0], sv.analytic[0], sv.raw[0] - sv.analytic[0], q.condition))
    header = ["rho1", "rho2", "view", "j", "p1", "p2", "u", "analytic", "log_terms", "condition"]
    write_csv(spec.out / "solve.csv", spec, cfg, header, rows)
    print(f"wrote {len(rows)} rows to {spec.out / 'solve.csv'}")
    return 0


def run_converge(spec: ExperimentSpec) -> int:
    cfg, points = spec.load()
    eta = spec.eta or EtaSpec(1.0, 0.5)
    spec.grid = spec.grid or (0.1, 0.05, 0.025)
    cfg = cfg.with_r_star(eta.r_star)
    check_grid(cfg, [(eta(e), e / eta(e)) for e in spec.grid])
    limit = solve_field(cfg, 0.0, cfg.r_star)
    u0 = float(limit([[0.0, 0.0]])[0])
    jobs = [("macro", None, x, float(limit([x])[0])) for x in points["macro"]]
    jobs += [("micro", None, t, u0) for t in points["micro"]]
    jobs += [("layer", int(j), t, u0) for j, *t in points["layer"]]
    rows, fits = [], []
    for view, j, pt, ref in jobs:
        errs = []
        for e in spec.grid:
            r = eval_epsilon_regime(cfg, eta, e, view, [pt], j=j)
            err = abs(r.analytic[0] - ref)
            errs.append((eta(e), err))
            rows.append((e, view, j or "", pt[0], pt[1], r.raw[0], r.correction[0], r.analytic[0], ref, err))
        fit = fit_order(errs)
        monotone = all(b[1] < a[1] for a, b in zip(errs, errs[1:]))
        fits.append((view, j or "", pt[0], pt[1], fit.slope, fit.residual, "floor" if fit.floor else "", monotone))
    header = ["eps", "view", "j", "p1", "p2", "raw", "correction", "analytic", "reference", "error"]
    write_csv(spec.out / "converge.csv", spec, cfg, header, rows, extra=[f"eta c={eta.c!r} beta={eta.beta!r}"])
    fh = ["view", "j", "p1", "p2", "order_in_eta", "residual", "flag", "monotone"]
    write_csv(spec.out / "converge_fit.csv", spec, cfg, fh, fits, extra=[f"eta c={eta.c!r} beta={eta.beta!r}"])
    for f in fits:
        print(f"{f[0]:6s} point=({f[2]:g}, {f[3]:g}) order={f[4]:.3f} monotone={f[7]}")
    return 0


def run_expand(spec: ExperimentSpec) -> int:
    from .expansion import compare_with_fd, compute_coefficients, fd_coefficients, remainder_order, verify_vanishing_coefficients

    cfg, points = spec.load()
    spec.grid = spec.grid or (0.1, 0.05, 0.025)
    check_grid(cfg, [(t, t) for t in spec.grid] + [(0.0, 0.0)])
    coeffs = compute_coefficients(cfg)
    fd = fd_coefficients(cfg)
    rel = compare_with_fd(coeffs, fd)
    van = verify_vanishing_coefficients(cfg, fd)
    rows = []
    c = coeffs.as_dict()
    for k in ("theta_i1_10", "theta_i2_10", "theta_i1_01", "theta_i2_01"):
        rows.append(("coefficient", k, np.max(np.abs(c[k])), np.max(np.abs(fd[k])), rel[k], 1e-5, rel[k] <= 1e-5))
    for tag in ("11", "21"):
        eq = max(np.max(np.abs(c[f"theta_o_{tag}"])), abs(c[f"xi_{tag}"]))
        est = max(np.max(np.abs(fd[f"theta_o_{tag}"])), abs(fd[f"xi_{tag}"]))
        r = rel[f"outer_{tag}"]
        rows.append(("coefficient", f"outer_{tag}", eq, est, r, 1e-5, r <= 1e-5))
    for name in ("theta_o_10", "theta_o_01", "theta_o_12", "xi_12"):
        v = getattr(van, name)
        rows.append(("vanishing", name, 0.0, v, v, 1e-3, v <= 1e-3))
    x = points["macro"][0]
    rem = remainder_order(cfg, x, spec.grid, coeffs)
    for t, e in zip(rem.ts, rem.errors):
        rows.append(("remainder", f"t={t!r}", t, e, "", "", ""))
    ok_slope = (not rem.fit.floor) and 3.7 <= rem.fit.slope <= 4.5
    rows.append(("remainder", "slope", rem.fit.slope, rem.fit.residual, "", "[3.7, 4.5]", ok_slope))
    header = ["kind", "name", "equation", "finite_difference", "relative_error", "tolerance", "status"]
    write_csv(spec.out / "expand.csv", spec, cfg, header, rows, extra=[f"point {x[0]!r},{x[1]!r}"])
    print(f"remainder slope = {rem.fit.slope:.4f} at x = ({x[0]:g}, {x[1]:g})")
    failed = [r for r in rows if r[-1] is False]
    for r in failed:
        print(f"FAIL {r[0]} {r[1]}")
    return 1 if failed else 0


def validation_rows(cfg) -> list:
    """(check, detail, value, tolerance, passed) for the invariant suite."""
    rows = []
    M = cfg.M
    rule = trapezoid_rule(M)
    curves = {"outer": cfg.outer, "hole1": cfg.hole1, "hole2": cfg.hole2}
    for name, c in curves.items():
        s = sample_curve(c, M)
        k1 = float(np.max(np.abs(gauss_defect(adjoint_double_layer_self(c, rule), s.weights))))
        rows.append(("K[1] = 1/2 (dual of K*)", name, k1, 1e-10, k1 <= 1e-10))
        # Gauss: int d/dnu_y S(x - y) dsigma_y = 1 inside, 0 outside
        outside = c.center + 3.0 * np.max(np.linalg.norm(s.points - c.center, axis=1)) * np.array([1.0, 0.0])
        for label, x, want in (("inside", c.center, 1.0), ("outside", outside, 0.0)):
            d = x[None, :] - s.points
            val = float(np.sum(-np.sum(d * s.normals, axis=1) / (2 * np.pi * np.sum(d * d, axis=1)) * s.weights))
            err = abs(val - want)
            rows.append(("Gauss identity", f"{name} {label}", err, 1e-10, err <= 1e-10))
    pairs = [(0.0, cfg.r_star), (0.05, max(cfg.r_star, 0.05)), (0.1, max(cfg.r_star, 0.1))]
    for a, b in pairs:
        q = solve_densities(cfg, a, b)
        for j in (1, 2):
            rows.append(("int theta_j = int f_j", f"j={j} rho=({a!r},{b!r})", q.intf_error[j - 1], 1e-10, q.intf_error[j - 1] <= 1e-10))
        rows.append(("theta_o mean-zero", f"rho=({a!r},{b!r})", q.mean_error, 1e-12, q.mean_error <= 1e-12))
    # uniqueness: zero data gives the zero solution
    pls = [Placement(cfg.hole1, tuple(0.1 * np.asarray(cfg.p1)), 0.01), Placement(cfg.hole2, tuple(0.1 * np.asarray(cfg.p2)), 0.01)]
    z = solve_mixed(pls, cfg.outer, [np.zeros(M), np.zeros(M)], np.zeros(M), M)
    zmax = float(np.max(np.abs(z.vector)))
    rows.append(("uniqueness", "zero data", zmax, 1e-12, zmax <= 1e-12))
    # manufactured solution u = x1^2 - x2^2 on the physical geometry
    phi = []
    for pl in pls:
        pts, nrm, _ = pl.sample(M)
        phi.append(2 * pts[:, 0] * nrm[:, 0] - 2 * pts[:, 1] * nrm[:, 1])
    op = sample_curve(cfg.outer, M).points
    sol = solve_mixed(pls, cfg.outer, phi, op[:, 0] ** 2 - op[:, 1] ** 2, M)
    targets = np.array([[0.3, 0.4], [-0.45, 0.2], [0.1, -0.5]])
    err = float(np.max(np.abs(evaluate_mixed_solution(sol, targets) - (targets[:, 0] ** 2 - targets[:, 1] ** 2))))
    rows.append(("manufactured solution", "x1^2 - x2^2", err, 1e-9, err <= 1e-9))
    # equivalence of the rescaled system with the direct physical solve
    e = equivalence_error(cfg, 0.1, 0.1, targets)
    rows.append(("rescaled vs direct", "rho=(0.1,0.1)", e, 1e-9, e <= 1e-9))
    box = admissible_box(cfg)
    rows.append(("admissible box", f"rho1<={box.rho1_max!r} rho2 in [{box.rho2_min!r},{box.rho2_max!r}]", box.rho1_max, 0.0, box.rho1_max > 0))
    return rows


def run_validate(spec: ExperimentSpec) -> int:
    cfg, _ = spec.load()
    spec.grid = spec.grid or ()
    rows = validation_rows(cfg)
    write_csv(spec.out / "validate.csv", spec, cfg, ["check", "detail", "value", "tolerance", "status"], rows)
    failed = [r for r in rows if not r[-1]]
    for r in rows:
        print(f"{'pass' if r[-1] else 'FAIL'}  {r[0]} ({r[1]}): {r[2]:.3e}")
    return 1 if failed else 0


MODES = {"solve": run_solve, "converge": run_converge, "expand": run_expand, "validate": run_validate}


def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _eta(text: str) -> EtaSpec:
    try:
        return EtaSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"--eta expects c,beta with c > 0 and 0 < beta <= 1: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twoholes", description="Mixed problem with two small holes: solver and asymptotics checks")
    p.add_argument("mode", choices=sorted(MODES))
    p.add_argument("--config", type=Path, default=DEFAULT_CONFIG_PATH)
    p.add_argument("--out", type=Path, default=Path("results"))
    p.add_argument("--nodes", type=int, default=None, help="nodes per curve (even, >= 8)")
    p.add_argument("--eta", type=_eta, default=None, help="eta(eps) = c eps^beta, given as c,beta")
    p.add_argument("--grid", type=_floats, default=None, help="comma-separated sweep values")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = ExperimentSpec(args.mode, args.config, args.out, args.nodes, args.eta, args.grid)
    try:
        return MODES[args.mode](spec)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
