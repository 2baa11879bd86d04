import numpy as np
import pytest

from twoholes.geometry import sample_curve
from twoholes.orders import fit_order
from twoholes.potentials import GuardBandError, assemble_single_layer_self
from twoholes.quadrature import trapezoid_rule
from twoholes.representation import (
    EtaSpec,
    HarmonicField,
    build_field,
    eval_boundary_layer,
    eval_epsilon_regime,
    eval_macroscopic,
    eval_microscopic,
    outer_field,
    solve_field,
)
from twoholes.rescaled import solve_densities, solve_limit_quadruple

from conftest import make_config, small_holes_config

ZERO = {"kind": "constant", "value": 0.0}
X = np.array([[0.6, 0.3], [-0.5, -0.4], [0.0, 0.7]])


def limit_field(cfg):
    q = solve_limit_quadruple(cfg)
    return outer_field(cfg.outer, q.theta_o.values, q.xi)


def test_rho1_zero_leaves_outer_term_only(cfg):
    q = solve_densities(cfg, 0.0, 0.2)
    field = build_field(cfg, 0.0, 0.2, q)
    assert [t.active for t in field.terms] == [False, False, True]
    ref = outer_field(cfg.outer, q.theta_o.values, q.xi)
    assert np.array_equal(field(X), ref(X))


def test_mismatched_parameters_refused(cfg):
    q = solve_densities(cfg, 0.1, 0.1)
    with pytest.raises(ValueError):
        build_field(cfg, 0.1, 0.2, q)


def test_constant_data_gives_constant_field():
    cfg = make_config(f1=ZERO, f2=ZERO, g={"kind": "constant", "value": -1.5})
    field = solve_field(cfg, 0.1, 0.1)
    assert np.max(np.abs(field(X) + 1.5)) <= 1e-12


def test_dirichlet_trace_on_outer_nodes(generic_cfg):
    cfg, M = generic_cfg, generic_cfg.M
    q = solve_densities(cfg, 0.1, 0.1)
    field = build_field(cfg, 0.1, 0.1, q)
    o = sample_curve(cfg.outer, M)
    # hole terms are smooth on the outer curve; the outer term needs the on-curve rule
    trace = HarmonicField(field.terms[:2], 0.0).evaluate(o.points, check=False)
    trace += assemble_single_layer_self(cfg.outer, trapezoid_rule(M)) @ q.theta_o.values + q.xi
    assert np.max(np.abs(trace - cfg.samples()[2])) <= 1e-9


def test_neumann_trace_near_holes(generic_cfg):
    cfg, M = generic_cfg, generic_cfg.M
    r1 = r2 = 0.1
    field = solve_field(cfg, r1, r2)
    f = cfg.samples()
    for j in range(2):
        s = sample_curve(cfg.holes[j], M)
        idx = np.arange(0, M, 8)
        x = r1 * cfg.centers[j] + r1 * r2 * (s.points[idx] + 1e-3 * s.normals[idx])
        g = field.gradient(x, check=False, refine=8192)
        assert np.max(np.abs(np.sum(g * s.normals[idx], 1) - f[j][idx])) <= 1e-2


def test_macro_at_limit_equals_limit_field(cfg):
    q = solve_limit_quadruple(cfg)
    assert np.array_equal(eval_macroscopic(build_field(cfg, 0.0, 0.0, q), X), limit_field(cfg)(X))


def test_macro_convergence_order(cfg):
    x = np.array([[0.6, 0.3]])
    ref = limit_field(cfg)(x)[0]
    ts = [0.1, 0.05, 0.025]
    errs = [abs(eval_macroscopic(solve_field(cfg, t, t), x)[0] - ref) for t in ts]
    assert fit_order(list(zip(ts, errs))).slope >= 1.9


def test_tiny_neumann_free_holes_barely_perturb():
    cfg = make_config(f1=ZERO, f2=ZERO)
    # physical hole radius rho1 rho2 = 1e-3
    field = solve_field(cfg, 0.1, 0.01)
    x = np.array([[0.6, 0.3], [-0.5, -0.4], [0.0, 0.7]])
    assert np.max(np.abs(field(x) - (1 + x[:, 0] ** 2 - x[:, 1] ** 2))) <= 1e-6


def test_micro_log_coefficient(cfg):
    field = solve_field(cfg, 0.1, 0.1)
    a = eval_microscopic(field, cfg, 0.1, 0.1, [[0.0, 0.6]])
    b = eval_microscopic(field, cfg, 0.1, 0.1, [[0.1, -0.6]])
    assert a.log_coefficients == b.log_coefficients
    assert a.log_coefficients[0] == pytest.approx(1.0, abs=1e-14)  # (2 pi + 0) / (2 pi)


def test_micro_zero_flux_has_no_log_term():
    cfg = make_config(f1={"kind": "fourier", "sin": [0.0, 1.0]})
    field = solve_field(cfg, 0.1, 0.1)
    sv = eval_microscopic(field, cfg, 0.1, 0.1, [[0.0, 0.6]])
    assert abs(sv.log_coefficients[0]) <= 1e-14
    assert np.array_equal(sv.analytic, sv.raw)


def test_micro_analytic_part_converges(cfg):
    u0 = limit_field(cfg)([[0.0, 0.0]])[0]
    t = [[0.0, 0.6], [0.1, -0.6]]
    ts = [0.1, 0.05, 0.025]
    errs = [np.max(np.abs(eval_microscopic(solve_field(cfg, r, r), cfg, r, r, t).analytic - u0)) for r in ts]
    assert fit_order(list(zip(ts, errs))).slope >= 0.9


def test_views_are_consistent(cfg):
    r1, r2 = 0.1, 0.1
    field = solve_field(cfg, r1, r2)
    t = np.array([[0.0, 0.6], [0.1, -0.6]])
    sv = eval_microscopic(field, cfg, r1, r2, t)
    direct = field(r1 * t)
    assert np.max(np.abs(sv.analytic + r1 * r2 * np.log(r1) * sv.log_coefficients[0] - direct)) <= 1e-12
    assert np.max(np.abs(eval_macroscopic(field, r1 * t) - direct)) == 0
    lv = eval_boundary_layer(field, cfg, 1, r1, r2, [[-2.0, 0.0]])
    cj, cl = lv.log_coefficients
    x = r1 * cfg.centers[0] + r1 * r2 * np.array([[-2.0, 0.0]])
    back = lv.analytic + r1 * r2 * (np.log(r1 * r2) * cj + np.log(r1) * cl)
    assert np.max(np.abs(back - field(x))) <= 1e-12


def test_micro_boundedness_fit(cfg):
    # raw values = analytic(t) + t^2 log t * sum F / (2 pi) along rho1 = rho2 = t
    ts = np.linspace(0.02, 0.1, 9)
    raw = np.array([eval_microscopic(solve_field(cfg, r, r), cfg, r, r, [[0.0, 0.6]]).raw[0] for r in ts])
    basis = np.column_stack([np.ones_like(ts), ts, ts**2, ts**3, ts**2 * np.log(ts)])
    coef, *_ = np.linalg.lstsq(basis, raw, rcond=None)
    want = sum(cfg.fluxes) / (2 * np.pi)
    assert abs(coef[-1] - want) <= 0.05 * abs(want)


def test_layer_zero_flux():
    cfg = make_config(f1=ZERO, f2=ZERO)
    u0 = limit_field(cfg)([[0.0, 0.0]])[0]
    errs = []
    for r in (0.1, 0.05, 0.025):
        sv = eval_boundary_layer(solve_field(cfg, r, r), cfg, 2, r, r, [[0.0, 1.5]])
        assert sv.log_coefficients == (0.0, 0.0)
        errs.append(abs(sv.analytic[0] - u0))
    assert errs[0] > errs[1] > errs[2]


def test_layer_analytic_part_converges(cfg):
    u0 = limit_field(cfg)([[0.0, 0.0]])[0]
    errs = [abs(eval_boundary_layer(solve_field(cfg, r, r), cfg, 1, r, r, [[-2.0, 0.0]]).analytic[0] - u0)
            for r in (0.1, 0.05, 0.025)]
    assert errs[0] > errs[1] > errs[2]


def test_layer_mirror_symmetry():
    cfg = make_config(
        hole2={"kind": "circle", "radius": 1.0},
        p1=[-0.3, 0.0],
        p2=[0.3, 0.0],
        f2={"kind": "constant", "value": 1.0},
    )
    field = solve_field(cfg, 0.1, 0.2)
    a = eval_boundary_layer(field, cfg, 1, 0.1, 0.2, [[-1.5, 0.4]])
    b = eval_boundary_layer(field, cfg, 2, 0.1, 0.2, [[1.5, 0.4]])
    assert abs(a.analytic[0] - b.analytic[0]) <= 1e-12
    assert a.log_coefficients == b.log_coefficients


def test_layer_point_inside_hole_refused(cfg):
    field = solve_field(cfg, 0.1, 0.1)
    with pytest.raises(GuardBandError):
        eval_boundary_layer(field, cfg, 1, 0.1, 0.1, [[0.0, 0.0]])


def test_micro_point_on_scaled_hole_refused(cfg):
    field = solve_field(cfg, 0.1, 0.1)
    # t = p1 lies at the center of the hole p1 + rho2 hole1
    with pytest.raises(GuardBandError):
        eval_microscopic(field, cfg, 0.1, 0.1, [[-0.3, 0.0]])


def test_maximum_principle(rng):
    cfg = make_config(f1=ZERO, f2=ZERO, g={"kind": "fourier", "cos": [0.2, 1.0, 0.0, 0.3], "sin": [0.0, 0.0, 0.7]})
    g = cfg.samples()[2]
    field = solve_field(cfg, 0.2, 0.3)
    pts = rng.uniform(-0.7, 0.7, (200, 2))
    pts = pts[np.linalg.norm(pts, axis=1) < 0.7]
    keep = []
    for x in pts:
        try:
            field.check(x[None])
            keep.append(x)
        except GuardBandError:
            pass
    u = field(np.array(keep))
    assert g.min() - 1e-12 <= u.min() and u.max() <= g.max() + 1e-12


def test_field_is_harmonic(cfg):
    field = solve_field(cfg, 0.2, 0.3)
    h = 1e-3
    for x in X:
        pts = np.array([x, x + [h, 0], x - [h, 0], x + [0, h], x - [0, h]])
        v = field(pts)
        lap = (v[1:].sum() - 4 * v[0]) / h**2
        assert abs(lap) <= 1e-4 * max(1.0, abs(v[0]))


def test_eta_spec():
    e = EtaSpec.parse("2,0.5")
    assert e(0.04) == pytest.approx(0.4)
    assert e.r_star == 0.0
    assert EtaSpec(1.0, 1.0).r_star == 1.0
    assert EtaSpec(0.5, 1.0).r_star == 2.0
    assert EtaSpec(func=lambda s: s**0.3, declared_r_star=0.0)(0.001) == pytest.approx(0.001**0.3)
    for bad in [dict(c=0.0), dict(beta=0.0), dict(beta=1.5), dict(func=np.sqrt)]:
        with pytest.raises(ValueError):
            EtaSpec(**bad)


def test_epsilon_macro_with_eta_equal_eps():
    cfg = small_holes_config(1.0)
    ref = limit_field(cfg)([[0.6, 0.3]])[0]
    errs = [abs(eval_epsilon_regime(cfg, EtaSpec(1.0, 1.0), e, "macro", [[0.6, 0.3]]).raw[0] - ref)
            for e in (0.1, 0.05, 0.025)]
    assert errs[0] > errs[1] > errs[2]


def test_epsilon_micro_zero_mean():
    cfg = make_config(f1={"kind": "fourier", "sin": [0.0, 1.0]})
    u0 = limit_field(cfg)([[0.0, 0.0]])[0]
    errs = []
    for e in (0.1, 0.05, 0.025):
        r = eval_epsilon_regime(cfg, EtaSpec(1.0, 0.5), e, "micro", [[0.0, 0.6]])
        assert abs(r.correction[0]) <= 1e-15
        errs.append(abs(r.raw[0] - u0))
    assert errs[0] > errs[1] > errs[2]


def test_epsilon_correction_formulas(cfg):
    e = 0.04
    r = eval_epsilon_regime(cfg, EtaSpec(1.0, 0.5), e, "micro", [[0.0, 0.6]])
    assert (r.rho1, r.rho2) == pytest.approx((0.2, 0.2))
    F = sum(cfg.fluxes)
    assert r.correction[0] == pytest.approx(e * np.log(0.2) * F / (2 * np.pi), rel=1e-14)
    lay = eval_epsilon_regime(cfg, EtaSpec(1.0, 0.5), e, "layer", [[-2.0, 0.0]], j=1)
    F1, F2 = cfg.fluxes
    assert lay.correction[0] == pytest.approx(e * (np.log(e) * F1 + np.log(0.2) * F2) / (2 * np.pi), rel=1e-12)
    with pytest.raises(ValueError):
        eval_epsilon_regime(cfg, EtaSpec(1.0, 0.5), e, "sideways", [[0.0, 0.6]])
