import json

import numpy as np
import pytest

from twoholes.config import config_from_dict, default_config, load_config
from twoholes.data import DataSpecError, HarmonicPolynomial, PointSourceTrace, Table, data_function
from twoholes.geometry import GeometryError, make_circle

from conftest import config_dict, make_config


def test_default_config_fields(cfg):
    assert cfg.M == 128
    assert cfg.r_star == 0.0
    assert cfg.p1 == (-0.3, 0.0) and cfg.p2 == (0.4, 0.1)
    # f1 = 1 on the unit circle, f2 = cos t has zero mean
    assert cfg.fluxes[0] == pytest.approx(2 * np.pi, rel=1e-14)
    assert abs(cfg.fluxes[1]) <= 1e-14


def test_default_g_is_polynomial_trace(cfg):
    t = 2 * np.pi * np.arange(cfg.M) / cfg.M
    x = cfg.outer.point(t)
    assert np.allclose(cfg.samples()[2], 1 + x[:, 0] ** 2 - x[:, 1] ** 2, atol=1e-14)


def test_digest_stable_and_sensitive(cfg):
    assert cfg.digest() == default_config().digest()
    assert cfg.digest() != cfg.with_nodes(64).digest()


def test_load_config_roundtrip(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(config_dict()))
    assert load_config(p).digest() == default_config().digest()


def test_origin_must_be_inside_holes():
    with pytest.raises(GeometryError):
        make_config(hole1={"kind": "circle", "center": [3.0, 0.0], "radius": 1.0})


def test_equal_centers_rejected():
    with pytest.raises(GeometryError):
        make_config(p2=[-0.3, 0.0])


def test_r_star_overlap_rejected():
    # unit holes at distance ~0.7 overlap for r* = 1
    with pytest.raises(GeometryError):
        make_config(r_star=1.0)


def test_odd_node_count_rejected():
    with pytest.raises(GeometryError):
        make_config(M=127)


def test_point_source_must_be_outside_outer_domain():
    with pytest.raises(DataSpecError):
        make_config(g={"kind": "point-source-trace", "q": [0.2, 0.0]})
    make_config(g={"kind": "point-source-trace", "q": [3.0, 0.0]})


def test_point_source_neumann_must_be_inside_hole():
    with pytest.raises(DataSpecError):
        make_config(f1={"kind": "point-source-trace", "q": [3.0, 0.0], "normal": True})
    make_config(f1={"kind": "point-source-trace", "q": [0.1, 0.0], "normal": True})


def test_missing_fields_rejected():
    d = config_dict()
    del d["p2"]
    with pytest.raises(GeometryError):
        config_from_dict(d)


@pytest.mark.parametrize("spec", [{"kind": "nope"}, {"value": 1}, {"kind": "point-source-trace"}, {"kind": "custom-table"}])
def test_bad_data_specs(spec):
    with pytest.raises(DataSpecError):
        data_function(spec)


def test_point_source_normal_derivative_matches_gradient():
    c = make_circle((0, 0), 1.0)
    q = np.array([0.3, -0.2])
    t = np.linspace(0, 2 * np.pi, 17)
    x = c.point(t)
    d = x - q
    want = np.sum(d / np.sum(d * d, axis=1)[:, None] * c.normal(t), axis=1)
    assert np.allclose(PointSourceTrace(tuple(q), normal=True)(c, t), want, atol=1e-15)


def test_harmonic_polynomial_normal_derivative():
    c = make_circle((0, 0), 1.0)
    t = np.linspace(0, 2 * np.pi, 19)
    x = c.point(t)
    # u = x1^2 - x2^2, grad u = (2 x1, -2 x2)
    want = np.sum(np.stack([2 * x[:, 0], -2 * x[:, 1]], 1) * c.normal(t), axis=1)
    assert np.allclose(HarmonicPolynomial(((2, 1.0, 0.0),), normal=True)(c, t), want, atol=1e-14)


def test_table_interpolates_its_samples():
    vals = np.cos(2 * np.pi * np.arange(16) / 16 * 3) + 0.5
    t = 2 * np.pi * np.arange(16) / 16
    assert np.allclose(Table(tuple(vals))(None, t), vals, atol=1e-14)
    assert np.allclose(Table(tuple(vals))(None, np.array([0.1])), np.cos(0.3) + 0.5, atol=1e-13)


def test_data_dict_roundtrip():
    spec = {"kind": "sum", "parts": [{"kind": "constant", "value": 2.0}, {"kind": "fourier", "cos": [0, 1], "sin": [0, 0, 3]}]}
    f = data_function(spec)
    assert data_function(f.to_dict()) == f
