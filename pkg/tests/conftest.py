import json

import numpy as np
import pytest

from twoholes.config import DEFAULT_CONFIG_PATH, config_from_dict, default_config, load_config

GENERIC_CONFIG_PATH = DEFAULT_CONFIG_PATH.with_name("generic.json")


def config_dict(path=DEFAULT_CONFIG_PATH):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def make_config(**changes):
    """The default configuration with some fields replaced."""
    d = config_dict()
    d.update(changes)
    return config_from_dict(d)


def kite():
    from twoholes.geometry import make_trig_curve

    return make_trig_curve({"x_cos": [-0.35, 1.0, 0.35], "y_sin": [0.0, 0.7]}, label="kite")


@pytest.fixture(scope="session")
def cfg():
    return default_config()


@pytest.fixture(scope="session")
def generic_cfg():
    return load_config(GENERIC_CONFIG_PATH)


@pytest.fixture
def rng():
    return np.random.default_rng(20241017)


SMALL_HOLES = {
    "hole1": {"kind": "circle", "radius": 0.2},
    "hole2": {"kind": "ellipse", "semiaxes": [0.2, 0.12]},
}


def small_holes_config(r_star=0.0, **changes):
    """Holes small enough that r* = 1 keeps the scaled holes apart."""
    return make_config(r_star=r_star, **SMALL_HOLES, **changes)


@pytest.fixture(scope="session")
def small_cfg():
    return small_holes_config(1.0)


#: criterion number -> (passed, detail), filled by the acceptance suite
ACCEPTANCE = {}


def report_criterion(number, title, checks):
    """Record one acceptance line and fail the calling test if any check failed.

    ``checks`` is a list of (label, value, passed).
    """
    passed = all(ok for _, _, ok in checks)
    detail = "; ".join(f"{label}={value}" + ("" if ok else " [FAIL]") for label, value, ok in checks)
    ACCEPTANCE[number] = (passed, title, detail)
    print(f"criterion {number} {'PASS' if passed else 'FAIL'}: {title}: {detail}")
    assert passed, detail


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        passed, title, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if passed else 'FAIL'}  {title}  ({detail})")
