import csv
import json

import pytest

from twoholes import __version__
from twoholes.cli import main
from twoholes.config import default_config

from conftest import config_dict


def read_rows(path):
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    meta = [l for l in lines if l.startswith("#")]
    return meta, list(csv.DictReader(l for l in lines if not l.startswith("#")))


def test_solve_writes_csv_with_metadata(tmp_path, capsys):
    assert main(["solve", "--out", str(tmp_path), "--grid", "0.1,0.05"]) == 0
    meta, rows = read_rows(tmp_path / "solve.csv")
    assert meta[0] == f"# artifact {__version__}"
    assert f"# config_sha256 {default_config().digest()}" in meta
    assert "# M 128" in meta and "# grid 0.10000000000000001,0.050000000000000003" in meta
    assert {r["view"] for r in rows} == {"macro", "micro", "layer"}
    assert len(rows) == 2 * 7
    micro = [r for r in rows if r["view"] == "micro"][0]
    assert float(micro["u"]) - float(micro["analytic"]) == pytest.approx(float(micro["log_terms"]), abs=1e-15)


def test_nodes_flag_changes_resolution(tmp_path):
    assert main(["solve", "--out", str(tmp_path), "--nodes", "256"]) == 0
    meta, _ = read_rows(tmp_path / "solve.csv")
    assert "# M 256" in meta


def test_converge_macro_monotone(tmp_path):
    assert main(["converge", "--out", str(tmp_path), "--eta", "1,0.5"]) == 0
    _, fits = read_rows(tmp_path / "converge_fit.csv")
    macro = [f for f in fits if f["view"] == "macro"]
    assert macro and all(f["monotone"] == "pass" for f in macro)
    _, rows = read_rows(tmp_path / "converge.csv")
    assert {float(r["eps"]) for r in rows} == {0.1, 0.05, 0.025}


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--config", "does/not/exist.json"],
        ["solve", "--nodes", "63"],
        ["solve", "--grid", "0.1,0.9"],
        ["converge", "--eta", "1,1"],
    ],
)
def test_errors_exit_nonzero(tmp_path, argv):
    assert main(argv + ["--out", str(tmp_path)]) == 2


def test_invalid_json_exits_nonzero(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["validate", "--config", str(bad), "--out", str(tmp_path)]) == 2


def test_bad_eta_rejected_by_parser():
    with pytest.raises(SystemExit):
        main(["converge", "--eta", "1,2"])


def test_config_file_points_used(tmp_path):
    d = config_dict()
    d["points"] = {"macro": [[0.2, 0.2]], "micro": [[0.0, 0.6]], "layer": [[1, -2.0, 0.0]]}
    p = tmp_path / "c.json"
    p.write_text(json.dumps(d))
    assert main(["solve", "--config", str(p), "--out", str(tmp_path)]) == 0
    _, rows = read_rows(tmp_path / "solve.csv")
    assert [(r["view"], r["p1"]) for r in rows] == [("macro", "0.20000000000000001"), ("micro", "0"), ("layer", "-2")]
