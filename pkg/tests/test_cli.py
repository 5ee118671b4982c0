import json

import numpy as np
import pytest

from stablecz.cli import main
from stablecz.fields import Geometry, SampledField


@pytest.fixture
def field_files(tmp_path):
    g = Geometry(1, 8.0, 256)
    x = g.axis()
    f = tmp_path / "f.json"
    h = tmp_path / "g.json"
    SampledField(g, np.exp(-x ** 2 / 0.5), "f").save(f)
    SampledField(g, np.exp(-(x - 0.5) ** 2), "g").save(h)
    return str(f), str(h)


def test_empty_argv_is_usage_error(capsys):
    assert main([]) == 2


def test_density_eval_cauchy(capsys):
    assert main(["density", "eval", "--alpha", "1", "--dim", "1", "--x", "0"]) == 0
    assert capsys.readouterr().out.strip() == "0.3183099"


@pytest.mark.parametrize("argv", [
    ["density", "eval", "--alpha", "2.5", "--x", "0"],
    ["density", "eval", "--alpha", "1", "--x", "a"],
    ["multiplier", "eval", "--alpha", "1", "--matrix", "nope", "--xi", "1"],
    ["bogus"],
])
def test_bad_input_exit_two(argv, capsys):
    assert main(argv) == 2


def test_multiplier_eval(capsys):
    assert main(["multiplier", "eval", "--alpha", "2", "--dim", "2",
                 "--matrix", "riesz2_11", "--xi", "1,0"]) == 0
    assert capsys.readouterr().out.split()[0] == "-0.5"


def test_apply_and_report(tmp_path, field_files, capsys):
    f, _ = field_files
    out = tmp_path / "tf.json"
    assert main(["apply", "--alpha", "1", "--matrix", "riesz_1",
                 "--in", f, "--out", str(out), "--pad", "2"]) == 0
    tf = SampledField.load(out)
    assert tf.meta["config"]["matrix"] == "riesz_1"
    assert main(["report", "lp", "--p", "2", "--in", f,
                 "--tf", str(out)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["lp"]["2.0"]["ratio"] <= 1.0 + 1e-9


def test_apply_dimension_mismatch(field_files):
    f, _ = field_files
    assert main(["apply", "--alpha", "1", "--dim", "2", "--matrix", "identity",
                 "--in", f, "--out", "/tmp/unused.json"]) == 2


def test_verify_exit_codes(tmp_path, capsys):
    out = tmp_path / "v.json"
    assert main(["verify", "corollaries", "--alpha", "1", "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["passed"] and d["config"]["alpha"] == 1.0
    assert main(["verify", "strong_weak", "--alpha", "1", "--tolerance",
                 "STRONG_SLACK=0.001"]) == 1
    assert main(["verify", "l2", "--alpha", "1", "--tolerance", "X=1"]) == 2


def test_mc_run_json(tmp_path, field_files):
    f, _ = field_files
    out = tmp_path / "mc.json"
    assert main(["mc", "run", "--matrix", "identity", "--f", f, "--paths", "30",
                 "--height", "1", "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert len(d["paths"]) == 30 and d["config"]["paths"] == 30
    assert main(["mc", "run", "--mode", "st", "--alpha", "1", "--matrix",
                 "identity", "--f", f]) == 2


def test_mc_duality(field_files, capsys):
    f, g = field_files
    code = main(["mc", "duality", "--matrix", "identity", "--f", f, "--g", g,
                 "--paths", "2000", "--height", "1", "--seed", "3"])
    d = json.loads(capsys.readouterr().out)
    assert code == (0 if d["passed"] else 1)
    assert abs(d["duality"]["z"]) < 4


def test_tolerance_override_is_scoped():
    from stablecz import verify
    before = verify.STRONG_SLACK
    main(["verify", "strong_weak", "--alpha", "1", "--tolerance",
          "STRONG_SLACK=0.001"])
    assert verify.STRONG_SLACK == before
