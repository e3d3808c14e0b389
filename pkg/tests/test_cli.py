import json
import subprocess
import sys

import numpy as np
import pytest

from qharmonic import cli, io, model
from qharmonic.harmonic import HarmonicGrid

from conftest import walk


def _model_file(tmp_path, name, s):
    path = tmp_path / f"{name}.json"
    path.write_text(io.dump_model(s))
    return str(path)


@pytest.fixture
def sym_file(tmp_path):
    return _model_file(tmp_path, "sym", walk("sym"))


@pytest.fixture
def sep_file(tmp_path):
    return _model_file(tmp_path, "sep", walk("sep"))


def run(argv, capsys, env=None, monkeypatch=None):
    if env is not None:
        for k, v in env.items():
            monkeypatch.setenv(k, v)
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


# -- io ---------------------------------------------------------------------


def test_layout_round_trip():
    s = walk("drift")
    layout = io.layout_from_weights(s.weights)
    # top row is l = +1, left column k = -1
    assert layout[0] == [s.p(-1, 1), s.p(0, 1), s.p(1, 1)]
    assert layout[2][0] == s.p(-1, -1)
    assert np.array_equal(io.weights_from_layout(layout), s.weights)
    assert io.parse_model(io.dump_model(s)) == s


def test_parse_model_errors():
    from qharmonic import errors
    with pytest.raises(errors.ValidationError):
        io.parse_model("{not json")
    with pytest.raises(errors.ValidationError):
        io.parse_model('{"w": 1}')
    with pytest.raises(errors.ValidationError):
        io.parse_model('{"weights": [[0, 1], [1, 0]]}')


def test_dumps_numbers():
    txt = io.dumps({"a": 1.0, "b": 0.1, "c": float("nan"), "d": None, "e": True, "f": [1, 2.5],
                    "g": np.float64(3.0), "h": [[1.0, 2.0]], "i": {}, "j": []}, indent=None)
    back = json.loads(txt)
    assert back["a"] == 1.0 and back["c"] is None and back["d"] is None and back["e"] is True
    assert "0.10000000000000001" in txt
    assert back["h"] == [[1.0, 2.0]] and back["i"] == {} and back["j"] == []
    with pytest.raises(TypeError):
        io.dumps({"x": object()})


def test_csv_helpers():
    g = HarmonicGrid(np.arange(9.0).reshape(3, 3))
    lines = io.grid_csv(g).splitlines()
    assert lines[0] == "i,j,f" and lines[1] == "0,0,0.0" and len(lines) == 10


# -- cli --------------------------------------------------------------------


def test_t0(capsys, sym_file):
    code, out, _ = run(["t0", sym_file], capsys)
    assert code == 0
    d = json.loads(out)
    assert d["t0"] == 1.0 and d["a_star"] == [0.0, 0.0]


def test_classify_empty(capsys, sep_file):
    code, out, _ = run(["classify", sep_file, "--t", "0.8"], capsys)
    assert code == 0 and json.loads(out)["regime"] == "Empty"


def test_harmonic_grid_ratio(capsys, sym_file):
    code, out, _ = run(["harmonic", sym_file, "--t", "1.25", "--p", "0.5", "--grid", "10"], capsys)
    assert code == 0
    d = json.loads(out)
    v = np.array(d["values"])
    assert v[2, 2] / v[1, 1] == pytest.approx(6.25, rel=1e-10)
    for key in ("t", "t0", "p", "p_prime", "c_alpha", "c_beta", "radii"):
        assert key in d["meta"]


def test_harmonic_csv(capsys, sym_file):
    code, out, _ = run(["harmonic", sym_file, "--t", "1.25", "--p", "0.5", "--grid", "3",
                        "--format", "csv"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "i,j,f" and len(out.splitlines()) == 17


def test_lambda_endpoints_reproduce_p(capsys, tmp_path):
    f = _model_file(tmp_path, "drift", walk("drift"))
    _, out, _ = run(["segment", f, "--t", "1.1"], capsys)
    seg = json.loads(out)
    for lam, key in (("0", "x2"), ("1", "X_y2")):
        _, a, _ = run(["harmonic", f, "--t", "1.1", "--lambda", lam, "--grid", "6"], capsys)
        _, b, _ = run(["harmonic", f, "--t", "1.1", "--p", repr(seg[key]), "--grid", "6"], capsys)
        ma, mb = json.loads(a), json.loads(b)
        assert abs(ma["meta"]["p"] - seg[key]) <= 1e-12
        assert np.allclose(ma["values"], mb["values"], rtol=1e-12)


def test_byte_stable_output(capsys, sym_file):
    argv = ["verify", sym_file, "--t", "1.25", "--lambda", "0.5", "--grid", "8"]
    _, a, _ = run(argv, capsys)
    _, b, _ = run(argv, capsys)
    assert a == b
    _, c, _ = run(["harmonic", sym_file, "--t", "1.25", "--p", "0.5", "--grid", "8", "--threads", "1"], capsys)
    _, d, _ = run(["harmonic", sym_file, "--t", "1.25", "--p", "0.5", "--grid", "8", "--threads", "3"], capsys)
    assert c == d


@pytest.mark.parametrize("argv", [
    ["validate"], ["branch-points", "--t", "1.25"], ["curve", "--t", "1.25", "--which", "L", "--samples", "16"],
    ["segment", "--t", "1.25"], ["gluing", "--t", "1.25", "--check"], ["tilt", "--t", "1.25", "--dir", "1,1"],
    ["closed-form", "--t", "1.25", "--p", "0.5", "--grid", "4"],
])
def test_subcommands_ok(capsys, sym_file, argv):
    code, out, err = run([argv[0], sym_file] + argv[1:], capsys)
    assert code == 0, err
    json.loads(out)


def test_branch_points_and_curve_csv(capsys, sym_file):
    code, out, _ = run(["branch-points", sym_file, "--t", "1.25", "--format", "csv"], capsys)
    assert code == 0 and out.splitlines()[0] == "name,value"
    code, out, _ = run(["curve", sym_file, "--t", "1.25", "--samples", "10", "--format", "csv"], capsys)
    assert code == 0 and len(out.splitlines()) == 11


def test_tilt_output(capsys, sym_file):
    _, out, _ = run(["tilt", sym_file, "--t", "1.25"], capsys)
    d = json.loads(out)
    assert d["a"][0] == pytest.approx(0.9624236501192069)
    assert sum(map(sum, d["weights"])) == pytest.approx(1.0)


def test_output_file(capsys, sym_file, tmp_path):
    dest = tmp_path / "out.json"
    code, out, _ = run(["t0", sym_file, "--output", str(dest)], capsys)
    assert code == 0 and out == ""
    assert json.loads(dest.read_text())["t0"] == 1.0


def test_exit_usage(capsys, sym_file):
    assert run([], capsys)[0] == 64
    assert run(["harmonic", sym_file, "--t", "1.25"], capsys)[0] == 64
    assert run(["harmonic", sym_file, "--t", "1.25", "--p", "0.5", "--lambda", "0.5"], capsys)[0] == 64
    assert run(["harmonic", sym_file, "--t", "1.25", "--p", "0.5", "--grid", "1"], capsys)[0] == 64
    assert run(["tilt", sym_file, "--t", "1.25", "--dir", "0,0"], capsys)[0] == 64
    assert run(["segment", sym_file, "--t", "1.25", "--format", "csv"], capsys)[0] == 64
    assert run(["classify", sym_file, "--t", "-1"], capsys)[0] == 64


def test_exit_file_error(capsys, tmp_path):
    code, _, err = run(["t0", str(tmp_path / "missing.json")], capsys)
    assert code == 66 and "missing.json" in err


def test_exit_input_error(capsys, tmp_path, sym_file):
    bad = tmp_path / "bad.json"
    bad.write_text('{"weights": [[0.5, 0, 0], [0, 0, 0], [0, 0, 0.5]]}')
    code, _, err = run(["validate", str(bad)], capsys)
    assert code == 3 and "ThreeConsecutiveZeros" in err
    code, _, err = run(["harmonic", sym_file, "--t", "0.5", "--p", "0.5"], capsys)
    assert code == 3 and "RegimeError" in err
    code, _, err = run(["closed-form", _model_file(tmp_path, "d", walk("drift")), "--t", "1.1",
                        "--p", "0.5"], capsys)
    assert code == 3 and "NotSimpleWalk" in err


def test_exit_check_failure_and_override(capsys, sym_file, monkeypatch):
    argv = ["verify", sym_file, "--t", "1.25", "--p", "0.5", "--grid", "6"]
    assert run(argv, capsys)[0] == 0
    code, out, _ = run(argv, capsys, {"QH_TOL_OVERRIDE": '{"harmonicity": 1e-30}'}, monkeypatch)
    assert code == 2
    d = json.loads(out)
    assert d["passed"] is False
    code, _, err = run(argv, capsys, {"QH_TOL_OVERRIDE": '{"nonsense": 1}'}, monkeypatch)
    assert code == 64 and "nonsense" in err


def test_gluing_check_failure(capsys, sym_file, monkeypatch):
    code, out, _ = run(["gluing", sym_file, "--t", "1.25", "--check"], capsys,
                       {"QH_TOL_OVERRIDE": '{"gluing": 1e-30}'}, monkeypatch)
    assert code == 2 and json.loads(out)["passed"] is False


def test_module_entry_point(sym_file):
    r = subprocess.run([sys.executable, "-m", "qharmonic", "t0", sym_file],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0 and json.loads(r.stdout)["t0"] == 1.0


def test_help(capsys):
    assert cli.main(["--help"]) == 0
    assert "harmonic" in capsys.readouterr().out
