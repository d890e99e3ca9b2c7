import json
import re

import pytest

from staircase import cli
from staircase.sc import kernels


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _strip_wall_time(text):
    return re.sub(r'"wall_time_s": [^,\n]+', '"wall_time_s": 0', text)


def test_forward_rectangle(capsys):
    code, out, _ = run(capsys, "forward", "--xi1", "-0.5", "--xi2", "0", "--xi3", "0.5", "--s", "0", "--t", "0")
    assert code == 0
    obj = json.loads(out)
    assert obj["b"] == 0 and obj["c"] == 0
    assert obj["manifest"]["settings"]["precision"] == "standard"
    # 17 significant digits
    assert re.search(r'"a": 0\.\d{17}', out)


def test_solve_infeasible(capsys):
    code, _, err = run(capsys, "solve", "--a", "1", "--b", "0", "--c", "0", "--p", "0.9", "--q", "0.2")
    assert code == 1 and "InfeasibleTarget" in err


def test_solve_round_trip(capsys):
    code, out, _ = run(capsys, "solve", "--a", "0.7", "--b", "0.01", "--c", "0.02", "--p", "0.3", "--q", "0.4")
    assert code == 0
    assert json.loads(out)["residual"] < 1e-8


def test_usage_errors(capsys):
    code, _, err = run(capsys, "forward", "--xi1", "x", "--xi2", "0", "--xi3", "0.5")
    assert code == 2 and "--xi1" in err
    code, _, _ = run(capsys, "nosuchcommand")
    assert code == 2


def test_extended_unavailable(capsys, monkeypatch):
    monkeypatch.setattr(kernels, "has_extended", lambda: False)
    code, _, err = run(capsys, "forward", "--xi1", "-0.5", "--xi2", "0", "--xi3", "0.5", "--precision", "extended")
    assert code == 3 and "extended" in err


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("rel = 1e-9  # looser\nabs = 1e-12\n")
    code, out, _ = run(capsys, "--config", str(cfg), "coeffs", "--xi1", "-0.5", "--xi2", "0", "--xi3", "0.5")
    assert code == 0
    obj = json.loads(out)
    assert obj["manifest"]["settings"]["rel"] == 1e-9 and obj["P_const"] > 0
    cfg.write_text("bogus = 1\n")
    code, _, err = run(capsys, "--config", str(cfg), "coeffs", "--xi1", "-0.5", "--xi2", "0", "--xi3", "0.5")
    assert code == 2 and "bogus" in err


def test_fit_writes_csv(capsys, tmp_path):
    out = tmp_path / "b.json"
    code, _, _ = run(capsys, "fit", "--prop", "B", "--kmin", "10", "--kmax", "20", "--out", str(out))
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["relative_errors"]["K_B"] < 1e-3
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert lines[0] == "quantity,axis,s_or_t,value,model" and len(lines) == 12


def test_probe_writes_csv(capsys, tmp_path):
    out = tmp_path / "scan.json"
    code, _, _ = run(capsys, "probe", "--kmin", "8", "--kmax", "10", "--no-delta", "--out", str(out))
    assert code == 0
    assert json.loads(out.read_text())["second_differences"]
    assert (tmp_path / "scan.csv").read_text().startswith("h,F,D,D_over_h2,model")


def test_surface_pipeline(capsys, tmp_path):
    pb = tmp_path / "pillow_b.json"
    assert run(capsys, "surface", "build", "pillow-b", "--widths", "1,1/2,3/4", "--heights", "1,1,1",
               "--out", str(pb))[0] == 0
    code, out, _ = run(capsys, "surface", "stratum", "--input", str(pb))
    assert code == 0 and json.loads(out)["stratum"] == [1, 1, -1, -1, -1, -1, -1, -1]
    code, out, _ = run(capsys, "surface", "trace", "--input", str(pb))
    assert code == 0 and len(json.loads(out)["cylinders"]) >= 2
    acted = tmp_path / "acted.json"
    assert run(capsys, "surface", "act", "--input", str(pb), "--cyl", "0", "--re", "1/3", "--im", "2",
               "--out", str(acted))[0] == 0
    assert run(capsys, "surface", "rot", "--input", str(pb))[0] == 0
    trace = tmp_path / "trace.json"
    code, _, _ = run(capsys, "surgery", "run", "fig4", "--input", str(pb), "--out", str(trace))
    assert code == 0
    obj = json.loads(trace.read_text())
    assert obj["is_staircase"] is True and obj["script"] == "fig4"


def test_surgery_wrong_type(capsys, tmp_path):
    st = tmp_path / "stair.json"
    run(capsys, "surface", "build", "staircase", "--a", "1", "--b", "1", "--c", "1", "--p", "1/4", "--q", "1/4",
        "--out", str(st))
    code, _, err = run(capsys, "surgery", "run", "fig4", "--input", str(st))
    assert code == 1 and "NotTypeB" in err


def test_determinism(capsys, tmp_path):
    args = ("forward", "--xi1", "-0.3", "--xi2", "0.2", "--xi3", "0.6", "--s", "1e-4", "--t", "1e-3")
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert _strip_wall_time(first) == _strip_wall_time(second)


@pytest.mark.skipif(not kernels.has_extended(), reason="compiled kernels not built")
def test_forward_extended(capsys):
    code, out, _ = run(capsys, "forward", "--xi1", "-0.5", "--xi2", "0", "--xi3", "0.5", "--s", "1e-3", "--t",
                       "1e-3", "--precision", "extended")
    assert code == 0 and json.loads(out)["manifest"]["settings"]["precision"] == "extended"
