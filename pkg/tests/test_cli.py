import json
import math

import numpy as np
import pytest

from qperceptron import cli
from qperceptron.config import DEFAULTS, ConfigFileError, Grid, load, merge


def write_cfg(tmp_path, text):
    p = tmp_path / "run.toml"
    p.write_text(text)
    return p


def run(tmp_path, cfg_text, command, *extra, out_name="out.csv"):
    cfg = write_cfg(tmp_path, cfg_text)
    out = tmp_path / out_name
    code = cli.run(["--config", str(cfg), "--out", str(out), *extra, command])
    return code, out


def data_rows(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config: ")
    json.loads(lines[0][len("# config: "):])
    return lines[1].split(","), [ln.split(",") for ln in lines[2:]]


def error_line(capsys):
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1
    return json.loads(err[0])


# --- config ------------------------------------------------------------------------------

def test_defaults_resolve_to_device_values():
    rc = load()
    assert rc.device.omega1 == pytest.approx(2 * math.pi * 6.189e9)
    assert rc.perceptron.weights == pytest.approx((2 * math.pi * -5.2e6,))
    assert rc.perceptron.pulse.duration_T == pytest.approx(1.67e-6)


def test_merge_rejects_unknown_keys():
    with pytest.raises(ConfigFileError):
        merge(DEFAULTS, {"nonsense": {}})
    with pytest.raises(ConfigFileError):
        merge(DEFAULTS, {"pulse": {"colour": 1}})


def test_grid_validation():
    with pytest.raises(ConfigFileError):
        Grid(0.0, 1.0, 1)
    with pytest.raises(ConfigFileError):
        Grid(1.0, 1.0, 5)


# --- commands -----------------------------------------------------------------------------

def test_zz_sweep_rows_and_determinism(tmp_path):
    code, out = run(tmp_path, "", "zz-sweep")
    assert code == 0
    header, rows = data_rows(out)
    assert header == ["omega_c_GHz", "J_numeric_MHz", "J_perturbative_MHz", "dispersive", "reason"]
    assert len(rows) == 100
    first = out.read_bytes()
    assert cli.run(["--config", str(tmp_path / "run.toml"), "--out", str(out), "zz-sweep"]) == 0
    assert out.read_bytes() == first


def test_zz_sweep_single_point_rejected(tmp_path, capsys):
    code, _ = run(tmp_path, "[zz_sweep]\npoints = 1\n", "zz-sweep")
    assert code == 1
    assert error_line(capsys)["error"] == "validation"


def test_unwritable_output(tmp_path, capsys):
    code = cli.run(["--out", str(tmp_path / "missing" / "x.csv"), "zz-sweep"])
    assert code == 2
    assert error_line(capsys)["exit_code"] == 2


def test_activation_groups(tmp_path):
    cfg = '[activation]\nT_us = [0.42, 0.83]\ninputs = ["0", "1"]\npoints = 11\n'
    code, out = run(tmp_path, cfg, "activation")
    assert code == 0
    header, rows = data_rows(out)
    assert header == ["bias_MHz", "population", "input_string", "T_us"]
    groups = {(r[3], r[2]) for r in rows}
    assert groups == {("0.42", "0"), ("0.42", "1"), ("0.83", "0"), ("0.83", "1")}
    assert len(rows) == 44


def test_activation_empty_durations(tmp_path, capsys):
    code, _ = run(tmp_path, "[activation]\nT_us = []\n", "activation")
    assert code == 1
    assert "empty" in error_line(capsys)["message"]


def test_activation_input_length_mismatch(tmp_path, capsys):
    code, _ = run(tmp_path, '[activation]\ninputs = ["01"]\npoints = 3\n', "activation")
    assert code == 1


def test_weight_sweep(tmp_path):
    code, out = run(tmp_path, "[weight_sweep]\npoints = 6\n", "weight-sweep")
    assert code == 0
    header, rows = data_rows(out)
    assert header == ["weight_MHz", "population_input0", "population_input1", "bias_MHz"]
    for b in ("0.8", "4"):
        p0 = [float(r[1]) for r in rows if r[3] == b]
        assert len(p0) == 6 and max(p0) - min(p0) <= 1e-9


def test_weight_sweep_zero_width(tmp_path, capsys):
    code, _ = run(tmp_path, "[weight_sweep]\nstart_mhz = 1.0\nstop_mhz = 1.0\n", "weight-sweep")
    assert code == 1


def test_negativity(tmp_path):
    cfg = "[negativity]\nstart_mhz = 0.0\nstop_mhz = 5.0\npoints = 3\n"
    code, out = run(tmp_path, cfg, "negativity")
    assert code == 0
    header, rows = data_rows(out)
    assert header == ["bias_MHz", "negativity_unitary", "negativity_T1"]
    assert all(float(r[2]) < float(r[1]) for r in rows)


def test_negativity_without_t1_and_missing_weights(tmp_path, capsys):
    code, out = run(tmp_path, "[negativity]\npoints = 2\nt1_us = 0.0\n", "negativity")
    assert code == 0 and data_rows(out)[0] == ["bias_MHz", "negativity_unitary"]
    code, _ = run(tmp_path, "[perceptron]\nweights_mhz = []\n", "negativity")
    assert code == 1
    assert "weights" in error_line(capsys)["message"]


def test_fit(tmp_path, capsys):
    code, out = run(tmp_path, "[fit]\npoints = 61\n", "fit")
    assert code == 0
    report = dict(line.split("=") for line in capsys.readouterr().out.split())
    assert float(report["residual_rms"]) < 0.03
    assert float(report["T_fit_us"]) > 0
    header, rows = data_rows(out)
    assert header == ["bias_MHz", "population", "fitted", "input_string", "T_us"]


def test_decompose_n1(tmp_path, capsys):
    code, out = run(tmp_path, "", "decompose", out_name="c.txt")
    assert code == 0
    text = capsys.readouterr().out.splitlines()
    assert text[:5] == ["N,Ng,t_us,F", "1,2,0.12,0.994", "2,18,1.08,0.9474",
                        "3,98,5.88,0.7449", "4,450,27,0.2587"]
    fid = float(text[5].split("verified_fidelity=")[1])
    assert fid > 1 - 1e-9
    gates = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
    assert sum(g.startswith("CNOT") for g in gates) == 2


def test_decompose_n3_counts_only(tmp_path, capsys):
    thetas = "\n".join(f'"{k:03b}" = 0.{k}' for k in range(8))
    code, out = run(tmp_path, f"[decompose.thetas]\n{thetas}\n", "decompose", out_name="c.txt")
    assert code == 0
    assert "synthesis not implemented for N >= 3" in capsys.readouterr().out
    assert "synthesis not implemented" in out.read_text()


def test_svg_output(tmp_path):
    code, out = run(tmp_path, "[zz_sweep]\npoints = 5\n", "zz-sweep", "--format", "svg",
                    out_name="z.svg")
    assert code == 0
    text = out.read_text()
    assert text.startswith("<svg") and text.count("<polyline") >= 2


def test_bad_toml_is_validation_error(tmp_path, capsys):
    code, _ = run(tmp_path, "[pulse\n", "zz-sweep")
    assert code == 1
