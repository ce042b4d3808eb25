import json

import numpy as np
import pytest

from zrl.cli import main
from zrl.errors import ConfigurationError, ZrlError
from zrl.report import RunReport, check, emit_plot_data, parse_plot_data
from zrl.runner import RunConfig, load_config, run

SMALL_RESONANCE = {"T": 200.0, "beta": 0.5, "c": -2.6}


def write_cfg(tmp_path, obj):
    p = tmp_path / "cfg.json"
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def test_constants_command(tmp_path, capsys):
    assert main(["constants", "--out", str(tmp_path)]) == 0
    rep = RunReport.from_json((tmp_path / "constants.json").read_text())
    assert rep.data["C0"] == -0.3953997
    assert rep.data["admissible_c"]["0.5"] == pytest.approx(-2.0197814, abs=1e-6)
    assert "determinism hash" in capsys.readouterr().out


def test_verify_lemmas_defaults_pass():
    assert main(["verify-lemmas"]) == 0


def test_unknown_command_is_usage_error(capsys):
    assert main(["frobnicate"]) == 2


@pytest.mark.parametrize("cfg", [
    '{"parameters": {"T": 2000, "bogus": 1}}',
    '{"parameters": {"T": 2000, "beta": 0.5, "c": -1.0}}',
    '{"parameters": {"T": 10}}',
    'not json',
    '[1, 2]',
    '{"command": "sieve"}',
])
def test_config_errors(tmp_path, cfg, capsys):
    assert main(["resonance-1line", "--config", write_cfg(tmp_path, cfg)]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["constants", "--config", str(tmp_path / "absent.json")]) == 2


def test_bad_thread_cap(monkeypatch):
    monkeypatch.setenv("ZRL_THREADS", "zero")
    assert main(["constants"]) == 2


def test_thread_cap_applied(monkeypatch):
    monkeypatch.setenv("ZRL_THREADS", "1")
    assert main(["constants"]) == 0
    import os
    assert os.environ["OMP_NUM_THREADS"] == "1"


def test_load_config_echoes_alias():
    cfg, p = load_config("gcd-construct", '{"parameters": {"lambda": 0.4}}')
    assert p.lam == 0.4
    with pytest.raises(ConfigurationError):
        load_config("gcd-construct", '{"parameters": {"alpha": 0.5}}')


def test_resonance_csv_and_roundtrip(tmp_path):
    cfg = write_cfg(tmp_path, {"parameters": SMALL_RESONANCE})
    code = main(["resonance-1line", "--config", cfg, "--out", str(tmp_path)])
    assert code in (0, 1)
    text = (tmp_path / "resonance-1line-resonance.csv").read_bytes().decode("utf-8")
    assert "\r" not in text
    cols, arr = parse_plot_data(text)
    assert cols == ["t", "abs_R", "abs_zeta"]
    rep = RunReport.from_json((tmp_path / "resonance-1line.json").read_text())
    assert np.array_equal(arr, np.array(rep.series["resonance"]["rows"]))
    again = RunReport.from_json(rep.to_json())
    assert again.to_json() == rep.to_json()
    assert isinstance(rep.data["M2"], complex)


def test_determinism_hash_stable():
    a = run(RunConfig(command="resonance-1line", parameters=SMALL_RESONANCE))
    b = run(RunConfig(command="resonance-1line", parameters=SMALL_RESONANCE))
    assert a.determinism_hash() == b.determinism_hash()
    assert a.to_json(include_timing=False) == b.to_json(include_timing=False)


def test_emit_plot_data_errors():
    rep = RunReport("x", {})
    with pytest.raises(ZrlError):
        emit_plot_data(rep, "missing")
    rep.series["empty"] = {"columns": ["t"], "rows": []}
    with pytest.raises(ZrlError):
        emit_plot_data(rep, "empty")


def test_plot_data_bit_exact():
    rng = np.random.default_rng(3)
    rows = rng.standard_normal((50, 3)) * 10.0 ** rng.integers(-300, 300, (50, 3))
    rep = RunReport("x", {})
    rep.add_series("k", ["a", "b", "c"], rows)
    _, back = parse_plot_data(emit_plot_data(rep, "k"))
    assert np.array_equal(back, rows)


def test_check_relations():
    assert check("a", 2.0, 1.0, "≥").passed
    assert not check("a", 0.5, 1.0, "≥", 0.1).passed
    assert check("a", 0.95, 1.0, "≥", 0.1).passed
    assert check("a", 1.0, 1.0 + 1e-13, "≈", 1e-12).passed
    assert check("a", 5.0, None, "informational").passed
    with pytest.raises(ValueError):
        check("a", 1.0, 1.0, "<")


def test_nonfinite_and_complex_roundtrip():
    rep = RunReport("x", {"k": 1})
    rep.data.update({"z": 1 + 2j, "inf": float("inf"), "nested": {"v": [1.5, complex(0, -1)]}})
    rep.add(check("c", 1 + 1j, 1.0, "informational"))
    back = RunReport.from_json(rep.to_json())
    assert back.data == rep.data
    assert back.checks[0].measured == 1 + 1j
