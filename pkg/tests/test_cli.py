import csv
import json

import pytest

from zdecode import cli
from zdecode import config as cfgmod


def _write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def _rows(path):
    with open(path) as f:
        return list(csv.DictReader(f))


def test_override_parsing():
    assert cfgmod.parse_override("wl.sweeps=200") == ("wl.sweeps", 200)
    assert cfgmod.parse_override("p=[0.1,0.2]") == ("p", [0.1, 0.2])
    assert cfgmod.parse_override("name=run1") == ("name", "run1")
    with pytest.raises(cfgmod.ConfigError):
        cfgmod.parse_override("novalue")


def test_resolve_defaults_and_errors():
    c = cfgmod.resolve("sweep", {"seed": 1, "distances": [4], "p": [0.1]})
    assert c["name"] == "sweep" and c["n_samples"] == 1000 and c["wl"]["alpha"] == 0.8
    with pytest.raises(cfgmod.ConfigError, match=r"config\.p\[1\]"):
        cfgmod.resolve("sweep", {"seed": 1, "distances": [4], "p": [0.1, 0.7]})
    with pytest.raises(cfgmod.ConfigError, match="bogus"):
        cfgmod.resolve("sweep", {"seed": 1, "distances": [4], "p": [0.1], "bogus": 1})
    with pytest.raises(cfgmod.ConfigError, match="seed"):
        cfgmod.resolve("decode", {"distances": [4], "p": [0.1]})
    with pytest.raises(cfgmod.ConfigError):
        cfgmod.resolve("nothing", {})


def test_manifest_round_trip(tmp_path):
    raw = {"seed": 3, "distances": [3], "p": [0.1], "n_samples": 30, "output_dir": str(tmp_path),
           "ci_methods": ["bootstrap", "jeffreys"], "n_resamples": 200}
    c = cfgmod.resolve("sweep", raw)
    m = cli.execute("sweep", c, 1)
    again = cfgmod.resolve("sweep", json.loads((tmp_path / "sweep.manifest.json").read_text()))
    assert again == c
    with pytest.raises(cfgmod.ConfigError):
        cfgmod.resolve("decode", m)


def test_sweep_csv_reproducible(tmp_path):
    cfg = _write(tmp_path, "c.json", {"seed": 5, "distances": [3], "p": [0.08, 0.12],
                                      "temperatures": ["nishimori", 0.1], "n_samples": 25,
                                      "n_resamples": 200, "ci_methods": ["bootstrap", "jeffreys"]})
    out = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        assert cli.main(["sweep", cfg, "--output-dir", str(d), "--set", "svg=true"]) == 0
        out.append((d / "sweep.csv").read_bytes())
        assert (d / "sweep.svg").read_text().startswith("<svg")
    assert out[0] == out[1]
    rows = _rows(tmp_path / "run0" / "sweep.csv")
    assert list(rows[0]) == list(cli.COLUMNS)
    assert {r["temperature_mode"] for r in rows} == {"nishimori", "0.1*nishimori"}
    # Jeffreys intervals only for the 0/1 estimators
    assert {r["estimator"] for r in rows if r["ci_method"] == "jeffreys"} == {"maxz_counting",
                                                                              "probz_counting"}
    for r in rows:
        assert float(r["ci_low"]) <= float(r["value"]) <= float(r["ci_high"])


def test_decode_and_ensemble_opt(tmp_path):
    cfg = _write(tmp_path, "d.json", {"seed": 2, "code": "rotated", "distances": [3], "p": [0.1],
                                      "n_samples": 40, "ensemble_sigma": [0.02], "n_ensemble": 5})
    assert cli.main(["decode", cfg, "--output-dir", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "decode.csv")
    assert {r["estimator"] for r in rows} == {"mwpm_counting", "ensemble_counting(sigma=0.02)"}
    cfg = _write(tmp_path, "e.json", {"seed": 2, "distances": [4], "p": [0.1], "n_samples": 30,
                                      "sigmas": [0.0, 0.02], "n_ensemble": 5})
    assert cli.main(["ensemble-opt", cfg, "--output-dir", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "ensemble-opt.manifest.json").read_text())["summary"]
    assert "optimum_sigma" in summary


def test_ci_analysis(tmp_path):
    cfg = _write(tmp_path, "c.json", {"seed": 1, "distance": 3, "p": 0.1, "n_samples": 200,
                                      "fractions": [0.1, 0.5, 1.0], "n_resamples": 200})
    assert cli.main(["ci-analysis", cfg, "--output-dir", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "ci-analysis.csv")
    assert list(rows[0]) == list(cli.CI_COLUMNS)
    assert {r["fraction"] for r in rows} == {"0.1", "0.5", "1.0"}


def test_wl_command(tmp_path):
    cfg = _write(tmp_path, "w.json", {"seed": 1, "distance": 3, "p": 0.1,
                                      "wl": {"sweeps": 500, "ln_f_stop": 1e-5}})
    assert cli.main(["wl", cfg, "--output-dir", str(tmp_path)]) == 0
    m = json.loads((tmp_path / "wl.manifest.json").read_text())
    for c in m["summary"]["classes"]:
        assert c["logz_nishimori_wl"] == pytest.approx(c["logz_nishimori_fkt"], abs=0.1)


def test_bad_config_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path, "bad.json", {"seed": 1, "distances": [3], "p": [0.6]})
    assert cli.main(["sweep", cfg]) == 2
    assert "config.p[0]" in capsys.readouterr().err


@pytest.mark.parametrize("check", ["fkt", "estimators", "matching"])
def test_oracle_checks(check, capsys):
    assert cli.main(["oracle", "--check", check, "--cases", "6"]) == 0
    assert capsys.readouterr().out.strip().endswith("PASS")
