import json

import numpy as np
import pytest

from carleman_sysid.cli import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, EXIT_PARAMS, EXIT_RUNTIME, main
from carleman_sysid.config import ConfigError, default_config, parse_config
from carleman_sysid.polyflow import van_der_pol

SMALL = """\
# Van der Pol, reduced for tests
[field]
f: 1 0 -> 0 -1
f: 0 1 -> 1 -1
f: 2 1 -> 0 1

[sampler]
count = 30
seed = 0

[grid]
h = 0.01
T_record = 1

[lifting]
orders = 1-3
Nbar = 3

[bounds]
C = 33.7
R = 4.1
C0 = 0.001
M = 1.5
tau_star = 0.2
mu = 0.9946
Delta = {delta}

[windows]
T_id = 1
horizon = 2
"""


@pytest.fixture
def cfg_path(tmp_path):
    def make(delta="inf", **replace):
        text = SMALL.format(delta=delta)
        for old, new in replace.items():
            text = text.replace(old, new)
        path = tmp_path / "exp.cfg"
        path.write_text(text)
        return str(path)
    return make


def test_parse_van_der_pol_field():
    cfg = parse_config(SMALL.format(delta="inf"))
    assert cfg.field == van_der_pol()
    assert cfg.sampler.count == 30
    assert cfg.lifting.orders == (1, 2, 3)
    assert cfg.bounds["Delta"] == float("inf")


def test_text_round_trip():
    cfg = default_config()
    again = parse_config(cfg.to_text())
    assert again == cfg
    assert again.digest() == cfg.digest()


@pytest.mark.parametrize("text,line", [
    ("[field]\nf: 1 0 0 -1\n", 2),
    ("[sampler]\ncount = many\n", 2),
    ("\n\n[nope]\n", 3),
    ("count = 3\n", 1),
    ("[field]\nf: 1 0 -> 1 0\nf: 1 -> 1\n", 3),
    ("[grid]\nwidth = 3\n", 2),
])
def test_parse_errors_name_the_line(text, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_count_zero_rejected():
    with pytest.raises(ConfigError):
        parse_config("[sampler]\ncount = 0\n")


def test_missing_delta_reported():
    cfg = parse_config(SMALL.format(delta="inf").replace("Delta = inf\n", ""))
    assert cfg.missing_bounds() == ["Delta"]
    with pytest.raises(ConfigError):
        cfg.bound_args()


def test_validate_prints_derived_constants(cfg_path, capsys):
    assert main(["validate", "--config", cfg_path()]) == EXIT_OK
    out = capsys.readouterr().out
    assert "D = 2.36" in out
    assert "tau* limit = 5.52" in out
    assert "mu limit = 0.99469" in out


def test_validate_missing_delta(cfg_path, capsys):
    assert main(["validate", "--config", cfg_path(**{"Delta = inf\n": ""})]) == EXIT_CONFIG
    assert "Delta" in capsys.readouterr().err


def test_validate_malformed_term(cfg_path, capsys):
    assert main(["validate", "--config", cfg_path(**{"f: 2 1 -> 0 1": "f: 2 1 0 1"})]) == EXIT_CONFIG
    assert "line 5" in capsys.readouterr().err


def test_generate_writes_dataset(cfg_path, tmp_path):
    out = tmp_path / "run"
    assert main(["generate", "--config", cfg_path(), "--out", str(out), "--quiet"]) == EXIT_OK
    manifest = json.loads((out / "dataset" / "manifest.json").read_text())
    assert manifest["seed"] == 0
    assert len(list((out / "dataset").glob("traj_*.csv"))) == 30
    assert (out / "dataset" / "traj_0000.csv").read_text().startswith("t,x1,x2\n")


def test_generate_count_zero(cfg_path, tmp_path):
    assert main(["generate", "--config", cfg_path(**{"count = 30": "count = 0"}),
                 "--out", str(tmp_path)]) == EXIT_CONFIG


def test_generate_divergence_is_named(cfg_path, tmp_path, capsys):
    path = cfg_path(**{"seed = 0": "seed = 0\nlow = 3\nhigh = 3", "T_record = 1": "T_record = 10"})
    assert main(["generate", "--config", path, "--out", str(tmp_path)]) == EXIT_RUNTIME
    assert "non-finite" in capsys.readouterr().err


def test_identify_without_dataset(cfg_path, tmp_path, capsys):
    assert main(["identify", "--config", cfg_path(), "--out", str(tmp_path / "empty")]) == EXIT_RUNTIME
    assert "generate" in capsys.readouterr().err


def test_identify_writes_error_table(cfg_path, tmp_path):
    out = str(tmp_path / "run")
    main(["generate", "--config", cfg_path(), "--out", out, "--quiet"])
    assert main(["identify", "--config", cfg_path(), "--out", out, "--quiet"]) == EXIT_OK
    rows = np.genfromtxt(tmp_path / "run" / "identify" / "errors.csv", delimiter=",", names=True)
    np.testing.assert_array_equal(rows["N"], [1, 2, 3])
    manifest = json.loads((tmp_path / "run" / "manifest.json").read_text())
    assert "identify/errors.csv" in manifest["files"]
    assert all(v["config_hash"] == manifest["config_hash"] for v in manifest["files"].values())


def test_certify_exit_codes(cfg_path, tmp_path, capsys):
    out = str(tmp_path / "run")
    main(["generate", "--config", cfg_path(), "--out", out, "--quiet"])
    assert main(["certify", "--config", cfg_path(), "--out", out, "--quiet"]) == EXIT_OK
    assert "certified: N* =" in capsys.readouterr().out

    assert main(["certify", "--config", cfg_path(delta="1e-6"), "--out", out, "--quiet"]) == EXIT_FAILED
    assert "Failed" in capsys.readouterr().out
    lines = (tmp_path / "run" / "certify" / "curve.csv").read_text().splitlines()
    assert lines[0].startswith("N,") and len(lines) == 4

    bad_mu = cfg_path(**{"mu = 0.9946": "mu = 0.9947"})
    assert main(["certify", "--config", bad_mu, "--out", out]) == EXIT_PARAMS
    assert "mu_limit" in capsys.readouterr().err


def test_seed_override_changes_data(cfg_path, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["generate", "--config", cfg_path(), "--out", str(a), "--quiet"])
    main(["generate", "--config", cfg_path(), "--out", str(b), "--seed", "5", "--quiet"])
    assert (a / "dataset" / "traj_0000.csv").read_text() != (b / "dataset" / "traj_0000.csv").read_text()


def test_version(capsys):
    with pytest.raises(SystemExit):
        main(["--version"])
    assert "carleman-sysid" in capsys.readouterr().out
