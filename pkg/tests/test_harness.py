import csv
import filecmp

import numpy as np
import pytest

from confscat.energy import ENERGY_AUDIT_COLUMNS
from confscat.evolution import DIAGNOSTIC_COLUMNS
from confscat.harness import (
    SUITES,
    ConfigError,
    ExperimentConfig,
    default_config_text,
    load_config,
    main,
    mode_error,
    run_experiment,
)
from confscat.scattering import REPORT_COLUMNS


def _ini(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def _summary(out):
    return (out / "summary.txt").read_text().splitlines()


# -- configuration ---------------------------------------------------------------------

def test_defaults_load():
    cfg = load_config()
    assert (cfg.n, cfg.cfl, cfg.schedule_length, cfg.model) == (400, 0.25, 7, "cylinder")
    assert cfg.schedule().values[-1] == 1 - 2**-7
    assert all(v > 0 for v in cfg.tolerances.values())
    assert "[tolerances]" in default_config_text()


def test_overrides_layer_on_defaults(tmp_path):
    cfg = load_config(_ini(tmp_path, "[run]\nn = 128\n"), out=tmp_path / "o", seed=9)
    assert cfg.n == 128 and cfg.cfl == 0.25 and cfg.seed == 9
    assert cfg.out == str(tmp_path / "o")


@pytest.mark.parametrize(
    "text",
    [
        "[nonsense]\nx = 1\n",
        "[run]\nresolution = 100\n",
        "[run]\nn = many\n",
        "[run]\nn = 32\n",
        "[run]\ncfl = 1.5\n",
        "[run]\nmodel = kerr\n",
        "[run]\namplitude = -1\n",
        "[tolerances]\ndrift = 0\n",
        "[schedule]\nlength = 0\n",
        "not an ini file",
    ],
)
def test_config_errors(tmp_path, text):
    with pytest.raises(ConfigError):
        load_config(_ini(tmp_path, text))


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.ini")


def test_missing_tolerance_is_config_error():
    with pytest.raises(ConfigError):
        ExperimentConfig(tolerances={}).tol("drift")


# -- run_experiment --------------------------------------------------------------------

def test_unknown_suite_exit_2(tmp_path):
    assert run_experiment(load_config(), "bogus", tmp_path)[0] == 2
    assert main(["bogus", "--config", str(_ini(tmp_path, "[run]\nn = 64\n"))]) == 2


def test_cli_config_error_exit_2(tmp_path, capsys):
    assert main(["cauchy", "--config", str(_ini(tmp_path, "[run]\nn = 8\n"))]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_cli_rejects_bad_seed(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["cauchy", "--config", str(_ini(tmp_path, "")), "--seed", "-3"])
    assert exc.value.code == 2


def test_cauchy_zero_amplitude(tmp_path):
    out = tmp_path / "out"
    code = main(["cauchy", "--config", str(_ini(tmp_path, "[run]\nn = 128\namplitude = 0\n")), "--out", str(out)])
    assert code == 0
    assert _summary(out)[-1] == "RESULT PASS"
    rows = list(csv.DictReader(open(out / "cauchy_diagnostics.csv")))
    assert all(float(r[k]) == 0.0 for r in rows for k in ("E_lin", "E_full", "L2", "H1", "max_abs"))
    assert (out / "cauchy_final.field").is_file()


def test_cauchy_diagnostics_header(tmp_path):
    cfg = load_config(_ini(tmp_path, "[run]\nn = 64\n"))
    code, audits = run_experiment(cfg, "cauchy", tmp_path / "o")
    header = (tmp_path / "o" / "cauchy_diagnostics.csv").read_text().splitlines()[0].split(",")
    assert set(header) <= set(DIAGNOSTIC_COLUMNS) | {"stamp"}
    assert len(audits) == 5


def test_picard_negative_control(tmp_path):
    out = tmp_path / "out"
    cfg = _ini(tmp_path, "[picard]\namplitude = 5.0\neps = 0.5\nn_u = 200\nn_r = 40\n")
    assert main(["picard", "--config", str(cfg), "--out", str(out)]) == 1
    lines = _summary(out)
    assert any(line.startswith("FAIL no_divergence") and "diverged" in line for line in lines)
    assert (out / "picard.csv").is_file()


def test_outputs_deterministic(tmp_path):
    cfg = _ini(tmp_path, "[run]\nn = 128\namplitude = 0.2\n")
    for d in ("a", "b"):
        assert main(["energy-audit", "--config", str(cfg), "--out", str(tmp_path / d)]) == 0
    cmp = filecmp.dircmp(tmp_path / "a", tmp_path / "b")
    assert not cmp.diff_files and not cmp.left_only and not cmp.right_only
    rows = list(csv.reader(open(tmp_path / "a" / "energy_audit.csv")))
    assert tuple(rows[0]) == ENERGY_AUDIT_COLUMNS


def test_energy_audit_zero_amplitude(tmp_path):
    cfg = load_config(_ini(tmp_path, "[run]\nn = 64\namplitude = 0\n"))
    assert run_experiment(cfg, "energy-audit", tmp_path / "o")[0] == 0


@pytest.mark.parametrize("suite", ["glue", "lemma-audit", "convergence"])
def test_light_suites_pass(tmp_path, suite):
    cfg = load_config()
    code, audits = run_experiment(cfg, suite, tmp_path / "o")
    assert code == 0, [a.line() for a in audits]
    assert _summary(tmp_path / "o")[-1] == "RESULT PASS"


def test_glue_mismatch_is_audit_failure(tmp_path):
    # the two solvers differ by about 1.04e-4 at the interface for N = 200
    cfg = load_config(_ini(tmp_path, "[run]\nn = 200\n"))
    code, audits = run_experiment(cfg, "glue", tmp_path / "o")
    assert code == 1 and audits[0].name == "interface_match"


def test_scatter_reference(tmp_path):
    out = tmp_path / "out"
    code, audits = run_experiment(load_config(), "scatter", out)
    assert code == 0, [a.line() for a in audits]
    rows = list(csv.DictReader(open(out / "scattering_report.csv")))
    assert tuple(rows[0].keys()) == REPORT_COLUMNS
    rt = [float(r["rt_error"]) for r in rows if r["rt_error"]]
    assert rt and max(rt) <= 0.02


def test_every_suite_is_registered():
    assert set(SUITES) == {"cauchy", "hoermander", "picard", "glue", "scatter", "energy-audit",
                           "lemma-audit", "convergence"}


def test_mode_error_helper():
    e = [mode_error(0, n) for n in (100, 200)]
    assert e[0] / e[1] == pytest.approx(4.0, rel=0.1)
    assert mode_error(0, 100, sup=True) >= e[0]
    assert np.isfinite(e).all()
