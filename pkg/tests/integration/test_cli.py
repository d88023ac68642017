"""
End-to-end runs of the command-line verbs on small two-link experiments.
"""

import pandas as pd
import pytest
import yaml

from services.cli.main import build_parser, dispatch

pytestmark = pytest.mark.integration

SMALL_EXPERIMENT = {
    "name": "small",
    "seed": 3,
    "training": {
        "position_grids": [
            {
                "half_width": 1.0,
                "points": 3,
                "velocity": [1.0, -1.0],
                "acceleration": [4.0, 4.0],
            }
        ],
        "velocity_grid": None,
        "validation_grid": {
            "half_width": 0.5,
            "points": 2,
            "velocity": [1.0, -1.0],
            "acceleration": [4.0, 4.0],
        },
    },
    "hyper": {"budget": 1},
    "reference": {"amplitude": [0.5, 0.5]},
    "integration": {"t_end": 0.4, "window_start": 0.2, "dt": 0.004},
}


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "small.yml"
    path.write_text(yaml.safe_dump(SMALL_EXPERIMENT), encoding="utf-8")
    return path


def _load(path):
    return yaml.safe_load(path.read_text(encoding="utf-8"))


def test_help_exits_cleanly():
    assert dispatch(["--help"]) == 0


def test_unknown_flag_is_usage_error(config_file):
    assert dispatch(["simulate", "--config", str(config_file), "--bogus"]) == 1


@pytest.mark.parametrize("flag", ["--paper-scale", "--full-scale"])
def test_scale_flag_spellings(flag):
    args = build_parser().parse_args(["simulate", "--config", "exp.yml", flag])
    assert args.full_scale is True
    plain = build_parser().parse_args(["simulate", "--config", "exp.yml"])
    assert plain.full_scale is False


def test_missing_config_file(tmp_path):
    assert dispatch(["fit", "--config", str(tmp_path / "absent.yml")]) == 1


def test_invalid_override_is_configuration_error(config_file, tmp_path):
    out = tmp_path / "out"
    code = dispatch(
        [
            "simulate",
            "--config",
            str(config_file),
            "--out",
            str(out),
            "integration.step=1",
        ]
    )
    assert code == 1


def test_simulate_writes_config_metadata_and_tables(config_file, tmp_path):
    out = tmp_path / "out"
    code = dispatch(
        [
            "simulate",
            "--config",
            str(config_file),
            "--out",
            str(out),
            "--controller",
            "pdp",
            "--seed",
            "11",
            "--quiet",
            "reference.omega=2.0",
        ]
    )
    assert code == 0
    config = _load(out / "config.yml")
    assert config["reference"]["omega"] == 2.0
    assert config["seed"] == 11
    metadata = _load(out / "metadata.yml")
    assert metadata["command"] == "simulate"
    assert metadata["error"] is None
    expected = {"config.yml", "trajectory_pdp.csv", "metrics.csv"}
    assert expected <= set(metadata["artifacts"])
    frame = pd.read_csv(out / "trajectory_pdp.csv")
    assert {"t", "q_1", "e_2", "tau_1", "V", "rho"} <= set(frame.columns)
    metrics = pd.read_csv(out / "metrics.csv")
    assert list(metrics["controller"]) == ["pdp"]


def test_require_feasible_reports_infeasibility(config_file, tmp_path):
    code = dispatch(
        [
            "simulate",
            "--config",
            str(config_file),
            "--out",
            str(tmp_path / "out"),
            "--controller",
            "pdp",
            "--require-feasible",
            "--quiet",
            "certificate.upsilon_floor=1000000",
        ]
    )
    assert code == 3


def test_fit_then_simulate_reuses_model(config_file, tmp_path):
    out = tmp_path / "out"
    base = ["--config", str(config_file), "--out", str(out), "--quiet"]
    assert dispatch(["fit", *base]) == 0
    assert (out / "model.yml").is_file()
    assert (out / "validation_fit.csv").is_file()
    summary = _load(out / "metadata.yml")["summary"]
    assert summary["rows"] == 9
    assert summary["validation_rmse"] >= 0.0

    assert dispatch(["simulate", *base, "--controller", "lgp-nat-pdp"]) == 0
    assert (out / "trajectory_lgp_nat_pdp.csv").is_file()


@pytest.mark.slow
def test_montecarlo_sweep(config_file, tmp_path):
    out = tmp_path / "out"
    code = dispatch(
        [
            "montecarlo",
            "--config",
            str(config_file),
            "--out",
            str(out),
            "--controller",
            "pdp",
            "--realizations",
            "2",
            "--quiet",
            "monte_carlo.omegas=[1.0, 1.5]",
        ]
    )
    assert code == 0
    cells = pd.read_csv(out / "montecarlo.csv")
    assert list(cells["omega"]) == [1.0, 1.5]
    assert list(cells["realizations"]) == [2, 2]
    onset = _load(out / "metadata.yml")["summary"]["divergence_onset"]
    assert set(onset) == {"pdp"}
