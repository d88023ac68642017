import numpy as np
import pytest

from services.cli.main import resolve_controller
from services.dynamics import Trajectory
from services.harness import (
    MetricsRow,
    MonteCarloCell,
    RunWriter,
    build_setup,
    decomposition_frame,
    divergence_onset,
    initial_conditions,
    l2_norm,
    metrics,
    metrics_frame,
    monte_carlo,
    monte_carlo_frame,
    run_benchmark,
    simulate,
    trajectory_frame,
)
from shared.config import BaseConfig, build_experiment
from shared.exceptions import ConfigurationError, ValidationError

pytestmark = pytest.mark.unit


def _run(values: np.ndarray, dt: float = 0.1, **kwargs) -> Trajectory:
    count = values.shape[0]
    times = dt * np.arange(count)
    return Trajectory(
        times=times,
        q=values,
        dq=values,
        tau=values,
        annotations={"e": values, "de": np.zeros_like(values)},
        **kwargs,
    )


def _row(name: str, err: float, diverged: bool = False) -> MetricsRow:
    if diverged:
        return MetricsRow.diverged_row(name)
    return MetricsRow(name, 1.0, 1.0, 1.0, err, 0.1, 0.1, 0.1, 0.1, 10)


class TestMetrics:
    def test_l2_norm_of_constant(self):
        times = np.linspace(0.0, 4.0, 41)
        values = np.full((41, 2), [3.0, 4.0])
        assert l2_norm(times, values, 0.1) == pytest.approx(5.0 * 2.0)

    def test_l2_norm_of_single_sample(self):
        assert l2_norm(np.array([1.0]), np.array([[2.0]]), 0.25) == pytest.approx(1.0)

    def test_window_selects_steady_state(self):
        values = np.vstack([np.full((5, 1), 10.0), np.ones((6, 1))])
        row = metrics(_run(values), window_start=0.5, label="pdp")
        assert row.controller == "pdp"
        assert row.samples == 6
        assert row.e_max == pytest.approx(1.0)
        assert row.tau_mean == pytest.approx(1.0)
        assert row.err_l2 == pytest.approx(np.sqrt(0.5))

    def test_empty_window(self):
        with pytest.raises(ValidationError):
            metrics(_run(np.ones((3, 1))), window_start=5.0)

    def test_diverged_run_gives_nan_row(self):
        traj = _run(np.ones((2, 1)), diverged=True, label="nat")
        row = metrics(traj, window_start=0.0)
        assert row.diverged
        assert row.controller == "nat"
        assert np.isnan(row.err_l2)

    def test_missing_annotation(self):
        block = np.zeros((3, 1))
        bare = Trajectory(times=np.arange(3.0), q=block, dq=block, tau=block)
        with pytest.raises(ValidationError):
            metrics(bare, 0.0)

    def test_frame_columns(self):
        frame = metrics_frame([_row("a", 1.0), _row("b", 0.0, diverged=True)])
        assert list(frame["controller"]) == ["a", "b"]
        assert list(frame["diverged"]) == [False, True]


class TestMonteCarlo:
    def test_cell_statistics_skip_diverged_runs(self):
        rows = [_row("c", 1.0), _row("c", 3.0), _row("c", 0.0, diverged=True)]
        cell = MonteCarloCell.from_runs(2.0, "c", rows)
        assert (cell.realizations, cell.converged, cell.diverged) == (3, 2, 1)
        assert cell.err_l2_mean == pytest.approx(2.0)
        assert cell.err_l2_std == pytest.approx(1.0)

    def test_all_diverged_cell(self):
        cell = MonteCarloCell.from_runs(1.0, "c", [_row("c", 0.0, diverged=True)])
        assert np.isnan(cell.err_l2_mean)
        assert len(monte_carlo_frame([cell])) == 1

    def test_divergence_onset(self):
        cells = [
            MonteCarloCell.from_runs(
                omega, "c", [_row("c", 1.0, diverged=omega >= 2.0)]
            )
            for omega in (1.0, 2.0, 3.0)
        ]
        assert divergence_onset(cells, "c") == 2.0
        assert divergence_onset(cells, "other") is None

    def test_initial_conditions_are_per_realization(self):
        first = initial_conditions(7, 1, 3, 2, 0.5)
        longer = initial_conditions(7, 1, 5, 2, 0.5)
        assert first.shape == (3, 4)
        assert np.array_equal(longer[:3], first)
        assert np.all(np.abs(first) <= 0.5)
        assert not np.array_equal(initial_conditions(7, 2, 3, 2, 0.5), first)


class TestExport:
    def test_trajectory_frame_columns(self):
        frame = trajectory_frame(_run(np.ones((4, 2))))
        assert list(frame.columns[:5]) == ["t", "q_1", "q_2", "dq_1", "dq_2"]
        assert frame["V"].isna().all()
        assert frame["sigma_min"].isna().all()

    def test_empty_trajectory_is_header_only(self):
        empty = np.empty((0, 2))
        traj = Trajectory(times=np.empty(0), q=empty, dq=empty, tau=empty)
        frame = trajectory_frame(traj, dof=2)
        assert frame.empty
        assert "tau_2" in frame.columns


class TestControllerNames:
    @pytest.fixture
    def cfg(self):
        return build_experiment({})

    @pytest.mark.parametrize(
        "given,expected",
        [
            ("pdp", "pdp"),
            ("lgp-nat-pdp", "lgp_nat_pdp"),
            ("var-nat-pdp", "lgp_var_nat_pdp"),
        ],
    )
    def test_resolution(self, cfg, given, expected):
        assert resolve_controller(cfg, given) == expected

    def test_unknown_name(self, cfg):
        with pytest.raises(ConfigurationError):
            resolve_controller(cfg, "pid")


class TestBenchmark:
    @pytest.fixture
    def setup(self):
        cfg = build_experiment(
            {}, ["integration.t_end=1.0", "integration.window_start=0.5"]
        )
        return build_setup(cfg)

    def test_parametric_pdp_run(self, setup):
        result = run_benchmark(setup, None, ["pdp"])
        row = result.run("pdp").metrics
        assert not row.diverged
        assert row.samples > 0
        assert np.isfinite(row.err_l2)

    def test_lgp_controller_needs_model(self, setup):
        with pytest.raises(ValidationError):
            simulate(setup, setup.spec("lgp_pdp"), None)

    def test_decomposition_follows_certified_samples(self):
        cfg = build_experiment(
            {},
            [
                "integration.t_end=0.5",
                "integration.window_start=0.25",
                "certificate.bound_points=3",
                "certificate.refine_rounds=1",
                "certificate.stride=25",
            ],
        )
        setup = build_setup(cfg)
        result = run_benchmark(setup, None, ["nat_pdp"], with_certificate=True)
        frame = decomposition_frame(setup, result, None)
        assert list(frame.columns[:2]) == ["controller", "t"]
        assert "weyl_bound" in frame.columns
        run = result.run("nat_pdp")
        if run.certificate is None:
            assert frame.empty
        else:
            assert len(frame) == len(range(0, len(run.trajectory), 25))
            assert set(frame["controller"]) == {"nat_pdp"}


class TestDeterminism:
    OVERRIDES = [
        "seed=11",
        "monte_carlo.omegas=[1.0, 2.0]",
        "monte_carlo.realizations=3",
        "monte_carlo.horizon_periods=2.5",
        "monte_carlo.dt=0.01",
    ]

    def _sweep_bytes(self, directory) -> bytes:
        cfg = build_experiment({}, self.OVERRIDES)
        cells = monte_carlo(build_setup(cfg), None, ["pdp", "nat_pdp"])
        path = RunWriter(directory, "montecarlo", cfg).monte_carlo(cells)
        return path.read_bytes()

    def test_same_seed_gives_identical_table(self, tmp_path, monkeypatch):
        serial = self._sweep_bytes(tmp_path / "serial")
        monkeypatch.setattr(
            "services.harness.montecarlo.get_config",
            lambda: BaseConfig(max_workers=4),
        )
        first = self._sweep_bytes(tmp_path / "first")
        second = self._sweep_bytes(tmp_path / "second")
        assert first == second
        assert first == serial
        assert len(first.splitlines()) == 1 + 2 * 2
