"""
Desk-scale benchmark properties of the shipped experiment documents.

Absolute numbers depend on the fitted model, so these check orderings,
ratios and divergence patterns instead of exact values.
"""

from pathlib import Path

import numpy as np
import pytest

from services.harness import (
    anchor_report,
    build_setup,
    divergence_onset,
    fit_model,
    monte_carlo,
    run_benchmark,
    run_protocol,
)
from shared.config import load_experiment

pytestmark = [pytest.mark.integration, pytest.mark.slow]

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


@pytest.fixture(scope="module")
def twolink():
    setup = build_setup(load_experiment(CONFIGS / "twolink.yml"))
    return setup, fit_model(setup).model


@pytest.fixture(scope="module")
def softrobot():
    setup = build_setup(load_experiment(CONFIGS / "softrobot.yml"))
    return setup, fit_model(setup).model


class TestTwoLinkBenchmark:
    def test_error_ordering_and_ratio(self, twolink):
        setup, lgp = twolink
        result = run_benchmark(setup, lgp, ["pdp", "lgp_nat_pdp", "lgp_var_nat_pdp"])
        pdp = result.run("pdp").metrics
        nat = result.run("lgp_nat_pdp").metrics
        var = result.run("lgp_var_nat_pdp").metrics
        assert not (pdp.diverged or nat.diverged or var.diverged)
        for best, middle, worst in zip(var.error_rows, nat.error_rows, pdp.error_rows):
            assert best < middle < worst
        assert pdp.err_l2 >= 5.0 * var.err_l2

    def test_random_starts_stay_inside_envelope(self, twolink):
        setup, lgp = twolink
        result = run_protocol(setup, lgp, "lgp_nat_pdp", runs=10)
        assert len(result.traces) == 10
        assert result.violations == 0
        assert result.params.eps > 0.0
        assert result.params.alpha_lower > 0.0

    def test_anchor_tuple_is_reported(self, twolink):
        setup, lgp = twolink
        result = run_protocol(setup, lgp, "lgp_nat_pdp", runs=1)
        report = anchor_report(result)
        assert (report["eps"], report["theta"], report["alpha_lower"]) == (
            1.1012,
            1.4211,
            0.1056,
        )
        assert isinstance(report["feasible"], bool)
        assert report["feasible"] or report["violations"]
        assert report["optimized"]["eps"] == result.params.eps


class TestSoftRobotBenchmark:
    def test_natural_dynamics_halve_tracking_error(self, softrobot):
        setup, lgp = softrobot
        assert setup.config.plant.soft_robot.n_elems == 20
        result = run_benchmark(setup, lgp, ["lgp_pdp", "lgp_nat_pdp"])
        plain = result.run("lgp_pdp").metrics
        nat = result.run("lgp_nat_pdp").metrics
        assert not nat.diverged
        assert plain.diverged or plain.err_l2 >= 2.0 * nat.err_l2


class TestFrequencySweep:
    def test_standard_pdp_diverges_at_high_frequency_only(self):
        cfg = load_experiment(CONFIGS / "montecarlo.yml")
        assert cfg.monte_carlo.realizations == 10
        setup = build_setup(cfg)
        lgp = fit_model(setup).model
        cells = monte_carlo(setup, lgp)

        for name in ("pdp", "lgp_pdp"):
            onset = divergence_onset(cells, name)
            assert onset is not None
            assert 3.0 <= onset <= 4.5
        for name in ("nat_pdp", "lgp_nat_pdp", "lgp_var_nat_pdp"):
            assert divergence_onset(cells, name) is None
        omegas = sorted({cell.omega for cell in cells})
        assert np.allclose(omegas, np.arange(1.0, 5.01, 0.5))
