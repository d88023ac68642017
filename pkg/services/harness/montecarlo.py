"""
Monte Carlo sweep over reference frequencies and initial conditions.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Optional

import numpy as np

from services.lgp import LgpModel
from shared.config import get_config
from shared.utils.logging import get_logger

from .benchmark import simulate
from .metrics import metrics
from .models import MetricsRow, MonteCarloCell
from .setup import Setup, sine_reference

logger = get_logger(__name__)


def initial_conditions(
    seed: int, omega_index: int, realizations: int, dof: int, half_width: float
) -> np.ndarray:
    """
    Rows (q₀, q̇₀) drawn uniformly from [−w, w]^{2N}.

    Every (ω, realization) pair has its own stream, so all controllers see
    the same initial conditions and the draws do not depend on scheduling.
    """
    rows = np.empty((realizations, 2 * dof))
    for r in range(realizations):
        rng = np.random.default_rng(np.random.SeedSequence([seed, omega_index, r]))
        rows[r] = rng.uniform(-half_width, half_width, size=2 * dof)
    return rows


def _score(
    setup: Setup,
    lgp: Optional[LgpModel],
    name: str,
    omega: float,
    state: np.ndarray,
) -> MetricsRow:
    mc = setup.config.monte_carlo
    reference = sine_reference(setup.config, omega)
    period = 2.0 * np.pi / omega
    dof = setup.dof
    traj = simulate(
        setup,
        setup.spec(name),
        lgp,
        x0=setup.plant_state(state[:dof], state[dof:]),
        reference=reference,
        t_end=mc.horizon_periods * period,
        dt=mc.dt,
    )
    row = metrics(traj, 2.0 * period, label=name)
    if not row.diverged and row.e_max > mc.error_threshold:
        row = replace(row, diverged=True)
    return row


def monte_carlo(
    setup: Setup, lgp: Optional[LgpModel], names: Optional[list[str]] = None
) -> list[MonteCarloCell]:
    """
    Steady-state statistics per (ω, controller).

    Runs with a state blow-up, or with a steady-state error above the
    configured threshold, count as diverged. Cells are ordered by ω, then
    by roster position.
    """
    cfg = setup.config
    mc = cfg.monte_carlo
    names = names or mc.controllers or [entry.name for entry in cfg.controllers]
    for name in names:
        cfg.controller(name)

    jobs = []
    for w_index, omega in enumerate(mc.omegas):
        states = initial_conditions(
            cfg.seed, w_index, mc.realizations, setup.dof, mc.ic_half_width
        )
        for c_index, name in enumerate(names):
            for r, state in enumerate(states):
                jobs.append(((w_index, c_index, r), name, omega, state))

    def job(item: tuple) -> tuple[tuple[int, int, int], MetricsRow]:
        key, name, omega, state = item
        return key, _score(setup, lgp, name, omega, state)

    workers = min(get_config().max_workers, max(len(jobs), 1))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(job, jobs))
    else:
        results = dict(job(item) for item in jobs)

    cells = []
    for w_index, omega in enumerate(mc.omegas):
        for c_index, name in enumerate(names):
            rows = [results[(w_index, c_index, r)] for r in range(mc.realizations)]
            cell = MonteCarloCell.from_runs(float(omega), name, rows)
            cells.append(cell)
            logger.info(
                "harness.monte_carlo_cell",
                omega=omega,
                controller=name,
                diverged=cell.diverged,
                err_l2_mean=cell.err_l2_mean,
            )
    return cells


def divergence_onset(cells: list[MonteCarloCell], controller: str) -> Optional[float]:
    """Smallest ω with at least one diverged realization."""
    diverged = [
        cell.omega for cell in cells if cell.controller == controller and cell.diverged
    ]
    return min(diverged) if diverged else None
