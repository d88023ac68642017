"""
Search for certificate parameters trading radius against rate.
"""

from collections import Counter
from typing import Optional

import numpy as np

from shared.config import CertificateConfig, SearchGrid
from shared.exceptions import CertificateVoidError, InfeasibilityError
from shared.utils.logging import get_logger

from .conditions import feasibility, make_params, upsilon_floor, worst_case_radius
from .models import CertificateParams, WorstCaseBounds

logger = get_logger(__name__)


def _axis(grid: SearchGrid) -> np.ndarray:
    return np.geomspace(grid.low, grid.high, grid.points)


class _Scorer:
    """Objective ρ̲ + 1/α̲ with infeasible points scored as +inf."""

    def __init__(
        self,
        bounds: WorstCaseBounds,
        upsilon_min: float,
        structure_preserving: bool,
        eps_reg: float,
    ):
        self.bounds = bounds
        self.upsilon_min = upsilon_min
        self.structure_preserving = structure_preserving
        self.eps_reg = eps_reg
        self.rejections: Counter[str] = Counter()
        self.closest: Optional[list[str]] = None

    def _reject(self, violations: list[str]) -> float:
        self.rejections.update(violations)
        if self.closest is None or len(violations) < len(self.closest):
            self.closest = violations
        return np.inf

    def __call__(self, point: tuple[float, float, float]) -> float:
        eps, theta, alpha = point
        report = feasibility(eps, theta, alpha, self.bounds)
        if not report.ok:
            return self._reject(report.violations)
        params = make_params(
            self.bounds,
            eps,
            theta,
            alpha,
            self.structure_preserving,
            self.eps_reg,
            check=False,
        )
        if upsilon_floor(params) < self.upsilon_min:
            return self._reject(["upsilon_floor"])
        try:
            return worst_case_radius(params) + 1.0 / alpha
        except CertificateVoidError:
            return self._reject(["metric_floor"])


def optimize_cert_params(
    bounds: WorstCaseBounds,
    cfg: CertificateConfig,
    structure_preserving: bool = True,
    eps_reg: float = 1e-3,
) -> CertificateParams:
    """
    Minimize ρ̲(ε, ϑ) + 1/α̲ over the feasible set with λ̲(Υ(α̲)) ≥ υ̲.

    A log-spaced grid over (ε, ϑ, α̲) is followed by coordinate refinement
    with a halving log-step.

    Raises:
        InfeasibilityError: If no grid point is feasible
    """
    scorer = _Scorer(bounds, cfg.upsilon_floor, structure_preserving, eps_reg)
    axes = [_axis(cfg.eps_grid), _axis(cfg.theta_grid), _axis(cfg.alpha_grid)]

    best_point, best_value = None, np.inf
    for eps in axes[0]:
        for theta in axes[1]:
            for alpha in axes[2]:
                value = scorer((eps, theta, alpha))
                if value < best_value:
                    best_point, best_value = (eps, theta, alpha), value

    if best_point is None:
        binding = sorted(set(scorer.closest or []))
        logger.warning(
            "certificates.no_feasible_parameters",
            binding=binding,
            rejections=dict(scorer.rejections.most_common(5)),
        )
        raise InfeasibilityError(
            "no feasible certificate parameters on the search grid", violations=binding
        )

    steps = [
        (grid.high / grid.low) ** (1.0 / max(grid.points - 1, 1))
        for grid in (cfg.eps_grid, cfg.theta_grid, cfg.alpha_grid)
    ]
    for _ in range(cfg.refine_rounds):
        steps = [np.sqrt(step) for step in steps]
        for axis, step in enumerate(steps):
            for factor in (step, 1.0 / step):
                candidate = list(best_point)
                candidate[axis] *= factor
                value = scorer(tuple(candidate))
                if value < best_value:
                    best_point, best_value = tuple(candidate), value

    eps, theta, alpha = best_point
    params = make_params(bounds, eps, theta, alpha, structure_preserving, eps_reg)
    logger.info(
        "certificates.parameters_optimized",
        eps=eps,
        theta=theta,
        alpha_lower=alpha,
        kappa=params.kappa,
        phi=params.phi,
        objective=best_value,
    )
    return params
