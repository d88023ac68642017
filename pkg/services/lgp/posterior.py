"""
L-GP posterior: fitting, torque prediction, decomposition and covariance.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from services.dynamics.models import ElComponents, Energies
from services.dynamics.plants import christoffel
from shared.exceptions import ValidationError
from shared.numerics import (
    CholeskyFactor,
    JitterPolicy,
    SymMatrix,
    chol_solve,
    solve_spd,
)
from shared.utils.logging import get_logger
from shared.utils.validators import validators

from .kernels import (
    KernelPack,
    LatentTerm,
    build_terms,
    cross_covariance,
    gram,
    se_pack,
)
from .models import CovarianceQuery, Hyperparams, TrainingSet
from .priors import PriorModel, PriorSpec

logger = get_logger(__name__)

_CONSERVATIVE_POTENTIAL = ("gravity", "elastic")


@dataclass(frozen=True)
class _Projection:
    """Training weights pushed through a term: α_j = a_j·w_j, β_j = B_jᵀw_j."""

    alpha: Optional[np.ndarray]
    beta: Optional[np.ndarray]


class LgpModel:
    """
    Trained L-GP posterior.

    Holds the weight vector w = (K(X,X) + Σ_ε)⁻¹ vec(Y − prior(X)) together
    with the Cholesky factor needed for posterior covariances.
    """

    def __init__(
        self,
        hyper: Hyperparams,
        training: TrainingSet,
        prior: PriorModel,
        weights: np.ndarray,
        factor: Optional[CholeskyFactor] = None,
        jitter: float = 0.0,
        prior_spec: Optional[PriorSpec] = None,
    ):
        if hyper.dof != training.dof or prior.dof != training.dof:
            raise ValidationError(
                "hyperparameters, training set and prior disagree on dof"
            )
        self.hyper = hyper
        self.training = training
        self.prior = prior
        self.prior_spec = prior_spec
        self.weights = np.asarray(weights, dtype=float)
        self.factor = factor
        self.jitter = jitter
        self.terms = build_terms(hyper)
        self.states = training.inputs

        per_sample = self.weights.reshape(training.size, training.dof)
        self._projections = []
        for term in self.terms:
            a, b = term.functional(training.q, training.dq, training.ddq)
            self._projections.append(
                _Projection(
                    alpha=None if a is None else np.einsum("xi,xi->x", a, per_sample),
                    beta=None if b is None else np.einsum("xip,xi->xp", b, per_sample),
                )
            )
        self._potential_offset = 0.0
        self._potential_offset = self.potential(np.zeros(self.dof))

    @property
    def dof(self) -> int:
        return self.training.dof

    def latent_means(
        self, q: np.ndarray, dq: np.ndarray, kinds: Optional[tuple[str, ...]] = None
    ) -> list[tuple[LatentTerm, float, np.ndarray]]:
        """Posterior mean value and gradient of every latent term at one state."""
        q1, dq1 = q[None, :], dq[None, :]
        packs: dict[str, KernelPack] = {}
        results = []
        for term, projection in zip(self.terms, self._projections):
            if kinds is not None and term.kind not in kinds:
                continue
            if term.group not in packs:
                packs[term.group] = se_pack(
                    term.latent_input(q1, dq1),
                    term.latent_input(self.training.q, self.training.dq),
                    term.lengths,
                    term.symmetric,
                )
            pack = packs[term.group]
            value = 0.0
            grad = np.zeros(pack.grad_left.shape[-1])
            if projection.alpha is not None:
                value += pack.value[0] @ projection.alpha
                grad += pack.grad_left[0].T @ projection.alpha
            if projection.beta is not None:
                value += np.einsum("yp,yp->", pack.grad_right[0], projection.beta)
                grad += np.einsum("ypr,yr->p", pack.hessian[0], projection.beta)
            results.append((term, term.variance * float(value), term.variance * grad))
        return results

    def potential(self, q: np.ndarray) -> float:
        """Posterior potential energy Ĝ(q) + Û(q), zero at q = 0."""
        q = np.asarray(q, dtype=float)
        total = self.prior.potential(q)
        rest = np.zeros_like(q)
        for term, value, _ in self.latent_means(q, rest, _CONSERVATIVE_POTENTIAL):
            if term.kind == "gravity":
                total += value
            else:
                k = term.index[0]
                total += 0.5 * q[k] ** 2 * value
        return float(total) - self._potential_offset

    def gravity(self, q: np.ndarray) -> np.ndarray:
        """Posterior potential force ĝ(q) = ∂(Ĝ + Û)/∂q."""
        q = np.asarray(q, dtype=float)
        force = np.array(self.prior.gravity(q), dtype=float)
        rest = np.zeros_like(q)
        for term, value, grad in self.latent_means(q, rest, _CONSERVATIVE_POTENTIAL):
            if term.kind == "gravity":
                force += grad
            else:
                k = term.index[0]
                force[k] += value * q[k]
                force += 0.5 * q[k] ** 2 * grad
        return force

    def dissipation(self, dq: np.ndarray) -> np.ndarray:
        """Posterior dissipative force D̂(q̇)q̇."""
        dq = np.asarray(dq, dtype=float)
        force = np.array(self.prior.dissipation(dq), dtype=float)
        means = self.latent_means(np.zeros_like(dq), dq, ("dissipation",))
        for term, value, _ in means:
            i = term.index[0]
            force[i] += value * dq[i]
        return force

    def components(self, q: np.ndarray, dq: np.ndarray) -> ElComponents:
        return predict_components(self, q, dq).components


@dataclass(frozen=True)
class PosteriorComponents:
    components: ElComponents
    kinetic: float
    potential: float
    mass_positive: bool

    @property
    def energies(self) -> Energies:
        return Energies(kinetic=self.kinetic, potential=self.potential)


def _prior_targets(
    training: TrainingSet, prior: PriorModel
) -> tuple[np.ndarray, np.ndarray]:
    torques = np.empty_like(training.y)
    masses = np.empty((training.size, training.dof, training.dof))
    for i in range(training.size):
        c = prior.components(training.q[i], training.dq[i])
        torques[i] = c.inverse_dynamics(training.ddq[i])
        masses[i] = c.M
    return torques, masses


def fit(
    training: TrainingSet,
    hyper: Hyperparams,
    prior: PriorModel,
    prior_spec: Optional[PriorSpec] = None,
    jitter_policy: JitterPolicy = JitterPolicy.LADDER,
) -> LgpModel:
    """
    Condition the L-GP on a training set.

    Raises:
        DecompositionError: If the Gram matrix stays indefinite after jitter
    """
    if hyper.dof != training.dof:
        raise ValidationError(
            f"hyperparameters are for {hyper.dof} dof, data has {training.dof}"
        )
    prior_torques, prior_masses = _prior_targets(training, prior)
    matrix = gram(training, hyper, prior_masses)
    residual = (training.y - prior_torques).ravel()
    solution = chol_solve(matrix, residual, jitter_policy)
    if solution.jitter > 0.0:
        logger.warning("lgp.gram_jitter", rows=training.size, jitter=solution.jitter)
    logger.debug(
        "lgp.fitted", rows=training.size, dof=training.dof, jitter=solution.jitter
    )
    return LgpModel(
        hyper=hyper,
        training=training,
        prior=prior,
        weights=solution.solution,
        factor=solution.factor,
        jitter=solution.jitter,
        prior_spec=prior_spec,
    )


def predict_tau(model: LgpModel, x: np.ndarray) -> np.ndarray:
    """Posterior torque prior(x) + K(x, X)·w at a full state (q, q̇, q̈)."""
    n = model.dof
    x = validators.validate_vector(x, "x", dim=3 * n)
    q, dq, ddq = x[:n], x[n : 2 * n], x[2 * n :]
    prior_tau = model.prior.components(q, dq).inverse_dynamics(ddq)
    cross = cross_covariance(x[None], model.states, model.terms, n)
    return prior_tau + cross @ model.weights


def predict_components(
    model: LgpModel, q: np.ndarray, dq: np.ndarray
) -> PosteriorComponents:
    """
    Split the posterior into M̂, Ĉ, ĝ and D̂q̇.

    Ĉ comes from Christoffel symbols of the analytic ∂M̂/∂q, so Ṁ̂ − 2Ĉ is
    skew-symmetric. A mass estimate that is not positive definite is only
    reported.
    """
    q = np.asarray(q, dtype=float)
    dq = np.asarray(dq, dtype=float)
    n = model.dof
    base = model.prior.components(q, dq)
    mass = np.array(base.M, dtype=float)
    derivative = (
        np.zeros((n, n, n))
        if base.mass_derivative is None
        else np.array(base.mass_derivative, dtype=float)
    )
    force = np.array(base.g, dtype=float)
    dissipation = np.array(base.d, dtype=float)
    damping = np.zeros((n, n)) if base.damping is None else np.array(base.damping)
    potential = model.prior.potential(q)

    for term, value, grad in model.latent_means(q, dq):
        k, l = term.index
        if term.kind == "kinetic":
            mass[k, l] += value
            derivative[:, k, l] += grad
            if k != l:
                mass[l, k] += value
                derivative[:, l, k] += grad
        elif term.kind == "gravity":
            force += grad
            potential += value
        elif term.kind == "elastic":
            force[k] += value * q[k]
            force += 0.5 * q[k] ** 2 * grad
            potential += 0.5 * q[k] ** 2 * value
        else:
            dissipation[k] += value * dq[k]
            damping[k, k] += value

    eigenvalues = np.linalg.eigvalsh(0.5 * (mass + mass.T))
    positive = bool(eigenvalues[0] > 0.0)
    if not positive:
        logger.warning("lgp.mass_not_pd", min_eig=float(eigenvalues[0]), q=q.tolist())

    components = ElComponents(
        M=mass,
        C=christoffel(derivative, dq),
        g=force,
        d=dissipation,
        dq=dq,
        damping=damping,
        mass_derivative=derivative,
    )
    return PosteriorComponents(
        components=components,
        kinetic=0.5 * float(dq @ mass @ dq),
        potential=float(potential) - model._potential_offset,
        mass_positive=positive,
    )


def predict_cov(model: LgpModel, query: CovarianceQuery) -> SymMatrix:
    """
    Posterior torque covariance Σ_τ = K(x,x) − K(x,X)(K(X,X)+Σ_ε)⁻¹K(X,x).

    Negative eigenvalues from round-off are clamped to zero.
    """
    if model.factor is None:
        raise ValidationError(
            "model has no Cholesky factor; refit before querying covariances"
        )
    x = query.state[None]
    n = model.dof
    prior_cov = cross_covariance(x, x, model.terms, n)
    cross = cross_covariance(model.states, x, model.terms, n)
    half = model.factor.half_solve(cross)
    sigma = prior_cov - half.T @ half
    sigma = 0.5 * (sigma + sigma.T)
    eigenvalues, vectors = np.linalg.eigh(sigma)
    if eigenvalues[0] < 0.0:
        sigma = (vectors * np.maximum(eigenvalues, 0.0)) @ vectors.T
    return SymMatrix(sigma)


class LgpDynamics:
    """The posterior mean used as a plant, e.g. for resimulation."""

    def __init__(self, model: LgpModel):
        self.model = model

    @property
    def dof(self) -> int:
        return self.model.dof

    def components(self, q: np.ndarray, dq: np.ndarray) -> ElComponents:
        return predict_components(self.model, q, dq).components

    def mass_matrix(self, q: np.ndarray) -> np.ndarray:
        return self.components(q, np.zeros_like(q)).M

    def mass_and_bias(
        self, q: np.ndarray, dq: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        c = self.components(q, dq)
        return c.M, c.bias

    def acceleration(
        self, q: np.ndarray, dq: np.ndarray, tau: np.ndarray
    ) -> np.ndarray:
        mass, bias = self.mass_and_bias(q, dq)
        return solve_spd(mass, tau - bias)

    def potential(self, q: np.ndarray) -> float:
        return self.model.potential(q)

    def energies(self, q: np.ndarray, dq: np.ndarray) -> Energies:
        return predict_components(self.model, q, dq).energies

    def stiff_terms(self) -> tuple[np.ndarray, np.ndarray]:
        stiff = getattr(self.model.prior, "stiff_terms", None)
        if stiff is None:
            return np.zeros((self.dof, self.dof)), np.zeros((self.dof, self.dof))
        return stiff()
