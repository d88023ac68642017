"""
Structured kernels of the Lagrangian GP.

Every latent scalar GP f (a mass-matrix entry, the gravitational potential,
an elastic stiffness entry or a per-joint damping coefficient) enters the
torque through a linear functional

    τ(x) = a(x)·f(z) + B(x)·∇f(z)

where z is the latent input (q, or one velocity coordinate). Covariances of
the torque therefore only need the scalar kernel, its two gradients and the
mixed Hessian, all available in closed form for squared-exponential kernels.
"""

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from shared.utils.validators import validators

from .models import Hyperparams, TrainingSet

TermKind = Literal["kinetic", "gravity", "elastic", "dissipation"]


@dataclass(frozen=True)
class KernelPack:
    """k(z, z′), both gradients and ∂²k/∂z∂z′ᵀ for all pairs of points."""

    value: np.ndarray
    grad_left: np.ndarray
    grad_right: np.ndarray
    hessian: np.ndarray


def se_pack(
    z1: np.ndarray, z2: np.ndarray, lengths: np.ndarray, symmetric: bool = False
) -> KernelPack:
    """
    Squared-exponential kernel with per-coordinate length-scales.

    With ``symmetric`` the kernel is k(z, z′) + k(z, −z′), which makes every
    sample path even in z.
    """
    inv = 1.0 / np.asarray(lengths, dtype=float) ** 2
    diff = z1[:, None, :] - z2[None, :, :]
    scaled = diff * inv
    value = np.exp(-0.5 * np.sum(diff * scaled, axis=-1))
    grad_left = -scaled * value[..., None]
    hessian = (
        np.diag(inv)[None, None] - scaled[..., :, None] * scaled[..., None, :]
    ) * value[..., None, None]
    pack = KernelPack(value, grad_left, -grad_left, hessian)
    if not symmetric:
        return pack

    total = z1[:, None, :] + z2[None, :, :]
    mirrored = total * inv
    reflected = np.exp(-0.5 * np.sum(total * mirrored, axis=-1))
    grad = -mirrored * reflected[..., None]
    mixed = (
        mirrored[..., :, None] * mirrored[..., None, :] - np.diag(inv)[None, None]
    ) * reflected[..., None, None]
    return KernelPack(
        value=pack.value + reflected,
        grad_left=pack.grad_left + grad,
        grad_right=pack.grad_right + grad,
        hessian=pack.hessian + mixed,
    )


@dataclass(frozen=True)
class LatentTerm:
    """One latent scalar GP and the way it acts on the torque."""

    kind: TermKind
    variance: float
    lengths: np.ndarray
    symmetric: bool
    index: tuple[int, int]

    @property
    def group(self) -> str:
        """Terms of one group share their kernel pack."""
        if self.kind == "dissipation":
            return f"dissipation_{self.index[0]}"
        return self.kind

    def latent_input(self, q: np.ndarray, dq: np.ndarray) -> np.ndarray:
        if self.kind == "dissipation":
            return dq[:, self.index[0] : self.index[0] + 1]
        return q

    def functional(
        self, q: np.ndarray, dq: np.ndarray, ddq: np.ndarray
    ) -> tuple[Optional[np.ndarray], Optional[np.ndarray]]:
        """a with shape (D, N) and B with shape (D, N, p); None where identically 0."""
        rows, n = q.shape
        k, l = self.index
        if self.kind == "kinetic":
            a = np.zeros((rows, n))
            e_dq = np.zeros((rows, n))
            a[:, k] += ddq[:, l]
            e_dq[:, k] += dq[:, l]
            if k != l:
                a[:, l] += ddq[:, k]
                e_dq[:, l] += dq[:, k]
            quadratic = (1.0 if k == l else 2.0) * dq[:, k] * dq[:, l]
            b = e_dq[:, :, None] * dq[:, None, :]
            b -= 0.5 * quadratic[:, None, None] * np.eye(n)
            return a, b
        if self.kind == "gravity":
            return None, np.broadcast_to(np.eye(n), (rows, n, n))
        if self.kind == "elastic":
            a = np.zeros((rows, n))
            a[:, k] = q[:, k]
            return a, 0.5 * (q[:, k] ** 2)[:, None, None] * np.eye(n)
        a = np.zeros((rows, n))
        a[:, k] = dq[:, k]
        return a, None


def build_terms(h: Hyperparams) -> list[LatentTerm]:
    """Latent terms with non-zero amplitude, kinetic entries in row-major order."""
    n = h.dof
    terms: list[LatentTerm] = []
    pairs = [(k, l) for k in range(n) for l in range(k, n)]
    kinetic_lengths = np.full(n, h.kinetic_length)
    for pair, amplitude in zip(pairs, h.kinetic_amplitudes):
        if amplitude > 0.0:
            terms.append(
                LatentTerm("kinetic", amplitude**2, kinetic_lengths, h.symmetric, pair)
            )
    if h.gravity_amplitude > 0.0:
        terms.append(
            LatentTerm(
                "gravity",
                h.gravity_amplitude**2,
                np.asarray(h.gravity_lengths, dtype=float),
                h.symmetric,
                (0, 0),
            )
        )
    elastic_lengths = np.full(n, h.elastic_length)
    for k, amplitude in enumerate(h.elastic_amplitudes):
        if amplitude > 0.0:
            terms.append(
                LatentTerm(
                    "elastic", amplitude**2, elastic_lengths, h.symmetric, (k, k)
                )
            )
    for i, (amplitude, length) in enumerate(
        zip(h.dissipation_amplitudes, h.dissipation_lengths)
    ):
        if amplitude > 0.0:
            terms.append(
                LatentTerm(
                    "dissipation", amplitude**2, np.array([length]), False, (i, i)
                )
            )
    return terms


def _split(states: np.ndarray, dof: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    states = np.atleast_2d(states)
    return states[:, :dof], states[:, dof : 2 * dof], states[:, 2 * dof : 3 * dof]


def cross_covariance(
    states1: np.ndarray, states2: np.ndarray, terms: list[LatentTerm], dof: int
) -> np.ndarray:
    """
    Torque covariance between two sets of full states (q, q̇, q̈).

    Returns:
        np.ndarray: Matrix of shape (D1·N, D2·N), row index = sample·N + joint
    """
    q1, dq1, ddq1 = _split(states1, dof)
    q2, dq2, ddq2 = _split(states2, dof)
    d1, d2 = q1.shape[0], q2.shape[0]
    out = np.zeros((d1, d2, dof, dof))
    packs: dict[str, KernelPack] = {}
    for term in terms:
        if term.group not in packs:
            packs[term.group] = se_pack(
                term.latent_input(q1, dq1),
                term.latent_input(q2, dq2),
                term.lengths,
                term.symmetric,
            )
        pack = packs[term.group]
        a1, b1 = term.functional(q1, dq1, ddq1)
        a2, b2 = term.functional(q2, dq2, ddq2)
        block = np.zeros_like(out)
        if a1 is not None and a2 is not None:
            block += np.einsum("xy,xi,yj->xyij", pack.value, a1, a2)
        if a1 is not None and b2 is not None:
            block += np.einsum("xi,yjp,xyp->xyij", a1, b2, pack.grad_right)
        if b1 is not None and a2 is not None:
            block += np.einsum("xip,xyp,yj->xyij", b1, pack.grad_left, a2)
        if b1 is not None and b2 is not None:
            block += np.einsum("xip,xypr,yjr->xyij", b1, pack.hessian, b2)
        out += term.variance * block
    return out.transpose(0, 2, 1, 3).reshape(d1 * dof, d2 * dof)


def kernel_tau(x1: np.ndarray, x2: np.ndarray, h: Hyperparams) -> np.ndarray:
    """N×N torque covariance of two full states of length 3N."""
    n = h.dof
    x1 = validators.validate_vector(x1, "x", dim=3 * n)
    x2 = validators.validate_vector(x2, "x'", dim=3 * n)
    return cross_covariance(x1[None], x2[None], build_terms(h), n)


def noise_blocks(
    training: TrainingSet, prior_masses: Optional[np.ndarray] = None
) -> np.ndarray:
    """
    Per-sample torque noise σ_τ²I + σ_α² M M ᵀ.

    Acceleration noise enters the torque linearly through the prior mass
    matrix ``prior_masses`` of shape (D, N, N).
    """
    n = training.dof
    blocks = np.tile(training.torque_noise**2 * np.eye(n), (training.size, 1, 1))
    if prior_masses is not None and training.acceleration_noise > 0.0:
        blocks += training.acceleration_noise**2 * np.einsum(
            "dij,dkj->dik", prior_masses, prior_masses
        )
    return blocks


def gram(
    training: TrainingSet, h: Hyperparams, prior_masses: Optional[np.ndarray] = None
) -> np.ndarray:
    """K(X, X) + Σ_ε for the whole training set, symmetrized."""
    states = training.inputs
    matrix = cross_covariance(states, states, build_terms(h), training.dof)
    n = training.dof
    for i, block in enumerate(noise_blocks(training, prior_masses)):
        matrix[i * n : (i + 1) * n, i * n : (i + 1) * n] += block
    return 0.5 * (matrix + matrix.T)
