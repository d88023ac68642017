"""
Ground-truth plants: the planar two-link arm and the link chain behind the FEM rod.

Every plant exposes the same surface (``components``, ``mass_and_bias``,
``acceleration``, ``energies``, ``stiff_terms``) so the integrator, the L-GP
prior and the controllers can use them interchangeably.
"""

from typing import Protocol, runtime_checkable

import numpy as np

from shared.numerics import solve_spd
from shared.utils.validators import validators

from .models import ElComponents, Energies, FemRodParams, JointState, TwoLinkParams


@runtime_checkable
class LagrangianModel(Protocol):
    """Anything that evaluates Euler-Lagrange terms at a state."""

    @property
    def dof(self) -> int: ...

    def components(self, q: np.ndarray, dq: np.ndarray) -> ElComponents: ...

    def mass_and_bias(
        self, q: np.ndarray, dq: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]: ...

    def acceleration(
        self, q: np.ndarray, dq: np.ndarray, tau: np.ndarray
    ) -> np.ndarray: ...

    def potential(self, q: np.ndarray) -> float: ...

    def stiff_terms(self) -> tuple[np.ndarray, np.ndarray]: ...


def christoffel(mass_derivative: np.ndarray, dq: np.ndarray) -> np.ndarray:
    """
    Coriolis matrix from Christoffel symbols of the first kind.

    C_ij = ½ Σ_k (∂_k M_ij + ∂_j M_ik − ∂_i M_jk) q̇_k, which makes
    Ṁ − 2C skew-symmetric.
    """
    t1 = np.einsum("kij,k->ij", mass_derivative, dq)
    t2 = np.einsum("jik,k->ij", mass_derivative, dq)
    t3 = np.einsum("ijk,k->ij", mass_derivative, dq)
    return 0.5 * (t1 + t2 - t3)


def forward_dynamics(c: ElComponents, tau: np.ndarray) -> np.ndarray:
    """
    Solve M q̈ = τ − C q̇ − g − d.

    Raises:
        DecompositionError: If M is not positive definite
    """
    tau = validators.validate_vector(tau, "tau", dim=c.dof)
    return solve_spd(c.M, tau - c.bias)


class ModelMixin:
    """Shared derived quantities of the concrete models."""

    def acceleration(
        self, q: np.ndarray, dq: np.ndarray, tau: np.ndarray
    ) -> np.ndarray:
        mass, bias = self.mass_and_bias(q, dq)
        return solve_spd(mass, tau - bias)

    def inverse_dynamics(
        self, q: np.ndarray, dq: np.ndarray, ddq: np.ndarray
    ) -> np.ndarray:
        mass, bias = self.mass_and_bias(q, dq)
        return mass @ ddq + bias

    def energies(self, q: np.ndarray, dq: np.ndarray) -> Energies:
        mass = self.mass_matrix(q)
        kinetic = 0.5 * float(dq @ mass @ dq)
        return Energies(kinetic=kinetic, potential=self.potential(q))


class TwoLinkArm(ModelMixin):
    """
    Planar two-link arm with uniform slender links, gravity along +x.

    q = 0 is the hanging equilibrium. Damping is d₁q̇ + d₂|q̇|∘q̇.
    """

    def __init__(self, params: TwoLinkParams):
        self.params = params
        m1, m2 = params.masses
        l1, l2 = params.lengths
        r1, r2 = 0.5 * l1, 0.5 * l2
        inertia1 = m1 * l1**2 / 12.0
        inertia2 = m2 * l2**2 / 12.0

        self._alpha = inertia1 + inertia2 + m1 * r1**2 + m2 * (l1**2 + r2**2)
        self._beta = m2 * l1 * r2
        self._delta = inertia2 + m2 * r2**2
        self._w1 = params.gravity * (m1 * r1 + m2 * l1)
        self._w2 = params.gravity * m2 * r2

    @property
    def dof(self) -> int:
        return 2

    def mass_matrix(self, q: np.ndarray) -> np.ndarray:
        c2 = np.cos(q[1])
        off = self._delta + self._beta * c2
        return np.array(
            [[self._alpha + 2.0 * self._beta * c2, off], [off, self._delta]]
        )

    def mass_derivative(self, q: np.ndarray) -> np.ndarray:
        s2 = np.sin(q[1])
        derivative = np.zeros((2, 2, 2))
        h = self._beta * s2
        derivative[1] = [[-2.0 * h, -h], [-h, 0.0]]
        return derivative

    def coriolis(self, q: np.ndarray, dq: np.ndarray) -> np.ndarray:
        h = self._beta * np.sin(q[1])
        return np.array([[-h * dq[1], -h * (dq[0] + dq[1])], [h * dq[0], 0.0]])

    def gravity(self, q: np.ndarray) -> np.ndarray:
        s12 = np.sin(q[0] + q[1])
        return np.array([self._w1 * np.sin(q[0]) + self._w2 * s12, self._w2 * s12])

    def potential(self, q: np.ndarray) -> float:
        return float(
            self._w1 * (1.0 - np.cos(q[0])) + self._w2 * (1.0 - np.cos(q[0] + q[1]))
        )

    def damping_matrix(self, dq: np.ndarray) -> np.ndarray:
        return np.diag(
            self.params.damping_linear + self.params.damping_quadratic * np.abs(dq)
        )

    def dissipation(self, dq: np.ndarray) -> np.ndarray:
        return (
            self.params.damping_linear + self.params.damping_quadratic * np.abs(dq)
        ) * dq

    def components(self, q: np.ndarray, dq: np.ndarray) -> ElComponents:
        q = np.asarray(q, dtype=float)
        dq = np.asarray(dq, dtype=float)
        return ElComponents(
            M=self.mass_matrix(q),
            C=self.coriolis(q, dq),
            g=self.gravity(q),
            d=self.dissipation(dq),
            dq=dq,
            damping=self.damping_matrix(dq),
            mass_derivative=self.mass_derivative(q),
        )

    def mass_and_bias(
        self, q: np.ndarray, dq: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        bias = self.coriolis(q, dq) @ dq + self.gravity(q) + self.dissipation(dq)
        return self.mass_matrix(q), bias

    def stiff_terms(self) -> tuple[np.ndarray, np.ndarray]:
        return np.zeros((2, 2)), self.params.damping_linear * np.eye(2)


def _rev_cumsum(a: np.ndarray, axis: int) -> np.ndarray:
    """Multiply by Tᵀ along ``axis`` (T lower-triangular ones)."""
    return np.flip(np.cumsum(np.flip(a, axis=axis), axis=axis), axis=axis)


def _congruence(x: np.ndarray) -> np.ndarray:
    """Tᵀ X T for X of shape (..., n, n) in O(n²)."""
    return _rev_cumsum(_rev_cumsum(x, -2), -1)


class LinkChain(ModelMixin):
    """
    Planar serial chain of rigid links with torsional spring-dampers.

    Joint angles are relative; absolute link angles are φ = Tq. Gravity acts
    along +x, so the straight chain q = 0 hangs in equilibrium. The mass
    matrix is M = Tᵀ(H∘G)T + Tᵀ diag(I) T with G_jk = cos(φ_j − φ_k) and H the
    mass-weighted products of the link lever arms.
    """

    def __init__(
        self,
        masses: np.ndarray,
        lengths: np.ndarray,
        inertias: np.ndarray,
        stiffness: np.ndarray,
        damping: np.ndarray,
        gravity: float,
    ):
        self.masses = validators.validate_vector(masses, "masses")
        n = self.masses.shape[0]
        self.lengths = validators.validate_vector(lengths, "lengths", dim=n)
        self.inertias = validators.validate_vector(inertias, "inertias", dim=n)
        self.stiffness = validators.validate_vector(stiffness, "stiffness", dim=n)
        self.damping = validators.validate_vector(damping, "damping", dim=n)
        self.gravity_constant = float(gravity)

        # lever[i, j]: arm of link j's direction in the centre of mass of link i
        lever = np.tril(np.broadcast_to(self.lengths, (n, n)), k=-1) + np.diag(
            0.5 * self.lengths
        )
        self._lever = lever
        self._h = lever.T @ (self.masses[:, None] * lever)
        self._weights = self.gravity_constant * (lever.T @ self.masses)
        tri = np.tril(np.ones((n, n)))
        self._tri = tri
        self._rotational = tri.T @ np.diag(self.inertias) @ tri

    @property
    def dof(self) -> int:
        return self.masses.shape[0]

    def absolute_angles(self, q: np.ndarray) -> np.ndarray:
        return np.cumsum(q)

    def mass_matrix(self, q: np.ndarray) -> np.ndarray:
        phi = np.cumsum(q)
        cosines = np.cos(phi[:, None] - phi[None, :])
        return _congruence(self._h * cosines) + self._rotational

    def mass_derivative(self, q: np.ndarray) -> np.ndarray:
        """∂M/∂q_r stacked along the first axis."""
        phi = np.cumsum(q)
        sines = np.sin(phi[:, None] - phi[None, :])
        selector = self._tri.T  # selector[r, j] = [j ≥ r]
        d_cos = -sines[None, :, :] * (selector[:, :, None] - selector[:, None, :])
        return _congruence(self._h[None, :, :] * d_cos)

    def coriolis(self, q: np.ndarray, dq: np.ndarray) -> np.ndarray:
        return christoffel(self.mass_derivative(q), dq)

    def coriolis_force(self, q: np.ndarray, dq: np.ndarray) -> np.ndarray:
        """C(q, q̇)q̇ = Tᵀ[(H∘S) φ̇²] with S_jk = sin(φ_j − φ_k)."""
        phi = np.cumsum(q)
        dphi = np.cumsum(dq)
        sines = np.sin(phi[:, None] - phi[None, :])
        return _rev_cumsum((self._h * sines) @ (dphi * dphi), 0)

    def gravity(self, q: np.ndarray) -> np.ndarray:
        phi = np.cumsum(q)
        return _rev_cumsum(self._weights * np.sin(phi), 0) + self.stiffness * q

    def potential(self, q: np.ndarray) -> float:
        phi = np.cumsum(q)
        return float(
            np.sum(self._weights * (1.0 - np.cos(phi)))
            + 0.5 * np.sum(self.stiffness * q * q)
        )

    def damping_matrix(self, dq: np.ndarray) -> np.ndarray:
        return np.diag(self.damping)

    def dissipation(self, dq: np.ndarray) -> np.ndarray:
        return self.damping * dq

    def components(self, q: np.ndarray, dq: np.ndarray) -> ElComponents:
        q = np.asarray(q, dtype=float)
        dq = np.asarray(dq, dtype=float)
        derivative = self.mass_derivative(q)
        return ElComponents(
            M=self.mass_matrix(q),
            C=christoffel(derivative, dq),
            g=self.gravity(q),
            d=self.dissipation(dq),
            dq=dq,
            damping=self.damping_matrix(dq),
            mass_derivative=derivative,
        )

    def mass_and_bias(
        self, q: np.ndarray, dq: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        bias = self.coriolis_force(q, dq) + self.gravity(q) + self.dissipation(dq)
        return self.mass_matrix(q), bias

    def stiff_terms(self) -> tuple[np.ndarray, np.ndarray]:
        return np.diag(self.stiffness), np.diag(self.damping)


class FemRod(LinkChain):
    """Rod of unit-free total mass and length split into ``n_elems`` rigid elements."""

    def __init__(self, params: FemRodParams):
        n = params.n_elems
        super().__init__(
            masses=np.full(n, params.element_mass),
            lengths=np.full(n, params.element_length),
            inertias=np.full(n, params.element_inertia),
            stiffness=np.full(n, params.stiffness),
            damping=np.full(n, params.damping),
            gravity=params.gravity if params.gravity_aligned else 0.0,
        )
        self.params = params


class _ForceFree:
    """Models without gravity, Coriolis or damping forces."""

    def __init__(self, dof: int):
        self._dof = int(dof)

    @property
    def dof(self) -> int:
        return self._dof

    def mass_matrix(self, q: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gravity(self, q: np.ndarray) -> np.ndarray:
        return np.zeros(self._dof)

    def dissipation(self, dq: np.ndarray) -> np.ndarray:
        return np.zeros(self._dof)

    def potential(self, q: np.ndarray) -> float:
        return 0.0

    def components(self, q: np.ndarray, dq: np.ndarray) -> ElComponents:
        n = self._dof
        return ElComponents(
            M=self.mass_matrix(q),
            C=np.zeros((n, n)),
            g=np.zeros(n),
            d=np.zeros(n),
            dq=np.asarray(dq, dtype=float),
            damping=np.zeros((n, n)),
            mass_derivative=np.zeros((n, n, n)),
        )

    def stiff_terms(self) -> tuple[np.ndarray, np.ndarray]:
        return np.zeros((self._dof, self._dof)), np.zeros((self._dof, self._dof))


class UnitMassPlant(_ForceFree, ModelMixin):
    """Free unit masses: M = I and no forces."""

    def mass_matrix(self, q: np.ndarray) -> np.ndarray:
        return np.eye(self._dof)

    def mass_and_bias(
        self, q: np.ndarray, dq: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        return np.eye(self._dof), np.zeros(self._dof)


class ZeroModel(_ForceFree):
    """Prior that predicts no dynamics at all; the L-GP then learns everything."""

    def mass_matrix(self, q: np.ndarray) -> np.ndarray:
        return np.zeros((self._dof, self._dof))


def two_link_components(params: TwoLinkParams, state: JointState) -> ElComponents:
    return TwoLinkArm(params).components(state.q, state.dq)


def fem_rod_components(params: FemRodParams, state: JointState) -> ElComponents:
    return FemRod(params).components(state.q, state.dq)
