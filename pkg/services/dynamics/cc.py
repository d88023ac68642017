"""
Constant-curvature (CC) reduction of the FEM rod.

A rod of ``n_elems`` joints is split into ``n_segments`` contiguous segments.
A CC coordinate is the total bending angle of its segment and is spread
uniformly over the segment's joints.
"""

from dataclasses import dataclass, field

import numpy as np

from shared.exceptions import ValidationError
from shared.utils.validators import validators

from .models import ElComponents, FemRodParams, JointState
from .plants import LagrangianModel, LinkChain, ModelMixin, christoffel


def _uniform_assignment(n_rows: int, n_cols: int) -> np.ndarray:
    """Rows split into ``n_cols`` contiguous blocks, entries 1/block size."""
    assignment = np.zeros((n_rows, n_cols))
    for column, rows in enumerate(np.array_split(np.arange(n_rows), n_cols)):
        assignment[rows, column] = 1.0 / rows.size
    return assignment


@dataclass(frozen=True)
class CcMap:
    """Assignment A from CC coordinates to FEM joint angles."""

    n_segments: int
    n_elems: int
    assignment: np.ndarray = field(init=False, repr=False)
    reducer: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.n_segments < 1 or self.n_elems < self.n_segments:
            raise ValidationError(
                "CC map needs 1 <= n_segments <= n_elems",
                details={"n_segments": self.n_segments, "n_elems": self.n_elems},
            )
        assignment = _uniform_assignment(self.n_elems, self.n_segments)
        # (AᵀA)⁻¹Aᵀ
        reducer = np.linalg.solve(assignment.T @ assignment, assignment.T)
        object.__setattr__(self, "assignment", assignment)
        object.__setattr__(self, "reducer", reducer)

    @property
    def segment_sizes(self) -> np.ndarray:
        blocks = np.array_split(np.arange(self.n_elems), self.n_segments)
        return np.array([rows.size for rows in blocks])

    def embed(self, q_cc: np.ndarray) -> np.ndarray:
        return self.assignment @ q_cc

    def reduce(self, q_fem: np.ndarray) -> np.ndarray:
        return self.reducer @ q_fem

    def actuate(self, tau_cc: np.ndarray) -> np.ndarray:
        """A(AᵀA)⁻¹τ, so that Aᵀ·τ_fem = τ_cc."""
        return self.reducer.T @ tau_cc


def cc_reduce(ccmap: CcMap, fem_state: JointState) -> JointState:
    if fem_state.dof != ccmap.n_elems:
        raise ValidationError(
            f"FEM state has {fem_state.dof} joints, map expects {ccmap.n_elems}"
        )
    return JointState(q=ccmap.reduce(fem_state.q), dq=ccmap.reduce(fem_state.dq))


def cc_embed(ccmap: CcMap, cc_state: JointState) -> JointState:
    """Exact CC shape of the rod for the given segment angles."""
    return JointState(q=ccmap.embed(cc_state.q), dq=ccmap.embed(cc_state.dq))


def cc_actuate(ccmap: CcMap, tau_cc: np.ndarray) -> np.ndarray:
    tau_cc = validators.validate_vector(tau_cc, "tau_cc", dim=ccmap.n_segments)
    return ccmap.actuate(tau_cc)


class EmbeddedModel(ModelMixin):
    """
    Lagrangian model restricted to the image of a constant linear embedding.

    With q_full = Bq the reduced terms are BᵀM B, BᵀC B, Bᵀg and BᵀD B.
    """

    def __init__(self, base: LinkChain, embedding: np.ndarray):
        embedding = np.asarray(embedding, dtype=float)
        if embedding.ndim != 2 or embedding.shape[0] != base.dof:
            raise ValidationError(
                f"embedding must have {base.dof} rows, got shape {embedding.shape}"
            )
        self.base = base
        self.embedding = embedding

    @property
    def dof(self) -> int:
        return self.embedding.shape[1]

    def _congruent(self, matrix: np.ndarray) -> np.ndarray:
        return self.embedding.T @ matrix @ self.embedding

    def mass_matrix(self, q: np.ndarray) -> np.ndarray:
        return self._congruent(self.base.mass_matrix(self.embedding @ q))

    def mass_derivative(self, q: np.ndarray) -> np.ndarray:
        b = self.embedding
        full = self.base.mass_derivative(b @ q)
        return np.einsum("kr,ia,kij,js->ras", b, b, full, b)

    def gravity(self, q: np.ndarray) -> np.ndarray:
        return self.embedding.T @ self.base.gravity(self.embedding @ q)

    def potential(self, q: np.ndarray) -> float:
        return self.base.potential(self.embedding @ q)

    def dissipation(self, dq: np.ndarray) -> np.ndarray:
        return self.embedding.T @ self.base.dissipation(self.embedding @ dq)

    def damping_matrix(self, dq: np.ndarray) -> np.ndarray:
        return self._congruent(self.base.damping_matrix(self.embedding @ dq))

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
        b = self.embedding
        full_mass, full_bias = self.base.mass_and_bias(b @ q, b @ dq)
        return self._congruent(full_mass), b.T @ full_bias

    def stiff_terms(self) -> tuple[np.ndarray, np.ndarray]:
        stiffness, damping = self.base.stiff_terms()
        return self._congruent(stiffness), self._congruent(damping)


class ReducedChainModel(EmbeddedModel):
    """
    Parametric soft-robot prior in CC coordinates.

    Each segment n is a coarse chain of ``links_per_segment`` rigid links with
    biased mass (1+χ_n)·m/N, stiffness k·N(1+χ_n)/N_FEM and damping d·N/N_FEM
    for the whole segment.
    """

    def __init__(
        self,
        rod: FemRodParams,
        n_segments: int,
        links_per_segment: int = 4,
        chi: list[float] | None = None,
    ):
        chi_values = np.zeros(n_segments)
        if chi is not None:
            chi_values = np.asarray(chi, dtype=float)
        if chi_values.shape != (n_segments,):
            raise ValidationError("prior bias needs one entry per segment")
        p = int(links_per_segment)
        if p < 1:
            raise ValidationError("links_per_segment must be at least 1")

        segment_mass = (1.0 + chi_values) * rod.total_mass / n_segments
        share = n_segments / rod.n_elems
        segment_stiffness = rod.stiffness * share * (1.0 + chi_values)
        segment_damping = np.full(n_segments, rod.damping * share)
        link_length = rod.total_length / (n_segments * p)

        masses = np.repeat(segment_mass / p, p)
        base = LinkChain(
            masses=masses,
            lengths=np.full(n_segments * p, link_length),
            inertias=masses * link_length**2 / 12.0,
            # p springs in series per segment
            stiffness=np.repeat(p * segment_stiffness, p),
            damping=np.repeat(p * segment_damping, p),
            gravity=rod.gravity if rod.gravity_aligned else 0.0,
        )
        super().__init__(base, _uniform_assignment(n_segments * p, n_segments))
        self.rod = rod
        self.chi = chi_values
        self.links_per_segment = p


def nominal_cc_torque(
    plant: LagrangianModel,
    ccmap: CcMap,
    q_cc: np.ndarray,
    dq_cc: np.ndarray,
    ddq_cc: np.ndarray,
) -> np.ndarray:
    """
    Feed-forward CC torque τ* holding the rod on an exact CC motion.

    Inverse dynamics of the full plant along Aq, projected with Aᵀ.
    """
    a = ccmap.assignment
    mass, bias = plant.mass_and_bias(a @ q_cc, a @ dq_cc)
    return a.T @ (mass @ (a @ ddq_cc) + bias)
