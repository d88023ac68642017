"""
Dense symmetric linear algebra: Jacobi eigensolver and jittered Cholesky solves.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
from scipy.linalg import cho_solve, lapack

from shared.exceptions import DecompositionError, ValidationError
from shared.utils.logging import get_logger
from shared.utils.validators import validators

logger = get_logger(__name__)

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


@dataclass(frozen=True)
class SymMatrix:
    """Dense real symmetric matrix, symmetrized on construction."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        matrix = validators.validate_square(self.entries, "SymMatrix")
        if matrix.shape[0] < 1:
            raise ValidationError("SymMatrix dimension must be at least 1")
        sym = 0.5 * (matrix + matrix.T)
        sym.setflags(write=False)
        object.__setattr__(self, "entries", sym)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def of(cls, value: "SymMatrix | np.ndarray") -> "SymMatrix":
        return value if isinstance(value, SymMatrix) else cls(np.asarray(value))


@dataclass(frozen=True)
class SpectralDecomp:
    """Ascending eigenvalues with orthonormal eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def minimum(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def maximum(self) -> float:
        return float(self.eigenvalues[-1])


def sym_eig(a: SymMatrix | np.ndarray) -> SpectralDecomp:
    """
    Full spectrum of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps stop once the off-diagonal Frobenius norm drops below
    1e-12 times the Frobenius norm of the input.

    Raises:
        ValidationError: If the matrix has non-finite entries
    """
    work = np.array(SymMatrix.of(a).entries, dtype=float)
    n = work.shape[0]
    vectors = np.eye(n)
    scale = float(np.linalg.norm(work))

    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.sqrt(max(np.sum(work * work) - np.sum(np.diag(work) ** 2), 0.0))
        if off <= JACOBI_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                if apq == 0.0:
                    continue
                theta = (work[q, q] - work[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c

                col_p = work[:, p].copy()
                col_q = work[:, q].copy()
                work[:, p] = c * col_p - s * col_q
                work[:, q] = s * col_p + c * col_q
                row_p = work[p, :].copy()
                row_q = work[q, :].copy()
                work[p, :] = c * row_p - s * row_q
                work[q, :] = s * row_p + c * row_q
                work[p, q] = work[q, p] = 0.0

                vec_p = vectors[:, p].copy()
                vec_q = vectors[:, q].copy()
                vectors[:, p] = c * vec_p - s * vec_q
                vectors[:, q] = s * vec_p + c * vec_q
    else:
        logger.warning("jacobi.max_sweeps", dim=n, sweeps=JACOBI_MAX_SWEEPS)

    values = np.diag(work).copy()
    order = np.argsort(values, kind="stable")
    return SpectralDecomp(eigenvalues=values[order], eigenvectors=vectors[:, order])


def eig_extremes(a: SymMatrix | np.ndarray) -> tuple[float, float]:
    """Smallest and largest eigenvalue."""
    decomp = sym_eig(a)
    return decomp.minimum, decomp.maximum


class JitterPolicy(str, Enum):
    """Diagonal regularization applied when a Cholesky factorization fails."""

    NONE = "none"
    LADDER = "ladder"


JITTER_START = 1e-10
JITTER_DECADES = 3


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower Cholesky factor of ``A + jitter*I``."""

    lower: np.ndarray
    jitter: float = 0.0

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return cho_solve((self.lower, True), rhs, check_finite=False)

    def half_solve(self, rhs: np.ndarray) -> np.ndarray:
        """Return L^-1 rhs."""
        return lapack.dtrtrs(self.lower, rhs, lower=1)[0]


@dataclass(frozen=True)
class CholeskySolution:
    solution: np.ndarray
    jitter: float = 0.0
    factor: Any = field(default=None, repr=False)


def _potrf(matrix: np.ndarray) -> tuple[np.ndarray, int]:
    lower, info = lapack.dpotrf(matrix, lower=1, clean=1)
    return lower, int(info)


def cholesky(
    a: SymMatrix | np.ndarray, jitter_policy: JitterPolicy = JitterPolicy.LADDER
) -> CholeskyFactor:
    """
    Factor a symmetric positive definite matrix.

    With the ladder policy the factorization is retried with
    1e-10, 1e-9, 1e-8 and 1e-7 times trace(A)/dim added to the diagonal.

    Raises:
        DecompositionError: If the matrix stays indefinite; names the failing pivot
    """
    matrix = SymMatrix.of(a).entries
    dim = matrix.shape[0]
    lower, info = _potrf(matrix)
    if info == 0:
        return CholeskyFactor(lower=lower, jitter=0.0)
    if info < 0:
        raise ValidationError(f"LAPACK potrf rejected argument {-info}")

    pivot, jitter = info - 1, 0.0
    if jitter_policy == JitterPolicy.LADDER:
        base = abs(float(np.trace(matrix))) / dim or 1.0
        for decade in range(JITTER_DECADES + 1):
            jitter = JITTER_START * 10.0**decade * base
            lower, info = _potrf(matrix + jitter * np.eye(dim))
            if info == 0:
                logger.info("cholesky.jitter", dim=dim, jitter=jitter)
                return CholeskyFactor(lower=lower, jitter=jitter)
            pivot = info - 1
    raise DecompositionError(pivot=pivot, jitter=jitter, dim=dim)


def chol_solve(
    a: SymMatrix | np.ndarray,
    b: np.ndarray,
    jitter_policy: JitterPolicy = JitterPolicy.LADDER,
) -> CholeskySolution:
    """
    Solve ``A X = B`` for symmetric positive definite ``A``.

    Returns:
        CholeskySolution: The solution together with the jitter that was applied
    """
    rhs = validators.validate_finite(b, "right-hand side")
    factor = cholesky(a, jitter_policy)
    return CholeskySolution(
        solution=factor.solve(rhs), jitter=factor.jitter, factor=factor
    )


def solve_spd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Ladder-jittered SPD solve returning only X; skips input validation."""
    lower, info = _potrf(a)
    if info == 0:
        return lapack.dpotrs(lower, b, lower=1)[0]
    return cholesky(a).solve(b)


def sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + np.swapaxes(a, -1, -2))
