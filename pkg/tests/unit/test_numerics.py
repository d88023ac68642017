import numpy as np
import pytest

from shared.exceptions import DecompositionError, ValidationError
from shared.numerics import (
    JitterPolicy,
    SymMatrix,
    assemble_metric,
    assemble_upsilon,
    chol_solve,
    cholesky,
    eig_extremes,
    metric_eigs_closed,
    metric_pair,
    metric_positive,
    sym_eig,
    upsilon_eigs_closed,
)

pytestmark = pytest.mark.unit


def _spd(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.normal(size=(n, n))
    return a @ a.T + n * np.eye(n)


class TestSymMatrix:
    def test_symmetrizes_entries(self):
        matrix = SymMatrix(np.array([[1.0, 2.0], [0.0, 3.0]]))
        assert np.array_equal(matrix.entries, [[1.0, 1.0], [1.0, 3.0]])
        assert matrix.dim == 2

    def test_rejects_empty_and_rectangular(self):
        with pytest.raises(ValidationError):
            SymMatrix(np.zeros((0, 0)))
        with pytest.raises(ValidationError):
            SymMatrix(np.zeros((2, 3)))

    def test_of_passes_instances_through(self):
        matrix = SymMatrix(np.eye(2))
        assert SymMatrix.of(matrix) is matrix


class TestJacobi:
    def test_matches_lapack_spectrum(self, rng):
        a = rng.normal(size=(6, 6))
        a = a + a.T
        decomp = sym_eig(a)
        assert np.allclose(decomp.eigenvalues, np.linalg.eigvalsh(a), atol=1e-9)

    def test_eigenvectors_reconstruct_matrix(self, rng):
        a = _spd(rng, 5)
        decomp = sym_eig(a)
        v = decomp.eigenvectors
        assert np.allclose(v.T @ v, np.eye(5), atol=1e-10)
        assert np.allclose((v * decomp.eigenvalues) @ v.T, a, atol=1e-9)

    def test_extremes_of_diagonal(self):
        assert eig_extremes(np.diag([3.0, -1.0, 2.0])) == (-1.0, 3.0)


class TestCholesky:
    def test_factor_without_jitter(self, rng):
        a = _spd(rng, 4)
        factor = cholesky(a)
        assert factor.jitter == 0.0
        assert np.allclose(factor.lower @ factor.lower.T, a)

    def test_singular_matrix_gets_jitter(self):
        factor = cholesky(np.ones((3, 3)))
        assert 0.0 < factor.jitter <= 1e-7

    def test_indefinite_without_ladder_names_pivot(self):
        with pytest.raises(DecompositionError) as info:
            cholesky(np.diag([1.0, -1.0]), JitterPolicy.NONE)
        assert info.value.pivot == 1
        assert info.value.exit_code == 2

    def test_indefinite_after_ladder_reports_jitter(self):
        with pytest.raises(DecompositionError) as info:
            cholesky(np.diag([1.0, -1.0]))
        assert info.value.jitter > 0.0

    def test_solve_matches_dense_solver(self, rng):
        a = _spd(rng, 5)
        b = rng.normal(size=5)
        result = chol_solve(a, b)
        assert np.allclose(result.solution, np.linalg.solve(a, b))
        rhs = b[:, None]
        assert np.allclose(
            result.factor.half_solve(rhs), np.linalg.solve(result.factor.lower, rhs)
        )

    def test_rejects_non_finite_rhs(self):
        with pytest.raises(ValidationError):
            chol_solve(np.eye(2), np.array([1.0, np.nan]))


class TestBlockSpectra:
    def test_metric_closed_form_matches_assembled(self, rng):
        mhat = _spd(rng, 3)
        kappa, eps = 12.0, 0.4
        closed = metric_eigs_closed(kappa, np.linalg.eigvalsh(mhat), eps)
        dense = np.linalg.eigvalsh(assemble_metric(kappa * np.eye(3), mhat, eps))
        assert np.allclose(closed, dense, atol=1e-9)

    def test_upsilon_closed_form_matches_assembled(self, rng):
        mhat = _spd(rng, 3)
        args = (4.0, 1.5, 9.0, 0.3, 0.2)
        closed = upsilon_eigs_closed(*args, np.linalg.eigvalsh(mhat))
        dense = np.linalg.eigvalsh(assemble_upsilon(*args, mhat))
        assert np.allclose(closed, dense, atol=1e-9)

    def test_closed_forms_over_random_draws(self):
        rng = np.random.default_rng(99)
        worst = 0.0
        for _ in range(1000):
            n = int(rng.integers(1, 5))
            basis, _ = np.linalg.qr(rng.normal(size=(n, n)))
            inertia = rng.uniform(0.1, 3.0, size=n)
            mhat = basis @ np.diag(inertia) @ basis.T
            mhat = 0.5 * (mhat + mhat.T)
            kappa = rng.uniform(1.0, 20.0)
            eps = rng.uniform(0.01, 0.99) * np.sqrt(kappa / inertia.max())
            closed = metric_eigs_closed(kappa, inertia, eps)
            dense = np.linalg.eigvalsh(assemble_metric(kappa * np.eye(n), mhat, eps))
            worst = max(worst, float(np.max(np.abs(closed - dense))))

            args = (
                rng.uniform(-5.0, 10.0),
                rng.uniform(-5.0, 5.0),
                rng.uniform(0.0, 15.0),
                eps,
                rng.uniform(0.0, 1.0),
            )
            closed = upsilon_eigs_closed(*args, inertia)
            dense = np.linalg.eigvalsh(assemble_upsilon(*args, mhat))
            worst = max(worst, float(np.max(np.abs(closed - dense))))
        assert worst < 1e-9

    def test_metric_positivity_boundary(self):
        assert metric_positive(4.0, 1.0, 1.99)
        assert not metric_positive(4.0, 1.0, 2.0)
        lower, _ = metric_pair(4.0, 1.0, 1.99)
        assert lower > 0.0
        lower, _ = metric_pair(4.0, 1.0, 2.01)
        assert lower < 0.0

    def test_rejects_non_positive_inertia(self):
        with pytest.raises(ValidationError):
            metric_eigs_closed(1.0, [0.5, 0.0], 0.1)
