import numpy as np
import pytest
from pydantic import ValidationError as PydanticValidationError

from services.lgp import (
    CovarianceQuery,
    Hyperparams,
    ModelRepository,
    TrainingSet,
    ZeroPrior,
    build_terms,
    fit,
    gram,
    kernel_tau,
    optimize_hyper,
    predict_components,
    predict_cov,
    predict_tau,
    se_pack,
)
from shared.exceptions import NotFoundError, StorageError, ValidationError

pytestmark = pytest.mark.unit


def _rmse(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sqrt(np.mean((a - b) ** 2)))


class TestSquaredExponential:
    lengths = np.array([0.7, 1.3])

    def test_gradients_match_finite_differences(self):
        z1, z2 = np.array([[0.2, -0.4]]), np.array([[0.5, 0.1]])
        pack = se_pack(z1, z2, self.lengths)
        h = 1e-6
        for p in range(2):
            step = np.zeros((1, 2))
            step[0, p] = h
            left = (
                se_pack(z1 + step, z2, self.lengths).value
                - se_pack(z1 - step, z2, self.lengths).value
            ) / (2 * h)
            right = (
                se_pack(z1, z2 + step, self.lengths).value
                - se_pack(z1, z2 - step, self.lengths).value
            ) / (2 * h)
            assert pack.grad_left[0, 0, p] == pytest.approx(left[0, 0], abs=1e-8)
            assert pack.grad_right[0, 0, p] == pytest.approx(right[0, 0], abs=1e-8)

    @pytest.mark.parametrize("symmetric", [False, True])
    def test_mixed_hessian_matches_finite_differences(self, symmetric):
        z1, z2 = np.array([[0.3, 0.2]]), np.array([[-0.1, 0.6]])
        pack = se_pack(z1, z2, self.lengths, symmetric)
        h = 1e-6
        for r in range(2):
            step = np.zeros((1, 2))
            step[0, r] = h
            column = (
                se_pack(z1, z2 + step, self.lengths, symmetric).grad_left
                - se_pack(z1, z2 - step, self.lengths, symmetric).grad_left
            ) / (2 * h)
            assert np.allclose(pack.hessian[0, 0, :, r], column[0, 0], atol=1e-7)

    def test_symmetric_kernel_is_even(self):
        z, other = np.array([[0.4, -0.9]]), np.array([[0.1, 0.3]])
        plain = se_pack(z, other, self.lengths, symmetric=True).value
        mirrored = se_pack(-z, other, self.lengths, symmetric=True).value
        assert plain[0, 0] == pytest.approx(mirrored[0, 0])


class TestHyperparams:
    def test_default_layout(self):
        hyper = Hyperparams.default(3)
        assert len(hyper.kinetic_amplitudes) == 6
        assert hyper.dof == 3
        kinds = [term.kind for term in build_terms(hyper)]
        assert kinds.count("kinetic") == 6
        assert kinds.count("dissipation") == 3
        assert "elastic" not in kinds

    def test_log_vector_recovers_parameters(self):
        hyper = Hyperparams.default(2, elastic=0.3)
        vector = hyper.to_log_vector()
        again = hyper.from_log_vector(vector)
        assert np.allclose(again.to_log_vector(), vector)
        assert again.elastic_amplitudes == pytest.approx([0.3, 0.3])

    def test_zero_amplitudes_stay_fixed(self):
        hyper = Hyperparams.default(2, dissipation=0.0)
        free = hyper.to_log_vector()
        assert hyper.from_log_vector(free).dissipation_amplitudes == [0.0, 0.0]
        with pytest.raises(ValidationError):
            hyper.from_log_vector(np.append(free, 0.0))

    def test_shape_errors(self):
        with pytest.raises(PydanticValidationError):
            Hyperparams(
                kinetic_amplitudes=[1.0],
                gravity_lengths=[1.0, 1.0],
                dissipation_amplitudes=[1.0, 1.0],
                dissipation_lengths=[1.0, 1.0],
            )


class TestTrainingSet:
    def test_frame_round_trip_and_concat(self, training):
        again = TrainingSet.from_frame(training.to_frame(), torque_noise=0.05)
        assert np.array_equal(again.y, training.y)
        assert training.concat(again).size == 2 * training.size

    def test_rejects_uneven_columns(self):
        with pytest.raises(ValidationError):
            TrainingSet(
                q=np.zeros((3, 2)),
                dq=np.zeros((3, 2)),
                ddq=np.zeros((2, 2)),
                y=np.zeros((3, 2)),
            )

    def test_missing_columns(self, training):
        with pytest.raises(ValidationError):
            TrainingSet.from_frame(training.to_frame().drop(columns=["y_2"]))


def _lagrangian(term, f, q: np.ndarray, dq: np.ndarray) -> float:
    k, l = term.index
    if term.kind == "kinetic":
        weight = 0.5 if k == l else 1.0
        return weight * f(q) * dq[k] * dq[l]
    if term.kind == "gravity":
        return -f(q)
    return -0.5 * f(q) * q[k] ** 2


def _torque_of(term, f, x: np.ndarray, n: int, h: float = 1e-4) -> np.ndarray:
    """d/dt ∂L/∂q̇ − ∂L/∂q for a latent sample f, by finite differences."""
    q, dq, ddq = x[:n], x[n : 2 * n], x[2 * n :]
    if term.kind == "dissipation":
        k = term.index[0]
        force = np.zeros(n)
        force[k] = f(dq[k : k + 1]) * dq[k]
        return force
    eye = np.eye(n)

    def lag(position: np.ndarray, velocity: np.ndarray) -> float:
        return _lagrangian(term, f, position, velocity)

    def momentum(t: float) -> np.ndarray:
        qt, vt = q + t * dq + 0.5 * t * t * ddq, dq + t * ddq
        # L is at most quadratic in q̇, so a unit central step is exact
        return np.array([0.5 * (lag(qt, vt + e) - lag(qt, vt - e)) for e in eye])

    rate = (momentum(h) - momentum(-h)) / (2 * h)
    slope = np.array([lag(q + h * e, dq) - lag(q - h * e, dq) for e in eye])
    return rate - slope / (2 * h)


def _kernel_by_operators(x1: np.ndarray, x2: np.ndarray, hyper) -> np.ndarray:
    n = hyper.dof
    total = np.zeros((n, n))
    for term in build_terms(hyper):

        def k(z1, z2, term=term):
            pack = se_pack(z1[None], z2[None], term.lengths, term.symmetric)
            return term.variance * pack.value[0, 0]

        for j in range(n):

            def inner(z1, j=j, k=k, term=term):
                return _torque_of(term, lambda z2: k(z1, z2), x2, n)[j]

            total[:, j] += _torque_of(term, inner, x1, n)
    return total


class TestKernel:
    @pytest.mark.parametrize("symmetric", [False, True])
    def test_torque_kernel_matches_lagrangian_operators(self, rng, symmetric):
        hyper = Hyperparams.default(2, elastic=0.4, symmetric=symmetric)
        x1, x2 = rng.normal(size=6), rng.normal(size=6)
        expected = _kernel_by_operators(x1, x2, hyper)
        assert np.allclose(kernel_tau(x1, x2, hyper), expected, rtol=1e-5, atol=1e-6)

    def test_torque_kernel_is_symmetric_in_its_arguments(self, hyper, rng):
        x1, x2 = rng.normal(size=6), rng.normal(size=6)
        assert np.allclose(kernel_tau(x1, x2, hyper), kernel_tau(x2, x1, hyper).T)

    def test_gram_is_positive_semidefinite(self, training, hyper):
        matrix = gram(training, hyper)
        assert np.allclose(matrix, matrix.T)
        assert np.linalg.eigvalsh(matrix)[0] > 0.0


class TestPosterior:
    def test_mean_torque_splits_into_components(self, lgp_model, rng):
        q, dq, ddq = rng.normal(size=2), rng.normal(size=2), rng.normal(size=2)
        tau = predict_tau(lgp_model, np.concatenate([q, dq, ddq]))
        parts = predict_components(lgp_model, q, dq)
        assert np.allclose(parts.components.inverse_dynamics(ddq), tau, atol=1e-8)

    def test_fit_beats_erroneous_prior(self, lgp_model, training, prior_spec):
        prior = prior_spec.build()
        prior_tau = np.array(
            [
                prior.inverse_dynamics(*row)
                for row in zip(training.q, training.dq, training.ddq)
            ]
        )
        posterior = np.array([predict_tau(lgp_model, x) for x in training.inputs])
        assert _rmse(posterior, training.y) < 0.5 * _rmse(prior_tau, training.y)

    def test_prior_explaining_data_gives_zero_weights(
        self, training, hyper, prior_spec
    ):
        prior = prior_spec.build()
        exact = np.array(
            [
                prior.inverse_dynamics(*row)
                for row in zip(training.q, training.dq, training.ddq)
            ]
        )
        data = TrainingSet(
            training.q, training.dq, training.ddq, exact, torque_noise=0.05
        )
        model = fit(data, hyper, prior)
        assert np.all(model.weights == 0.0)

    def test_potential_gradient_is_gravity(self, lgp_model):
        q = np.array([0.3, -0.6])
        h = 1e-5
        grad = [
            (lgp_model.potential(q + h * e) - lgp_model.potential(q - h * e)) / (2 * h)
            for e in np.eye(2)
        ]
        assert np.allclose(lgp_model.gravity(q), grad, atol=1e-5)
        assert lgp_model.potential(np.zeros(2)) == pytest.approx(0.0, abs=1e-12)

    def test_coriolis_keeps_skew_symmetry(self, lgp_model):
        q, dq = np.array([0.2, 0.4]), np.array([1.0, -0.5])
        c = predict_components(lgp_model, q, dq).components
        m_dot = np.einsum("kij,k->ij", c.mass_derivative, c.dq)
        n = m_dot - 2.0 * c.C
        assert np.allclose(n, -n.T, atol=1e-10)

    def test_covariance_shrinks_at_training_inputs(self, lgp_model, training, hyper):
        x = training.inputs[4]
        n = training.dof
        query = CovarianceQuery(q=x[:n], dq=x[n : 2 * n], ddq=x[2 * n :])
        sigma = predict_cov(lgp_model, query).entries
        assert np.linalg.eigvalsh(sigma)[0] >= -1e-10
        assert np.trace(sigma) < np.trace(kernel_tau(x, x, hyper))

    def test_mass_is_acceleration_derivative_of_torque(self, lgp_model, rng):
        q, dq, ddq = rng.normal(size=2), rng.normal(size=2), rng.normal(size=2)
        columns = []
        for step in np.eye(2):
            ahead = predict_tau(lgp_model, np.concatenate([q, dq, ddq + step]))
            behind = predict_tau(lgp_model, np.concatenate([q, dq, ddq - step]))
            columns.append(0.5 * (ahead - behind))
        mass = predict_components(lgp_model, q, dq).components.M
        assert np.allclose(mass, np.column_stack(columns), rtol=1e-6, atol=1e-9)

    def test_far_from_data_reverts_to_prior(self, lgp_model, hyper):
        q, dq, ddq = np.array([40.0, -40.0]), np.array([30.0, -30.0]), np.ones(2)
        x = np.concatenate([q, dq, ddq])
        prior_tau = lgp_model.prior.components(q, dq).inverse_dynamics(ddq)
        assert np.allclose(predict_tau(lgp_model, x), prior_tau, rtol=1e-9)
        sigma = predict_cov(lgp_model, CovarianceQuery(q=q, dq=dq, ddq=ddq)).entries
        assert np.allclose(sigma, kernel_tau(x, x, hyper), rtol=1e-9, atol=1e-12)

    def test_near_noiseless_fit_interpolates(self, arm, hyper, prior_spec, rng):
        q = np.array([[-1.5, -1.5], [1.5, -1.5], [0.0, 0.0], [-1.5, 1.5], [1.5, 1.5]])
        dq = rng.uniform(-1.0, 1.0, size=q.shape)
        ddq = rng.uniform(-2.0, 2.0, size=q.shape)
        y = np.array([arm.inverse_dynamics(*row) for row in zip(q, dq, ddq)])
        data = TrainingSet(q, dq, ddq, y, torque_noise=1e-8)
        model = fit(data, hyper, prior_spec.build())
        predicted = np.array([predict_tau(model, x) for x in data.inputs])
        assert np.linalg.norm(predicted - y) <= 1e-6 * np.linalg.norm(y)

    def test_conservative_power_balance(self, lgp_model, rng):
        q, dq, ddq = rng.normal(size=2), rng.normal(size=2), rng.normal(size=2)
        h = 1e-5

        def energy(t: float) -> float:
            qt, vt = q + t * dq + 0.5 * t * t * ddq, dq + t * ddq
            parts = predict_components(lgp_model, qt, vt)
            return parts.kinetic + parts.potential

        rate = (energy(h) - energy(-h)) / (2 * h)
        tau = predict_tau(lgp_model, np.concatenate([q, dq, ddq]))
        dissipative = predict_components(lgp_model, q, dq).components.d
        assert dq @ (tau - dissipative) == pytest.approx(rate, rel=1e-6, abs=1e-8)

    def test_symmetric_kernel_gives_odd_gravity(self, training):
        prior = ZeroPrior(dof=2).build()
        model = fit(training, Hyperparams.default(2, symmetric=True), prior)
        for q in (np.array([0.3, -0.7]), np.array([1.2, 0.4])):
            assert np.allclose(model.gravity(-q), -model.gravity(q), atol=1e-10)

    def test_dof_mismatch(self, training):
        with pytest.raises(ValidationError):
            fit(training, Hyperparams.default(3), None)


class TestModelRepository:
    def test_save_and_load_reproduce_predictions(self, lgp_model, tmp_path):
        repository = ModelRepository(tmp_path)
        repository.save(lgp_model, "model")
        loaded = repository.load("model")
        x = np.array([0.1, -0.2, 0.5, 0.3, 1.0, -1.0])
        assert np.array_equal(loaded.weights, lgp_model.weights)
        assert np.allclose(predict_tau(loaded, x), predict_tau(lgp_model, x))
        assert repository.list() == ["model"]

    def test_missing_model(self, tmp_path):
        with pytest.raises(NotFoundError):
            ModelRepository(tmp_path).load("model")

    def test_foreign_document(self, tmp_path):
        (tmp_path / "model.yml").write_text("kind: something_else\n", encoding="utf-8")
        with pytest.raises(StorageError):
            ModelRepository(tmp_path).load("model")


class TestHyperSearch:
    def test_budget_of_one_returns_initial_guess(self, training, hyper, prior_spec):
        search = optimize_hyper(training, hyper, prior_spec.build(), budget=1)
        assert search.hyper == hyper
        assert search.evaluations == 1
        assert search.objective == search.initial_objective

    def test_search_never_worsens_objective(self, training, hyper, prior_spec):
        search = optimize_hyper(training, hyper, prior_spec.build(), budget=15)
        assert search.objective <= search.initial_objective
        assert search.evaluations > 1

    def test_rejects_empty_budget_and_missing_target(self, training, hyper, prior_spec):
        prior = prior_spec.build()
        with pytest.raises(ValidationError):
            optimize_hyper(training, hyper, prior, budget=0)
        with pytest.raises(ValidationError):
            optimize_hyper(training, hyper, prior, objective="resimulation")
