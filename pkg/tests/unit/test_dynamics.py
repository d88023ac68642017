import numpy as np
import pytest

from services.dynamics import (
    CcMap,
    ConstantTorque,
    FemRod,
    FemRodParams,
    JointState,
    ReducedChainModel,
    Trajectory,
    TwoLinkArm,
    UnitMassPlant,
    cc_actuate,
    cc_embed,
    cc_reduce,
    fem_rod_components,
    forward_dynamics,
    integrate,
    nominal_cc_torque,
    two_link_components,
)
from shared.exceptions import ValidationError

pytestmark = pytest.mark.unit


def _skew_residual(components) -> float:
    m_dot = np.einsum("kij,k->ij", components.mass_derivative, components.dq)
    n = m_dot - 2.0 * components.C
    return float(np.max(np.abs(n + n.T)))


def _fd_mass_derivative(model, q: np.ndarray, h: float = 1e-6) -> np.ndarray:
    out = np.empty((q.size, q.size, q.size))
    for k in range(q.size):
        step = np.zeros_like(q)
        step[k] = h
        out[k] = (model.mass_matrix(q + step) - model.mass_matrix(q - step)) / (2 * h)
    return out


class TestTwoLinkArm:
    def test_mass_derivative_matches_finite_differences(self, arm):
        q = np.array([0.3, -1.1])
        numeric = _fd_mass_derivative(arm, q)
        assert np.allclose(arm.mass_derivative(q), numeric, atol=1e-7)

    def test_mdot_minus_2c_is_skew(self, arm):
        c = arm.components(np.array([0.4, 0.9]), np.array([-1.2, 0.7]))
        assert _skew_residual(c) < 1e-12

    def test_gravity_is_potential_gradient(self, arm):
        q = np.array([0.7, -0.2])
        h = 1e-6
        grad = [
            (arm.potential(q + h * e) - arm.potential(q - h * e)) / (2 * h)
            for e in np.eye(2)
        ]
        assert np.allclose(arm.gravity(q), grad, atol=1e-6)
        assert arm.potential(np.zeros(2)) == 0.0

    def test_forward_inverse_consistency(self, arm):
        q, dq, tau = np.array([0.1, 0.5]), np.array([1.0, -0.3]), np.array([2.0, -1.0])
        ddq = forward_dynamics(arm.components(q, dq), tau)
        assert np.allclose(arm.inverse_dynamics(q, dq, ddq), tau)
        assert np.allclose(arm.acceleration(q, dq, tau), ddq)

    def test_biased_parameters(self, arm_params):
        biased = arm_params.biased([0.5, -0.5])
        assert biased.masses == [1.5, 0.5]
        assert biased.lengths == [1.5, 0.5]
        assert biased.damping_linear == pytest.approx(0.5)
        assert biased.damping_quadratic == pytest.approx(1.5)
        with pytest.raises(ValidationError):
            arm_params.biased([0.1])

    def test_undamped_free_motion_conserves_energy(self, arm_params):
        arm = TwoLinkArm(arm_params.undamped())
        x0 = JointState(q=np.array([1.0, -0.5]), dq=np.array([0.0, 1.0]))
        traj = integrate(arm, ConstantTorque(np.zeros(2)), x0, t_end=2.0, dt=1e-3)
        assert not traj.diverged
        start = arm.energies(traj.q[0], traj.dq[0]).total
        end = arm.energies(traj.q[-1], traj.dq[-1]).total
        assert abs(end - start) <= 1e-6 * abs(start)

    @pytest.mark.slow
    def test_long_undamped_run_conserves_energy(self, arm_params):
        arm = TwoLinkArm(arm_params.undamped())
        x0 = JointState(q=np.array([1.0, -0.5]), dq=np.array([0.0, 1.0]))
        traj = integrate(arm, ConstantTorque(np.zeros(2)), x0, t_end=10.0, dt=1e-4)
        assert not traj.diverged
        energy = np.array([arm.energies(q, dq).total for q, dq in zip(traj.q, traj.dq)])
        assert np.max(np.abs(energy - energy[0])) < 1e-6 * abs(energy[0])

    def test_damped_free_motion_never_gains_energy(self, arm):
        x0 = JointState(q=np.array([1.2, -0.8]), dq=np.array([0.5, 1.5]))
        traj = integrate(arm, ConstantTorque(np.zeros(2)), x0, t_end=3.0, dt=1e-3)
        assert not traj.diverged
        energy = np.array([arm.energies(q, dq).total for q, dq in zip(traj.q, traj.dq)])
        assert np.all(np.diff(energy) <= 1e-9)
        assert energy[-1] < energy[0]


class TestLinkChain:
    @pytest.fixture
    def rod(self) -> FemRod:
        return FemRod(FemRodParams(n_elems=6))

    def test_mass_derivative_matches_finite_differences(self, rod):
        q = np.linspace(-0.3, 0.4, 6)
        numeric = _fd_mass_derivative(rod, q)
        assert np.allclose(rod.mass_derivative(q), numeric, atol=1e-7)

    def test_coriolis_force_matches_christoffel(self, rod, rng):
        q, dq = rng.normal(size=6), rng.normal(size=6)
        c = rod.components(q, dq)
        assert np.allclose(rod.coriolis_force(q, dq), c.C @ dq, atol=1e-10)
        assert _skew_residual(c) < 1e-10

    def test_mass_matrix_matches_jacobian_sum(self, rng):
        params = FemRodParams(n_elems=5)
        n = params.n_elems
        length, mass = params.element_length, params.element_mass
        q = rng.uniform(-0.8, 0.8, size=n)
        phi = np.cumsum(q)
        expected = np.zeros((n, n))
        for i in range(n):
            linear = np.zeros((2, n))
            angular = np.zeros(n)
            for r in range(n):
                angular[r] = 1.0 if i >= r else 0.0
                for j in range(r, i + 1):
                    arm = 0.5 * length if j == i else length
                    linear[:, r] += arm * np.array([-np.sin(phi[j]), np.cos(phi[j])])
            expected += mass * linear.T @ linear
            expected += params.element_inertia * np.outer(angular, angular)
        actual = FemRod(params).mass_matrix(q)
        assert np.linalg.norm(actual - expected) <= 1e-9 * np.linalg.norm(expected)

    def test_mass_matrix_positive_definite(self, rod, rng):
        assert np.linalg.eigvalsh(rod.mass_matrix(rng.normal(size=6)))[0] > 0.0

    def test_straight_rod_is_equilibrium(self, rod):
        assert np.allclose(rod.gravity(np.zeros(6)), 0.0)
        assert rod.potential(np.zeros(6)) == 0.0


class TestCcMap:
    def test_reduce_inverts_embed(self):
        ccmap = CcMap(n_segments=3, n_elems=10)
        q_cc = np.array([0.2, -0.4, 1.0])
        assert np.allclose(ccmap.reduce(ccmap.embed(q_cc)), q_cc)
        assert ccmap.segment_sizes.sum() == 10

    def test_actuation_projects_back(self):
        ccmap = CcMap(n_segments=4, n_elems=9)
        tau = np.array([1.0, -2.0, 0.5, 3.0])
        assert np.allclose(ccmap.assignment.T @ ccmap.actuate(tau), tau)
        assert np.allclose(cc_actuate(ccmap, tau), ccmap.actuate(tau))

    def test_embedded_angles_sum_to_segment_curvature(self):
        ccmap = CcMap(n_segments=2, n_elems=6)
        q_fem = ccmap.embed(np.array([0.9, -0.3]))
        assert q_fem[:3].sum() == pytest.approx(0.9)
        assert q_fem[3:].sum() == pytest.approx(-0.3)

    def test_state_round_trip(self):
        ccmap = CcMap(n_segments=2, n_elems=8)
        state = JointState(q=np.array([0.5, -0.2]), dq=np.array([1.0, 0.0]))
        back = cc_reduce(ccmap, cc_embed(ccmap, state))
        assert np.allclose(back.q, state.q) and np.allclose(back.dq, state.dq)

    def test_rejects_more_segments_than_elements(self):
        with pytest.raises(ValidationError):
            CcMap(n_segments=5, n_elems=4)

    def test_nominal_torque_of_static_straight_rod_is_zero(self):
        rod = FemRod(FemRodParams(n_elems=8))
        ccmap = CcMap(n_segments=2, n_elems=8)
        zero = np.zeros(2)
        assert np.allclose(nominal_cc_torque(rod, ccmap, zero, zero, zero), 0.0)


def test_reduced_chain_prior_has_cc_dimension():
    model = ReducedChainModel(
        FemRodParams(n_elems=12), n_segments=3, chi=[0.1, 0.0, -0.1]
    )
    c = model.components(np.array([0.1, 0.2, -0.1]), np.array([0.0, 1.0, 0.5]))
    assert c.M.shape == (3, 3)
    assert np.linalg.eigvalsh(c.M)[0] > 0.0
    with pytest.raises(ValidationError):
        ReducedChainModel(FemRodParams(n_elems=12), n_segments=3, chi=[0.1])


class TestIntegrate:
    def test_unit_mass_under_constant_torque(self):
        plant = UnitMassPlant(1)
        traj = integrate(
            plant,
            ConstantTorque(np.array([2.0])),
            JointState.at_rest(np.zeros(1)),
            1.0,
            0.01,
        )
        assert len(traj) == 101
        assert traj.q[-1, 0] == pytest.approx(1.0, abs=1e-9)
        assert traj.dq[-1, 0] == pytest.approx(2.0, abs=1e-9)

    def test_blow_up_is_recorded_as_divergence(self):
        plant = UnitMassPlant(1)
        traj = integrate(
            plant,
            ConstantTorque(np.array([1e9])),
            JointState.at_rest(np.zeros(1)),
            1.0,
            0.01,
        )
        assert traj.diverged
        assert len(traj) == 1
        assert traj.divergence_time == pytest.approx(0.01)

    def test_semi_implicit_rod_loses_energy(self):
        rod = FemRod(FemRodParams(n_elems=5))
        x0 = JointState.at_rest(np.full(5, 0.1))
        traj = integrate(
            rod, ConstantTorque(np.zeros(5)), x0, 0.5, 1e-3, method="semi_implicit"
        )
        assert not traj.diverged
        start = rod.energies(traj.q[0], traj.dq[0]).total
        assert rod.energies(traj.q[-1], traj.dq[-1]).total < start

    @pytest.mark.parametrize(
        "kwargs",
        [{"dt": 0.0}, {"t_end": 1e-4}, {"method": "euler"}, {"substeps": 0}],
    )
    def test_rejects_bad_arguments(self, kwargs):
        args = {"t_end": 1.0, "dt": 0.01}
        args.update(kwargs)
        with pytest.raises(ValidationError):
            integrate(
                UnitMassPlant(1),
                ConstantTorque(np.zeros(1)),
                JointState.at_rest(np.zeros(1)),
                **args,
            )

    def test_rejects_mismatched_state(self):
        with pytest.raises(ValidationError):
            integrate(
                UnitMassPlant(2),
                ConstantTorque(np.zeros(2)),
                JointState.at_rest(np.zeros(1)),
                1.0,
                0.1,
            )


def test_trajectory_window_and_ordering():
    times = np.array([0.0, 0.5, 1.0, 1.5])
    block = np.zeros((4, 1))
    traj = Trajectory(times=times, q=block, dq=block, tau=block)
    assert traj.dt == 0.5
    assert list(traj.window(1.0)) == [2, 3]
    with pytest.raises(ValidationError):
        Trajectory(times=times[::-1], q=block, dq=block, tau=block)


def test_component_functions_match_plants(arm_params):
    state = JointState(q=np.array([0.4, -0.3]), dq=np.array([0.2, 0.5]))
    c = two_link_components(arm_params, state)
    tau = np.array([1.0, -2.0])
    expected = TwoLinkArm(arm_params).acceleration(state.q, state.dq, tau)
    assert np.allclose(forward_dynamics(c, tau), expected)

    rod = FemRodParams(n_elems=6)
    rod_state = JointState(q=np.linspace(-0.2, 0.2, 6), dq=np.zeros(6))
    rc = fem_rod_components(rod, rod_state)
    assert rc.M.shape == (6, 6)
    assert np.allclose(rc.M, rc.M.T)
    assert np.linalg.eigvalsh(rc.M)[0] > 0.0
