import math

import numpy as np
import pytest

from zenocav import (
    IntegrationError,
    MasterEquationSpec,
    Trajectory,
    compare_trajectories,
    evolve,
    liouvillian,
    named_state,
    rk4_propagator,
    vectorize,
)
from zenocav.models import ModelParams, Variant, build_effective_bell

from conftest import random_density_matrix

P0 = np.diag([1.0, 0.0])
P1 = np.diag([0.0, 1.0])


def toy_model(h, collapse_ops=()):
    dim = np.asarray(h).shape[0]
    return MasterEquationSpec(
        hamiltonian=h,
        collapse_ops=tuple(collapse_ops),
        basis_labels=tuple(str(i) for i in range(dim)),
        params=None,
    )


def damping_model(gamma):
    lower = np.zeros((2, 2))
    lower[0, 1] = math.sqrt(gamma)
    return toy_model(np.zeros((2, 2)), [lower])


def naive_rk4(liouv, vec, dt, steps):
    """Textbook RK4 on the vectorized equation, one matrix-vector at a time."""

    def f(v):
        return liouv @ v

    for _ in range(steps):
        k1 = f(vec)
        k2 = f(vec + 0.5 * dt * k1)
        k3 = f(vec + 0.5 * dt * k2)
        k4 = f(vec + dt * k3)
        vec = vec + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return vec


# -- propagator ------------------------------------------------------------------


def test_propagator_matches_naive_stepper(rng):
    h = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    h = h + h.conj().T
    c = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    liouv = liouvillian(h, [0.3 * c])
    vec = vectorize(random_density_matrix(rng, 3))
    dt = 0.01
    stepped = naive_rk4(liouv, vec.copy(), dt, 10)
    powered = np.linalg.matrix_power(rk4_propagator(liouv, dt), 10) @ vec
    assert np.max(np.abs(stepped - powered)) < 1e-12


def test_propagator_taylor_coefficients():
    # On a nilpotent generator the degree-4 Taylor sum is exact and finite.
    n = np.zeros((5, 5))
    n[np.arange(4), np.arange(4) + 1] = 1.0
    prop = rk4_propagator(n, 1.0)
    expected = np.eye(5) + n + n @ n / 2 + n @ n @ n / 6 + n @ n @ n @ n / 24
    assert np.max(np.abs(prop - expected)) < 1e-15


def test_step_error_is_fourth_order():
    gamma, t_end = 1.0, 2.0
    me = damping_model(gamma)
    rho0 = P1.astype(complex)
    exact = math.exp(-gamma * t_end)

    def final_error(dt):
        traj = evolve(me, rho0, t_end, dt, [("P1", P1)], sample_stride=10 ** 9)
        return abs(traj.value("P1") - exact)

    ratio = final_error(0.2) / final_error(0.1)
    assert 10.0 < ratio < 24.0


# -- evolve ---------------------------------------------------------------------


def test_zero_generator_keeps_state(rng):
    me = toy_model(np.zeros((2, 2)))
    rho0 = random_density_matrix(rng, 2)
    traj = evolve(me, rho0, 5.0, 0.5, [("P0", P0)])
    assert np.ptp(traj.records["P0"]) == 0.0
    assert np.max(np.abs(traj.final_state - rho0)) < 1e-12


def test_amplitude_damping_analytic_curve():
    gamma = 0.8
    me = damping_model(gamma)
    traj = evolve(me, P1.astype(complex), 2.0, 0.001, [("P1", P1)], sample_stride=100)
    expected = np.exp(-gamma * traj.times)
    assert np.max(np.abs(traj.records["P1"] - expected)) < 1e-9
    assert traj.final_report.passed


def test_coherence_decays_at_half_rate():
    gamma = 0.8
    me = damping_model(gamma)
    plus = np.full((2, 2), 0.5, dtype=complex)
    traj = evolve(me, plus, 2.0, 0.001, [], sample_stride=100, store_states=True)
    coherences = np.array([state[0, 1] for state in traj.states])
    expected = 0.5 * np.exp(-0.5 * gamma * traj.times)
    assert np.max(np.abs(coherences - expected)) < 1e-9


def test_zero_duration_records_initial_point(rng):
    me = toy_model(np.zeros((2, 2)))
    rho0 = random_density_matrix(rng, 2)
    traj = evolve(me, rho0, 0.0, 0.1, [("P0", P0)])
    assert traj.times.tolist() == [0.0]
    assert traj.value("P0") == pytest.approx(rho0[0, 0].real)
    assert traj.final_report.passed


def test_partial_final_step():
    gamma = 1.0
    traj = evolve(damping_model(gamma), P1.astype(complex), 1.05, 0.1, [("P1", P1)])
    assert traj.times[-1] == pytest.approx(1.05, abs=1e-12)
    assert len(traj.times) == 12  # initial + 10 full steps + remainder
    assert traj.value("P1") == pytest.approx(math.exp(-1.05), abs=1e-6)


def test_sampling_grid_with_stride():
    me = toy_model(np.zeros((2, 2)))
    traj = evolve(me, P0.astype(complex), 1.0, 0.1, [], sample_stride=3)
    assert np.allclose(traj.times, [0.0, 0.3, 0.6, 0.9, 1.0], atol=1e-12)


def test_stride_longer_than_run():
    me = toy_model(np.zeros((2, 2)))
    traj = evolve(me, P0.astype(complex), 1.0, 0.1, [], sample_stride=1000)
    assert np.allclose(traj.times, [0.0, 1.0], atol=1e-12)


def test_store_states_consistent_with_records(rng):
    me = damping_model(0.5)
    rho0 = random_density_matrix(rng, 2)
    traj = evolve(me, rho0, 1.0, 0.01, [("P1", P1)], sample_stride=20, store_states=True)
    assert len(traj.states) == len(traj.times)
    assert np.max(np.abs(traj.states[0] - rho0)) < 1e-14
    for k, state in enumerate(traj.states):
        assert np.trace(P1 @ state).real == pytest.approx(traj.records["P1"][k], abs=1e-12)


def test_unstable_step_size_detected():
    me = damping_model(1.0)
    with pytest.raises(IntegrationError, match="out of range"):
        evolve(me, P1.astype(complex), 30.0, 10.0, [("P1", P1)])


def test_rejects_non_state_input():
    me = toy_model(np.zeros((2, 2)))
    not_normalized = np.diag([1.0, 1.0]).astype(complex)
    with pytest.raises(ValueError, match="density matrix"):
        evolve(me, not_normalized, 1.0, 0.1, [])
    with pytest.raises(ValueError, match="shape"):
        evolve(me, np.eye(3, dtype=complex) / 3.0, 1.0, 0.1, [])


def test_rejects_bad_run_parameters(rng):
    me = toy_model(np.zeros((2, 2)))
    rho0 = random_density_matrix(rng, 2)
    with pytest.raises(ValueError, match="dt"):
        evolve(me, rho0, 1.0, 0.0, [])
    with pytest.raises(ValueError, match="t_end"):
        evolve(me, rho0, -1.0, 0.1, [])
    with pytest.raises(ValueError, match="sample_stride"):
        evolve(me, rho0, 1.0, 0.1, [], sample_stride=0)
    with pytest.raises(ValueError, match="observable"):
        evolve(me, rho0, 1.0, 0.1, [("bad", np.eye(3))])


def test_singlet_pumping_reaches_target():
    p = ModelParams(
        omega=0.1, omega_mw=0.05, delta=0.02, gamma=0.1, kappa=0.0,
        variant=Variant.BELL_EFFECTIVE,
    )
    me = build_effective_bell(p)
    rho0 = named_state("g00", p).projector
    target = named_state("S", p).projector
    traj = evolve(me, rho0, 1500.0, 0.01, [("P_S", target)], sample_stride=10000)
    assert traj.records["P_S"][0] == pytest.approx(0.0, abs=1e-12)
    assert traj.value("P_S") > 0.99
    assert traj.final_report.passed


# -- trajectory utilities ----------------------------------------------------------


def test_compare_identical_runs(rng):
    me = damping_model(0.5)
    rho0 = random_density_matrix(rng, 2)
    a = evolve(me, rho0, 1.0, 0.01, [("P1", P1)], sample_stride=10)
    b = evolve(me, rho0, 1.0, 0.01, [("P1", P1)], sample_stride=10)
    assert compare_trajectories(a, b, "P1") == 0.0


def test_compare_matching_grids_from_different_steps():
    me = damping_model(0.5)
    a = evolve(me, P1.astype(complex), 1.0, 0.01, [("P1", P1)], sample_stride=10)
    b = evolve(me, P1.astype(complex), 1.0, 0.005, [("P1", P1)], sample_stride=20)
    dev = compare_trajectories(a, b, "P1")
    assert dev < 1e-9


def test_compare_rejects_mismatched_grids():
    me = damping_model(0.5)
    a = evolve(me, P1.astype(complex), 1.0, 0.01, [("P1", P1)], sample_stride=10)
    b = evolve(me, P1.astype(complex), 1.0, 0.01, [("P1", P1)], sample_stride=5)
    with pytest.raises(ValueError, match="length"):
        compare_trajectories(a, b, "P1")
    with pytest.raises(KeyError, match="P0"):
        compare_trajectories(a, a, "P0")


def test_csv_round_trip(tmp_path, rng):
    me = damping_model(0.5)
    rho0 = random_density_matrix(rng, 2)
    traj = evolve(me, rho0, 1.0, 0.01, [("P0", P0), ("P1", P1)], sample_stride=25)
    path = tmp_path / "run.csv"
    traj.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# units: g = 1; time in 1/g"
    assert lines[1] == "time,P0,P1"
    assert len(lines) == 2 + len(traj.times)
    last = [float(x) for x in lines[-1].split(",")]
    assert last[0] == pytest.approx(traj.times[-1], abs=1e-10)
    assert last[1] == pytest.approx(traj.value("P0"), abs=1e-10)
    assert last[2] == pytest.approx(traj.value("P1"), abs=1e-10)


def test_trajectory_value_indexing():
    times = np.array([0.0, 1.0])
    records = {"P": np.array([0.25, 0.75])}
    traj = Trajectory(
        times=times,
        records=records,
        final_state=np.eye(2) / 2,
        final_report=None,
    )
    assert traj.labels == ("P",)
    assert traj.value("P", 0) == 0.25
    assert traj.value("P") == 0.75
