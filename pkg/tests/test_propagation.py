"""Kernel propagation against matrix-exponential and Runge-Kutta
references, exact special solutions, and trajectory bookkeeping."""

import numpy as np
import pytest
from scipy.linalg import expm

from mgtlab import (Params, make_grid, SpectralField, norm,
                    synthesize_initial_data, gaussian_profile,
                    solve_cubic, kernel_weights, kernel_eval,
                    mgt_evolve, kuznetsov_evolve, kuznetsov_rho,
                    rk4_modes, mode_ode_reference)


def _companion(params, r):
    # first-order system for (psi, psi_t, psi_tt) of one mode
    tau, delta = params.tau, params.delta
    r2 = r ** 2
    return np.array([[0.0, 1.0, 0.0],
                     [0.0, 0.0, 1.0],
                     [-r2 / tau, -(delta + tau) * r2 / tau, -1.0 / tau]])


def test_kernel_weights_reproduce_identity_at_t0():
    params = Params(tau=0.1, delta=1.0)
    lam, _, _ = __import__("mgtlab").solve_cubic_batch(
        params, np.array([0.3, 1.0, 7.0]))
    w = kernel_weights(lam)
    # sum_j w[m, slot, j] lam_j^l = delta_{slot, l}
    for ell in range(3):
        got = np.sum(w * lam[:, None, :] ** ell, axis=2)
        want = np.zeros((3, 3))
        want[:, ell] = 1.0
        assert np.allclose(got, want, atol=1e-9)


def test_mode_evolution_matches_matrix_exponential():
    params = Params(tau=0.13, delta=0.9)
    rng = np.random.default_rng(2)
    for r in (1e-2, 0.5, 2.0, 40.0):
        data = rng.standard_normal(3)
        roots = solve_cubic(params, r)
        for t in (0.0, 0.3, 2.7):
            # table[slot][l] = l-th derivative of the slot response
            state = kernel_eval(roots, t).table.T @ data
            ref = expm(_companion(params, r) * t) @ data
            assert np.allclose(state, ref, rtol=1e-8, atol=1e-12)


def test_mgt_evolve_full_grid_against_expm():
    params = Params(tau=0.1, delta=1.0)
    g = make_grid(1, points_per_dim=32, box_length=12.0)
    data = synthesize_initial_data(g, "gaussian", width=1.0,
                                   psi1_amplitude=0.4)
    times = np.array([0.0, 0.5, 2.0])
    traj = mgt_evolve(params, data, times, g)
    stacked = np.stack([d.coeffs for d in data])  # (3, modes)
    for i, t in enumerate(times):
        for m, r in enumerate(g.xi_abs.ravel()):
            if r == 0.0:
                continue  # exact zero-mode path tested separately
            ref = expm(_companion(params, float(r)) * t) @ stacked[:, m]
            got = np.array([traj.psi[i][m], traj.psi_t[i][m],
                            traj.psi_tt[i][m]])
            assert np.allclose(got, ref, rtol=1e-7, atol=1e-13)


def test_zero_mode_exact_solution():
    # tau w' + w = 0 on the mean: psi_tt = p2 e^{-t/tau},
    # psi_t = p1 + tau p2 (1 - e^{-t/tau}),
    # psi = p0 + p1 t + tau p2 (t - tau (1 - e^{-t/tau}))
    params = Params(tau=0.2, delta=1.0)
    g = make_grid(1, points_per_dim=16, box_length=5.0)
    c0 = np.zeros(g.mode_shape, complex)
    c0[0] = 0.7
    c1 = np.zeros(g.mode_shape, complex)
    c1[0] = -0.3
    c2 = np.zeros(g.mode_shape, complex)
    c2[0] = 1.1
    data = (SpectralField(g, c0), SpectralField(g, c1),
            SpectralField(g, c2))
    t = 1.7
    traj = mgt_evolve(params, data, [0.0, t], g)
    tau = params.tau
    decay = np.exp(-t / tau)
    assert traj.psi_tt[1][0] == pytest.approx(1.1 * decay, rel=1e-12)
    assert traj.psi_t[1][0] == pytest.approx(-0.3 + tau * 1.1 * (1 - decay),
                                             rel=1e-12)
    assert traj.psi[1][0] == pytest.approx(
        0.7 - 0.3 * t + tau * 1.1 * (t - tau * (1 - decay)), rel=1e-12)


def test_kuznetsov_evolve_against_expm():
    delta = 0.8
    g = make_grid(1, points_per_dim=32, box_length=12.0)
    data = synthesize_initial_data(g, "gaussian", width=1.2,
                                   psi1_amplitude=0.5)[:2]
    times = np.array([0.0, 0.9, 3.1])
    traj = kuznetsov_evolve(delta, data, times, g)
    for i, t in enumerate(times):
        for m, r in enumerate(g.xi_abs.ravel()):
            if r == 0.0:
                continue
            a = np.array([[0.0, 1.0], [-r ** 2, -delta * r ** 2]])
            ref = expm(a * t) @ np.array([data[0].coeffs[m],
                                          data[1].coeffs[m]])
            assert np.allclose([traj.psi[i][m], traj.psi_t[i][m]], ref,
                               rtol=1e-8, atol=1e-13)
        # reconstructed acceleration satisfies the equation
        acc = traj.psi_tt[i]
        r2 = g.xi_abs.ravel() ** 2
        assert np.allclose(acc, -r2 * (traj.psi[i] + delta * traj.psi_t[i]),
                           atol=1e-12)


def test_kuznetsov_rho_are_characteristic_roots():
    delta = 1.0
    for r in (0.1, 1.0, 2.0, 10.0):  # crosses the r = 2/delta degeneracy
        pair = kuznetsov_rho(delta, r)
        for rho in (pair.rho_plus, pair.rho_minus):
            assert abs(rho ** 2 + delta * r ** 2 * rho + r ** 2) < 1e-9


def test_rk4_agrees_with_kernel_on_random_modes():
    params = Params(tau=0.1, delta=1.0)
    rng = np.random.default_rng(5)
    xi = 10.0 ** rng.uniform(-2, 1, size=12)
    data = (rng.standard_normal((3, 12))
            + 1j * rng.standard_normal((3, 12)))
    times = np.linspace(0.0, 5.0, 6)
    u, v, w = rk4_modes(params, xi, data, None, times, 2.5e-4)
    for m, r in enumerate(xi):
        roots = solve_cubic(params, float(r))
        for i, t in enumerate(times):
            ref = kernel_eval(roots, float(t)).table.T @ data[:, m]
            assert np.allclose([u[i, m], v[i, m], w[i, m]], ref,
                               rtol=1e-7, atol=1e-9)


def test_mode_ode_reference_guards_step_size():
    params = Params(tau=0.1, delta=1.0)
    with pytest.raises(ValueError):
        mode_ode_reference(params, 1.0, (1.0, 0.0, 0.0),
                           t_end=1.0, dt=params.tau)


def test_trajectory_norm_ledger_matches_fields():
    params = Params(tau=0.1, delta=1.0)
    g = make_grid(1, points_per_dim=32, box_length=10.0)
    data = synthesize_initial_data(g, "gaussian", psi1_amplitude=0.3)
    times = [0.0, 1.0, 4.0]
    traj = mgt_evolve(params, data, times, g,
                      norm_specs=("psi:L2", "psi_t:Hdot(1)"))
    for i in range(len(times)):
        assert traj.norm_ledger["psi:L2"][i] == pytest.approx(
            norm(traj.field_at(i, "psi"), "L2"), rel=1e-12)
        assert traj.norm_ledger["psi_t:Hdot(1)"][i] == pytest.approx(
            norm(traj.field_at(i, "psi_t"), "Hdot(1)"), rel=1e-12)


def test_field_at_meanings():
    params = Params(tau=0.1, delta=1.0)
    g = make_grid(1, points_per_dim=16, box_length=5.0)
    data = synthesize_initial_data(g, "gaussian")
    traj = mgt_evolve(params, data, [0.0, 1.0], g)
    assert traj.field_at(0, "psi").meaning == "psi"
    assert traj.field_at(1, "psi_tt").meaning == "psi_tt"
    with pytest.raises(KeyError):
        traj.field_at(0, "nope")


def test_initial_time_reproduces_data():
    params = Params(tau=0.05, delta=0.5)
    g = make_grid(2, points_per_dim=16, box_length=6.0)
    data = synthesize_initial_data(g, "compatible", delta=params.delta,
                                   psi1_amplitude=0.2)
    traj = mgt_evolve(params, data, [0.0], g)
    for slot, fld in zip(("psi", "psi_t", "psi_tt"), data):
        got = traj.field_at(0, slot).coeffs
        assert np.allclose(got.ravel(), fld.coeffs.ravel(), atol=1e-12)
