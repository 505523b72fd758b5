"""Quadratic-flow machinery: the pseudo-spectral nonlinearity against a
direct convolution, exponential-integrator consistency and convergence,
guards, and the weighted evolution norm."""

import math
import warnings

import numpy as np
import pytest

from mgtlab import (Params, make_grid, SpectralField, norm,
                    synthesize_initial_data, gaussian_profile,
                    nonlinearity, jmgt_evolve, kuznetsov_evolve,
                    kuznetsov_nonlinear_evolve, mgt_evolve, xs_norm,
                    xs_weights, default_tracked_norms, BlowUpError)


def _linear_convolution_oracle(grid, state, b_over_a):
    """Total wavenumber bookkeeping done by hand: linear convolution of
    shifted coefficient sequences, restricted to the retained band."""
    n = grid.points_per_dim
    mask = grid.dealias_mask()
    psi, psi_t, psi_tt = (np.asarray(f.coeffs).reshape(n) * mask
                          for f in state)
    mult = grid.derivative_multiplier(0).reshape(n)

    def conv(a, b):
        # index m runs over [-n/2, n/2); entry k of the linear
        # convolution carries total wavenumber k - n
        out = np.convolve(np.fft.fftshift(a), np.fft.fftshift(b))
        full = np.zeros(n, complex)
        ints = np.rint(np.fft.fftfreq(n) * n).astype(int)
        for i, m in enumerate(ints):
            if abs(m) <= n // 3:
                full[i] = out[m + n]
        return full

    return (b_over_a * conv(psi_t, psi_tt)
            + 2.0 * conv(mult * psi, mult * psi_t))


def test_nonlinearity_matches_direct_convolution():
    g = make_grid(1, points_per_dim=32, box_length=7.0)
    state = synthesize_initial_data(g, "band-limited-random", seed=4,
                                    band_limit=8)
    for boa in (0.0, 1.0, 2.5):
        got = nonlinearity(state, boa, g).coeffs.reshape(-1)
        want = _linear_convolution_oracle(g, state, boa)
        assert np.allclose(got, want, atol=1e-14, rtol=1e-10)


def test_nonlinearity_requires_torus():
    g = make_grid(3, backend="radial")
    f = gaussian_profile(g)
    with pytest.raises(ValueError):
        nonlinearity((f, f, f), 1.0, g)


def _tiny_data(grid, amplitude, delta):
    data = synthesize_initial_data(grid, "compatible", width=1.0,
                                   amplitude=amplitude,
                                   psi1_amplitude=0.3 * amplitude,
                                   delta=delta)
    mask = grid.dealias_mask()
    return tuple(SpectralField(grid, f.coeffs * mask, f.meaning)
                 for f in data)


def test_jmgt_reduces_to_linear_flow_at_vanishing_amplitude():
    params = Params(tau=0.1, delta=1.0, b_over_a=1.0)
    g = make_grid(2, points_per_dim=24, box_length=12.0)
    eps = 1e-7
    data = _tiny_data(g, eps, params.delta)
    times = np.array([0.0, 0.5, 1.0])
    nl = jmgt_evolve(params, data, 1.0, 0.01, g, output_times=times,
                     store_fields=True)
    lin = mgt_evolve(params, data, nl.times, g)
    for i in range(len(times)):
        diff = np.max(np.abs(nl.psi[i].ravel() - lin.psi[i].ravel()))
        assert diff < 1e-5 * eps  # quadratic remainder


def test_jmgt_step_halving_second_order():
    params = Params(tau=0.1, delta=1.0, b_over_a=1.0)
    g = make_grid(1, points_per_dim=32, box_length=10.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # 1-d runs carry a theory warning
        data = _tiny_data(g, 0.2, params.delta)
        outs = [
            jmgt_evolve(params, data, 0.5, dt, g, output_times=[0.5],
                        store_fields=True).psi[-1]
            for dt in (0.01, 0.005, 0.0025)]
    e1 = np.max(np.abs(outs[0] - outs[2]))
    e2 = np.max(np.abs(outs[1] - outs[2]))
    # second-order scheme: quarter-step reference gives ratio near
    # (4 - 1) / (1 - 1/4)... measured against the common reference,
    # e(dt) / e(dt/2) -> (2^p - 1) -ish with p = 2
    assert e1 / e2 > 2.5


def test_jmgt_rejects_coarse_step():
    params = Params(tau=0.1, delta=1.0)
    g = make_grid(2, points_per_dim=16, box_length=6.0)
    data = _tiny_data(g, 1e-3, params.delta)
    with pytest.raises(ValueError, match="dt"):
        jmgt_evolve(params, data, 1.0, params.tau, g)


def test_blowup_guard_trips_and_reports():
    params = Params(tau=0.1, delta=1.0, b_over_a=1.0)
    g = make_grid(2, points_per_dim=16, box_length=6.0)
    data = _tiny_data(g, 1e-3, params.delta)
    with pytest.raises(BlowUpError) as exc_info:
        jmgt_evolve(params, data, 5.0, 0.01, g, guard_factor=1e-6)
    err = exc_info.value
    assert err.time >= 0.0
    assert err.step >= 1
    assert len(err.norms) == 3


def test_small_data_flag_in_meta():
    params = Params(tau=0.1, delta=1.0)
    g = make_grid(2, points_per_dim=16, box_length=6.0)
    small = jmgt_evolve(params, _tiny_data(g, 1e-4, params.delta), 0.2,
                        0.01, g)
    assert small.meta["small_data_ok"]
    with pytest.warns(UserWarning, match="small-data"):
        big = jmgt_evolve(params, _tiny_data(g, 10.0, params.delta), 0.2,
                          0.01, g, guard_factor=1e12)
    assert not big.meta["small_data_ok"]


def test_kuznetsov_nonlinear_reduces_to_linear():
    delta = 1.0
    g = make_grid(2, points_per_dim=24, box_length=12.0)
    eps = 1e-7
    data = _tiny_data(g, eps, delta)[:2]
    times = np.array([0.0, 0.5, 1.0])
    nl = kuznetsov_nonlinear_evolve(delta, 1.0, data, 1.0, 0.01, g,
                                    output_times=times, store_fields=True)
    lin = kuznetsov_evolve(delta, data, nl.times, g)
    for i in range(len(times)):
        diff = np.max(np.abs(nl.psi[i].ravel() - lin.psi[i].ravel()))
        assert diff < 1e-5 * eps


def test_default_tracked_norms_keys():
    keys = default_tracked_norms(0.6)
    assert keys == ("psi:L2", "psi_t:L2", "psi_tt:L2", "psi:Hdot(2.6)",
                    "psi_t:Hdot(1.6)", "psi_tt:Hdot(0.6)", "psi:Linf-bound")


def test_xs_norm_matches_manual_weighting():
    params = Params(tau=0.1, delta=1.0)
    g = make_grid(2, points_per_dim=24, box_length=12.0)
    s = 0.6
    data = _tiny_data(g, 1e-3, params.delta)
    traj = jmgt_evolve(params, data, 1.0, 0.01, g, s=s,
                       output_times=[0.0, 0.5, 1.0])
    xs = xs_norm(traj, s)
    keys = default_tracked_norms(s)[:6]
    for i, t in enumerate(traj.times):
        w = xs_weights(g.dim, s, float(t))
        manual = math.fsum(w[k] * traj.norm_ledger[k][i] for k in keys)
        assert xs.series[i] == pytest.approx(manual, rel=1e-12)
    assert xs.sup == float(np.max(xs.series[:len(traj.times)]))
    assert np.all(np.diff(xs.running_sup) >= 0)


def test_xs_norm_warns_below_regularity_floor():
    params = Params(tau=0.1, delta=1.0)
    g = make_grid(2, points_per_dim=16, box_length=6.0)
    traj = jmgt_evolve(params, _tiny_data(g, 1e-4, params.delta), 0.2,
                       0.01, g, s=0.6, store_fields=True)
    with pytest.warns(UserWarning, match="outside the supported range"):
        xs_norm(traj, 0.0)


def test_xs_weights_known_values():
    w = xs_weights(2, 0.6, 0.0)
    assert w["psi:L2"] == pytest.approx(1.0)
    assert w["psi_t:L2"] == pytest.approx(1.0)
    t = 3.0
    w = xs_weights(2, 0.6, t)
    assert w["psi_t:L2"] == pytest.approx((1.0 + t) ** 0.5)
    assert w["psi_tt:L2"] == pytest.approx((1.0 + t) ** 1.0)
    assert w["psi:Hdot(2.6)"] == pytest.approx((1.0 + t) ** 1.3)
