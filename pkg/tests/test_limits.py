"""Relaxation-limit machinery: defect algebra, the energy-inequality
audit, corrector hierarchy against a closed-form Duhamel oracle, limit
sweeps, and the fast-layer probe."""

import numpy as np
import pytest

from mgtlab import (Params, make_grid, SpectralField, norm,
                    synthesize_initial_data, gaussian_profile,
                    compatibility_defect, energy_inequality_check,
                    singular_limit_sweep, expansion_terms, layer_probe,
                    singular_limit_forcing)


def _pair(grid, w0=1.0, w1=1.4, a1=0.6):
    return (gaussian_profile(grid, width=w0),
            gaussian_profile(grid, width=w1, amplitude=a1, meaning="psi_t"))


def test_compatibility_defect_formula():
    g = make_grid(3, backend="radial")
    delta = 0.9
    psi0, psi1 = _pair(g)
    psi2 = gaussian_profile(g, width=0.8, amplitude=0.5, meaning="psi_tt")
    defect = compatibility_defect((psi0, psi1, psi2), delta)
    r2 = g.xi_abs ** 2
    expected = psi2.coeffs + r2 * (psi0.coeffs + delta * psi1.coeffs)
    assert np.allclose(defect.coeffs, expected, atol=1e-14)


def test_compatible_data_has_zero_defect():
    g = make_grid(2, points_per_dim=16, box_length=6.0)
    data = synthesize_initial_data(g, "compatible", delta=1.0,
                                   psi1_amplitude=0.4)
    defect = compatibility_defect(data, 1.0)
    assert norm(defect, "L2") < 1e-14 * max(norm(data[0], "L2"), 1.0)


def _closed_form_corrector(delta, r, p0, p1, t):
    """First-order corrector of one mode: zero-data response of the limit
    equation to -r^4 (delta phi + delta^2 phi_t), via explicit
    exponential integrals."""
    r = float(r)
    rho = np.roots([1.0, delta * r ** 2, r ** 2]).astype(complex)
    rp, rm = rho[0], rho[1]
    if abs(rp - rm) < 1e-8:
        raise ValueError("confluent node, pick another")
    dlt = rp - rm
    a = (p1 - rm * p0) / dlt
    b = (rp * p0 - p1) / dlt
    ca = -r ** 4 * (delta + delta ** 2 * rp) * a
    cb = -r ** 4 * (delta + delta ** 2 * rm) * b

    def cross(x, y):
        return (np.exp(y * t) - np.exp(x * t)) / (y - x)

    return (ca * t * np.exp(rp * t) - cb * t * np.exp(rm * t)
            + (cb - ca) * cross(rp, rm)) / dlt


def test_first_corrector_matches_closed_form():
    g = make_grid(3, backend="radial")
    delta = 1.0
    data = _pair(g)
    times = np.array([0.0, 0.4, 1.1, 2.6])
    terms = expansion_terms(data, delta, 0.1, 1, times, g)
    rs = g.xi_abs.ravel()
    # a spread of well-separated nodes away from the confluent point 2/delta
    picks = [np.argmin(np.abs(rs - target))
             for target in (0.05, 0.4, 1.0, 3.7, 8.0)]
    for m in picks:
        r = rs[m]
        if abs(r - 2.0 / delta) < 1e-2:
            continue
        p0 = complex(data[0].coeffs.ravel()[m])
        p1 = complex(data[1].coeffs.ravel()[m])
        for i, t in enumerate(times):
            ref = _closed_form_corrector(delta, r, p0, p1, float(t))
            got = complex(terms.first_correction.psi[i].ravel()[m])
            assert got == pytest.approx(ref, rel=5e-7, abs=1e-12)


def test_corrector_vanishes_at_t0_and_scales_with_delta():
    g = make_grid(1, backend="radial")
    times = np.array([0.0, 1.0])
    terms = expansion_terms(_pair(g), 1.0, 0.1, 1, times, g)
    assert np.max(np.abs(terms.first_correction.psi[0])) < 1e-12


def test_composite_layer_profile():
    g = make_grid(3, backend="radial")
    delta, tau = 1.0, 0.1
    psi0, psi1 = _pair(g)
    psi2 = gaussian_profile(g, width=2.0, meaning="psi_tt")
    times = np.array([0.0, 0.5])
    terms = expansion_terms((psi0, psi1, psi2), delta, tau, 2, times, g)
    z = 0.5 / tau
    prof = terms.layer_second(0.5)
    assert np.allclose(prof.coeffs,
                       (z - 1.0 + np.exp(-z)) * terms.defect.coeffs,
                       atol=1e-12)
    comp = terms.composite(1)
    manual = (terms.limit.psi[1] + tau * terms.first_correction.psi[1]
              + tau ** 2 * prof.coeffs.ravel())
    assert np.allclose(comp.coeffs.ravel(), manual.ravel(), atol=1e-12)


def test_energy_margins_nonnegative_for_canonical_forcing():
    params = Params(tau=0.1, delta=1.0)
    led = energy_inequality_check(params, None, np.geomspace(0.1, 5.0, 8),
                                  t_end=5.0)
    scale = max(float(np.max(led.rhs)), 1e-30)
    assert float(np.min(led.rhs - led.lhs)) >= -1e-8 * scale
    assert np.all(led.lhs >= 0.0)


def test_energy_check_accepts_custom_forcing():
    params = Params(tau=0.05, delta=1.0)
    xi = np.array([0.5, 2.0])

    def forcing(t, r):
        return np.exp(-t) * np.ones_like(r)

    led = energy_inequality_check(params, forcing, xi, t_end=3.0)
    assert np.min(led.margin) >= -1e-8 * max(float(np.max(led.rhs)), 1e-30)


def test_singular_limit_sweep_first_order():
    g = make_grid(1, backend="radial")
    data = synthesize_initial_data(g, "compatible", delta=1.0,
                                   psi1_amplitude=0.3)
    taus = [0.1, 0.05, 0.025]
    sweep = singular_limit_sweep(data, 1.0, taus, 2.0, g, norms=("L2",),
                                 n_times=60)
    sups = np.asarray(sweep.sup_diff["L2"])
    order = np.polyfit(np.log(taus), np.log(sups), 1)[0]
    assert order == pytest.approx(1.0, abs=0.15)
    assert sweep.orders["L2"] == pytest.approx(order, abs=1e-12)
    assert sweep.monotone["L2"]
    assert np.all(np.diff(sups) < 0)  # shrinks with tau


def test_layer_probe_flags_incompatible_data():
    g = make_grid(3, backend="radial")
    params = Params(tau=0.1, delta=1.0)
    data = synthesize_initial_data(g, "incompatible", delta=1.0,
                                   psi1_amplitude=0.3, defect_width=3.0)
    rep = layer_probe(params, data, 1.0)
    assert rep.predicted
    assert rep.fit is not None
    assert rep.fit.exponent_or_rate == pytest.approx(1.0 / params.tau,
                                                     rel=0.05)
    # layer strength tracks the defect amplitude (unit prediction)
    assert rep.amplitude_ratio == pytest.approx(1.0, abs=0.15)


def test_layer_probe_null_on_compatible_data():
    g = make_grid(3, backend="radial")
    params = Params(tau=0.1, delta=1.0)
    data = synthesize_initial_data(g, "compatible", delta=1.0,
                                   psi1_amplitude=0.3)
    direction = gaussian_profile(g, width=3.0, meaning="defect")
    rep = layer_probe(params, data, 1.0, probe_direction=direction)
    assert not rep.predicted
    assert rep.fast_fraction <= 1e-10


def test_singular_limit_forcing_vanishes_with_tau():
    f_small = singular_limit_forcing(1.0, 1e-6, 1.0, 0.5)
    f_big = singular_limit_forcing(1.0, 0.2, 1.0, 0.5)
    r = np.array([0.5, 1.0])
    small = np.max(np.abs(f_small(0.3, r)))
    big = np.max(np.abs(f_big(0.3, r)))
    assert small < 1e-4 * big
