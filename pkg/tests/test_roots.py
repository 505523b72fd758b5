"""Characteristic-cubic solver against the generic polynomial solver,
plus ordering, stability and asymptotics."""

import numpy as np
import pytest

from mgtlab import (Params, solve_cubic, solve_cubic_batch, asymptotic_roots,
                    classify_regime, discriminant, cubic_residual,
                    vieta_residuals)


def _coeffs(params, xi):
    r2 = xi ** 2
    return [params.tau, 1.0, (params.delta + params.tau) * r2, r2]


def test_matches_numpy_roots_on_random_draws():
    rng = np.random.default_rng(7)
    for _ in range(300):
        delta = 10.0 ** rng.uniform(-2, 1)
        tau = delta * rng.uniform(1e-3, 0.999)
        xi = 10.0 ** rng.uniform(-3, 3)
        params = Params(tau=tau, delta=delta)
        mine = np.array(solve_cubic(params, xi).roots)
        ref = np.roots(_coeffs(params, xi))
        # compare as unordered sets
        for z in ref:
            assert np.min(np.abs(mine - z)) <= 1e-8 * max(1.0, abs(z))


def test_root_ordering_conjugate_pair_then_real():
    params = Params(tau=0.1, delta=1.0)
    for xi in (1e-3, 0.3, 1.0, 30.0):
        r = solve_cubic(params, xi)
        if r.degenerate:
            continue
        a, b, c = r.roots
        assert a.imag > 0
        assert b == np.conj(a) or abs(b - np.conj(a)) < 1e-12 * abs(a)
        assert abs(c.imag) < 1e-10 * max(1.0, abs(c))


def test_residual_and_vieta_are_tiny():
    params = Params(tau=0.07, delta=0.9)
    xi = np.geomspace(1e-3, 1e3, 101)
    lam, _, _ = solve_cubic_batch(params, xi)
    assert np.max(cubic_residual(params, xi, lam)) < 1e-10
    assert np.max(vieta_residuals(params, xi, lam)) < 1e-10


def test_strict_stability_for_positive_modes():
    # tau < delta puts every nonzero mode strictly in the left half plane
    rng = np.random.default_rng(11)
    for _ in range(200):
        delta = 10.0 ** rng.uniform(-2, 1)
        params = Params(tau=delta * rng.uniform(1e-3, 0.999), delta=delta)
        xi = 10.0 ** rng.uniform(-3, 3)
        roots = solve_cubic(params, xi).roots
        assert max(z.real for z in roots) < 0.0


def test_zero_mode_roots():
    params = Params(tau=0.1, delta=1.0)
    r = solve_cubic(params, 0.0)
    # tau z^3 + z^2 = 0: double root at 0, one at -1/tau
    vals = sorted(np.array(r.roots).real)
    assert vals[0] == pytest.approx(-10.0)
    assert abs(vals[1]) < 1e-12 and abs(vals[2]) < 1e-12


def test_small_magnitude_expansion_is_third_order():
    params = Params(tau=0.1, delta=1.0)
    xs = np.geomspace(1e-3, 1e-2, 21)
    errs = []
    for xi in xs:
        exact = np.array(solve_cubic(params, xi).roots)
        approx = np.array(asymptotic_roots(params, xi, "small",
                                           small_max=np.inf))
        errs.append(np.max(np.abs(exact - approx)))
    order = np.polyfit(np.log(xs), np.log(errs), 1)[0]
    assert order == pytest.approx(3.0, abs=0.3)


def test_small_expansion_leading_terms():
    # pair: +-i r - delta r^2 / 2, slow branch; real: -1/tau + delta r^2
    params = Params(tau=0.2, delta=0.8)
    xi = 1e-3
    pair, _, real = asymptotic_roots(params, xi, "small", small_max=np.inf)
    assert pair.imag == pytest.approx(xi, rel=1e-4)
    assert pair.real == pytest.approx(-0.5 * params.delta * xi ** 2, rel=1e-2)
    assert real == pytest.approx(-1.0 / params.tau + params.delta * xi ** 2,
                                 rel=1e-6)


def test_large_magnitude_real_root_limit():
    params = Params(tau=0.1, delta=1.0)
    real = solve_cubic(params, 1e3).roots[2].real
    assert real == pytest.approx(-1.0 / (params.delta + params.tau),
                                 rel=1e-2)


def test_discriminant_sign_matches_pair_presence():
    params = Params(tau=0.1, delta=1.0)
    xi = np.geomspace(1e-3, 1e3, 301)
    d = discriminant(params, xi)
    lam, _, _ = solve_cubic_batch(params, xi)
    # conjugate pair present <-> negative discriminant
    has_pair = np.abs(lam[:, 0].imag) > 1e-12
    assert np.array_equal(has_pair, d < 0)


def test_classify_regime_labels():
    assert classify_regime(1.0).label == "dissipative"
    assert classify_regime(0.0).label == "conservative"
    rep = classify_regime(-0.5, tau=0.1)
    assert rep.label == "chaotic"
    assert rep.unstable_slots  # some root family grows


def test_batch_agrees_with_scalar():
    params = Params(tau=0.05, delta=0.7)
    xi = np.array([1e-2, 1.0, 50.0])
    lam, _, _ = solve_cubic_batch(params, xi)
    for i, x in enumerate(xi):
        single = solve_cubic(params, float(x)).roots
        for a, b in zip(lam[i], single):
            assert abs(a - b) < 1e-12 * max(1.0, abs(b))
