"""Mode-set construction, norms against closed-form and quadrature
references, and field round-trips."""

import numpy as np
import pytest
from scipy.integrate import quad

from mgtlab import (make_grid, SpectralField, norm, l2_inner, to_coeffs,
                    to_values, save_field, load_field, is_real_field,
                    gaussian_profile, synthesize_initial_data)


def test_torus_l2_matches_lattice_closed_form():
    # Gaussian spectral profile: the lattice sum equals the integral to
    # spectral accuracy, giving ||f||^2 ~ L^n (L / (2 pi w)) ^n pi^{n/2}
    L, w = 20.0, 1.0
    for dim in (1, 2):
        g = make_grid(dim, points_per_dim=64, box_length=L)
        f = gaussian_profile(g, width=w)
        expected = np.sqrt(L ** dim * (L * np.sqrt(np.pi)
                                       / (2 * np.pi * w)) ** dim)
        assert norm(f, "L2") == pytest.approx(expected, rel=1e-12)


def test_torus_parseval_against_physical_grid():
    g = make_grid(2, points_per_dim=32, box_length=10.0)
    rng = np.random.default_rng(3)
    f = synthesize_initial_data(g, "band-limited-random", seed=5,
                                amplitude=1.0)[0]
    vals = to_values(f)
    dx = g.box_length / g.points_per_dim
    direct = np.sqrt(np.sum(np.abs(vals) ** 2) * dx ** g.dim)
    assert norm(f, "L2") == pytest.approx(direct, rel=1e-12)


def test_torus_hdot_single_mode():
    g = make_grid(1, points_per_dim=32, box_length=8.0)
    k = g.wavevector(0)
    c = np.zeros(g.mode_shape, complex)
    idx = 3
    c[idx] = 1.0
    f = SpectralField(g, c)
    expected = np.sqrt(g.box_length) * abs(k[idx])
    assert norm(f, "Hdot(1)") == pytest.approx(expected, rel=1e-12)
    assert norm(f, "Hdot(2)") == pytest.approx(
        np.sqrt(g.box_length) * k[idx] ** 2, rel=1e-12)


def test_radial_quadrature_matches_adaptive_integration():
    for dim in (1, 2, 3):
        g = make_grid(dim, backend="radial")
        f = gaussian_profile(g, width=1.3)
        # implemented convention: ||f||^2 = omega * int r^{n-1} |fhat|^2 dr
        ref, _ = quad(lambda r: r ** (dim - 1) * np.exp(-(1.3 * r) ** 2),
                      0, np.inf)
        assert norm(f, "L2") == pytest.approx(np.sqrt(g.omega * ref),
                                              rel=1e-9)


def test_radial_hdot_and_linf_bound():
    g = make_grid(3, backend="radial")
    f = gaussian_profile(g, width=1.0)
    ref2, _ = quad(lambda r: r ** 4 * np.exp(-r ** 2), 0, np.inf)
    assert norm(f, "Hdot(1)") == pytest.approx(np.sqrt(g.omega * ref2),
                                               rel=1e-9)
    # Linf bound: (2 pi)^{-n} * L1 norm of the transform
    ref1, _ = quad(lambda r: r ** 2 * np.exp(-0.5 * r ** 2), 0, np.inf)
    assert norm(f, "Linf-bound") == pytest.approx(
        (2 * np.pi) ** -3 * g.omega * ref1, rel=1e-9)


def test_derivative_multiplier_is_ik_with_nyquist_zeroed():
    g = make_grid(2, points_per_dim=16, box_length=4.0)
    for ax in range(2):
        mult = g.derivative_multiplier(ax)
        k = g.wavevector(ax).copy()
        k.reshape(-1)[16 // 2] = 0.0  # odd-derivative convention
        assert np.allclose(mult, 1j * k * np.ones(g.mode_shape))


def test_dealias_mask_two_thirds():
    g = make_grid(1, points_per_dim=24, box_length=4.0)
    mask = g.dealias_mask()
    ints = np.rint(np.fft.fftfreq(24) * 24).astype(int)
    assert np.array_equal(mask, np.abs(ints) <= 24 // 3)


def test_values_coeffs_roundtrip():
    g = make_grid(2, points_per_dim=16, box_length=5.0)
    rng = np.random.default_rng(0)
    vals = rng.standard_normal((16, 16))
    f = to_coeffs(g, vals)
    assert np.allclose(to_values(f).real, vals, atol=1e-12)
    assert is_real_field(f)


def test_save_load_roundtrip_bitwise(tmp_path):
    g = make_grid(1, points_per_dim=32, box_length=6.0)
    f = synthesize_initial_data(g, "band-limited-random", seed=9)[0]
    p = tmp_path / "field.csv"
    save_field(f, p)
    back = load_field(g, p)
    assert np.array_equal(back.coeffs, f.coeffs)


def test_l2_inner_consistency():
    g = make_grid(1, points_per_dim=32, box_length=6.0)
    f = gaussian_profile(g, width=1.0)
    assert l2_inner(f, f) == pytest.approx(norm(f, "L2") ** 2, rel=1e-12)


def test_radial_grid_rejects_tiny_rules():
    with pytest.raises(ValueError):
        make_grid(3, backend="radial", nodes_per_panel=4, panels=2)


def test_norm_spec_errors():
    g = make_grid(1, points_per_dim=16, box_length=4.0)
    f = gaussian_profile(g)
    with pytest.raises(ValueError):
        norm(f, "Hdot(-1)")
    with pytest.raises(ValueError):
        norm(f, "sup")
