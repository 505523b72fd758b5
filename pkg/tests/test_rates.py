"""Envelope predictions and least-squares rate fitting on synthetic
series with known parameters."""

import numpy as np
import pytest

from mgtlab import dn_coefficient, expected_rate, fit_rate


def test_dn_coefficient_families():
    assert dn_coefficient(1, 3.0) == pytest.approx(2.0)
    assert dn_coefficient(2, 0.0) == pytest.approx(1.0)
    assert dn_coefficient(2, 100.0) == pytest.approx(
        np.sqrt(np.log(np.e + 100.0)))
    assert dn_coefficient(3, 15.0) == pytest.approx(16.0 ** -0.25)
    assert dn_coefficient(4, 15.0) == pytest.approx(16.0 ** -0.5)
    with pytest.raises(ValueError):
        dn_coefficient(0, 1.0)
    with pytest.raises(ValueError):
        dn_coefficient(3, -0.5)


def test_dn_coefficient_vectorized():
    t = np.array([0.0, 1.0, 3.0])
    assert np.allclose(dn_coefficient(1, t), np.sqrt(1.0 + t))


def test_expected_rate_table():
    # velocity/acceleration family: 1/2 - l/2 - n/4
    assert expected_rate(3, "dt", ell=1).exponent == pytest.approx(-0.75)
    assert expected_rate(3, "dt", ell=2).exponent == pytest.approx(-1.25)
    assert expected_rate(2, "dt", ell=1).exponent == pytest.approx(-0.5)
    assert expected_rate(2, "dt", ell=2).exponent == pytest.approx(-1.0)
    # extra-regularity family: -1/2 - s/2 - n/4
    assert expected_rate(3, "hdot", s=0.0).exponent == pytest.approx(-1.25)
    assert expected_rate(2, "hdot", s=1.0).exponent == pytest.approx(-1.5)
    # merely square-integrable data loses the dimension-dependent gain
    assert expected_rate(3, "dt-l2data", ell=1).exponent == pytest.approx(0.0)
    assert expected_rate(3, "dt-l2data", ell=2).exponent == pytest.approx(-0.5)
    assert expected_rate(4, "hdot-l2data", s=2.0).exponent == pytest.approx(
        -0.5)
    env = expected_rate(2, "psi-envelope")
    assert env.model == "dn"
    assert env.envelope(100.0) == pytest.approx(dn_coefficient(2, 100.0))


def test_expected_rate_errors():
    with pytest.raises(ValueError):
        expected_rate(3, "dt")          # missing ell
    with pytest.raises(ValueError):
        expected_rate(3, "hdot")        # missing s
    with pytest.raises(ValueError):
        expected_rate(3, "nope")


def test_power_fit_recovers_exponent():
    t = np.geomspace(1.0, 1000.0, 60)
    y = 2.5 * (1.0 + t) ** -0.75
    fit = fit_rate(t, y, "power")
    assert fit.exponent_or_rate == pytest.approx(-0.75, abs=1e-12)
    assert fit.amplitude == pytest.approx(2.5, rel=1e-12)
    assert fit.rms_residual < 1e-12
    assert not fit.unreliable


def test_power_fit_rejects_short_window():
    t = np.linspace(10.0, 30.0, 40)  # only 0.15 decades in (1+t)
    with pytest.raises(ValueError, match="decades"):
        fit_rate(t, 1.0 / t, "power")


def test_loghalf_fit_recovers_slope_and_intercept():
    t = np.geomspace(1.0, 1000.0, 80)
    y = np.sqrt(0.7 * np.log(np.e + t) + 0.2)
    fit = fit_rate(t, y, "loghalf")
    assert fit.exponent_or_rate == pytest.approx(0.7, abs=1e-10)
    assert fit.intercept == pytest.approx(0.2, abs=1e-10)
    assert fit.rms_residual < 1e-10


def test_loghalf_fit_flags_decaying_series():
    t = np.geomspace(1.0, 1000.0, 80)
    fit = fit_rate(t, 1.0 / (1.0 + t), "loghalf")
    assert fit.unreliable
    assert fit.exponent_or_rate < 0 or np.isinf(fit.rms_residual)


def test_exp_fit_recovers_decay_rate():
    t = np.linspace(0.0, 2.0, 50)
    y = 3.0 * np.exp(-10.0 * t)
    fit = fit_rate(t, y, "exp")
    assert fit.exponent_or_rate == pytest.approx(10.0, rel=1e-12)
    assert fit.amplitude == pytest.approx(3.0, rel=1e-12)


def test_fit_rate_input_validation():
    t = np.geomspace(1.0, 100.0, 30)
    with pytest.raises(ValueError):
        fit_rate(t, np.zeros_like(t), "power")      # nonpositive values
    with pytest.raises(ValueError):
        fit_rate(t[::-1], 1.0 / t, "power")         # decreasing times
    with pytest.raises(ValueError):
        fit_rate(t[:3], 1.0 / t[:3], "power")       # too few samples
    with pytest.raises(ValueError):
        fit_rate(t, 1.0 / t, "cubic-spline")


def test_noisy_fit_flags_unreliable():
    rng = np.random.default_rng(0)
    t = np.geomspace(1.0, 1000.0, 60)
    y = (1.0 + t) ** -1.0 * np.exp(rng.normal(0.0, 1.0, t.size))
    fit = fit_rate(t, y, "power")
    assert fit.unreliable
