"""Decay-rate bookkeeping: reference envelopes, fits, frequency-band splits.

Fits are least squares in linearising coordinates:

* power    y = A (1+t)^alpha      ->  log y  vs  log(1+t)
* loghalf  y ~ (m ln(e+t) + b)^{1/2}  ->  y^2  vs  ln(e+t)  (affine)
* exp      y = A exp(-gamma t)    ->  log y  vs  t  (gamma reported positive
                                       for decay)

``rms_residual`` is always measured in log space of the values so that the
reliability flag means the same thing across models.  The decade-span
precondition applies to the algebraic-in-t models only; an exponential fit
over a window short compared to one is perfectly well posed (and is exactly
what the layer probe needs).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import SpectralField

__all__ = [
    "dn_coefficient",
    "ExpectedRate",
    "expected_rate",
    "RateFit",
    "fit_rate",
    "band_split",
]

UNRELIABLE_RMS = 0.1
MIN_SAMPLES = 8
MIN_DECADES = 1.5

# estimate-id -> (needs_ell, needs_s, exponent builder); None marks the
# Rate ids name the norm being predicted and the data class feeding it.
# "psi-envelope" is the solution-level special form (dimension-dependent,
# including the 2-d logarithm) handled by dn_coefficient; the rest are clean
# powers of (1+t).  The *-l2data variants assume square-integrable data only,
# the others assume integrable-and-square data.
_RATE_TABLE = {
    "psi-envelope": None,
    "dt": lambda n, ell, s: 0.5 - 0.5 * ell - 0.25 * n,
    "dt-l2data": lambda n, ell, s: 0.5 - 0.5 * ell,
    "hdot": lambda n, ell, s: -0.5 - 0.5 * s - 0.25 * n,
    "hdot-l2data": lambda n, ell, s: -0.5,
}


def dn_coefficient(n: int, t):
    """Solution-level envelope: (1+t)^{1/2} in 1-d, (ln(e+t))^{1/2} in 2-d,
    (1+t)^{1/2-n/4} from three dimensions on."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    if n == 1:
        out = np.sqrt(1.0 + t)
    elif n == 2:
        out = np.sqrt(np.log(np.e + t))
    elif n >= 3:
        out = (1.0 + t) ** (0.5 - 0.25 * n)
    else:
        raise ValueError(f"dimension must be a positive integer, got {n}")
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ExpectedRate:
    """Predicted envelope for one norm: either a clean power of (1+t) or the
    dimension-dependent special form handled by :func:`dn_coefficient`."""

    model: str           # "power" | "dn"
    exponent: float | None
    n: int

    def envelope(self, t):
        if self.model == "dn":
            return dn_coefficient(self.n, t)
        return (1.0 + np.asarray(t, dtype=float)) ** self.exponent


def expected_rate(n: int, which: str, ell=None, s=None) -> ExpectedRate:
    """Look up the predicted decay rate for a norm/data-class id.

    ``ell`` is the time-derivative order where the prediction has one, ``s``
    the extra spatial regularity.  The "psi-envelope" id returns model "dn".
    """
    if which not in _RATE_TABLE:
        raise ValueError(f"unknown rate id {which!r}")
    builder = _RATE_TABLE[which]
    if builder is None:
        return ExpectedRate("dn", None, n)
    needs_ell = which in ("dt", "dt-l2data")
    needs_s = which in ("hdot",)
    if needs_ell and ell is None:
        raise ValueError(f"{which} needs the derivative order ell")
    if needs_s and s is None:
        raise ValueError(f"{which} needs the regularity s")
    return ExpectedRate("power", float(builder(n, ell or 0, s or 0.0)), n)


@dataclass(frozen=True)
class RateFit:
    """Result of one least-squares envelope fit."""

    model: str
    exponent_or_rate: float
    amplitude: float
    rms_residual: float
    window: tuple
    n_samples: int
    unreliable: bool
    intercept: float = 0.0      # loghalf only: fitted b in y^2 = m ln(e+t) + b

    def describe(self) -> str:
        tag = {"power": "exponent", "loghalf": "slope", "exp": "rate"}[self.model]
        flag = " UNRELIABLE" if self.unreliable else ""
        return (f"{self.model} fit on [{self.window[0]:g}, {self.window[1]:g}]: "
                f"{tag}={self.exponent_or_rate:.4g} amp={self.amplitude:.4g} "
                f"rms={self.rms_residual:.3g}{flag}")


def fit_rate(times, values, model: str) -> RateFit:
    """Fit one envelope model to a positive series (see module docstring)."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("times and values must be 1-d arrays of equal length")
    if t.size < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {t.size}")
    if np.any(y <= 0):
        raise ValueError("values must be strictly positive")
    if np.any(np.diff(t) <= 0):
        raise ValueError("times must be strictly increasing")

    window = (float(t[0]), float(t[-1]))
    if model in ("power", "loghalf"):
        decades = np.log10((1.0 + t[-1]) / (1.0 + t[0]))
        if decades < MIN_DECADES:
            raise ValueError(
                f"window spans {decades:.2f} decades in (1+t), "
                f"need >= {MIN_DECADES}")

    if model == "power":
        x = np.log(1.0 + t)
        slope, icept = np.polyfit(x, np.log(y), 1)
        fitted = icept + slope * x
        rms = float(np.sqrt(np.mean((np.log(y) - fitted) ** 2)))
        return RateFit("power", float(slope), float(np.exp(icept)), rms,
                       window, t.size, rms > UNRELIABLE_RMS)

    if model == "loghalf":
        x = np.log(np.e + t)
        slope, icept = np.polyfit(x, y ** 2, 1)
        pred = slope * x + icept
        if slope <= 0 or np.any(pred <= 0):
            # fell out of the growth regime; report in log space anyway
            return RateFit("loghalf", float(slope), float("nan"), float("inf"),
                           window, t.size, True, float(icept))
        rms = float(np.sqrt(np.mean((np.log(y) - 0.5 * np.log(pred)) ** 2)))
        return RateFit("loghalf", float(slope), float(np.sqrt(slope)), rms,
                       window, t.size, rms > UNRELIABLE_RMS, float(icept))

    if model == "exp":
        if t[-1] <= t[0]:
            raise ValueError("exp fit needs a positive time span")
        slope, icept = np.polyfit(t, np.log(y), 1)
        fitted = icept + slope * t
        rms = float(np.sqrt(np.mean((np.log(y) - fitted) ** 2)))
        return RateFit("exp", float(-slope), float(np.exp(icept)), rms,
                       window, t.size, rms > UNRELIABLE_RMS)

    raise ValueError(f"unknown fit model {model!r}")


def band_split(fld: SpectralField, eps: float, n_cut: float):
    """Split a field sharply into |xi| < eps, eps <= |xi| <= n_cut, > n_cut.

    The three parts sum back to the original coefficient-exactly; masks are
    indicator functions, no smoothing.
    """
    if not (0 < eps < n_cut):
        raise ValueError(f"need 0 < eps < n_cut, got {eps}, {n_cut}")
    xi = fld.grid.xi_abs
    low = xi < eps
    high = xi > n_cut
    mid = ~(low | high)
    parts = []
    for mask, tag in ((low, "low"), (mid, "mid"), (high, "high")):
        c = np.where(mask, fld.coeffs, 0.0)
        parts.append(SpectralField(fld.grid, c, f"{fld.meaning}:{tag}"))
    return tuple(parts)
