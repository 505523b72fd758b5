"""Characteristic roots of the per-mode cubic.

For a mode of magnitude r = |xi| the symbol of the linear equation is

    p(z) = tau z^3 + z^2 + (delta + tau) r^2 z + r^2.

Roots are computed as eigenvalues of the companion matrix (batched LAPACK)
followed by one Newton polish each; the closed Cardano form is avoided on
purpose, it loses digits catastrophically near the degenerate bands.

Ordering convention (fixed so downstream kernel formulas are reproducible):
when a conjugate pair exists it occupies slots 0 and 1, positive imaginary
part first, and the real root sits in slot 2; a fully real triple is sorted
ascending by real part.  A triple is flagged degenerate when the smallest
pairwise separation drops below 1e-6 relative to the root magnitudes; exact
kernel formulas divide by these separations and are refused downstream in
favour of a direct ODE integration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import Params

__all__ = [
    "ModeRoots",
    "RegimeReport",
    "solve_cubic",
    "solve_cubic_batch",
    "asymptotic_roots",
    "classify_regime",
    "discriminant",
    "discriminant_band",
]

DEGENERATE_RTOL = 1e-6


@dataclass(frozen=True)
class ModeRoots:
    """Ordered characteristic roots of one mode."""

    xi_abs: float
    roots: tuple
    discriminant: float
    degenerate: bool


def _coefficients(params: Params, xi_abs):
    r2 = np.asarray(xi_abs, dtype=float) ** 2
    a = params.tau * np.ones_like(r2)
    b = np.ones_like(r2)
    c = (params.delta + params.tau) * r2
    d = r2
    return a, b, c, d


def discriminant(params: Params, xi_abs):
    """Discriminant of the cubic; positive means three distinct real roots."""
    a, b, c, d = _coefficients(params, xi_abs)
    return (18 * a * b * c * d - 4 * b ** 3 * d + b ** 2 * c ** 2
            - 4 * a * c ** 3 - 27 * a ** 2 * d ** 2)


def cubic_residual(params: Params, xi_abs, lam):
    """Relative residual of each root: |p(lam)| over the sum of the four
    term magnitudes, shape matching ``lam``."""
    tau, delta = params.tau, params.delta
    r2 = (np.atleast_1d(np.asarray(xi_abs, dtype=float)) ** 2)[:, None]
    lam = np.atleast_2d(lam)
    t3, t2 = tau * lam ** 3, lam ** 2
    t1, t0 = (delta + tau) * r2 * lam, r2 * np.ones_like(lam)
    scale = np.abs(t3) + np.abs(t2) + np.abs(t1) + np.abs(t0) + 1e-300
    return np.abs(t3 + t2 + t1 + t0) / scale


def vieta_residuals(params: Params, xi_abs, lam):
    """Relative errors of the three symmetric-function identities, each
    normalized by the magnitudes of the terms entering it.  Shape (m, 3)."""
    tau, delta = params.tau, params.delta
    r2 = np.atleast_1d(np.asarray(xi_abs, dtype=float)) ** 2
    lam = np.atleast_2d(lam)
    l0, l1, l2 = lam[:, 0], lam[:, 1], lam[:, 2]

    s1, t1 = l0 + l1 + l2, -1.0 / tau
    e1 = np.abs(s1 - t1) / (np.abs(l0) + np.abs(l1) + np.abs(l2) + abs(t1))
    pair = l0 * l1 + l0 * l2 + l1 * l2
    t2 = (delta + tau) * r2 / tau
    e2 = np.abs(pair - t2) / (np.abs(l0 * l1) + np.abs(l0 * l2)
                              + np.abs(l1 * l2) + np.abs(t2) + 1e-300)
    prod, t3 = l0 * l1 * l2, -r2 / tau
    e3 = np.abs(prod - t3) / (np.abs(prod) + np.abs(t3) + 1e-300)
    return np.stack([e1, e2, e3], axis=1)


def _order_rows(lam: np.ndarray) -> np.ndarray:
    """Apply the slot convention row-wise to an (m, 3) root array."""
    out = np.empty_like(lam)
    scale = np.maximum(1.0, np.abs(lam).max(axis=1))
    is_cplx = np.abs(lam.imag) > 1e-12 * scale[:, None]
    for i in range(lam.shape[0]):
        row = lam[i]
        if is_cplx[i].sum() == 2:
            pair = row[is_cplx[i]]
            pair = pair[np.argsort(-pair.imag)]
            real = row[~is_cplx[i]]
            out[i, 0], out[i, 1] = pair
            out[i, 2] = real[0].real
        else:
            row = row.real.copy()
            row.sort()
            out[i] = row
    return out


def _polish(params: Params, xi_abs, lam: np.ndarray) -> np.ndarray:
    """One Newton step per root; real roots are polished in real arithmetic."""
    tau, delta = params.tau, params.delta
    r2 = (np.asarray(xi_abs, dtype=float) ** 2)[:, None]

    def p(z):
        return tau * z ** 3 + z ** 2 + (delta + tau) * r2 * z + r2

    def dp(z):
        return 3 * tau * z ** 2 + 2 * z + (delta + tau) * r2

    deriv = dp(lam)
    ok = np.abs(deriv) > 1e-30
    step = np.where(ok, p(lam) / np.where(ok, deriv, 1.0), 0.0)
    polished = lam - step
    keep_real = np.abs(lam.imag) == 0.0
    polished = np.where(keep_real, polished.real + 0.0j, polished)
    return polished


def solve_cubic_batch(params: Params, xi_abs):
    """Roots, discriminants and degeneracy flags for an array of |xi|.

    Returns ``(lam, disc, degenerate)`` with ``lam`` of shape (m, 3) ordered
    per the module convention.
    """
    xi = np.atleast_1d(np.asarray(xi_abs, dtype=float))
    m = xi.size
    comp = np.zeros((m, 3, 3))
    a, b, c, d = _coefficients(params, xi)
    comp[:, 1, 0] = 1.0
    comp[:, 2, 1] = 1.0
    comp[:, 0, 2] = -d / a
    comp[:, 1, 2] = -c / a
    comp[:, 2, 2] = -b / a
    lam = np.linalg.eigvals(comp)
    # enforce exactly-real representation where LAPACK returned a real triple
    scale = np.maximum(1.0, np.abs(lam).max(axis=1))
    lam = np.where(np.abs(lam.imag) <= 1e-14 * scale[:, None],
                   lam.real + 0.0j, lam)
    lam = _polish(params, xi, lam)
    lam = _order_rows(lam)
    disc = discriminant(params, xi)
    sep = np.full(m, np.inf)
    for i, j in ((0, 1), (0, 2), (1, 2)):
        pair_scale = np.maximum(1.0, np.maximum(np.abs(lam[:, i]), np.abs(lam[:, j])))
        sep = np.minimum(sep, np.abs(lam[:, i] - lam[:, j]) / pair_scale)
    return lam, disc, sep < DEGENERATE_RTOL


def solve_cubic(params: Params, xi_abs: float) -> ModeRoots:
    """Roots of one mode's characteristic cubic."""
    lam, disc, degen = solve_cubic_batch(params, [xi_abs])
    return ModeRoots(xi_abs=float(xi_abs),
                     roots=tuple(complex(z) for z in lam[0]),
                     discriminant=float(disc[0]),
                     degenerate=bool(degen[0]))


def asymptotic_roots(params: Params, xi_abs: float, regime: str,
                     small_max=0.1, large_min=10.0):
    """Leading-order root expansions in the small or large frequency regime.

    Slot layout matches :func:`solve_cubic`.  Outside the validity windows a
    ValueError is raised rather than returning an extrapolation silently.
    """
    r = float(xi_abs)
    tau, delta = params.tau, params.delta
    if regime == "small":
        if r > small_max:
            raise ValueError(f"small-frequency expansion needs |xi| <= {small_max}")
        damp = -0.5 * delta * r ** 2
        return (complex(damp, r), complex(damp, -r),
                complex(-1.0 / tau + delta * r ** 2, 0.0))
    if regime == "large":
        if r < large_min:
            raise ValueError(f"large-frequency expansion needs |xi| >= {large_min}")
        freq = np.sqrt((delta + tau) / tau) * r
        damp = -delta / (2.0 * tau * (delta + tau))
        return (complex(damp, freq), complex(damp, -freq),
                complex(-1.0 / (delta + tau), 0.0))
    raise ValueError(f"unknown regime {regime!r}")


@dataclass(frozen=True)
class RegimeReport:
    """Stability label of the parameter pair, with a sample diagnosis."""

    label: str                 # "dissipative" | "conservative" | "chaotic"
    delta: float
    sample_xi: float | None = None
    sample_roots: tuple | None = None
    unstable_slots: tuple = ()


def classify_regime(delta: float, tau=0.1, sample_xi=100.0) -> RegimeReport:
    """Classify by the sign of delta; the unstable family is reported for
    delta < 0 by sampling the roots at one large frequency."""
    if delta > 0:
        return RegimeReport("dissipative", delta)
    if delta == 0:
        return RegimeReport("conservative", delta)
    # delta < 0: locate which root slots have nonnegative real part
    r2 = float(sample_xi) ** 2
    poly = [tau, 1.0, (delta + tau) * r2, r2]
    lam = np.sort_complex(np.roots(poly))
    unstable = tuple(int(i) for i, z in enumerate(lam) if z.real >= 0)
    return RegimeReport("chaotic", delta, float(sample_xi),
                        tuple(complex(z) for z in lam), unstable)


def discriminant_band(params: Params, xi_lo=1e-3, xi_hi=1e3, n_samples=4000):
    """Locate the frequency band where the discriminant changes sign.

    Scans log-spaced frequencies and returns (band_lo, band_hi), the hull of
    all sign changes, or None when the discriminant keeps one sign (the
    conjugate-pair topology then holds at every sampled frequency).  Each
    crossing is tightened by bisection to ~1e-10 relative width.
    """
    xs = np.geomspace(xi_lo, xi_hi, n_samples)
    ds = discriminant(params, xs)
    sign = np.sign(ds)
    flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    if flips.size == 0:
        return None
    crossings = []
    for i in flips:
        a, b = xs[i], xs[i + 1]
        fa = float(discriminant(params, a))
        for _ in range(100):
            mid = np.sqrt(a * b)
            fm = float(discriminant(params, mid))
            if fa * fm <= 0:
                b = mid
            else:
                a, fa = mid, fm
            if b - a <= 1e-10 * b:
                break
        crossings.append(0.5 * (a + b))
    return float(min(crossings)), float(max(crossings))
