"""Initial data synthesis for the three-slot Cauchy problem.

All kinds return a tuple ``(psi0, psi1, psi2)`` of spectral fields.  The
Gaussian family is defined directly in frequency space,

    psihat(xi) = amplitude * exp(-(width * |xi|)^2 / 2),

i.e. ``width`` plays the role of the physical-space standard deviation and
``amplitude`` is the transform's peak value at xi = 0 (constant prefactors of
the transform pair are absorbed into ``amplitude``).  With ``normalize="peak"``
the profile is rescaled so the *physical* field value at the origin equals
``amplitude``; the small-data experiments use this so that their epsilon knob
really is the physical amplitude.

The third slot of the ``compatible`` kind satisfies, in frequency space,

    psi2hat = -|xi|^2 (psi0hat + delta * psi1hat),

which is exactly the second time derivative the limiting parabolic-damped wave
flow would choose; ``incompatible`` adds ``defect_amplitude`` times a Gaussian
defect shape on top of that.  Random torus data is band limited, conjugate
symmetrised, and has a zero mode only in the first slot (a nonzero mode-0
velocity or acceleration would inject artificial linear-in-time growth).
"""

from __future__ import annotations

import numpy as np

from .grids import Grid, SpectralField

__all__ = ["synthesize_initial_data", "gaussian_profile"]


def gaussian_profile(grid: Grid, width=1.0, amplitude=1.0,
                     normalize=None, meaning="psi") -> SpectralField:
    """A single Gaussian spectral profile (see module docstring)."""
    if not width > 0:
        raise ValueError(f"width must be positive, got {width}")
    prof = amplitude * np.exp(-0.5 * (width * grid.xi_abs) ** 2)
    fld = SpectralField(grid, prof.astype(complex), meaning)
    if normalize is None:
        return fld
    if normalize == "peak":
        peak = _physical_peak(fld)
        if peak <= 0:
            raise ValueError("degenerate profile, cannot normalize")
        fld.coeffs *= amplitude / peak
        return fld
    raise ValueError(f"unknown normalize mode {normalize!r}")


def _physical_peak(fld: SpectralField) -> float:
    """Value of the physical field at the origin (positive profiles peak there)."""
    g = fld.grid
    if g.is_torus:
        return float(np.sum(fld.coeffs.real))
    meas = g.omega * g.weights * g.xi_abs ** (g.dim - 1)
    return float((2 * np.pi) ** (-g.dim) * np.sum(meas * fld.coeffs.real))


def _hermitize(grid: Grid, c: np.ndarray) -> np.ndarray:
    flipped = c.copy()
    for ax in range(grid.dim):
        flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
    return 0.5 * (c + np.conj(flipped))


def _band_random(grid: Grid, rng, band_limit, amplitude) -> np.ndarray:
    if grid.is_torus:
        n = grid.points_per_dim
        cut = band_limit if band_limit is not None else n // 4
        ints = np.rint(np.fft.fftfreq(n) * n).astype(int)
        band = np.zeros(grid.mode_shape, dtype=bool)
        sq = np.zeros(grid.mode_shape)
        for ax in range(grid.dim):
            shape = [1] * grid.dim
            shape[ax] = n
            sq = sq + ints.reshape(shape).astype(float) ** 2
        band = (sq > 0) & (np.sqrt(sq) <= cut)
        c = np.zeros(grid.mode_shape, dtype=complex)
        c[band] = rng.standard_normal(band.sum()) + 1j * rng.standard_normal(band.sum())
        c = _hermitize(grid, c)
        c *= amplitude
        return c
    # radial backend: a smooth seeded superposition of Gaussian bumps
    r = grid.xi_abs
    top = band_limit if band_limit is not None else 2.0
    prof = np.zeros_like(r)
    for _ in range(4):
        a = rng.uniform(-1.0, 1.0)
        m = rng.uniform(0.0, top)
        s = rng.uniform(0.3, 1.0)
        prof += a * np.exp(-((r - m) / s) ** 2)
    return amplitude * prof.astype(complex)


def synthesize_initial_data(grid: Grid, kind: str, *, width=1.0, amplitude=1.0,
                            psi1_amplitude=0.0, delta=None, defect_amplitude=1.0,
                            defect_width=None, seed=None, band_limit=None,
                            normalize=None):
    """Build an initial triple of one of the supported kinds.

    kind = "gaussian" | "band-limited-random" | "compatible" | "incompatible"

    ``compatible``/``incompatible`` require ``delta``;
    ``band-limited-random`` requires ``seed``.
    """
    if not width > 0:
        raise ValueError(f"width must be positive, got {width}")
    zero = SpectralField(grid, np.zeros(grid.mode_shape, dtype=complex))

    if kind == "gaussian":
        psi0 = gaussian_profile(grid, width, amplitude, normalize)
        psi1 = gaussian_profile(grid, width, 1.0, normalize, meaning="psi_t")
        psi1.coeffs *= psi1_amplitude
        if grid.is_torus:
            psi1.coeffs[(0,) * grid.dim] = 0.0
        return psi0, psi1, zero.copy()

    if kind == "band-limited-random":
        if seed is None:
            raise ValueError("band-limited-random data needs a seed")
        rng = np.random.default_rng(seed)
        fields = []
        for slot in ("psi", "psi_t", "psi_tt"):
            c = _band_random(grid, rng, band_limit, amplitude)
            fields.append(SpectralField(grid, c, slot))
        # slots 2 and 3 must have no mean; the band construction already
        # excludes mode 0, asserted here for the torus case
        if grid.is_torus:
            origin = (0,) * grid.dim
            fields[1].coeffs[origin] = 0.0
            fields[2].coeffs[origin] = 0.0
        return tuple(fields)

    if kind in ("compatible", "incompatible"):
        if delta is None:
            raise ValueError(f"{kind} data needs delta")
        psi0 = gaussian_profile(grid, width, amplitude, normalize)
        psi1 = gaussian_profile(grid, width, 1.0, normalize, meaning="psi_t")
        psi1.coeffs *= psi1_amplitude
        if grid.is_torus:
            psi1.coeffs[(0,) * grid.dim] = 0.0
        r2 = grid.xi_abs ** 2
        psi2c = -r2 * (psi0.coeffs + delta * psi1.coeffs)
        if kind == "incompatible" and defect_amplitude != 0.0:
            w = defect_width if defect_width is not None else width
            shape = gaussian_profile(grid, w, 1.0)
            psi2c = psi2c + defect_amplitude * shape.coeffs
        return psi0, psi1, SpectralField(grid, psi2c, "psi_tt")

    raise ValueError(f"unknown data kind {kind!r}")
