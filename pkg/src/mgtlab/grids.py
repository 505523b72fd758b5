"""Spectral grids, fields and norms on the two supported backends.

Two discretisations of frequency space are provided:

* ``torus``  -- a periodic box [0, L)^n sampled on N points per axis.  Fields
  are stored as Fourier-series coefficients ``c_k`` in numpy FFT layout, so the
  physical field is ``f(x) = sum_k c_k exp(i k.x)`` with angular wavenumbers
  ``k = (2 pi / L) * integer``.  Parseval then reads
  ``||f||_{L^2}^2 = L^n sum_k |c_k|^2`` exactly (machine precision).

* ``radial`` -- radially symmetric profiles ``fhat(|xi|)`` of a transform on
  R^n, tabulated on a positive quadrature rule for ``int_0^{R_max} . dr``.
  Norms carry the surface measure ``omega_n = {2, 2 pi, 4 pi}`` for n = 1,2,3,
  e.g. ``||fhat||_{L^2}^2 = omega_n int |fhat(r)|^2 r^{n-1} dr``.

The radial rule is a composite Gauss-Legendre quadrature on geometrically
graded panels accumulating at r = 0.  A single global rule cannot resolve
integrands concentrated near ``r ~ t^{-1/2}`` over the long time windows the
decay experiments use; the graded panels handle ``r`` spanning five orders of
magnitude at negligible cost.  With the default width-one Gaussian data the
spectral mass beyond ``R_max = 20`` is below ``exp(-200)``, many orders under
the 1e-12 tail budget.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid",
    "SpectralField",
    "make_grid",
    "to_coeffs",
    "to_values",
    "norm",
    "l2_inner",
    "parse_norm_spec",
    "is_real_field",
    "save_field",
    "load_field",
]

_OMEGA = {1: 2.0, 2: 2.0 * np.pi, 3: 4.0 * np.pi}


@dataclass(frozen=True)
class Grid:
    """Frequency-space grid for one backend; build with :func:`make_grid`."""

    dim: int
    backend: str                      # "torus" | "radial"
    points_per_dim: int | None = None
    box_length: float | None = None
    r_max: float | None = None
    xi_abs: np.ndarray = field(default=None, repr=False)     # |xi| per mode
    weights: np.ndarray | None = field(default=None, repr=False)  # radial only
    k_axes: tuple | None = field(default=None, repr=False)   # torus only

    @property
    def is_torus(self) -> bool:
        return self.backend == "torus"

    @property
    def omega(self) -> float:
        """Surface measure constant of the radial backend."""
        return _OMEGA[self.dim]

    @property
    def mode_shape(self) -> tuple:
        if self.is_torus:
            return (self.points_per_dim,) * self.dim
        return self.xi_abs.shape

    @property
    def mode_count(self) -> int:
        return int(np.prod(self.mode_shape))

    def wavevector(self, axis: int) -> np.ndarray:
        """Angular wavenumber along ``axis``, broadcastable to mode_shape."""
        if not self.is_torus:
            raise ValueError("wavevector is only defined on the torus backend")
        shape = [1] * self.dim
        shape[axis] = self.points_per_dim
        return self.k_axes[axis].reshape(shape)

    def derivative_multiplier(self, axis: int) -> np.ndarray:
        """i*k along ``axis`` with the Nyquist entry zeroed (odd derivative)."""
        k = self.wavevector(axis).copy()
        n = self.points_per_dim
        idx = [slice(None)] * self.dim
        idx[axis] = n // 2
        k[tuple(idx)] = 0.0
        return 1j * k

    def dealias_mask(self) -> np.ndarray:
        """Boolean keep-mask implementing the 2/3 rule per axis."""
        if not self.is_torus:
            raise ValueError("dealiasing applies to the torus backend only")
        n = self.points_per_dim
        cut = n // 3
        keep = np.ones(self.mode_shape, dtype=bool)
        ints = np.rint(np.fft.fftfreq(n) * n).astype(int)
        for ax in range(self.dim):
            shape = [1] * self.dim
            shape[ax] = n
            keep &= np.abs(ints.reshape(shape)) <= cut
        return keep


@dataclass
class SpectralField:
    """Spectral coefficients of one scalar field on a grid.

    ``meaning`` is a free-form tag ("psi", "psi_t", ...) carried through
    serialisation; it never affects arithmetic.
    """

    grid: Grid
    coeffs: np.ndarray
    meaning: str = "psi"

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy(), self.meaning)


def _radial_rule(r_max, nodes_per_panel, panel_growth, min_panel_scale, panels):
    """Composite Gauss-Legendre rule on [0, r_max] with graded panels."""
    base_x, base_w = np.polynomial.legendre.leggauss(nodes_per_panel)
    if panels == 1:
        edges = np.array([0.0, r_max])
    else:
        if panels is None:
            panels = 1 + int(np.ceil(np.log(1.0 / min_panel_scale)
                                     / np.log(panel_growth)))
        inner = r_max * min_panel_scale * panel_growth ** np.arange(panels - 1)
        edges = np.concatenate([[0.0], np.minimum(inner, r_max), [r_max]])
        edges = np.unique(edges)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        nodes.append(a + half * (base_x + 1.0))
        weights.append(half * base_w)
    return np.concatenate(nodes), np.concatenate(weights)


def make_grid(dim, points_per_dim=None, box_length=None, backend="torus", *,
              r_max=20.0, nodes_per_panel=32, panel_growth=1.35,
              min_panel_scale=1e-5, panels=None) -> Grid:
    """Construct a grid.

    Torus: ``points_per_dim`` must be even and >= 8; modes are the integer
    lattice scaled by 2 pi / box_length and include a single (real) Nyquist
    mode per axis.

    Radial: quadrature on [0, r_max] from ``panels`` Gauss-Legendre panels
    with ``nodes_per_panel`` nodes each.  ``panels=1`` gives the plain rule;
    the default grading puts the innermost panel at ``r_max*min_panel_scale``.
    """
    if dim not in (1, 2, 3):
        raise ValueError(f"dim must be 1, 2 or 3, got {dim}")
    if backend == "torus":
        if points_per_dim is None or box_length is None:
            raise ValueError("torus grids need points_per_dim and box_length")
        n = int(points_per_dim)
        if n < 8 or n % 2:
            raise ValueError(f"points_per_dim must be even and >= 8, got {n}")
        if not box_length > 0:
            raise ValueError(f"box_length must be positive, got {box_length}")
        k1 = 2.0 * np.pi / box_length * np.rint(np.fft.fftfreq(n) * n)
        axes = tuple(k1 for _ in range(dim))
        sq = np.zeros((n,) * dim)
        for ax in range(dim):
            shape = [1] * dim
            shape[ax] = n
            sq = sq + k1.reshape(shape) ** 2
        return Grid(dim=dim, backend="torus", points_per_dim=n,
                    box_length=float(box_length), xi_abs=np.sqrt(sq),
                    k_axes=axes)
    if backend == "radial":
        if not r_max > 0:
            raise ValueError(f"r_max must be positive, got {r_max}")
        if nodes_per_panel < 2:
            raise ValueError("nodes_per_panel must be at least 2")
        nodes, weights = _radial_rule(r_max, nodes_per_panel, panel_growth,
                                      min_panel_scale, panels)
        if nodes.size < 32:
            raise ValueError("radial rule needs at least 32 nodes in total")
        return Grid(dim=dim, backend="radial", r_max=float(r_max),
                    xi_abs=nodes, weights=weights)
    raise ValueError(f"unknown backend {backend!r}")


def to_coeffs(grid: Grid, values: np.ndarray, meaning="psi") -> SpectralField:
    """Forward transform of physical samples (torus only)."""
    if not grid.is_torus:
        raise ValueError("physical samples exist only on the torus backend")
    c = np.fft.fftn(values) / grid.mode_count
    return SpectralField(grid, c, meaning)


def to_values(fld: SpectralField) -> np.ndarray:
    """Inverse transform to physical samples (torus only, complex output)."""
    if not fld.grid.is_torus:
        raise ValueError("physical samples exist only on the torus backend")
    return np.fft.ifftn(fld.coeffs) * fld.grid.mode_count


def parse_norm_spec(spec: str):
    """Split a norm spec string into (kind, order)."""
    s = spec.strip()
    if s == "L2":
        return "L2", 0.0
    if s.startswith("Hdot(") and s.endswith(")"):
        order = float(s[5:-1])
        if order < 0:
            raise ValueError(f"Hdot order must be nonnegative, got {order}")
        return "Hdot", order
    if s == "Linf-bound":
        return "Linf-bound", 0.0
    if s == "L1-fourier":
        return "L1-fourier", 0.0
    raise ValueError(f"unknown norm spec {spec!r}")


def _radial_measure(grid: Grid) -> np.ndarray:
    return grid.omega * grid.weights * grid.xi_abs ** (grid.dim - 1)


def norm(fld: SpectralField, spec: str) -> float:
    """Evaluate one norm of a spectral field.

    Sums are plain ``np.sum`` reductions (pairwise, single threaded) so that
    repeated runs of the same configuration are bitwise reproducible.
    """
    kind, order = parse_norm_spec(spec)
    g = fld.grid
    c = fld.coeffs
    mag2 = (c.real ** 2 + c.imag ** 2)
    if g.is_torus:
        vol = g.box_length ** g.dim
        if kind == "L2":
            return float(np.sqrt(vol * np.sum(mag2)))
        if kind == "Hdot":
            w = g.xi_abs ** (2.0 * order)
            return float(np.sqrt(vol * np.sum(w * mag2)))
        if kind == "L1-fourier":
            return float(np.sum(np.sqrt(mag2)))
        # Linf-bound: direct grid max of the physical field
        return float(np.max(np.abs(to_values(fld))))
    meas = _radial_measure(g)
    if kind == "L2":
        return float(np.sqrt(np.sum(meas * mag2)))
    if kind == "Hdot":
        return float(np.sqrt(np.sum(meas * g.xi_abs ** (2.0 * order) * mag2)))
    l1 = float(np.sum(meas * np.sqrt(mag2)))
    if kind == "L1-fourier":
        return l1
    return (2.0 * np.pi) ** (-g.dim) * l1


def l2_inner(a: SpectralField, b: SpectralField) -> float:
    """Real L^2 pairing of two fields on the same grid."""
    g = a.grid
    prod = (a.coeffs * np.conj(b.coeffs)).real
    if g.is_torus:
        return float(g.box_length ** g.dim * np.sum(prod))
    return float(np.sum(_radial_measure(g) * prod))


def is_real_field(fld: SpectralField, tol=1e-12) -> bool:
    """Check conjugate symmetry c(-k) = conj(c(k)) on the torus."""
    if not fld.grid.is_torus:
        return bool(np.max(np.abs(fld.coeffs.imag)) <= tol)
    c = fld.coeffs
    flipped = c.copy()
    for ax in range(fld.grid.dim):
        flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
    scale = max(1.0, float(np.max(np.abs(c))))
    return bool(np.max(np.abs(c - np.conj(flipped))) <= tol * scale)


def save_field(fld: SpectralField, path) -> None:
    """Write one field as CSV rows (flat mode index, re, im)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "re", "im"])
        flat = fld.coeffs.ravel()
        for i in range(flat.size):
            w.writerow([i, repr(float(flat[i].real)), repr(float(flat[i].imag))])


def load_field(grid: Grid, path, meaning="psi") -> SpectralField:
    """Read a field written by :func:`save_field` back onto ``grid``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    flat = np.zeros(grid.mode_count, dtype=complex)
    if len(rows) != flat.size:
        raise ValueError(f"{path}: expected {flat.size} rows, got {len(rows)}")
    for i, (_, re, im) in enumerate(rows):
        flat[i] = complex(float(re), float(im))
    return SpectralField(grid, flat.reshape(grid.mode_shape), meaning)
