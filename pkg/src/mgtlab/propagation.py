"""Exact per-mode propagators and the brute-force ODE reference.

Every |xi| mode of the linear third-order equation evolves under a cubic
characteristic polynomial with roots lam_1..3.  For pairwise distinct roots
the three data-slot kernels are Lagrange combinations of exponentials,

    K2(t) = sum_j exp(lam_j t) / prod_{k!=j}(lam_j - lam_k)
    K1(t) = -sum_j exp(lam_j t) (sum_{k!=j} lam_k) / prod_{k!=j}(lam_j - lam_k)
    K0(t) = sum_j exp(lam_j t) (prod_{k!=j} lam_k) / prod_{k!=j}(lam_j - lam_k)

normalised so that the l-th time derivative of K_j at t = 0 is delta_{jl}.
The mode solution is then K0*psi0 + K1*psi1 + K2*psi2 and its first two time
derivatives come from multiplying each exponential by lam_j**l.  Degenerate
triples (collided roots) make the Lagrange denominators blow up; those modes
are refused here and routed to the Runge-Kutta fallback instead.

The zero mode of the torus backend obeys  tau a''' + a'' = 0  and is advanced
by its closed form  a(t) = c0 + c1 t + c2 exp(-t/tau).

``kuznetsov_*`` functions implement the second-order limit flow with the
exponent pair rho+- (half-trace form), including the confluent branch at
|xi| = 2/delta where the pair collides.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import Grid, SpectralField, norm
from .params import Params
from .roots import solve_cubic_batch

__all__ = [
    "KernelEval",
    "RhoPair",
    "StateTrajectory",
    "ModeTrajectory",
    "kernel_eval",
    "kernel_weights",
    "kernel_tables",
    "mgt_evolve",
    "kuznetsov_rho",
    "kuznetsov_propagator",
    "kuznetsov_evolve",
    "mode_ode_reference",
    "rk4_modes",
]

# exp(re + i im) with re below this is flushed to exactly 0 instead of
# relying on gradual underflow (avoids spurious over/underflow warnings in
# downstream products)
_EXP_FLOOR = -700.0

CONFLUENT_ATOL = 1e-8


def _safe_exp(z):
    """exp of a complex array with hard flush to zero for dead modes."""
    z = np.asarray(z)
    dead = z.real < _EXP_FLOOR
    out = np.exp(np.where(dead, 0.0, z))
    return np.where(dead, 0.0, out)


# ---------------------------------------------------------------------------
# kernel algebra


def kernel_weights(lam: np.ndarray) -> np.ndarray:
    """Per-root exponential weights, shape (m, 3, 3) indexed [mode, slot, root].

    ``K_slot(t) = sum_root w[:, slot, root] * exp(lam[:, root] * t)``.
    """
    lam = np.atleast_2d(lam)
    l0, l1, l2 = lam[:, 0], lam[:, 1], lam[:, 2]
    d0 = (l0 - l1) * (l0 - l2)
    d1 = (l1 - l0) * (l1 - l2)
    d2 = (l2 - l0) * (l2 - l1)
    s1 = l0 + l1 + l2
    w = np.empty(lam.shape[:1] + (3, 3), dtype=complex)
    for i, (li, di) in enumerate(((l0, d0), (l1, d1), (l2, d2))):
        w[:, 2, i] = 1.0 / di
        w[:, 1, i] = -(s1 - li) / di
        w[:, 0, i] = (li * li - li * s1 + (l0 * l1 + l0 * l2 + l1 * l2)) / di
    return w


def kernel_tables(lam: np.ndarray, t: float, weights=None) -> np.ndarray:
    """Kernel value/derivative table, shape (m, 3, 3) indexed [mode, slot, l]."""
    lam = np.atleast_2d(lam)
    if weights is None:
        weights = kernel_weights(lam)
    e = _safe_exp(lam * t)                       # (m, 3)
    powers = np.stack([np.ones_like(lam), lam, lam * lam], axis=-1)  # (m,3,l)
    # K[:, slot, l] = sum_root w[:, slot, root] e[:, root] lam[:, root]**l
    return np.einsum("msr,mr,mrl->msl", weights, e, powers)


@dataclass(frozen=True)
class KernelEval:
    """Kernel table of one mode at one time; table[slot][l] = d^l/dt^l K_slot."""

    t: float
    xi_abs: float
    table: np.ndarray = field(repr=False)


def kernel_eval(roots, t: float) -> KernelEval:
    """Evaluate the three kernels and first two derivatives of one mode."""
    if roots.degenerate:
        raise ValueError(
            f"roots at |xi|={roots.xi_abs} are degenerate; use the ODE fallback")
    lam = np.array([roots.roots], dtype=complex)
    table = kernel_tables(lam, float(t))[0]
    return KernelEval(t=float(t), xi_abs=roots.xi_abs, table=table)


# ---------------------------------------------------------------------------
# trajectories


@dataclass
class StateTrajectory:
    """Field triple sampled on a time grid plus a ledger of norm series.

    ``psi``/``psi_t``/``psi_tt`` have shape (len(times), *mode_shape) when
    stored, otherwise None (long nonlinear runs keep only the ledger).
    Ledger keys are "slot:spec" strings such as "psi_t:L2".
    """

    grid: Grid
    times: np.ndarray
    psi: np.ndarray | None = None
    psi_t: np.ndarray | None = None
    psi_tt: np.ndarray | None = None
    norm_ledger: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def field_at(self, index: int, slot: str = "psi") -> SpectralField:
        arr = {"psi": self.psi, "psi_t": self.psi_t, "psi_tt": self.psi_tt}[slot]
        if arr is None:
            raise ValueError(f"trajectory did not store {slot}")
        return SpectralField(self.grid, arr[index], slot)


def _ledger_entry(grid, spec, psi_c, psit_c, psitt_c):
    slot, nspec = spec.split(":", 1)
    arr = {"psi": psi_c, "psi_t": psit_c, "psi_tt": psitt_c}[slot]
    return norm(SpectralField(grid, arr, slot), nspec)


def _unpack_data(grid: Grid, data, n_slots: int):
    out = []
    for i, f in enumerate(data[:n_slots]):
        c = f.coeffs if isinstance(f, SpectralField) else np.asarray(f, dtype=complex)
        if c.shape != grid.mode_shape:
            raise ValueError(f"data slot {i} has shape {c.shape}, "
                             f"expected {grid.mode_shape}")
        out.append(c.ravel().astype(complex))
    return out


# ---------------------------------------------------------------------------
# third-order flow


def mgt_evolve(params: Params, data, times, grid: Grid, *,
               norm_specs=(), store_fields=True, rk_dt=None) -> StateTrajectory:
    """Evolve an initial triple by exact per-mode kernels.

    ``times`` must be sorted and nonnegative.  Degenerate modes (and only
    those) are integrated by the RK reference with step ``rk_dt`` (default
    tau/40). Norm series for every entry of ``norm_specs`` are recorded at all
    output times regardless of ``store_fields``.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or np.any(np.diff(times) < 0) \
            or times[0] < 0:
        raise ValueError("times must be a sorted nonnegative 1-d array")
    p0, p1, p2 = _unpack_data(grid, data, 3)
    xi = grid.xi_abs.ravel()

    uniq, inv = np.unique(xi, return_inverse=True)
    lam_u, _, degen_u = solve_cubic_batch(params, uniq)
    lam = lam_u[inv]
    zero = xi == 0.0
    degen = degen_u[inv] & ~zero

    # zero/degenerate columns are produced by dedicated paths below; park them
    # on harmless distinct decaying roots so the Lagrange algebra stays finite
    bad = zero | degen
    if bad.any():
        lam = lam.copy()
        lam[bad] = np.array([-1.0, -2.0, -3.0], dtype=complex)

    w = kernel_weights(lam)
    # fold the data into per-root charges: psi(t) = sum_r q[:, r] e^{lam r t}
    q = (w[:, 0, :] * p0[:, None] + w[:, 1, :] * p1[:, None]
         + w[:, 2, :] * p2[:, None])

    T = times.size
    shape = (T,) + grid.mode_shape
    out = [np.zeros((T, xi.size), dtype=complex) for _ in range(3)]

    for it, t in enumerate(times):
        e = _safe_exp(lam * t)
        eq = e * q
        out[0][it] = eq.sum(axis=1)
        out[1][it] = (lam * eq).sum(axis=1)
        out[2][it] = (lam * lam * eq).sum(axis=1)

    if zero.any():
        tau = params.tau
        a0, a1, a2 = p0[zero], p1[zero], p2[zero]
        c2 = tau ** 2 * a2
        c1 = a1 + tau * a2
        c0 = a0 - tau ** 2 * a2
        for it, t in enumerate(times):
            decay = np.exp(-t / tau)
            out[0][it, zero] = c0 + c1 * t + c2 * decay
            out[1][it, zero] = c1 - (c2 / tau) * decay
            out[2][it, zero] = a2 * decay

    if degen.any():
        dt = rk_dt if rk_dt is not None else params.tau / 40.0
        sub = rk4_modes(params, xi[degen], (p0[degen], p1[degen], p2[degen]),
                        None, times, dt)
        for k in range(3):
            out[k][:, degen] = sub[k]

    ledger = {}
    for spec in norm_specs:
        ledger[spec] = np.array([
            _ledger_entry(grid, spec, out[0][it].reshape(grid.mode_shape),
                          out[1][it].reshape(grid.mode_shape),
                          out[2][it].reshape(grid.mode_shape))
            for it in range(T)])

    traj = StateTrajectory(grid=grid, times=times, norm_ledger=ledger,
                           meta={"flow": "third-order", "tau": params.tau,
                                 "delta": params.delta})
    if store_fields:
        traj.psi = out[0].reshape(shape)
        traj.psi_t = out[1].reshape(shape)
        traj.psi_tt = out[2].reshape(shape)
    return traj


# ---------------------------------------------------------------------------
# limit flow (second order)


@dataclass(frozen=True)
class RhoPair:
    """Characteristic pair of the limit flow at one frequency."""

    xi_abs: float
    rho_plus: complex
    rho_minus: complex
    confluent: bool

    @property
    def separation(self) -> complex:
        return self.rho_plus - self.rho_minus


def kuznetsov_rho(delta: float, xi_abs: float) -> RhoPair:
    """Exponent pair; oscillatory below 2/delta, overdamped above, confluent
    (within 1e-8) at the crossover."""
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    r = float(xi_abs)
    confluent = abs(r - 2.0 / delta) <= CONFLUENT_ATOL
    half = -0.5 * delta * r * r
    if confluent:
        return RhoPair(r, complex(half), complex(half), True)
    s = 0.5 * r * np.sqrt(complex(delta * delta * r * r - 4.0))
    return RhoPair(r, complex(half + s), complex(half - s), False)


def _rho_arrays(delta: float, r: np.ndarray):
    half = -0.5 * delta * r * r
    s = 0.5 * r * np.sqrt((delta * delta * r * r - 4.0).astype(complex))
    confluent = np.abs(r - 2.0 / delta) <= CONFLUENT_ATOL
    return half + s, half - s, confluent


def kuznetsov_propagator(delta: float, r: np.ndarray, t: float):
    """Arrays (E0, E1, dE0, dE1) at time t for a vector of frequencies.

    The zero frequency degenerates to free drift: E0 = 1, E1 = t."""
    rp, rm, conf = _rho_arrays(delta, r)
    with np.errstate(invalid="ignore", divide="ignore"):
        diff = rp - rm
        ep, em = _safe_exp(rp * t), _safe_exp(rm * t)
        e0 = (rp * em - rm * ep) / diff
        e1 = (ep - em) / diff
        d0 = rp * rm * (em - ep) / diff
        d1 = (rp * ep - rm * em) / diff
    zero = r == 0.0
    if zero.any():
        e0[zero], e1[zero] = 1.0, t
        d0[zero], d1[zero] = 0.0, 1.0
    if conf.any():
        idx = np.nonzero(conf)[0]
        rho = (-0.5 * delta * r * r)[idx].astype(complex)
        e = _safe_exp(rho * t)
        e0[idx] = (1.0 - rho * t) * e
        e1[idx] = t * e
        d0[idx] = -rho * rho * t * e
        d1[idx] = (1.0 + rho * t) * e
    return e0, e1, d0, d1


def kuznetsov_evolve(delta: float, data, times, grid: Grid, *,
                     norm_specs=(), store_fields=True) -> StateTrajectory:
    """Evolve a data pair under the limit flow; the second derivative is
    reconstructed from the constitutive relation
    phi_tt = -|xi|^2 (phi + delta phi_t), zero at the torus zero mode."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or np.any(np.diff(times) < 0) \
            or times[0] < 0:
        raise ValueError("times must be a sorted nonnegative 1-d array")
    p0, p1 = _unpack_data(grid, data, 2)
    xi = grid.xi_abs.ravel()
    zero = xi == 0.0
    r = np.where(zero, 1.0, xi)          # placeholder, overwritten below

    T = times.size
    out = [np.zeros((T, xi.size), dtype=complex) for _ in range(3)]
    for it, t in enumerate(times):
        e0, e1, d0, d1 = kuznetsov_propagator(delta, r, float(t))
        phi = e0 * p0 + e1 * p1
        phit = d0 * p0 + d1 * p1
        out[0][it] = phi
        out[1][it] = phit
        out[2][it] = -xi ** 2 * (phi + delta * phit)
        if zero.any():
            out[0][it, zero] = p0[zero] + t * p1[zero]
            out[1][it, zero] = p1[zero]
            out[2][it, zero] = 0.0

    ledger = {}
    for spec in norm_specs:
        ledger[spec] = np.array([
            _ledger_entry(grid, spec, out[0][it].reshape(grid.mode_shape),
                          out[1][it].reshape(grid.mode_shape),
                          out[2][it].reshape(grid.mode_shape))
            for it in range(T)])

    traj = StateTrajectory(grid=grid, times=times, norm_ledger=ledger,
                           meta={"flow": "limit", "delta": delta})
    if store_fields:
        shape = (T,) + grid.mode_shape
        traj.psi = out[0].reshape(shape)
        traj.psi_t = out[1].reshape(shape)
        traj.psi_tt = out[2].reshape(shape)
    return traj


# ---------------------------------------------------------------------------
# brute-force reference


@dataclass
class ModeTrajectory:
    """Dense single-mode (or mode-batch) reference trajectory."""

    times: np.ndarray
    u: np.ndarray
    u_t: np.ndarray
    u_tt: np.ndarray


def rk4_modes(params: Params, xi_abs, data, forcing, times, dt):
    """Classical RK4 on a batch of modes, sampled exactly at ``times``.

    ``forcing`` is None or a callable t -> array over the batch.  Steps are
    fixed at ``dt`` except for a shortened final substep per output interval,
    so outputs land exactly on the requested times.
    """
    xi = np.atleast_1d(np.asarray(xi_abs, dtype=float))
    r2 = xi ** 2
    tau, delta = params.tau, params.delta
    ct = delta + tau

    def rhs(t, u, v, w):
        f = forcing(t) if forcing is not None else 0.0
        return v, w, (f - w - ct * r2 * v - r2 * u) / tau

    u = np.asarray(data[0], dtype=complex).copy()
    v = np.asarray(data[1], dtype=complex).copy()
    w = np.asarray(data[2], dtype=complex).copy()

    times = np.asarray(times, dtype=float)
    out = [np.empty((times.size, xi.size), dtype=complex) for _ in range(3)]
    t = 0.0
    for it, t_target in enumerate(times):
        span = t_target - t
        nsub = max(1, int(np.ceil(span / dt - 1e-12))) if span > 0 else 0
        h = span / nsub if nsub else 0.0
        for _ in range(nsub):
            k1 = rhs(t, u, v, w)
            k2 = rhs(t + 0.5 * h, u + 0.5 * h * k1[0], v + 0.5 * h * k1[1],
                     w + 0.5 * h * k1[2])
            k3 = rhs(t + 0.5 * h, u + 0.5 * h * k2[0], v + 0.5 * h * k2[1],
                     w + 0.5 * h * k2[2])
            k4 = rhs(t + h, u + h * k3[0], v + h * k3[1], w + h * k3[2])
            u = u + (h / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            v = v + (h / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            w = w + (h / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
            t += h
        t = float(t_target)
        out[0][it], out[1][it], out[2][it] = u, v, w
    return out


def mode_ode_reference(params: Params, xi_abs: float, data, forcing=None,
                       t_end=10.0, dt=None) -> ModeTrajectory:
    """Runge-Kutta reference for one mode, the two-path partner of the exact
    kernels.  ``dt`` defaults to tau/40 and may not exceed tau/20 (stiffness
    guard); output is sampled at every accepted step."""
    if dt is None:
        dt = params.tau / 40.0
    if dt > params.tau / 20.0:
        raise ValueError(f"dt={dt} exceeds the stiffness guard tau/20")
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    n = int(np.ceil(t_end / dt - 1e-12))
    times = np.linspace(0.0, t_end, n + 1)
    d = [np.atleast_1d(np.asarray(x, dtype=complex)) for x in data]
    fb = None
    if forcing is not None:
        fb = lambda t: np.atleast_1d(np.asarray(forcing(t), dtype=complex))
    u, v, w = rk4_modes(params, [xi_abs], d, fb, times, dt)
    return ModeTrajectory(times=times, u=u[:, 0], u_t=v[:, 0], u_tt=w[:, 0])
