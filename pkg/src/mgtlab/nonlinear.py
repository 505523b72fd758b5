"""Nonlinear quadratic-pressure solver with an exact linear propagator.

The model is the third-order flow driven by its own quadratic term

    f = (B/A) psi_t psi_tt + 2 grad(psi) . grad(psi_t),

evaluated pseudospectrally on the torus with 2/3-rule dealiasing.  Time
stepping is an exponential two-stage scheme: the linear part is advanced by
the exact per-mode kernel table for one step h, and the forcing enters
through the third-slot kernel with a linear-in-step reconstruction,

    state_{n+1} = T(h) state_n + g_n I(h) + (g* - g_n) P(h) / h,

where g = f_hat / tau, g* is the predictor (exponential Euler) endpoint
value, I the integrated kernel column for a constant source and P its
ramp-weighted counterpart.  Both response columns have closed forms in the
mode roots; modes flagged degenerate fall back to a Van Loan block matrix
exponential, and the spatially constant mode uses its own exact formulas.
The stiffness 1/tau lives entirely inside the tables, so h is set by the
nonlinearity alone.

The same machinery with the two-root kernel pair gives the nonlinear limit
flow (``kuznetsov_nonlinear_evolve``), used by the exploratory relaxation
probe.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .grids import Grid, SpectralField, norm
from .params import Params
from .propagation import (StateTrajectory, _rho_arrays, _safe_exp)
from .rates import RateFit, dn_coefficient, expected_rate, fit_rate
from .roots import solve_cubic_batch
from .propagation import kernel_tables, kernel_weights

__all__ = [
    "BlowUpError",
    "nonlinearity",
    "jmgt_evolve",
    "kuznetsov_nonlinear_evolve",
    "duhamel_apply",
    "xs_weights",
    "XsSeries",
    "xs_norm",
    "default_tracked_norms",
    "SmallDataEntry",
    "SmallDataReport",
    "smalldata_study",
]

GUARD_FACTOR = 1e3


class BlowUpError(RuntimeError):
    """Raised when a tracked norm exceeds the guard threshold."""

    def __init__(self, message, *, time, step, norms):
        super().__init__(message)
        self.time = time
        self.step = step
        self.norms = norms


# ---------------------------------------------------------------------------
# quadratic term


def nonlinearity(state, b_over_a: float, grid: Grid) -> SpectralField:
    """Spectral coefficients of (B/A) psi_t psi_tt + 2 grad psi . grad psi_t.

    Products are formed in physical space; gradients by the i*k multiplier.
    Inputs and output are masked by the 2/3 rule, so quadratic interactions
    of retained modes are alias-free.
    """
    if not grid.is_torus:
        raise ValueError("nonlinearity needs the torus backend; "
                         "pointwise products are undefined on the radial one")
    psi, psi_t, psi_tt = (
        (s.coeffs if isinstance(s, SpectralField) else
         np.asarray(s, dtype=complex)).reshape(grid.mode_shape)
        for s in state)
    mask = grid.dealias_mask()
    psi = psi * mask
    psi_t = psi_t * mask
    psi_tt = psi_tt * mask

    n = grid.dim
    shape = grid.mode_shape
    vt = np.fft.ifftn(psi_t.reshape(shape)) * grid.mode_count
    vtt = np.fft.ifftn(psi_tt.reshape(shape)) * grid.mode_count
    fvals = b_over_a * vt * vtt
    for ax in range(n):
        mult = grid.derivative_multiplier(ax)
        gpsi = np.fft.ifftn((mult * psi.reshape(shape))) * grid.mode_count
        gpsit = np.fft.ifftn((mult * psi_t.reshape(shape))) * grid.mode_count
        fvals = fvals + 2.0 * gpsi * gpsit
    fhat = np.fft.fftn(fvals) / grid.mode_count
    return SpectralField(grid, fhat * mask, "forcing")


# ---------------------------------------------------------------------------
# one-step tables


def _phi1(z):
    """(e^z - 1)/z, series below |z| = 1e-3."""
    out = np.empty_like(z)
    small = np.abs(z) < 1e-3
    zs = z[small]
    out[small] = 1.0 + zs / 2.0 + zs ** 2 / 6.0 + zs ** 3 / 24.0
    zb = z[~small]
    out[~small] = (np.exp(zb) - 1.0) / zb
    return out


def _phi2(z):
    """(e^z - 1 - z)/z^2, series below |z| = 1e-3."""
    out = np.empty_like(z)
    small = np.abs(z) < 1e-3
    zs = z[small]
    out[small] = 0.5 + zs / 6.0 + zs ** 2 / 24.0 + zs ** 3 / 120.0
    zb = z[~small]
    out[~small] = (np.exp(zb) - 1.0 - zb) / zb ** 2
    return out


def _expm(m: np.ndarray) -> np.ndarray:
    """Small dense matrix exponential, Taylor + scaling and squaring."""
    norm1 = float(np.abs(m).sum(axis=0).max())
    k = 0 if norm1 <= 0.5 else int(np.ceil(np.log2(norm1 / 0.5)))
    a = m / (2.0 ** k)
    out = np.eye(m.shape[0], dtype=complex)
    term = np.eye(m.shape[0], dtype=complex)
    for j in range(1, 25):
        term = term @ a / j
        out = out + term
    for _ in range(k):
        out = out @ out
    return out


def _van_loan(a: np.ndarray, h: float):
    """(T, I, P) for state' = a state + e_last g via one block exponential:
    T = e^{ah}, I = response to g = 1, P = response to g = sigma."""
    d = a.shape[0]
    c = np.zeros((d + 2, d + 2), dtype=complex)
    c[:d, :d] = a
    c[d - 1, d] = 1.0       # forcing enters the last state slot
    c[d, d + 1] = 1.0
    f = _expm(c * h)
    return f[:d, :d], f[:d, d], f[:d, d + 1]


def _tail(z: float, k0: int) -> float:
    """sum_{k >= k0} (-z)^k / k!, the alternating exponential tail."""
    if z < 0.3:
        total, term = 0.0, (-z) ** k0 / math.factorial(k0)
        k = k0
        while abs(term) > 1e-20:
            total += term
            k += 1
            term *= -z / k
        return total
    e = math.exp(-z)
    head = sum((-z) ** k / math.factorial(k) for k in range(k0))
    return e - head


@dataclass
class _StepTables:
    """Per-mode one-step advance operators (see module docstring)."""

    T: np.ndarray    # (M, n_slots, n_slots): T[m, slot, l] = K_slot^{(l)}(h)
    I: np.ndarray    # (M, n_slots) constant-source response
    P: np.ndarray    # (M, n_slots) ramp-source response
    h: float

    def advance(self, state, g_now, g_next):
        hom = np.einsum("msl,sm->lm", self.T, state)
        ramp = (g_next - g_now) / self.h
        return hom + g_now[None, :] * self.I.T + ramp[None, :] * self.P.T


def _third_order_tables(params: Params, r: np.ndarray, h: float) -> _StepTables:
    """Exact step tables for the three-slot flow at every |xi| in ``r``."""
    uniq, inv = np.unique(r, return_inverse=True)
    lam_u, _, degen_u = solve_cubic_batch(params, uniq)
    zero_u = uniq == 0.0
    bad_u = (degen_u & ~zero_u)

    lam_safe = lam_u.copy()
    lam_safe[bad_u | zero_u] = np.array([-1.0, -2.0, -3.0], dtype=complex)
    w = kernel_weights(lam_safe)
    tab = kernel_tables(lam_safe, h, w)            # (m, slot, l)

    z = lam_safe * h
    Ivec = np.empty((uniq.size, 3), dtype=complex)
    Pvec = np.empty((uniq.size, 3), dtype=complex)
    Ivec[:, 0] = (w[:, 2, :] * h * _phi1(z)).sum(axis=1)
    Ivec[:, 1] = tab[:, 2, 0]
    Ivec[:, 2] = tab[:, 2, 1]
    Pvec[:, 0] = (w[:, 2, :] * h * h * _phi2(z)).sum(axis=1)
    Pvec[:, 1] = Ivec[:, 0]
    Pvec[:, 2] = tab[:, 2, 0]

    tau = params.tau
    if zero_u.any():
        zz = h / tau
        E = math.exp(-zz)
        b1 = _tail(zz, 2)          # z - 1 + e^{-z}
        b2 = -_tail(zz, 3)         # z^2/2 - z + 1 - e^{-z}
        b3 = _tail(zz, 4)          # z^3/6 - z^2/2 + z - 1 + e^{-z}
        t0 = np.array([[1.0, h, tau * tau * b1],
                       [0.0, 1.0, tau * (1.0 - E)],
                       [0.0, 0.0, E]], dtype=complex)
        # table layout is [slot, l] = K_slot^{(l)}, the transition transposed
        tab[zero_u] = t0.T[None]
        Ivec[zero_u] = np.array([tau ** 3 * b2, tau * h - tau * tau * (1 - E),
                                 tau * (1.0 - E)])
        Pvec[zero_u] = np.array([tau ** 4 * b3,
                                 tau * (h * h / 2 - tau * h + tau * tau * (1 - E)),
                                 tau * (h - tau * (1.0 - E))])

    if bad_u.any():
        for j in np.nonzero(bad_u)[0]:
            rr = uniq[j]
            a = np.array([[0, 1, 0], [0, 0, 1],
                          [-rr ** 2 / tau, -(params.delta + tau) * rr ** 2 / tau,
                           -1.0 / tau]], dtype=complex)
            tj, ij, pj = _van_loan(a, h)
            tab[j] = tj.T          # tj[l, slot] -> [slot, l]
            Ivec[j] = ij
            Pvec[j] = pj

    return _StepTables(T=tab[inv], I=Ivec[inv], P=Pvec[inv], h=h)


def _second_order_tables(delta: float, r: np.ndarray, h: float) -> _StepTables:
    """Exact step tables for the two-slot limit flow (forcing unscaled)."""
    uniq, inv = np.unique(r, return_inverse=True)
    rp, rm, conf = _rho_arrays(delta, uniq)
    zero_u = uniq == 0.0
    bad_u = (conf | zero_u)
    rp = np.where(bad_u, -1.0, rp)
    rm = np.where(bad_u, -2.0, rm)

    diff = rp - rm
    ep, em = _safe_exp(rp * h), _safe_exp(rm * h)
    tab = np.empty((uniq.size, 2, 2), dtype=complex)   # [m, slot, l]
    tab[:, 0, 0] = (rp * em - rm * ep) / diff
    tab[:, 0, 1] = rp * rm * (em - ep) / diff
    tab[:, 1, 0] = (ep - em) / diff
    tab[:, 1, 1] = (rp * ep - rm * em) / diff

    Ivec = np.empty((uniq.size, 2), dtype=complex)
    Pvec = np.empty((uniq.size, 2), dtype=complex)
    Ivec[:, 0] = (h * _phi1(rp * h) - h * _phi1(rm * h)) / diff
    Ivec[:, 1] = tab[:, 1, 0]
    Pvec[:, 0] = (h * h * _phi2(rp * h) - h * h * _phi2(rm * h)) / diff
    Pvec[:, 1] = Ivec[:, 0]

    if zero_u.any():
        tab[zero_u] = np.array([[1.0, 0.0], [h, 1.0]], dtype=complex)
        Ivec[zero_u] = np.array([h * h / 2.0, h])
        Pvec[zero_u] = np.array([h ** 3 / 6.0, h * h / 2.0])
    conf_only = conf & ~zero_u
    if conf_only.any():
        for j in np.nonzero(conf_only)[0]:
            rr = uniq[j]
            a = np.array([[0, 1], [-rr ** 2, -delta * rr ** 2]], dtype=complex)
            tj, ij, pj = _van_loan(a, h)
            tab[j] = tj.T
            Ivec[j] = ij
            Pvec[j] = pj

    return _StepTables(T=tab[inv], I=Ivec[inv], P=Pvec[inv], h=h)


# ---------------------------------------------------------------------------
# norm bookkeeping


def default_tracked_norms(s: float):
    """Ledger keys for the weighted-norm family at smoothness s."""
    return ("psi:L2", "psi_t:L2", "psi_tt:L2",
            f"psi:Hdot({s + 2:g})", f"psi_t:Hdot({s + 1:g})",
            f"psi_tt:Hdot({s:g})", "psi:Linf-bound")


def _ledger_norms(grid, specs, coeff_by_slot):
    vals = {}
    for spec in specs:
        slot, nspec = spec.split(":", 1)
        vals[spec] = norm(SpectralField(
            grid, coeff_by_slot[slot].reshape(grid.mode_shape), slot), nspec)
    return vals


def _resolve_output_steps(t_end, dt, output_times):
    n_steps = int(round(t_end / dt))
    if abs(n_steps * dt - t_end) > 1e-9 * max(1.0, t_end):
        n_steps = int(math.ceil(t_end / dt))
    if output_times is None:
        approx = np.concatenate([[0.0],
                                 np.geomspace(max(10 * dt, 1e-3),
                                              n_steps * dt, 192)])
    else:
        approx = np.asarray(output_times, dtype=float)
    idx = np.unique(np.clip(np.round(approx / dt).astype(int), 0, n_steps))
    return n_steps, idx


def _guard_check(step, t, state, grid, scale, guard_factor):
    l2 = [float(np.sqrt(np.sum(np.abs(c) ** 2))) for c in state]
    if not all(np.isfinite(v) for v in l2) or max(l2) > guard_factor * scale:
        raise BlowUpError(
            f"blow-up guard tripped at t={t:.6g} (step {step}): "
            f"mode-l2 per slot {l2}, initial scale {scale:.3e}",
            time=t, step=step, norms=l2)


# ---------------------------------------------------------------------------
# the two nonlinear flows


def jmgt_evolve(params: Params, data, t_end: float, dt: float, grid: Grid, *,
                output_times=None, norm_specs=None, s: float | None = None,
                guard_factor=GUARD_FACTOR, small_data_max=0.5,
                store_fields=False) -> StateTrajectory:
    """Evolve the quadratic third-order flow by the exponential two-stage
    scheme.  ``dt`` must not exceed tau/10 (the forcing reconstruction is
    the only accuracy limit; the linear part is exact at any step).

    Norm series are recorded at ``output_times`` (snapped to the step grid;
    a geometric default covers [10 dt, t_end]); fields are kept there only
    when ``store_fields``.  The guard aborts the run with ``BlowUpError``
    once any state slot exceeds ``guard_factor`` times the initial scale.
    """
    if not grid.is_torus:
        raise ValueError("nonlinear evolution needs the torus backend")
    if dt > params.tau / 10.0 + 1e-15:
        raise ValueError(f"dt={dt} too coarse: need dt <= tau/10 = "
                         f"{params.tau / 10.0:.3g}")
    if s is None:
        s = grid.dim / 2 - 1 + 0.6 if grid.dim >= 2 else 0.6
    if norm_specs is None:
        norm_specs = default_tracked_norms(s)
    if grid.dim == 1:
        warnings.warn("n=1 nonlinear run: UNSUPPORTED-BY-THEOREM "
                      "(small-data theory needs n >= 2)", stacklevel=2)

    mask = grid.dealias_mask().ravel()
    state = np.stack([
        (f.coeffs if isinstance(f, SpectralField) else np.asarray(f)).ravel()
        .astype(complex) * mask for f in data])
    r = grid.xi_abs.ravel()
    tables = _third_order_tables(params, r, dt)
    n_steps, out_idx = _resolve_output_steps(t_end, dt, output_times)
    out_times = out_idx * dt

    linf0 = norm(SpectralField(grid, state[0].reshape(grid.mode_shape)),
                 "Linf-bound")
    small_ok = linf0 <= small_data_max
    if not small_ok:
        warnings.warn(f"initial amplitude bound {linf0:.3g} exceeds the "
                      f"small-data threshold {small_data_max}", stacklevel=2)
    scale = max(float(np.sqrt(np.sum(np.abs(state) ** 2, axis=1)).max()),
                1e-30)

    def g_of(st):
        f = nonlinearity((st[0], st[1], st[2]), params.b_over_a, grid)
        return f.coeffs.ravel() / params.tau

    ledger = {spec: np.zeros(out_idx.size) for spec in norm_specs}
    fields = ([np.zeros((out_idx.size, r.size), complex) for _ in range(3)]
              if store_fields else None)
    out_pos = {int(k): i for i, k in enumerate(out_idx)}

    def record(step, st):
        i = out_pos.get(step)
        if i is None:
            return
        vals = _ledger_norms(grid, norm_specs,
                             {"psi": st[0], "psi_t": st[1], "psi_tt": st[2]})
        for spec, v in vals.items():
            ledger[spec][i] = v
        if fields is not None:
            for kslot in range(3):
                fields[kslot][i] = st[kslot]

    record(0, state)
    g_now = g_of(state)
    for step in range(n_steps):
        predictor = (np.einsum("msl,sm->lm", tables.T, state)
                     + g_now[None, :] * tables.I.T)
        g_pred = g_of(predictor)
        state = tables.advance(state, g_now, g_pred)
        _guard_check(step + 1, (step + 1) * dt, state, grid, scale,
                     guard_factor)
        g_now = g_of(state)
        record(step + 1, state)

    meta = {"flow": "nonlinear-third-order", "tau": params.tau,
            "delta": params.delta, "b_over_a": params.b_over_a,
            "dt": dt, "s": s, "small_data_ok": small_ok}
    if grid.dim == 1:
        meta["theorem_scope"] = "UNSUPPORTED-BY-THEOREM"
    traj = StateTrajectory(grid=grid, times=out_times, norm_ledger=ledger,
                           meta=meta)
    if store_fields:
        shape = (out_idx.size,) + grid.mode_shape
        traj.psi = fields[0].reshape(shape)
        traj.psi_t = fields[1].reshape(shape)
        traj.psi_tt = fields[2].reshape(shape)
    return traj


def kuznetsov_nonlinear_evolve(delta: float, b_over_a: float, data, t_end,
                               dt, grid: Grid, *, output_times=None,
                               norm_specs=(), guard_factor=GUARD_FACTOR,
                               store_fields=False) -> StateTrajectory:
    """The limit counterpart: second-order flow driven by the same quadratic
    term, advanced by its own exact two-slot tables.  The acceleration slot
    is reconstructed from the constitutive relation plus forcing."""
    if not grid.is_torus:
        raise ValueError("nonlinear evolution needs the torus backend")
    mask = grid.dealias_mask().ravel()
    state = np.stack([
        (f.coeffs if isinstance(f, SpectralField) else np.asarray(f)).ravel()
        .astype(complex) * mask for f in data[:2]])
    r = grid.xi_abs.ravel()
    r2 = r ** 2
    tables = _second_order_tables(delta, r, dt)
    n_steps, out_idx = _resolve_output_steps(t_end, dt, output_times)
    out_times = out_idx * dt
    scale = max(float(np.sqrt(np.sum(np.abs(state) ** 2, axis=1)).max()),
                1e-30)

    def accel(st, g):
        return -r2 * (st[0] + delta * st[1]) + g

    def g_of(st, g_prev):
        # acceleration uses the forcing itself; one fixed-point pass is exact
        # to the scheme's order
        a = accel(st, g_prev)
        f = nonlinearity((st[0], st[1], a), b_over_a, grid)
        return f.coeffs.ravel()

    ledger = {spec: np.zeros(out_idx.size) for spec in norm_specs}
    fields = ([np.zeros((out_idx.size, r.size), complex) for _ in range(3)]
              if store_fields else None)
    out_pos = {int(k): i for i, k in enumerate(out_idx)}

    def record(step, st, g):
        i = out_pos.get(step)
        if i is None:
            return
        a = accel(st, g)
        vals = _ledger_norms(grid, norm_specs,
                             {"psi": st[0], "psi_t": st[1], "psi_tt": a})
        for spec, v in vals.items():
            ledger[spec][i] = v
        if fields is not None:
            fields[0][i], fields[1][i], fields[2][i] = st[0], st[1], a

    g_now = g_of(state, np.zeros(r.size, complex))
    g_now = g_of(state, g_now)          # second pass settles psi_tt at t=0
    record(0, state, g_now)
    for step in range(n_steps):
        predictor = (np.einsum("msl,sm->lm", tables.T, state)
                     + g_now[None, :] * tables.I.T)
        g_pred = g_of(predictor, g_now)
        state = tables.advance(state, g_now, g_pred)
        _guard_check(step + 1, (step + 1) * dt, state, grid, scale,
                     guard_factor)
        g_now = g_of(state, g_pred)
        record(step + 1, state, g_now)

    meta = {"flow": "nonlinear-limit", "delta": delta,
            "b_over_a": b_over_a, "dt": dt}
    traj = StateTrajectory(grid=grid, times=out_times, norm_ledger=ledger,
                           meta=meta)
    if store_fields:
        shape = (out_idx.size,) + grid.mode_shape
        traj.psi = fields[0].reshape(shape)
        traj.psi_t = fields[1].reshape(shape)
        traj.psi_tt = fields[2].reshape(shape)
    return traj


# ---------------------------------------------------------------------------
# standalone Duhamel accumulation


def duhamel_apply(forcing, params: Params, grid: Grid, dt: float) -> StateTrajectory:
    """Accumulate int_0^t K2(t - sigma) fhat(sigma) dsigma step by step.

    ``forcing`` holds fhat samples on the uniform step grid, shape
    (n_samples, *mode_shape).  The literal kernel convention is used (no
    1/tau scaling): feed ``fhat / tau`` to reproduce the third-order flow's
    particular solution.  Returns the integral and its first two time
    derivatives as a trajectory on the same grid of times.
    """
    forcing = np.asarray(forcing, dtype=complex)
    if dt <= 0:
        raise ValueError("dt must be positive")
    if forcing.ndim != 1 + len(grid.mode_shape) \
            or forcing.shape[1:] != grid.mode_shape:
        raise ValueError(f"forcing samples have shape {forcing.shape}, "
                         f"expected (n, {grid.mode_shape}) — step mismatch")
    n = forcing.shape[0]
    flat = forcing.reshape(n, -1)
    r = grid.xi_abs.ravel()
    tables = _third_order_tables(params, r, dt)

    state = np.zeros((3, r.size), dtype=complex)
    out = np.zeros((3, n, r.size), dtype=complex)
    for k in range(n - 1):
        state = tables.advance(state, flat[k], flat[k + 1])
        out[:, k + 1] = state
    shape = (n,) + grid.mode_shape
    return StateTrajectory(
        grid=grid, times=np.arange(n) * dt,
        psi=out[0].reshape(shape), psi_t=out[1].reshape(shape),
        psi_tt=out[2].reshape(shape),
        meta={"flow": "duhamel", "dt": dt})


# ---------------------------------------------------------------------------
# weighted norm family


def xs_weights(n: int, s: float, t: float) -> dict:
    """The six time weights of the evolution-space norm at time t."""
    return {
        "psi:L2": 1.0 / dn_coefficient(n, t),
        "psi_t:L2": (1.0 + t) ** (0.0 + n / 4.0),
        "psi_tt:L2": (1.0 + t) ** (0.5 + n / 4.0),
        f"psi:Hdot({s + 2:g})": (1.0 + t) ** (0.5 + s / 2.0 + n / 4.0),
        f"psi_t:Hdot({s + 1:g})": (1.0 + t) ** (0.5 + s / 2.0 + n / 4.0),
        f"psi_tt:Hdot({s:g})": (1.0 + t) ** (0.5 + s / 2.0 + n / 4.0),
    }


@dataclass
class XsSeries:
    """Weighted-sum series and its running supremum."""

    times: np.ndarray
    series: np.ndarray
    running_sup: np.ndarray

    @property
    def sup(self) -> float:
        return float(self.running_sup[-1])


def xs_norm(traj: StateTrajectory, s: float) -> XsSeries:
    """Evaluate the six-term weighted norm along a trajectory.

    Requires the ledger entries produced by ``default_tracked_norms(s)``
    (or stored fields to compute them from).  Outside s > n/2 - 1 the
    weights are still defined; a warning flags that the boundedness theory
    does not apply there.
    """
    n = traj.grid.dim
    if not s > n / 2 - 1:
        warnings.warn(f"s={s} is outside the supported range s > {n/2 - 1}; "
                      "computing anyway", stacklevel=2)
    keys = default_tracked_norms(s)[:6]

    def series_for(spec):
        if spec in traj.norm_ledger:
            return np.asarray(traj.norm_ledger[spec], dtype=float)
        slot, nspec = spec.split(":", 1)
        arr = {"psi": traj.psi, "psi_t": traj.psi_t,
               "psi_tt": traj.psi_tt}[slot]
        if arr is None:
            raise KeyError(f"trajectory has neither ledger entry nor stored "
                           f"fields for {spec}")
        return np.array([norm(SpectralField(traj.grid, arr[i], slot), nspec)
                         for i in range(traj.times.size)])

    series = {k: series_for(k) for k in keys}
    total = np.zeros(traj.times.size)
    for it, t in enumerate(traj.times):
        w = xs_weights(n, s, float(t))
        total[it] = math.fsum(w[k] * series[k][it] for k in keys)
    return XsSeries(times=traj.times, series=total,
                    running_sup=np.maximum.accumulate(total))


# ---------------------------------------------------------------------------
# small-data study


@dataclass
class SmallDataEntry:
    epsilon: float
    aborted: bool
    abort_info: str
    bounded: bool
    sup_xs: float
    fits: dict = field(default_factory=dict)       # tag -> RateFit
    targets: dict = field(default_factory=dict)    # tag -> expected exponent
    rate_ok: dict = field(default_factory=dict)    # tag -> within tolerance

    @property
    def passed(self) -> bool:
        return (not self.aborted) and self.bounded and all(
            self.rate_ok.values())


@dataclass
class SmallDataReport:
    n: int
    s: float
    t_end: float
    entries: list
    rate_tol: float


def _study_data(grid, delta, eps, width):
    from .data import synthesize_initial_data
    return synthesize_initial_data(grid, "compatible", width=width,
                                   amplitude=eps, psi1_amplitude=0.3 * eps,
                                   delta=delta, normalize="peak")


def smalldata_study(params: Params, epsilons, s: float, t_end: float,
                    grid: Grid, *, dt=None, width=1.0, fit_t_min=5.0,
                    rate_tol=0.2, guard_factor=GUARD_FACTOR) -> SmallDataReport:
    """Boundedness-and-rates audit of the quadratic flow for a list of
    data amplitudes.

    Per amplitude: run the solver, confirm the guard never trips, confirm
    the running weighted-norm supremum saturates (bounded), and fit the
    large-time rate of each tracked norm against its expected exponent
    (power law; the n=2 solution itself uses the sqrt-log model).
    """
    n = grid.dim
    if n not in (2, 3) or not grid.is_torus:
        raise ValueError("small-data study needs an n=2 or n=3 torus grid")
    if not s > n / 2 - 1:
        raise ValueError(f"need s > n/2 - 1 = {n/2 - 1}, got {s}")
    if dt is None:
        dt = params.tau / 10.0

    targets = {
        "psi_t:L2": expected_rate(n, "dt", ell=1).exponent,
        "psi_tt:L2": expected_rate(n, "dt", ell=2).exponent,
        f"psi:Hdot({s + 2:g})": expected_rate(n, "hdot", s=s).exponent,
        f"psi_t:Hdot({s + 1:g})": expected_rate(n, "hdot", s=s).exponent,
        f"psi_tt:Hdot({s:g})": expected_rate(n, "hdot", s=s).exponent,
    }

    entries = []
    for eps in epsilons:
        if eps == 0.0:
            zero = np.zeros(grid.mode_shape, complex)
            data = tuple(SpectralField(grid, zero.copy()) for _ in range(3))
        else:
            data = _study_data(grid, params.delta, eps, width)
        try:
            traj = jmgt_evolve(params, data, t_end, dt, grid, s=s,
                               guard_factor=guard_factor)
            aborted, info = False, ""
        except BlowUpError as exc:
            entries.append(SmallDataEntry(
                epsilon=float(eps), aborted=True,
                abort_info=f"FAILED: {exc}", bounded=False, sup_xs=math.inf))
            continue

        xs = xs_norm(traj, s)
        late = xs.times >= 0.75 * t_end
        bounded = bool(xs.running_sup[late][-1]
                       <= 1.01 * xs.running_sup[late][0] + 1e-30)
        entry = SmallDataEntry(epsilon=float(eps), aborted=aborted,
                               abort_info=info, bounded=bounded,
                               sup_xs=xs.sup)
        if eps == 0.0:
            entry.rate_ok = {"zero-data": xs.sup == 0.0}
            entries.append(entry)
            continue

        window = traj.times >= fit_t_min
        for tag, target in targets.items():
            fitted = fit_rate(traj.times[window],
                              traj.norm_ledger[tag][window], "power")
            entry.fits[tag] = fitted
            entry.targets[tag] = target
            entry.rate_ok[tag] = (abs(fitted.exponent_or_rate - target)
                                  <= rate_tol and not fitted.unreliable)
        # the solution itself: sqrt-log growth in n=2, power decay in n=3
        psi_series = traj.norm_ledger["psi:L2"][window]
        if n == 2:
            fitted = fit_rate(traj.times[window], psi_series, "loghalf")
            entry.fits["psi:L2"] = fitted
            entry.targets["psi:L2"] = math.nan
            entry.rate_ok["psi:L2"] = not fitted.unreliable
        else:
            fitted = fit_rate(traj.times[window], psi_series, "power")
            entry.fits["psi:L2"] = fitted
            entry.targets["psi:L2"] = -0.25
            entry.rate_ok["psi:L2"] = (abs(fitted.exponent_or_rate + 0.25)
                                       <= rate_tol)
        entries.append(entry)

    return SmallDataReport(n=n, s=s, t_end=float(t_end), entries=entries,
                           rate_tol=rate_tol)
