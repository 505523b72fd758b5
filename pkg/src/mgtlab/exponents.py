"""Interpolation-exponent bookkeeping for the quadratic nonlinearity.

Closing the small-data argument requires product (Hölder) pairs and
Gagliardo-Nirenberg interpolation exponents chosen inside admissible
windows that depend on the dimension ``n`` and the regularity ``s``.
Everything here runs in exact rational arithmetic so that feasibility
boundaries are sharp comparisons, never float ones.  Floats are accepted
for convenience and are read as the decimal literal they print as
(``s=0.6`` means exactly 3/5).

Two groups of parameters are solved for:

* the "product-in-Lebesgue" group: pairs (p1, p2) and (q1, q2) used to
  put the quadratic nonlinearity in L^m for m in {1, 2};
* the "product-in-Sobolev" group: pairs (p3, p4) and (p5, p6) used for
  the homogeneous-Sobolev norm of the nonlinearity via the fractional
  Leibniz rule.

Both windows close exactly at s = n/2 - 1, which is also the strict
hypothesis of the global-existence result; :func:`boundary` exposes it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import ClassVar, Optional


def _ratio(x) -> Fraction:
    """Exact rational view of a number.

    Floats go through their shortest repr, so the value is the decimal
    the user typed, not the binary expansion.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def _midpoint(lo: Fraction, hi: Fraction) -> Fraction:
    return (lo + hi) / 2


HALF = Fraction(1, 2)


# ---------------------------------------------------------------------------
# single interpolation exponent


@dataclass(frozen=True)
class GnBeta:
    """One interpolation exponent together with its admissible window."""

    value: Fraction
    lower: Fraction
    upper: Fraction = Fraction(1)

    @property
    def admissible(self) -> bool:
        return self.lower <= self.value <= self.upper

    def __format__(self, spec):
        return format(float(self.value), spec)


def gn_beta(n, s, kappa, p, p0, p1) -> GnBeta:
    """Interpolation exponent for ``|D|^kappa`` in L^p between L^p0 and
    the s-th order Sobolev space over L^p1.

    beta = (1/p0 - 1/p + kappa/n) / (1/p0 - 1/p1 + s/n), admissible when
    it lands in [kappa/s, 1].  All three integrabilities must be finite
    and > 1, and 0 <= kappa < s.
    """
    n = int(n)
    s, kappa = _ratio(s), _ratio(kappa)
    rp, rp0, rp1 = _ratio(p), _ratio(p0), _ratio(p1)
    for name, val in (("p", rp), ("p0", rp0), ("p1", rp1)):
        if not val > 1:
            raise ValueError(f"{name} must lie in (1, inf), got {val}")
    if not (0 <= kappa < s):
        raise ValueError(f"need 0 <= kappa < s, got kappa={kappa}, s={s}")
    denom = 1 / rp0 - 1 / rp1 + s / n
    if denom == 0:
        raise ZeroDivisionError(
            "interpolation denominator 1/p0 - 1/p1 + s/n vanishes")
    value = (1 / rp0 - 1 / rp + kappa / n) / denom
    return GnBeta(value, lower=kappa / s)


# ---------------------------------------------------------------------------
# parameter solutions


@dataclass(frozen=True)
class Infeasible:
    """Marker: the requested parameter window is empty."""

    n: int
    s: Fraction
    reason: str
    feasible: ClassVar[bool] = False


@dataclass(frozen=True)
class ExponentSolution:
    """A concrete feasible choice of product pairs and interpolation
    exponents, all rational.

    ``reciprocals`` holds 1/p values keyed "1/p1", "1/q2", ...; a pair
    always sums to the product exponent it serves (1/m for the Lebesgue
    group, 1/2 for the Sobolev group).  ``strict`` is False when the
    windows are nonempty only by the boundary point s = n/2 - 1, where
    the global-existence hypothesis fails strictly.
    """

    n: int
    s: Fraction
    m: Optional[int]
    reciprocals: dict = field(default_factory=dict)
    betas: dict = field(default_factory=dict)
    s_star: Fraction = Fraction(0)
    eps0: Fraction = Fraction(0)
    strict: bool = True
    note: str = ""
    feasible: ClassVar[bool] = True

    def violations(self) -> list:
        """Every broken window or pairing identity, as strings.  Empty
        means the solution is internally consistent."""
        out = []
        for name, beta in self.betas.items():
            if not beta.admissible:
                out.append(f"{name}={beta.value} outside "
                           f"[{beta.lower}, {beta.upper}]")
        r = self.reciprocals
        pair_target = Fraction(1, self.m) if self.m else HALF
        for a, b in (("1/p1", "1/p2"), ("1/q1", "1/q2"),
                     ("1/p3", "1/p4"), ("1/p5", "1/p6")):
            if a in r and r[a] + r[b] != pair_target:
                out.append(f"{a} + {b} = {r[a] + r[b]} != {pair_target}")
        if not 0 < 2 * self.s_star < self.n:
            out.append(f"s_star={self.s_star} outside (0, n/2)")
        if self.strict and not self.n < 2 * (self.s + 1):
            out.append(f"n={self.n} not below 2(s+1)={2 * (self.s + 1)}")
        return out


def boundary(n) -> Fraction:
    """The regularity below which the product machinery breaks: n/2 - 1."""
    return Fraction(int(n), 2) - 1


def _embedding_constants(n, s, fraction):
    """Auxiliary Sobolev index s* (strictly inside (0, n/2)) and the slack
    constant eps0 = s*/2 used by the two-dimensional bookkeeping."""
    s_star = fraction * min(Fraction(int(n), 4), s)
    if not 0 < 2 * s_star < n:
        raise ValueError(f"s_star={s_star} must satisfy 0 < 2 s* < n")
    return s_star, s_star / 2


def _lebesgue_window(n, s):
    # admissible 1/p1 (and identically 1/q1) for the m=2 product pairing
    lo = max((n - 2 * (s + 1)) / Fraction(2 * n), Fraction(0))
    hi = min(s / n, HALF)
    return lo, hi


def _sobolev_window(n, s):
    # admissible 1/p3 (and identically 1/p5) for the Leibniz-rule pairing
    lo = max(HALF - Fraction(1, n), Fraction(0))
    hi = min(HALF, s / n)
    return lo, hi


def part1_params(n, s, m, *, s_star_fraction=Fraction(1, 5)):
    """Product pairs (p1, p2), (q1, q2) putting the quadratic nonlinearity
    in L^m, with their four interpolation exponents.

    m=1 is always solvable with every integrability equal to 2.  m=2 needs
    s strictly above n/2 - 1; at or below that the window is declared
    empty.  When the window is an interval its midpoint is returned.
    """
    n, m = int(n), int(m)
    if m not in (1, 2):
        raise ValueError(f"m must be 1 or 2, got {m}")
    s = _ratio(s)
    if s < 0:
        raise ValueError(f"need s >= 0, got {s}")

    if m == 1:
        rp1 = rq1 = HALF
    else:
        if s <= boundary(n):
            return Infeasible(n, s, reason=(
                f"square-integrable product pairing needs s > n/2 - 1 "
                f"= {boundary(n)}, got s = {s}"))
        lo, hi = _lebesgue_window(n, s)
        rp1 = _midpoint(lo, hi)
        rq1 = rp1                      # identical window
    rp2 = Fraction(1, m) - rp1
    rq2 = Fraction(1, m) - rq1

    if s == 0:
        # the second factor needs no interpolation at all (its window is
        # only reachable with exponent 2, giving a zero power)
        beta2 = GnBeta(Fraction(0), lower=Fraction(0))
    else:
        beta2 = GnBeta(Fraction(n) / s * (HALF - rp2), lower=Fraction(0))
    betas = {
        "beta1": GnBeta(Fraction(n) / (s + 1) * (HALF - rp1),
                        lower=Fraction(0)),
        "beta2": beta2,
        "beta3": GnBeta(Fraction(n) / (s + 2) * (HALF - rq1 + Fraction(1, n)),
                        lower=1 / (s + 2)),
        "beta4": GnBeta(Fraction(n) / (s + 1) * (HALF - rq2 + Fraction(1, n)),
                        lower=1 / (s + 1)),
    }
    # with no regularity requested the embedding index takes the
    # dimensional cap alone
    s_star, eps0 = _embedding_constants(n, s if s > 0 else Fraction(n, 4),
                                        s_star_fraction)
    return ExponentSolution(
        n=n, s=s, m=m,
        reciprocals={"1/p1": rp1, "1/p2": rp2, "1/q1": rq1, "1/q2": rq2},
        betas=betas, s_star=s_star, eps0=eps0,
        strict=s > boundary(n),
        note="" if s > boundary(n) else
        "usable for the product bound alone; the global-existence "
        "hypothesis s > n/2 - 1 is not met")


def part2_params(n, s, *, s_star_fraction=Fraction(1, 5)):
    """Leibniz-rule pairs (p3, p4), (p5, p6) for the Sobolev-norm bound of
    the nonlinearity, with exponents and the auxiliary index s*.

    Empty window iff s < n/2 - 1; at equality the window is a single
    point, returned with ``strict=False`` because the global-existence
    hypothesis wants strict inequality.
    """
    n = int(n)
    s = _ratio(s)
    if s <= 0:
        raise ValueError(f"need s > 0, got {s}")
    if s < boundary(n):
        return Infeasible(n, s, reason=(
            f"derivative pairing window is empty: needs s >= n/2 - 1 "
            f"= {boundary(n)}, got s = {s}"))

    lo, hi = _sobolev_window(n, s)
    rp3 = _midpoint(lo, hi)
    rp4 = HALF - rp3
    rp5, rp6 = rp3, rp4                # identical window

    betas = {
        "beta5": GnBeta(Fraction(n) / (s + 1) * (HALF - rp3 + s / n),
                        lower=s / (s + 1)),
        "beta6": GnBeta(Fraction(n) / s * (HALF - rp4), lower=Fraction(0)),
        "beta7": GnBeta(
            Fraction(n) / (s + 2) * (HALF - rp5 + (s + 1) / n),
            lower=(s + 1) / (s + 2)),
        "beta8": GnBeta(
            Fraction(n) / (s + 1) * (HALF - rp6 + Fraction(1, n)),
            lower=1 / (s + 1)),
    }
    s_star, eps0 = _embedding_constants(n, s, s_star_fraction)
    strict = s > boundary(n)
    return ExponentSolution(
        n=n, s=s, m=None,
        reciprocals={"1/p3": rp3, "1/p4": rp4, "1/p5": rp5, "1/p6": rp6},
        betas=betas, s_star=s_star, eps0=eps0, strict=strict,
        note="" if strict else
        "window closes to a single point: s = n/2 - 1 exactly, so the "
        "strict global-existence hypothesis s > n/2 - 1 fails")


# ---------------------------------------------------------------------------
# predicted decay of the nonlinearity


@dataclass(frozen=True)
class DecayExponent:
    """Predicted (1+t) power for one norm of the quadratic nonlinearity.

    In two dimensions the sharp power carries a small positive slack
    eps0; ``base`` is the exponent without it, ``exponent`` includes
    ``eps0_coefficient * eps0``.
    """

    norm: str
    base: Fraction
    eps0_coefficient: int
    eps0: Fraction

    @property
    def exponent(self) -> Fraction:
        return self.base + self.eps0_coefficient * self.eps0

    @property
    def integrable(self) -> bool:
        """Whether (1+t)^exponent is integrable on the half-line, the
        property the far-field half of the retarded integral needs."""
        return self.exponent < -1


@dataclass(frozen=True)
class DecayAudit:
    n: int
    s: Fraction
    s_star: Fraction
    eps0: Fraction
    rows: dict

    def __getitem__(self, key):
        return self.rows[key]


def decay_exponent_audit(n, s, *, s_star=None, eps0=None,
                         s_star_fraction=Fraction(1, 5)) -> DecayAudit:
    """Time-decay exponents of the quadratic nonlinearity in L^1, L^2 and
    the s-th homogeneous Sobolev norm, given a solution obeying the
    weighted-norm bounds.

    Only n >= 2 is covered.  ``s_star``/``eps0`` default to the same
    bookkeeping :func:`part2_params` uses; pass them explicitly to audit
    a different choice.
    """
    n = int(n)
    if n < 2:
        raise ValueError(f"audit covers n >= 2 only, got n = {n}")
    s = _ratio(s)
    if s_star is None or eps0 is None:
        auto_star, auto_eps = _embedding_constants(n, s, s_star_fraction)
        s_star = auto_star if s_star is None else _ratio(s_star)
        eps0 = auto_eps if eps0 is None else _ratio(eps0)
    else:
        s_star, eps0 = _ratio(s_star), _ratio(eps0)

    if n == 2:
        rows = {
            "L1": DecayExponent("L1", Fraction(-3, 2), 1, eps0),
            "L2": DecayExponent("L2", Fraction(-2), 1, eps0),
            "Hdot": DecayExponent(f"Hdot({float(s):g})",
                                  -Fraction(3, 2) - (s + s_star) / 2,
                                  1, eps0),
        }
    else:
        rows = {
            "L1": DecayExponent("L1", -HALF - Fraction(n, 2), 0, eps0),
            "L2": DecayExponent("L2", -HALF - Fraction(3 * n, 4), 0, eps0),
            "Hdot": DecayExponent(f"Hdot({float(s):g})",
                                  -HALF - (s + s_star) / 2 - Fraction(n, 2),
                                  0, eps0),
        }
    return DecayAudit(n=n, s=s, s_star=s_star, eps0=eps0, rows=rows)
