"""Exact rational feasibility of the interpolation exponents: boundary
flip, internal-consistency identities, and the decay-exponent audit."""

from fractions import Fraction

import pytest

from mgtlab import (gn_beta, part1_params, part2_params, boundary,
                    decay_exponent_audit)


def test_boundary_is_half_dim_minus_one():
    assert boundary(2) == Fraction(0)
    assert boundary(3) == Fraction(1, 2)
    assert boundary(4) == Fraction(1)
    assert isinstance(boundary(3), Fraction)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_feasibility_flips_exactly_at_boundary(n):
    b = boundary(n)
    eps = Fraction(1, 1000)
    below, at, above = b - eps, b, b + eps
    # quadratic-product construction: strictly above only
    if below >= 0:
        assert not part1_params(n, below, m=2).feasible
    assert not part1_params(n, at, m=2).feasible
    assert part1_params(n, above, m=2).feasible
    # linear construction: boundary included, marked non-strict there
    if at > 0:
        sol_at = part2_params(n, at)
        assert sol_at.feasible and not sol_at.strict
    assert part2_params(n, above, ).feasible
    if below > 0:
        assert not part2_params(n, below).feasible


@pytest.mark.parametrize("n,s", [(2, Fraction(3, 5)), (2, Fraction(2)),
                                 (3, Fraction(6, 10)), (3, Fraction(1)),
                                 (4, Fraction(11, 10))])
def test_feasible_solutions_are_internally_consistent(n, s):
    for sol in (part1_params(n, s, m=2), part2_params(n, s)):
        assert sol.feasible
        assert sol.violations() == []
        # everything stays rational end to end
        for v in sol.reciprocals.values():
            assert isinstance(v, Fraction)
        for beta in sol.betas.values():
            assert isinstance(beta.value, Fraction)


def test_part1_pairs_sum_to_product_exponent():
    sol = part1_params(3, Fraction(3, 5), m=2)
    r = sol.reciprocals
    assert r["1/p1"] + r["1/p2"] == Fraction(1, 2)
    assert r["1/q1"] + r["1/q2"] == Fraction(1, 2)


def test_part2_pairs_sum_to_half():
    sol = part2_params(3, Fraction(3, 5))
    r = sol.reciprocals
    for a, b in (("1/p3", "1/p4"), ("1/p5", "1/p6")):
        if a in r:
            assert r[a] + r[b] == Fraction(1, 2)


def test_gn_beta_window_logic():
    beta = gn_beta(3, Fraction(1), Fraction(1, 2), 4, 2, 6)
    assert isinstance(beta.value, Fraction)
    assert (beta.lower <= beta.value <= beta.upper) == beta.admissible


def test_infeasible_reports_reason():
    sol = part1_params(4, Fraction(1, 2), m=2)
    assert not sol.feasible
    assert sol.reason


def test_decay_exponent_audit_rationals():
    audit = decay_exponent_audit(2, Fraction(3, 5))
    assert set(audit.rows) == {"L1", "L2", "Hdot"}
    for exp in audit.rows.values():
        assert isinstance(exp.exponent, Fraction)
        assert exp.integrable == (exp.exponent < -1)
    # in two dimensions integrability is bought by the eps0 slack
    assert audit["L2"].eps0 > 0
    assert audit["L2"].integrable
    # from three dimensions up it is unconditional
    audit3 = decay_exponent_audit(3, Fraction(3, 5))
    assert audit3["L2"].eps0_coefficient == 0
    assert audit3["L2"].integrable
