import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dignets import formulas
from dignets.discrepancy import (
    Anchor,
    LpConvergenceError,
    delta_integral_direct,
    l2_exact_result,
    l2_sq_direct,
    l2_sq_exact,
    linf_exact,
    local_discrepancy,
    lp_norm,
)
from dignets.netgen import AVector, PointSet, hammersley, net_from_a, symmetrize


@st.composite
def dyadic_sets(draw, max_n=4, max_pts=12, sym=True):
    n = draw(st.integers(1, max_n))
    k = draw(st.integers(1, max_pts))
    S = 1 << n
    xs = draw(st.lists(st.integers(0, S - 1), min_size=k, max_size=k))
    ys = draw(st.lists(st.integers(0, S - 1), min_size=k, max_size=k))
    P = PointSet(np.array(xs), np.array(ys), n)
    if sym and draw(st.booleans()):
        P = symmetrize(P)
    return P


def linf_brute(P):
    """Scan every grid corner with open and closed counts, using exact rationals."""
    S = 1 << P.n
    pts = list(zip(P.x.tolist(), P.y.tolist()))
    g1 = sorted(set(P.x.tolist()) | {0, S})
    g2 = sorted(set(P.y.tolist()) | {0, S})
    best = Fraction(0)
    for c1 in g1:
        for c2 in g2:
            area = Fraction(c1 * c2, S * S)
            openc = sum(1 for x, y in pts if x < c1 and y < c2)
            best = max(best, area - Fraction(openc, len(pts)), Fraction(openc, len(pts)) - area)
            # limit from above-right is only available below the top edge
            if c1 < S and c2 < S:
                closed = sum(1 for x, y in pts if x <= c1 and y <= c2)
                best = max(best, Fraction(closed, len(pts)) - area)
    return best


def test_local_discrepancy_half_open():
    P = PointSet(np.array([2]), np.array([2]), 2)
    assert local_discrepancy(P, Anchor(Fraction(1, 2), Fraction(1, 2))) == Fraction(-1, 4)
    assert local_discrepancy(P, Anchor(Fraction(3, 4), Fraction(3, 4))) == 1 - Fraction(9, 16)
    with pytest.raises(ValueError):
        Anchor(Fraction(3, 2), 0)


def test_n3_all_ones_value():
    assert l2_sq_exact(net_from_a(AVector.ones(3))) == Fraction(2663, 294912)


def test_hammersley_n1_value():
    assert l2_sq_exact(hammersley(1)) == Fraction(91, 576)


@settings(max_examples=150, deadline=None)
@given(dyadic_sets())
def test_warnock_equals_direct_integration(P):
    assert l2_sq_exact(P) == l2_sq_direct(P)


@settings(max_examples=150, deadline=None)
@given(dyadic_sets())
def test_linf_matches_brute(P):
    assert linf_exact(P) == linf_brute(P)


@settings(max_examples=60, deadline=None)
@given(dyadic_sets(max_n=3, max_pts=6, sym=False))
def test_delta_integral_additive(P):
    half = Fraction(1, 2)
    whole = delta_integral_direct(P, Fraction(0), Fraction(1), Fraction(0), Fraction(1))
    parts = sum(delta_integral_direct(P, x0, x0 + half, y0, y0 + half)
                for x0 in (0, half) for y0 in (0, half))
    assert whole == parts


@pytest.mark.parametrize("n", range(1, 15))
def test_hammersley_l2_formula(n):
    assert l2_sq_exact(hammersley(n)) == formulas.l2_sq_hammersley(n)


@pytest.mark.parametrize("n", range(2, 15))
def test_all_ones_l2_formula(n):
    assert l2_sq_exact(net_from_a(AVector.ones(n))) == formulas.l2_sq_all_ones(n)


def test_all_ones_formula_n1_anomaly():
    # at n=1 the a-vector is empty and P_1 is the Hammersley net
    assert net_from_a(AVector.ones(1)).as_multiset() == hammersley(1).as_multiset()
    assert formulas.l2_sq_all_ones(1) == Fraction(355, 2304) != Fraction(91, 576)


@pytest.mark.parametrize("n", range(2, 13))
def test_hammersley_linf_formula(n):
    assert linf_exact(hammersley(n)) == formulas.linf_hammersley(n)


def test_hammersley_linf_n1_anomaly():
    assert linf_exact(hammersley(1)) == Fraction(3, 4)
    assert formulas.linf_hammersley(1) == 1


@settings(max_examples=25, deadline=None)
@given(dyadic_sets(max_n=5, max_pts=20))
def test_lp2_matches_exact(P):
    got = lp_norm(P, 2, 1e-11)
    assert abs(got.value - math.sqrt(l2_sq_exact(P))) < 1e-9
    assert got.error_bound <= 1e-10


@settings(max_examples=20, deadline=None)
@given(dyadic_sets(max_n=4, max_pts=10, sym=False), st.floats(1.0, 6.0))
def test_lp_monotone_in_p(P, p):
    """||D||_p is nondecreasing in p on a probability space and bounded by L_inf."""
    lo = lp_norm(P, p, 1e-10).value
    hi = lp_norm(P, p + 0.5, 1e-10).value
    assert lo <= hi + 1e-9
    assert hi <= float(linf_exact(P)) + 1e-9


def test_lp_integer_and_fractional_paths_agree():
    P = net_from_a(AVector.parse("0110"))
    a = lp_norm(P, 3, 1e-12).value
    b = lp_norm(P, 3 + 1e-13, 1e-12).value
    assert abs(a - b) < 1e-10


def test_lp_errors():
    P = hammersley(2)
    with pytest.raises(ValueError):
        lp_norm(P, 0.5)
    with pytest.raises(ValueError):
        lp_norm(P, math.inf)
    with pytest.raises(ValueError):
        lp_norm(P, 2, 0)
    with pytest.raises(LpConvergenceError):
        lp_norm(net_from_a(AVector.parse("0101010")), 1.5, 1e-15, max_pieces=50)


def test_result_record():
    rec = l2_exact_result(hammersley(1)).to_record("l2_sq")
    assert (rec["numerator"], rec["denominator"], rec["mode"]) == ("91", "576", "exact")
