from fractions import Fraction
from math import gcd

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qfano.basket import Basket, QuotientPoint, make_point
from qfano.riemann_roch import (
    LOCAL_CLASS_SIGN,
    WEIGHT_INVERTED,
    CandidateInvalid,
    FanoCandidate,
    candidate,
    contribution_table,
    df_from_table,
    euler_char,
    h0,
    hilbert_profile,
    integrality_valid,
    lambda_of,
    local_class_of_A,
    point_contribution,
    series_agree,
)
from qfano.wps import CALIBRATION_WEIGHTS, EXTRA_CALIBRATION_WEIGHTS, wps_candidate

from oracles import monomials_of_degree

No41478 = candidate(7, [(2, 1), (3, 1), (13, 6)], Fraction(1, 78))


@st.composite
def candidates(draw):
    q = draw(st.integers(1, 19))
    pts = draw(st.lists(
        st.integers(2, 24).filter(lambda r: gcd(r, q) == 1).flatmap(
            lambda r: st.sampled_from([(r, b) for b in range(1, r) if gcd(r, b) == 1])),
        max_size=5))
    assume(sum(Fraction(r * r - 1, r) for r, _ in pts) < 24)
    a3 = draw(st.fractions(min_value=Fraction(1, 500), max_value=10, max_denominator=500))
    return FanoCandidate(q, Basket.of(*pts), a3)


# ---------------------------------------------------------------- calibration


@pytest.mark.parametrize("weights", CALIBRATION_WEIGHTS + EXTRA_CALIBRATION_WEIGHTS)
def test_wps_monomial_oracle(weights):
    c = wps_candidate(weights)
    prof = hilbert_profile(c, 24)
    assert list(prof.h0[:25]) == [monomials_of_degree(weights, n) for n in range(25)]


def test_calibration_fixture_data():
    expect = {
        (1, 1, 1, 1): (4, Basket(), Fraction(1)),
        (1, 1, 1, 2): (5, Basket.of((2, 1)), Fraction(1, 2)),
        (1, 1, 2, 3): (7, Basket.of((2, 1), (3, 1)), Fraction(1, 6)),
        (1, 2, 3, 5): (11, Basket.of((2, 1), (3, 1), (5, 2)), Fraction(1, 30)),
        (1, 3, 4, 5): (13, Basket.of((3, 1), (4, 1), (5, 2)), Fraction(1, 60)),
    }
    for w, (q, basket, a3) in expect.items():
        c = wps_candidate(w)
        assert (c.q, c.basket.indices, c.a3) == (q, basket.indices, a3)


def test_convention_bits():
    # fixed by the calibration suite above; the extra spaces separate WEIGHT_INVERTED
    assert LOCAL_CLASS_SIGN == -1
    assert WEIGHT_INVERTED is False


# ---------------------------------------------------------------- local data


def test_local_class_of_A():
    assert local_class_of_A(7, make_point(13, 3)) == 2
    assert local_class_of_A(5, make_point(2, 1)) == 1
    with pytest.raises(ValueError):
        local_class_of_A(4, make_point(2, 1))


def test_point_contribution_examples():
    p2 = make_point(2, 1)
    for q in (1, 3, 5, 7):
        assert point_contribution(p2, q, 1) == Fraction(-1, 8)
        assert point_contribution(p2, q, 2) == 0
    p5 = make_point(5, 2)
    assert point_contribution(p5, 11, 1) == Fraction(-1, 5)
    assert point_contribution(p5, 11, 2) in (Fraction(-1, 5), Fraction(-2, 5))


@given(st.integers(2, 24).flatmap(lambda r: st.tuples(
    st.just(r), st.sampled_from([b for b in range(1, r) if gcd(r, b) == 1]))))
def test_contribution_conjugation_invariant(rb):
    r, b = rb
    assert contribution_table(r, b) == contribution_table(r, r - b)


@given(st.integers(2, 24), st.integers(1, 30), st.integers(-60, 60))
def test_contribution_periodic(r, q, n):
    if gcd(r, q) != 1:
        return
    p = make_point(r, 1)
    assert point_contribution(p, q, n) == point_contribution(p, q, n + r)
    assert point_contribution(p, q, r * n) == 0


# ---------------------------------------------------------------- chi and h0


def test_euler_char_examples():
    assert euler_char(candidate(4, [], 1), 1) == 4
    assert euler_char(candidate(2, [], 2), 1) == 4
    assert euler_char(No41478, 0) == 1


@settings(max_examples=200)
@given(candidates(), st.integers(-31, 12))
def test_serre_symmetry(c, n):
    assert euler_char(c, n) == -euler_char(c, -n - c.q)
    assert euler_char(c, 0) == 1
    assert euler_char(c, -c.q) == -1


def test_41478_pins():
    prof = hilbert_profile(No41478)
    assert prof.h0[1:6] == (1, 1, 1, 1, 1)
    assert prof.h0[6] == 2
    assert prof.df == 1
    assert h0(No41478, -1) == 0


def test_41478_weight_is_unique():
    ok = []
    for b in range(1, 7):
        c = candidate(7, [(2, 1), (3, 1), (13, b)], Fraction(1, 78))
        if integrality_valid(c):
            prof = hilbert_profile(c)
            if prof.h0[1:7] == (1, 1, 1, 1, 1, 2):
                ok.append(b)
    assert ok == [6]


def test_41478_validity():
    assert integrality_valid(No41478)
    assert not integrality_valid(candidate(7, [(2, 1), (3, 1), (13, 6)], Fraction(1, 77)))
    assert integrality_valid(candidate(4, [], 1))


def test_h0_p1112():
    c = candidate(5, [(2, 1)], Fraction(1, 2))
    assert (h0(c, 1), h0(c, 2)) == (3, 7)


def test_h0_raises_on_invalid():
    with pytest.raises(CandidateInvalid):
        h0(candidate(7, [(2, 1), (3, 1), (13, 6)], Fraction(1, 77)), 1)


@pytest.mark.parametrize("d", [1, 2])
def test_del_pezzo_fixtures(d):
    prof = hilbert_profile(candidate(2, [], d))
    assert prof.h0[1] == d + 2
    assert prof.df == d + 1


def test_df_counts_empty_divisor():
    # no h0(kA) below q exceeds 1, so df = 0 comes from k = 0 alone
    assert df_from_table(3, (1, 0, 1, 2)) == 0
    assert df_from_table(3, (1, 0, 0)) == 0
    assert hilbert_profile(No41478).df == 1


def test_lambda():
    assert lambda_of(7, 6) == Fraction(7, 6)
    assert lambda_of(4, 3) == Fraction(4, 3)
    assert lambda_of(candidate(2, [], 2), 2) == 1
    with pytest.raises(ValueError):
        lambda_of(4, 0)


def test_series_agree():
    a = candidate(7, [(2, 1), (3, 1), (13, 6)], Fraction(1, 78))
    b = candidate(7, [(2, 1), (3, 1), (13, 5)], Fraction(1, 78))
    assert series_agree(a, a)
    assert not series_agree(a, b)


def test_candidate_rejects_shared_factor():
    with pytest.raises(ValueError):
        candidate(4, [(2, 1)], 1)
    with pytest.raises(ValueError):
        candidate(4, [], 0)
