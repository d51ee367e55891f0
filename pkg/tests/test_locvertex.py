from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from capvertex.combinat import Box, DegreeData, MultiPartition, enumerate_degree_data, enumerate_multipartitions
from capvertex.exactalg import VARS, RatFun, random_point, specialize
from capvertex.locvertex import (Character, ConstantTermPresent, Conventions, Descendent, bare_vertex,
                                 box_weight, descendent_eval, facver_check, mono, roof_hat, s_character,
                                 taut_character, tvir_character)
from capvertex.reports import Report

T1, T2, Q, A1 = (RatFun.var(n) for n in ("T1", "T2", "Q", "A1"))


def one_box(d):
    lam = MultiPartition([[1]])
    return lam, DegreeData(lam, [[[d]]])


def a_hat(w):
    """1/(w^1/2 - w^-1/2) for a square-root monomial value w^1/2."""
    return 1 / (w - 1 / w)


# ------------------------------------------------------------- characters


def test_box_weights():
    lam = MultiPartition([[3, 3]])
    assert box_weight(lam, Box(0, 0, 0)) == mono(A1=2)
    assert box_weight(lam, Box(0, 2, 1)) == mono(A1=2, T1=4, T2=2)


def test_box_weight_under_splitting():
    lam = MultiPartition([[1], [1]])
    assert box_weight(lam, Box(1, 0, 0), split=1) == mono(A2=2, Aaux=2)
    assert box_weight(lam, Box(0, 0, 0), split=1) == mono(A1=2)


def test_tautological_character():
    lam, d = one_box(0)
    assert taut_character(lam, d) == Character([mono(A1=2)])
    lam, d = one_box(2)
    assert taut_character(lam, d) == Character([mono(A1=2, Q=-4)])
    assert taut_character(lam, d, conventions=Conventions(q_orientation=1)) == Character([mono(A1=2, Q=4)])
    lam = MultiPartition([[2], [1]])
    expected = Character([mono(A1=2), mono(A1=2, T1=2), mono(A2=2)])
    assert taut_character(lam, DegreeData.zero(lam)) == expected


def test_tangent_character_of_a_point():
    lam, d = one_box(0)
    assert s_character(lam, d) == Character([mono(T1=-2), mono(T2=-2)])


def test_empty_character():
    lam = MultiPartition([[]])
    assert len(s_character(lam, DegreeData.zero(lam))) == 0


@given(st.integers(0, 3), st.integers(1, 2))
def test_tangent_dimension(n, r):
    for lam in enumerate_multipartitions(n, r):
        s = s_character(lam, DegreeData.zero(lam))
        assert s.dimension() == 2 * n * r
        assert s.constant_term() == 0


def test_rank_two_cross_terms():
    lam = MultiPartition([[1], [1]])
    s = s_character(lam, DegreeData.zero(lam))
    assert s.dimension() == 8
    i, j = VARS.index("A1"), VARS.index("A2")
    ratios = {(e[i], e[j]) for e in s.terms}
    assert (2, -2) in ratios and (-2, 2) in ratios


@given(st.integers(0, 3), st.integers(1, 2), st.integers(0, 3))
def test_virtual_tangent_space_telescopes(n, r, k):
    """(1 - q) (T^vir - S(0)) = S(d) - S(0) and T^vir has no constant term."""
    one_minus_q = Character({mono(): 1, mono(Q=2): -1})
    for lam in enumerate_multipartitions(n, r):
        s0 = s_character(lam, DegreeData.zero(lam))
        for d in enumerate_degree_data(lam, k):
            tv = tvir_character(lam, d)
            assert (tv - s0) * one_minus_q == s_character(lam, d) - s0
            assert tv.constant_term() == 0
            if k == 0:
                assert tv == s0


def test_virtual_tangent_of_one_box_degree_one():
    lam, d = one_box(1)
    s0 = s_character(lam, DegreeData.zero(lam))
    s1 = s_character(lam, d)
    # (S1 - S0) is divisible by (1 - q); the quotient is found by hand term by term
    diff = s1 - s0
    tv = tvir_character(lam, d)
    assert tv.constant_term() == 0
    assert (tv - s0) * Character({mono(): 1, mono(Q=2): -1}) == diff


# ------------------------------------------------------------------ roof


def test_roof_of_empty_character():
    assert roof_hat(Character()) == RatFun(1)


def test_roof_of_one_weight():
    assert roof_hat(Character([mono(T1=2)])) == a_hat(T1)


def test_roof_of_a_difference():
    c = Character({mono(T1=2): 1, mono(T2=2): -1})
    assert roof_hat(c) == (T2 - 1 / T2) / (T1 - 1 / T1)


def test_roof_rejects_constant_term():
    with pytest.raises(ConstantTermPresent):
        roof_hat(Character([mono()]))


def test_roof_specialized_matches_symbolic():
    pt = random_point(2)
    c = Character({mono(T1=2, Q=-2): 2, mono(T2=2, A1=2): -1, mono(T1=-2, T2=4): 1})
    assert roof_hat(c, pt) == specialize(roof_hat(c), pt)


# ----------------------------------------------------------- descendents


def schur_bialternant(lam, xs):
    """s_lam = det(x_i^(lam_j + n - j)) / det(x_i^(n - j)) (independent of Jacobi-Trudi)."""
    n = len(xs)
    parts = list(lam) + [0] * (n - len(lam))
    if len(lam) > n:
        return Fraction(0)

    def det(m):
        if len(m) == 1:
            return m[0][0]
        return sum((-1) ** j * m[0][j] * det([row[:j] + row[j + 1:] for row in m[1:]]) for j in range(len(m)))

    num = det([[x ** (parts[j] + n - 1 - j) for j in range(n)] for x in xs])
    den = det([[x ** (n - 1 - j) for j in range(n)] for x in xs])
    return num / den


small_lam = st.sampled_from([(), (1,), (2,), (1, 1), (2, 1), (3,), (1, 1, 1), (2, 2), (3, 1)])
values = st.lists(st.fractions(min_value=-4, max_value=4, max_denominator=5), min_size=1, max_size=3, unique=True)


@given(small_lam, values)
def test_schur_matches_bialternant(lam, xs):
    assert Descendent.s(lam).evaluate(xs) == schur_bialternant(lam, xs)


@given(st.integers(0, 4), values)
def test_elementary_matches_subsets(k, xs):
    expected = sum((_prod(c) for c in combinations(xs, k)), Fraction(0))
    assert Descendent.e(k).evaluate(xs) == expected


@given(st.integers(1, 4), values)
def test_power_sum(k, xs):
    assert Descendent.p(k).evaluate(xs) == sum(x ** k for x in xs)


def _prod(xs):
    out = Fraction(1)
    for x in xs:
        out *= x
    return out


def test_descendent_examples():
    lam, d = one_box(0)
    assert descendent_eval(Descendent.one(), lam, d) == RatFun(1)
    lam, d = one_box(3)
    assert descendent_eval(Descendent.p(1), lam, d) == A1 ** 2 * Q ** -6
    lam = MultiPartition([[2]])
    d = DegreeData(lam, [[[1, 0]]])
    conv = Conventions(q_orientation=1)
    assert descendent_eval(Descendent.e(2), lam, d, conventions=conv) == A1 ** 4 * Q ** 2 * T1 ** 2


# --------------------------------------------------------------- vertex


def test_vertex_of_empty_diagram():
    s = bare_vertex(MultiPartition([[]]), Descendent.one(), 3)
    assert list(s.coeffs) == [RatFun(1), 0, 0, 0]


def test_vertex_constant_term_of_a_point():
    s = bare_vertex(MultiPartition([[1]]), Descendent.one(), 1)
    # the roof of t1^-1 + t2^-1 equals that of t1 + t2 (two sign flips)
    assert s[0] == a_hat(T1) * a_hat(T2)


def test_vertex_linear_term_of_a_point():
    lam, d = one_box(1)
    s = bare_vertex(lam, Descendent.one(), 1)
    assert s[1] == roof_hat(tvir_character(lam, d)) * (-1) / Q


def test_vertex_is_independent_of_summation_order():
    lam = MultiPartition([[2, 1]])
    pt = random_point(4)
    tau = Descendent.p(1) * Descendent.p(1)
    a = bare_vertex(lam, tau, 3, 1, pt)
    b = bare_vertex(lam, tau, 3, 1, pt, shuffle_seed=17)
    assert a == b


def test_specialized_vertex_matches_symbolic():
    lam = MultiPartition([[2]])
    pt = random_point(6)
    sym = bare_vertex(lam, Descendent.e(1), 2)
    num = bare_vertex(lam, Descendent.e(1), 2, 1, pt)
    assert [specialize(c, pt) for c in sym.coeffs] == list(num.coeffs)


# -------------------------------------------------------- factorization


def test_factorization_small():
    rep = facver_check(Descendent.one(), 1, 1, 1, 2)
    assert rep.passed and len(rep.checks) == 6


def test_factorization_empty():
    rep = facver_check(Descendent.one(), 0, 1, 1, 2, report=Report())
    assert rep.passed


def test_factorization_with_descendent_specialized():
    rep = facver_check(Descendent.e(2), 2, 1, 1, 2, point=random_point(8))
    assert rep.passed, rep.failures()
