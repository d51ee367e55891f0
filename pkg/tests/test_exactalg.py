from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from capvertex.exactalg import (NVARS, VARS, DenominatorVanishes, InsufficientOrder, LaurentPoly, RatFun,
                                SeriesZ, ZeroInput, inverse, identity, laurent_terms, lowest_a_term,
                                matmul, pade_reconstruct, random_point, specialize, z_taylor)

T1, T2, Q, A1, AUX, Z = (RatFun.var(n) for n in ("T1", "T2", "Q", "A1", "Aaux", "Z"))
NAMES = ("T1", "T2", "Q", "A1")


def vec(**exps):
    v = [0] * NVARS
    for k, e in exps.items():
        v[VARS.index(k)] = e
    return tuple(v)


# ---------------------------------------------------------------- specialize


def test_specialize_constant():
    assert specialize(RatFun(1), {"T1": Fraction(2)}) == 1


def test_specialize_cancellation():
    f = (T1 ** 2 - T1 ** -2) / (T1 ** 2 - T1 ** -2)
    assert f == RatFun(1)
    assert specialize(f, {"T1": Fraction(7, 3)}) == 1


def test_specialize_direct():
    assert specialize(T1 ** 2 + T2 ** 2, {"T1": Fraction(2), "T2": Fraction(3)}) == 13


def test_specialize_pole():
    with pytest.raises(DenominatorVanishes):
        specialize(1 / (T1 - 1), {"T1": Fraction(1)})


def test_specialize_missing_variable():
    with pytest.raises(KeyError):
        specialize(T1 + T2, {"T1": Fraction(1)})


# ------------------------------------------------------------- lowest term


def test_lowest_term_single_dominant():
    a = AUX ** 2
    e, g = lowest_a_term(a * T1 + a ** 2)
    assert (e, g) == (2, T1)


def test_lowest_term_regular():
    a = AUX ** 2
    assert lowest_a_term((1 + a) / (1 - a)) == (0, RatFun(1))


def test_lowest_term_roof_factor_tends_to_one():
    # (w^1/2 - w^-1/2) / (x^1/2 - x^-1/2) * ... with w = a c: ratio of two such factors with the same c
    c = T1 * T2
    w = AUX * c
    f = (w - 1 / w) / (AUX * T1 * T2 - 1 / (AUX * T1 * T2))
    assert lowest_a_term(f) == (0, RatFun(1))


def test_lowest_term_zero():
    with pytest.raises(ZeroInput):
        lowest_a_term(RatFun(0))


# ----------------------------------------------------------------- RatFun


small_int = st.integers(-3, 3)
coeff = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def laurent(draw):
    n = draw(st.integers(1, 4))
    terms = {}
    for _ in range(n):
        e = [0] * NVARS
        for name in NAMES:
            e[VARS.index(name)] = draw(small_int)
        terms[tuple(e)] = draw(coeff)
    return terms


def evaluate_terms(terms, pt):
    """Independent evaluation of a Laurent dictionary at a point."""
    total = Fraction(0)
    for e, c in terms.items():
        v = Fraction(c)
        for i, x in enumerate(e):
            if x:
                v *= pt[VARS[i]] ** x
        total += v
    return total


POINT = random_point(11)


@given(laurent(), laurent())
def test_ratfun_is_a_ring_homomorphism_to_values(f_terms, g_terms):
    f, g = RatFun.from_laurent(f_terms), RatFun.from_laurent(g_terms)
    fv, gv = evaluate_terms(f_terms, POINT), evaluate_terms(g_terms, POINT)
    assert specialize(f + g, POINT) == fv + gv
    assert specialize(f - g, POINT) == fv - gv
    assert specialize(f * g, POINT) == fv * gv
    if gv != 0 and not g.is_zero():
        assert specialize(f / g, POINT) == fv / gv


@given(laurent(), laurent())
def test_ratfun_canonical_form(f_terms, g_terms):
    f, g = RatFun.from_laurent(f_terms), RatFun.from_laurent(g_terms)
    if g.is_zero():
        return
    h = (f * g) / g
    assert h == f
    assert hash(h) == hash(f)
    assert h.to_text() == f.to_text()


@given(laurent())
def test_laurent_roundtrip(terms):
    clean = {e: c for e, c in LaurentPoly(terms).terms.items()}
    assert laurent_terms(RatFun.from_laurent(terms)) == clean


def test_hbar_is_not_a_variable():
    # hbar^1/2 is the product T1 T2 identically
    f = (T1 * T2) ** 2 - T1 ** 2 * T2 ** 2
    assert f.is_zero()


# ---------------------------------------------------------------- z_taylor


def test_z_taylor_geometric():
    f = 1 / (1 - Z * T1)
    assert z_taylor(f, 5) == [T1 ** k for k in range(6)]


def test_z_taylor_pole_at_zero():
    with pytest.raises(DenominatorVanishes):
        z_taylor(1 / Z, 3)


# ---------------------------------------------------------------- series


@given(st.lists(coeff, min_size=1, max_size=8), st.lists(coeff, min_size=1, max_size=8))
def test_series_product_matches_polynomial_product(a, b):
    # oracle: multiply as polynomials with a dictionary, then truncate
    full = {}
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            full[i + j] = full.get(i + j, 0) + x * y
    s = SeriesZ(a) * SeriesZ(b)
    o = min(len(a), len(b)) - 1
    assert s.order == o
    assert list(s.coeffs) == [full.get(d, 0) for d in range(o + 1)]


@given(st.lists(coeff, min_size=1, max_size=6), st.fractions(min_value=-3, max_value=3, max_denominator=3))
def test_series_rescale(a, c):
    s = SeriesZ(a).rescale(c)
    assert list(s.coeffs) == [x * c ** i for i, x in enumerate(a)]


# ------------------------------------------------------------------- Pade


def long_division(num, den, order):
    """Taylor coefficients of num/den by long division (den[0] != 0)."""
    out = []
    for i in range(order + 1):
        s = Fraction(num[i]) if i < len(num) else Fraction(0)
        for j in range(1, min(i, len(den) - 1) + 1):
            s -= den[j] * out[i - j]
        out.append(s / den[0])
    return out


def test_pade_geometric():
    fit = pade_reconstruct([1] * 7, 0, 1)
    assert fit.num == [1] and fit.den == [1, -1]


def test_pade_polynomial():
    fit = pade_reconstruct([1, 1, 1, 1], 3, 0)
    assert fit.num == [1, 1, 1, 1] and fit.den == [1]


def test_pade_recovers_known_fraction():
    coeffs = long_division([1, 2], [1, -3, 1], 8)
    fit = pade_reconstruct(coeffs, 1, 2)
    assert fit.num == [1, 2] and fit.den == [1, -3, 1]
    assert fit.evaluate_series(8) == coeffs


def test_pade_insufficient_order():
    with pytest.raises(InsufficientOrder):
        pade_reconstruct([1, 2], 1, 1)


@given(st.lists(st.integers(-4, 4), min_size=1, max_size=3),
       st.lists(st.integers(-4, 4), min_size=0, max_size=2))
def test_pade_recovers_random_fractions(num, tail):
    den = [1] + tail
    m, n = len(num) - 1, len(den) - 1
    coeffs = long_division(num, den, m + n + 4)
    fit = pade_reconstruct(coeffs, m, n)
    assert fit is not None
    # the fit predicts every extra order
    assert fit.evaluate_series(m + n + 4) == coeffs


# ---------------------------------------------------------------- matrices


def test_inverse_exact():
    import numpy as np
    m = np.array([[Fraction(2), Fraction(1)], [Fraction(5), Fraction(3)]], dtype=object)
    inv = inverse(m)
    assert (matmul(m, inv) == identity(2)).all()


def test_random_point_is_reproducible():
    assert random_point(3) == random_point(3)
    assert random_point(3) != random_point(4)
