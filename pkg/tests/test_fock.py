from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from capvertex.combinat import Partition
from capvertex.exactalg import Env, RatFun
from capvertex.fock import (O1_eigenvalue, arbitrate_convention, build_macdonald, central_K, f2_eigenvalue,
                            heis_op, qt_inner, unitriangular)
from capvertex.graded import GradedOperator, partitions

from test_locvertex import schur_bialternant

T1, T2, A1 = (RatFun.var(n) for n in ("T1", "T2", "A1"))


@pytest.fixture(scope="module")
def basis_sym():
    return build_macdonald(4, "plain-inv", Env.symbolic(1))


@pytest.fixture(scope="module")
def basis_num():
    return build_macdonald(4, "plain-inv", Env.specialized(3, 1))


def power_sum_value(mu, xs):
    out = Fraction(1)
    for k in mu:
        out *= sum(x ** k for x in xs)
    return out


def evaluate(basis, nu, xs):
    """P_nu as a polynomial evaluated at numbers xs, from its power-sum coordinates."""
    n = sum(nu)
    col = basis.column(nu)
    return sum((c * power_sum_value(mu, xs) for c, mu in zip(col, partitions(n))), Fraction(0))


def macdonald_operator(f, xs, q, t):
    """Macdonald's first difference operator applied to a function of n variables at xs."""
    total = Fraction(0)
    for i, xi in enumerate(xs):
        coef = Fraction(1)
        for j, xj in enumerate(xs):
            if j != i:
                coef *= (t * xi - xj) / (xi - xj)
        shifted = list(xs)
        shifted[i] = q * xi
        total += coef * f(shifted)
    return total


# ------------------------------------------------------------- Macdonald


def test_two_box_closed_form(basis_sym):
    q, t = basis_sym.q, basis_sym.t
    c = (1 + q) * (1 - t) / (1 - q * t)
    # m_2 = p_2, m_11 = (p_1^2 - p_2)/2; power-sum order is [(2), (1,1)]
    assert list(basis_sym.column((2,))) == [1 - c / 2, c / 2]
    assert list(basis_sym.column((1, 1))) == [RatFun(Fraction(-1, 2)), RatFun(Fraction(1, 2))]


def test_two_box_orthogonality(basis_sym):
    q, t = basis_sym.q, basis_sym.t
    u, v = basis_sym.column((2,)), basis_sym.column((1, 1))
    pair = sum(a * b * qt_inner(mu, q, t) for a, b, mu in zip(u, v, partitions(2)))
    assert pair == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_eigenvectors_of_the_difference_operator(basis_num, n):
    q, t = basis_num.q, basis_num.t
    xs = [Fraction(2), Fraction(-3, 5), Fraction(7, 2), Fraction(5, 11)]
    for nu in partitions(n):
        parts = list(nu) + [0] * (len(xs) - len(nu))
        eig = sum(q ** parts[i] * t ** (len(xs) - 1 - i) for i in range(len(xs)))
        lhs = macdonald_operator(lambda ys: evaluate(basis_num, nu, ys), xs, q, t)
        assert lhs == eig * evaluate(basis_num, nu, xs)


def test_schur_specialization():
    # (q, t) = (t1, 1/t2) with t2 = 1/t1 gives q = t, where P_nu = s_nu
    env = Env(Fraction(3), Fraction(1, 3), Fraction(5), (Fraction(7),))
    basis = build_macdonald(4, "plain-inv", env, check=False)
    assert basis.q == basis.t
    xs = [Fraction(2), Fraction(-1, 3), Fraction(5, 7)]
    for n in range(5):
        for nu in partitions(n):
            assert evaluate(basis, nu, xs) == schur_bialternant(nu, xs)


def test_unitriangularity(basis_sym):
    assert all(unitriangular(basis_sym, n) for n in range(5))


def test_convention_arbitration_selects_one():
    assert arbitrate_convention(3, Env.specialized(2, 1)) == ["plain-inv"]


# ------------------------------------------------------------ generators


def test_heisenberg_annihilator_on_p1(sym1):
    op = heis_op(1, 2, sym1)
    assert op.block((0,), (1,))[0, 0] == -1


def test_heisenberg_creator_on_vacuum(sym1):
    op = heis_op(-1, 2, sym1)
    assert op.block((1,), (0,))[0, 0] == 1 / ((T1 - 1 / T1) * (T2 - 1 / T2))


def test_heisenberg_commutator_is_central(sym1):
    L = 3
    c = heis_op(1, L, sym1).commutator(heis_op(-1, L, sym1))
    H = sym1.hbar_half
    n1 = (T1 - 1 / T1) * (T2 - 1 / T2) * (1 / H - H)
    K = central_K(1, sym1)
    expected = GradedOperator.identity(1, L, sym1.one()).scale((1 / K - K) / n1)
    assert c.equals(expected, upto=L - 1)
    assert (1 / K - K) / n1 == (H - 1 / H) / n1


@given(st.sampled_from([(), (1,), (2,), (1, 1), (2, 1), (3, 1, 1)]), st.integers(1, 3))
def test_vertical_eigenvalue_tail(nu, m):
    """Closed-form tail minus a 50-term partial sum is the exact geometric remainder."""
    env = Env(Fraction(3, 2), Fraction(1, 3), Fraction(5), (Fraction(7, 5),))
    t1, t2 = env.t1, env.t2
    K = 50
    rows = list(nu) + [0] * (K - len(nu))
    partial = sum(t1 ** (m * (rows[i] - 1)) * t2 ** (m * i) for i in range(K))
    remainder = t1 ** (-m) * t2 ** (m * K) / (1 - t2 ** m)
    sign = -1 if m % 2 == 0 else 1
    expected = env.A[0] ** (-2 * m) * sign * (partial + remainder) / (1 - t1 ** m)
    assert f2_eigenvalue(nu, m, env) == expected


def test_central_K(sym1):
    assert central_K(0, sym1) == 1
    assert central_K(1, sym1) == 1 / (T1 * T2)
    assert central_K(2, sym1) == 1 / (T1 * T2) ** 2


def test_line_bundle_eigenvalue(sym1):
    assert O1_eigenvalue(Partition([2, 1]), sym1) == A1 ** 6 * T1 ** 2 * T2 ** 2
