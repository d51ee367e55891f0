from fractions import Fraction
from math import gcd

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from capvertex.exactalg import Env, RatFun, z_taylor
from capvertex.fock import heis_op
from capvertex.graded import GradedOperator
from capvertex.toroidal import (E_op, E_series, Generators, TensorEvaluation, TensorWord, a_limit,
                                coassociativity, collinear_relation, conjugation_check, coproduct_slope0,
                                depends_on, det, farey_slopes, hbar_Omega, interior_points,
                                n_coeff, r_infinity, shifted_evaluation, split_primitive, tensor,
                                triangle_closure, triple_conjugation_check, univqkz_check, wall_R)

Z = RatFun.var("Z")


@pytest.fixture(scope="module")
def env2():
    return Env.specialized(7, 2)


@pytest.fixture(scope="module")
def ev2(env2):
    return TensorEvaluation(2, env2, env2.A)


# ---------------------------------------------------------------- scalars


def test_n1_closed_form(sym1):
    T1, T2 = sym1.T1, sym1.T2
    H = T1 * T2
    assert n_coeff(1, sym1) == (T1 - 1 / T1) * (T2 - 1 / T2) * (1 / H - H)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_n_is_symmetric(sym1, k):
    swapped = Env(sym1.T2, sym1.T1, sym1.Q, sym1.A)
    assert n_coeff(k, sym1) == n_coeff(k, swapped)


def test_n2_on_the_diagonal():
    T = RatFun.var("T1")
    env = Env(T, T, RatFun.var("Q"), ())
    assert n_coeff(2, env) == (T ** 2 - T ** -2) ** 2 * (T ** -4 - T ** 4) / 2


# ------------------------------------------------------------- lattice


vectors = st.tuples(st.integers(-6, 6), st.integers(-6, 6)).filter(lambda v: v != (0, 0))


@given(vectors)
def test_primitive_split(v):
    if gcd(abs(v[0]), abs(v[1])) != 1:
        return
    if abs(v[0]) + abs(v[1]) == 1:
        return
    u, w = split_primitive(v)
    assert (u[0] + w[0], u[1] + w[1]) == v
    assert abs(det(u, w)) == 1
    assert interior_points((0, 0), u, v) == 0


def brute_interior(a, b, c):
    """Lattice points strictly inside a triangle by sign tests."""
    xs = [p[0] for p in (a, b, c)]
    ys = [p[1] for p in (a, b, c)]

    def side(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    count = 0
    for x in range(min(xs), max(xs) + 1):
        for y in range(min(ys), max(ys) + 1):
            s = [side(a, b, (x, y)), side(b, c, (x, y)), side(c, a, (x, y))]
            if all(v > 0 for v in s) or all(v < 0 for v in s):
                count += 1
    return count


@given(vectors, vectors)
def test_interior_points_match_brute_force(b, c):
    if det(b, c) == 0:
        return
    assert interior_points((0, 0), b, c) == brute_interior((0, 0), b, c)


@given(st.integers(1, 4), st.integers(1, 5))
def test_farey_slopes(N, span):
    got = farey_slopes(-span, span, N, True, False)
    expected = sorted({Fraction(n, d) for d in range(1, N + 1) for n in range(-span * d, span * d)})
    assert got == expected


# ----------------------------------------------------------- generators


def test_base_case_is_the_heisenberg_operator(spec1):
    g = Generators(3, spec1)
    assert g.e((1, 0)).equals(heis_op(1, 3, spec1))


def test_collinear_relation_for_diagonal_vectors(spec1):
    g = Generators(8, spec1)
    ok, diff = collinear_relation(g, (1, 1), (-1, -1), 3)
    assert ok, diff


@pytest.mark.parametrize("a,b", [((2, 1), (-2, -1)), ((1, 2), (2, 4)), ((0, 2), (0, -2)), ((3, 0), (-3, 0))])
def test_collinear_relations(spec1, a, b):
    g = Generators(8, spec1)
    ok, diff = collinear_relation(g, a, b, 3)
    assert ok, diff


def test_triangle_closure(spec1):
    ok, diff = triangle_closure(Generators(6, spec1), 3)
    assert ok, diff


# --------------------------------------------------------- tensor space


def test_hbar_omega_examples(env2):
    op = hbar_Omega((0,), (1,), 2, 3, env2)
    assert op.block((1, 0), (1, 0))[0, 0] == env2.hbar_half
    assert op.block((0, 0), (0, 0))[0, 0] == 1
    assert op.block((2, 1), (2, 1))[0, 0] == env2.hbar_half ** 3


def test_coproduct_of_rank_one_is_the_generator():
    w = coproduct_slope0(("a", 2), 1)
    assert w.terms == {(("a", 2),): 1}


@pytest.mark.parametrize("twist,power", [(1, -1), (-1, 1)])
def test_coproduct_of_alpha1(env2, twist, power):
    ev = TensorEvaluation(2, env2, env2.A, k_twist=twist)
    got = ev.evaluate(TensorWord.single(("a", 1)).coproduct(0))
    a1 = ev.e(0, (1, 0))
    a2 = ev.e(1, (1, 0))
    one = GradedOperator.identity(1, 2, env2.one())
    expected = tensor([a1, one.scale(env2.hbar_half ** power)]) + tensor([one, a2])
    assert got.equals(expected)


@pytest.mark.parametrize("k", [-2, 2])
def test_coassociativity_on_triples(k):
    env = Env.specialized(4, 3)
    ok, _, _ = coassociativity(("a", k), 3, env, env.A)
    assert ok


def test_slope_zero_R_is_unitriangular_and_shift_free(env2):
    ev = shifted_evaluation(2, env2)
    R = wall_R(0, -1, ev)
    assert not depends_on(R)
    assert min(R.triangular_shifts(0)) >= 0
    diag = GradedOperator(2, 2, {k: m for k, m in R.blocks.items() if k[0] == k[1]})
    assert diag.equals(ev.identity())


def test_wall_R_beyond_the_truncation_is_identity(ev2):
    assert wall_R(Fraction(1, 3), 1, ev2).equals(ev2.identity())


@pytest.mark.parametrize("w", [Fraction(1), Fraction(1, 2), Fraction(-1), Fraction(-1, 2)])
def test_wall_limits(env2, w):
    # generators scale like a^(-k n(w)), so the sign matching the slope tends to 1
    ev = shifted_evaluation(2, env2)
    lim, pole = a_limit(wall_R(w, 1 if w > 0 else -1, ev))
    assert pole is None
    assert lim.equals(ev.identity())


def test_vertical_R_is_normalized_on_the_vacuum(ev2):
    R = r_infinity(ev2)
    assert R.is_block_diagonal()
    assert R.block((0, 0), (0, 0))[0, 0] == 1


# ------------------------------------------------------------------ E(z)


def test_E_is_unipotent(ev2):
    E = E_op(ev2, Z)
    assert min(E.triangular_shifts(0)) >= 0
    diag = GradedOperator(2, 2, {k: m for k, m in E.blocks.items() if k[0] == k[1]})
    assert diag.equals(ev2.identity())


def test_E_solves_the_wall_difference_equation(ev2):
    ok, diff = univqkz_check(ev2, Z)
    assert ok, diff


def test_E_inverse_by_negated_exponent(ev2):
    E = E_op(ev2, Z)
    assert (E @ E_op(ev2, Z, power=-1)).equals(ev2.identity())


def test_E_series_matches_taylor_expansion(ev2):
    D = 4
    E = E_op(ev2, Z)
    S = E_series(ev2, D)
    for key, m in E.blocks.items():
        for (i, j), x in np.ndenumerate(m):
            taylor = z_taylor(RatFun(x), D)
            for d in range(D + 1):
                got = S[d].block(*key)[i, j]
                assert RatFun(got) == taylor[d]


def test_conjugation_on_groups():
    env = Env.specialized(9, 3)
    ev = TensorEvaluation(2, env, env.A)
    for left, right in (((0,), (1,)), ((0, 1), (2,)), ((0,), (1, 2))):
        for k in (1, 2):
            assert conjugation_check(ev, k, left, right)
            # the K^-k x K^k form only survives for equal ranks
            assert conjugation_check(ev, k, left, right, "literal") == (len(left) == len(right))
    assert all(triple_conjugation_check(ev, k) for k in (1, 2))
