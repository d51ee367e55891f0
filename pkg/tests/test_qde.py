from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from capvertex.combinat import MultiPartition, Partition, enumerate_partitions
from capvertex.exactalg import Env, RatFun, SeriesZ, identity, is_zero, matmul
from capvertex.graded import GradedOperator
from capvertex.locvertex import Descendent, bare_vertex
from capvertex.qde import (M_series, NonInvertibleAd, ResonantSpecialization, capped_vertex,
                           classical_report, factorization_report, integral_normalization, rationality_check,
                           solve_psi, solve_wkz, truncated_exp, verify_cocycle, wkz_residual)
from capvertex.toroidal import E_op, TensorEvaluation

Z = RatFun.var("Z")


@pytest.fixture(scope="module")
def env():
    return Env.specialized(3, 1)


def shifted_product(psi, O, q, d):
    """Coefficient of z^d in Psi(zq) O(1), computed entrywise."""
    size = len(O)
    return [[psi[d][a, b] * q ** d * O[b] for b in range(size)] for a in range(size)]


# --------------------------------------------------------------- M(z)


def test_M_at_instanton_number_zero(env):
    M, O = M_series(0, 3, env)
    assert O == [1]
    assert M[0][0, 0] == 1 and all(is_zero(m[0, 0]) for m in M[1:])


@pytest.mark.parametrize("n", [1, 2])
def test_M_at_zero_is_the_line_bundle(env, n):
    M, O = M_series(n, 2, env)
    size = len(O)
    for i in range(size):
        for j in range(size):
            assert M[0][i, j] == (O[i] if i == j else 0)


# ------------------------------------------------------- capping operator


@pytest.mark.parametrize("n", [1, 2])
def test_capping_operator_solves_the_difference_equation(env, n):
    D = 5
    psi, M, O = solve_psi(n, D, env)
    assert (psi[0] == identity(len(O), env.one())).all()
    for d in range(D + 1):
        rhs = None
        for j in range(d + 1):
            term = matmul(M[j], psi[d - j])
            rhs = term if rhs is None else rhs + term
        lhs = shifted_product(psi, O, env.q, d)
        assert all(lhs[a][b] == rhs[a, b] for a in range(len(O)) for b in range(len(O)))


def test_resonant_specialization_is_reported():
    env = Env(Fraction(2), Fraction(3), Fraction(1), (Fraction(5),))
    with pytest.raises(ResonantSpecialization):
        solve_psi(1, 2, env)


@given(st.integers(0, 6))
def test_integral_normalization_monomial_part(n):
    # hook factors times t2^n(lam), n(lam) = sum (i-1) lam_i from the row lengths
    env = Env(Fraction(1, 2), Fraction(3), Fraction(5), (Fraction(7),))
    for lam in enumerate_partitions(n):
        c = integral_normalization(lam, env)
        hooks = Fraction(1)
        conj = lam.conjugate()
        for x, y in lam.boxes():
            arm, leg = lam[y] - x - 1, conj[x] - y - 1
            hooks *= 1 - env.t1 ** arm * env.t2 ** (-leg - 1)
        n_lam = sum(i * part for i, part in enumerate(lam))
        assert c == hooks * env.t2 ** n_lam


def test_integral_normalization_of_one_box(sym1):
    assert integral_normalization(Partition([1]), sym1) == 1 - 1 / sym1.t2


@pytest.mark.parametrize("n", [1, 2])
def test_classical_capped_vertex(env, n):
    rep = classical_report(n, 3, env)
    assert rep.passed, rep.failures()


def test_capped_vertex_constant_term(env):
    # Psi(0) = 1, so the z^0 term is the normalized bare vertex
    parts, out = capped_vertex(1, Descendent.p(1), 2, env)
    bare = bare_vertex(MultiPartition([[1]]), Descendent.p(1), 0, 1, env.point)
    assert out[0][0] == bare[0] * integral_normalization(Partition([1]), env)


# ---------------------------------------------------------------- wKZ


def test_wkz_without_off_diagonal_blocks():
    env = Env.specialized(2, 2)
    ev = TensorEvaluation(0, env, env.A)
    D = ev.identity().scale(Fraction(3))
    assert solve_wkz(D, ev, Z).equals(D)


@pytest.mark.parametrize("N", [1, 2])
def test_wkz_solution_is_E_times_the_diagonal(N):
    env = Env.specialized(2, 2)
    ev = TensorEvaluation(N, env, env.A)
    Dg = GradedOperator.diagonal(2, N, lambda s: Fraction(5 + s[0], 3 + 2 * s[1]))
    J = solve_wkz(Dg, ev, Z)
    assert J.equals(E_op(ev, Z) @ Dg)
    assert wkz_residual(J, ev, Z)
    assert solve_wkz(ev.identity(), ev, Z).equals(E_op(ev, Z))


def test_wkz_rejects_a_degenerate_point():
    env = Env.specialized(2, 2)
    ev = TensorEvaluation(1, env, env.A)
    # the (1,0) <- (0,1) block divides by hbar^1/2 (z - 1)
    with pytest.raises(NonInvertibleAd):
        solve_wkz(ev.identity(), ev, Fraction(1))


def test_wkz_rejects_non_diagonal_input():
    env = Env.specialized(2, 2)
    ev = TensorEvaluation(1, env, env.A)
    off = GradedOperator(2, 1, {((1, 0), (0, 1)): ev.identity().block((1, 0), (1, 0))})
    with pytest.raises(ValueError):
        solve_wkz(off, ev, Z)


# ------------------------------------------------------------ cocycle


@pytest.mark.parametrize("N", [0, 1])
def test_cocycle_identity(N):
    rep = verify_cocycle(N, Env.specialized(4, 3), Z)
    assert rep.passed, rep.failures()


def test_factorized_capping_operator_structure():
    rep = factorization_report(1, 3, Env.specialized(5, 2))
    assert rep.passed, rep.failures()


# -------------------------------------------------------- rationality


def test_rationality_finds_a_known_fraction():
    # (1 + 2z) / (1 - 3z + z^2)
    coeffs = [Fraction(1), Fraction(5)]
    for _ in range(8):
        coeffs.append(3 * coeffs[-1] - coeffs[-2])
    rep = rationality_check(SeriesZ(coeffs), name="f")
    assert rep.passed
    assert rep.result["f"]["m"] + rep.result["f"]["n"] <= 3
    assert rep.result["f"]["predicted_orders"] > 0


def test_rationality_rejects_exp():
    rep = rationality_check(truncated_exp(8))
    assert not rep.passed


def test_capped_vertex_is_rational(env):
    parts, out = capped_vertex(1, Descendent.p(1), 8, env)
    rep = rationality_check(out[0], name="capped")
    assert rep.passed
