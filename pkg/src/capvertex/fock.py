"""Truncated Fock space, Macdonald polynomials and the Fock representation generators.

Vectors are expanded in power sums ``p_lambda``.  The field elements come
from an :class:`~capvertex.exactalg.Env`, so the same code runs with
symbolic rational functions or with exact rationals at a random point.
"""
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .combinat import Partition
from .exactalg import Env, inverse, is_zero, zeros
from .graded import GradedOperator, partitions


class EigencheckFailed(ArithmeticError):
    def __init__(self, convention, detail=""):
        super().__init__(f"{convention}: {detail}")
        self.convention = convention


# --------------------------------------------------------------------------
# power-sum combinatorics


def z_factor(lam):
    """z_lambda = prod_k k^{m_k} m_k!"""
    out = 1
    for k in set(lam):
        m = lam.count(k)
        out *= k ** m * factorial(m)
    return out


@lru_cache(maxsize=None)
def _p_to_m(n):
    """Integer matrix R with p_lambda = sum_mu R[lambda, mu] m_mu (rows/cols in ``partitions(n)`` order)."""
    parts = partitions(n)
    return [[_count_assignments(lam, mu) for mu in parts] for lam in parts]


def _count_assignments(lam, mu):
    """Number of maps parts(lam) -> rows(mu) whose row sums equal mu exactly."""
    target = list(mu)

    def rec(k, rem):
        if k == len(lam):
            return 1 if not any(rem) else 0
        total = 0
        for j in range(len(rem)):
            if rem[j] >= lam[k]:
                rem[j] -= lam[k]
                total += rec(k + 1, rem)
                rem[j] += lam[k]
        return total

    return rec(0, target)


@lru_cache(maxsize=None)
def m_in_p(n):
    """Matrix whose column mu is m_mu expanded in power sums."""
    R = _p_to_m(n)
    size = len(R)
    mat = zeros(size)
    for i in range(size):
        for j in range(size):
            mat[i, j] = Fraction(R[i][j])
    # p = R m  as row vectors  =>  columns of R^T give p in the m basis
    return inverse(mat.T)


def multiply_p(mu, n):
    """Matrix of multiplication by p_mu from degree n to n + |mu|."""
    src, dst = partitions(n), partitions(n + sum(mu))
    index = {lam: i for i, lam in enumerate(dst)}
    mat = zeros(len(dst), len(src))
    for j, lam in enumerate(src):
        new = Partition(sorted(lam + tuple(mu), reverse=True))
        mat[index[new], j] = Fraction(1)
    return mat


def differentiate_p(k, n):
    """Matrix of d/dp_k from degree n to n - k."""
    src, dst = partitions(n), partitions(n - k)
    index = {lam: i for i, lam in enumerate(dst)}
    mat = zeros(len(dst), len(src))
    for j, lam in enumerate(src):
        m = lam.count(k)
        if m:
            rest = list(lam)
            rest.remove(k)
            mat[index[Partition(rest)], j] = Fraction(m)
    return mat


# --------------------------------------------------------------------------
# Macdonald polynomials

CONVENTIONS = {
    "sqrt": lambda env: (env.T1, env.T2),
    "plain": lambda env: (env.t1, env.t2),
    "sqrt-inv": lambda env: (env.T1, 1 / env.T2),
    "plain-inv": lambda env: (env.t1, 1 / env.t2),
}


def qt_inner(lam, q, t):
    out = Fraction(z_factor(lam))
    for k in lam:
        out = out * (1 - q ** k) / (1 - t ** k)
    return out


class MacdonaldBasis:
    """Monic Macdonald polynomials in the power-sum basis, degrees 0..N."""

    def __init__(self, N, convention, env):
        self.N = N
        self.convention = convention
        self.env = env
        self.q, self.t = CONVENTIONS[convention](env)
        self.P = {}
        self.Pinv = {}
        for n in range(N + 1):
            self.P[n] = gram_schmidt(n, self.q, self.t)
            self.Pinv[n] = inverse(self.P[n])

    def column(self, nu):
        n = sum(nu)
        return self.P[n][:, partitions(n).index(Partition(nu))]


def gram_schmidt(n, q, t):
    """Columns P_nu in power sums, orthogonalized from the smallest partition upwards.

    ``partitions(n)`` is reverse lexicographic, a linear extension of
    dominance, so walking it backwards processes smaller partitions first.
    """
    parts = partitions(n)
    M = m_in_p(n)
    norms = [qt_inner(lam, q, t) for lam in parts]

    def inner(u, v):
        s = 0
        for i in range(len(parts)):
            if not is_zero(u[i]) and not is_zero(v[i]):
                s = s + u[i] * v[i] * norms[i]
        return s

    size = len(parts)
    P = zeros(size)
    done = []
    for j in range(size - 1, -1, -1):
        vec = [M[i, j] for i in range(size)]
        for k, pk, pkpk in done:
            c = inner(vec, pk) / pkpk
            if not is_zero(c):
                vec = [a - c * b for a, b in zip(vec, pk)]
        for i in range(size):
            P[i, j] = vec[i]
        done.append((j, vec, inner(vec, vec)))
    return P


def build_macdonald(N, convention="plain-inv", env=None, check=True):
    """Macdonald basis for degrees <= N; with ``check`` run the eigencheck for the convention."""
    env = env or Env.symbolic(1)
    basis = MacdonaldBasis(N, convention, env)
    if check:
        eigencheck(basis)
    return basis


def macdonald_zero_mode(n, q, t):
    """Zero mode of exp(sum (1-t^-k) p_k z^k / k) exp(-sum (1-q^k) d/dp_k z^-k) on degree n."""
    size = len(partitions(n))
    out = zeros(size)
    for j in range(n + 1):
        for mu in partitions(j):
            cre = _exp_coeff(mu, lambda k: (1 - t ** (-k)) / k)
            for nu in partitions(j):
                ann = _exp_coeff(nu, lambda k: -(1 - q ** k))
                D = _diff_chain(nu, n)
                Mul = multiply_p(mu, n - j)
                out = out + Mul.dot(D) * (cre * ann)
    return out


def _exp_coeff(mu, c):
    """Coefficient of prod p_k^{m_k} in exp(sum c_k p_k): prod c_k^{m_k} / m_k!"""
    out = 1
    for k in set(mu):
        m = mu.count(k)
        out = out * c(k) ** m / factorial(m)
    return out


def _diff_chain(nu, n):
    mat = None
    deg = n
    for k in nu:
        d = differentiate_p(k, deg)
        mat = d if mat is None else d.dot(mat)
        deg -= k
    if mat is None:
        mat = zeros(len(partitions(n)))
        for i in range(len(partitions(n))):
            mat[i, i] = Fraction(1)
    return mat


def f2_eigenvalue(nu, m, env, A=None, sign_reading="m-parity"):
    """Eigenvalue of e_(0,m) on P_nu; the infinite tail is summed in closed form.

    ``sign_reading``: "m" uses sign(m), "m-parity" uses sign(m) (-1)^(m+1),
    anything else drops the sign.
    """
    A = env.A[0] if A is None else A
    t1, t2 = env.t1, env.t2
    ell = len(nu)
    s = 0
    for i, part in enumerate(nu):
        s = s + t1 ** (m * (part - 1)) * t2 ** (m * i)
    s = s + t1 ** (-m) * t2 ** (m * ell) / (1 - t2 ** m)
    sign = (1 if m > 0 else -1) if sign_reading in ("m", "m-parity") else 1
    if sign_reading == "m-parity" and m % 2 == 0:
        sign = -sign
    return A ** (-2 * m) * sign * s / (1 - t1 ** m)


def eigencheck(basis):
    """Each P_nu is an eigenvector of the Macdonald zero mode, with eigenvalues affine in those of e_(0,1).

    Raises EigencheckFailed otherwise.  Also requires distinct eigenvalues in each degree.
    """
    env = basis.env
    e_empty = f2_eigenvalue((), 1, env)
    ratio = None
    for n in range(basis.N + 1):
        D = macdonald_zero_mode(n, basis.q, basis.t)
        P = basis.P[n]
        parts = partitions(n)
        evs = []
        for j, nu in enumerate(parts):
            col = P[:, j]
            img = D.dot(col)
            i0 = next(i for i in range(len(col)) if not is_zero(col[i]))
            lam = img[i0] / col[i0]
            if any(not is_zero(img[i] - lam * col[i]) for i in range(len(col))):
                raise EigencheckFailed(basis.convention, f"P{nu!r} is not an eigenvector")
            f2 = f2_eigenvalue(nu, 1, env)
            evs.append(f2)
            if n == 0:
                continue
            if is_zero(lam - 1):
                raise EigencheckFailed(basis.convention, "degenerate zero-mode eigenvalue")
            c = (f2 - e_empty) / (lam - 1)
            if ratio is None:
                ratio = c
            elif not is_zero(c - ratio):
                raise EigencheckFailed(basis.convention, f"eigenvalue of P{nu!r} not affine in the f2 parameter")
        for a in range(len(evs)):
            for b in range(a):
                if is_zero(evs[a] - evs[b]):
                    raise EigencheckFailed(basis.convention, f"repeated eigenvalue in degree {n}")
    return True


def arbitrate_convention(N, env):
    """Candidates passing the eigencheck, in the fixed candidate order."""
    passing = []
    for name in CONVENTIONS:
        try:
            build_macdonald(N, name, env)
            passing.append(name)
        except (EigencheckFailed, ZeroDivisionError):
            pass
    return passing


def unitriangular(basis, n):
    """P_nu = m_nu + sum over mu strictly dominated by nu."""
    parts = partitions(n)
    Minv = inverse(m_in_p(n))
    coeffs = Minv.dot(basis.P[n])
    for j, nu in enumerate(parts):
        for i, mu in enumerate(parts):
            c = coeffs[i, j]
            if i == j:
                if not is_zero(c - 1):
                    return False
            elif not is_zero(c) and not (nu.dominates(mu) and mu != nu):
                return False
    return True


# --------------------------------------------------------------------------
# generators of the Fock representation


def bracket(x, k):
    """x^(k/2) - x^(-k/2) for a square-root variable value x^(1/2)."""
    return x ** k - x ** (-k)


HEIS_NORMS = {
    "literal": lambda k, env: env.one(),
    # rescaling fixed by the triangle relations through (+-2, 0) and (+-3, 0)
    "t2": lambda k, env: (-1) ** (k + 1) * (1 - env.t2 ** k) / (1 - env.t2) ** k,
}


def heis_op(m, L, env, norm="t2"):
    """e_(m,0): g_|m| p_{-m}/([t1^m][t2^m]) for m < 0 and -m d/dp_m / g_m for m > 0.

    g_k is ``HEIS_NORMS[norm]``; it is 1 for k = 1 under every choice.
    """
    if m == 0:
        raise ValueError("m must be nonzero")
    g = HEIS_NORMS[norm](abs(m), env)
    blocks = {}
    if m < 0:
        k = -m
        c = g / (bracket(env.T1, k) * bracket(env.T2, k))
        for n in range(L - k + 1):
            blocks[((n + k,), (n,))] = multiply_p((k,), n) * c
        valid = L - k
    else:
        for n in range(m, L + 1):
            blocks[((n - m,), (n,))] = differentiate_p(m, n) * (-m / g)
        valid = L
    return GradedOperator(1, L, blocks, valid, {-m})


def diag_op(m, L, env, basis, A=None, sign_reading="m-parity"):
    """e_(0,m) on F(a): diagonal on Macdonald polynomials, expressed in power sums."""
    blocks = {}
    for n in range(L + 1):
        parts = partitions(n)
        D = zeros(len(parts))
        for j, nu in enumerate(parts):
            D[j, j] = f2_eigenvalue(nu, m, env, A, sign_reading)
        blocks[((n,), (n,))] = basis.P[n].dot(D).dot(basis.Pinv[n])
    return GradedOperator(1, L, blocks)


def central_K(r, env):
    """K_(1,0) on a rank-r tensor product: hbar^(-r/2)."""
    return env.hbar_half ** (-r) if r else env.one()


def O1_eigenvalue(nu, env, A=None):
    """det of the tautological bundle at nu: product of box weights a t1^x t2^y."""
    A = env.A[0] if A is None else A
    out = env.one()
    for y, row in enumerate(nu):
        for x in range(row):
            out = out * A ** 2 * env.t1 ** x * env.t2 ** y
    return out
