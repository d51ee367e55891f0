"""Quantum difference equation at rank 1, capping operator, capped vertex and the wKZ solver.

Rank-1 operators at instanton number n live on the degree-n block of the
Fock space, written in the Macdonald basis (the fixed-point basis up to a
diagonal normalization).  Rank-(r1, r2) operators are GradedOperators on a
tensor product of rank-1 Fock spaces.
"""
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .combinat import MultiPartition, Partition
from .exactalg import SeriesZ, identity, is_zero, matmul, pade_reconstruct, zeros
from .fock import O1_eigenvalue
from .graded import GradedOperator, OpSeries, partitions, sectors
from .locvertex import Descendent, bare_vertex, monomial_value, roof_hat, tangent_character
from .reports import Report
from .toroidal import (BConventions, B_series, E_op, E_series, TensorEvaluation, hbar_Omega,
                       wall_R0_inverse, z_degree)


class ResonantSpecialization(ArithmeticError):
    pass


class NonInvertibleAd(ArithmeticError):
    pass


# --------------------------------------------------------------------------
# diagonal line bundles


@dataclass(frozen=True)
class QdeConventions:
    """Readings arbitrated by the classical capped vertex.

    ``o1_hbar``: extra power of hbar^(1/2) per box in O(1).
    ``basis_norm``: diagonal normalization between fixed points and monic
    Macdonald polynomials, see :func:`basis_normalization`.
    """

    b: BConventions = BConventions()
    o1_hbar: int = 0
    basis_norm: str = "integral"


DEFAULT = QdeConventions()


def O1(nu, env, conventions=DEFAULT):
    """Eigenvalue of O(1) at the fixed point nu: product of the box weights a t1^x t2^y."""
    return O1_eigenvalue(nu, env) * env.hbar_half ** (conventions.o1_hbar * sum(nu))


def K_half(nu, env):
    """K^(1/2) at nu: product over tangent weights w of w^(-1/2)."""
    exps = None
    for m, c in tangent_character(MultiPartition([Partition(nu)])).terms.items():
        v = [-c * e for e in m]
        exps = v if exps is None else [a + b for a, b in zip(exps, v)]
    if exps is None:
        return env.one()
    if any(e % 2 for e in exps):
        raise ValueError("odd exponent in K^(1/2)")
    return monomial_value(tuple(e // 2 for e in exps), env.point)


def integral_normalization(nu, env):
    """t^(-n(nu)) prod_s (1 - q^a(s) t^(l(s)+1)) at (q, t) = (t1, 1/t2)."""
    lam = Partition(nu)
    conj = lam.conjugate()
    out = env.one()
    for x, y in lam.boxes():
        arm, leg = lam[y] - x - 1, conj[x] - y - 1
        out = out * (1 - env.t1 ** arm * env.t2 ** (-leg - 1)) * env.t2 ** leg
    return out


def basis_normalization(nu, env, kind):
    """c_nu with [fixed point nu] = c_nu P_nu."""
    if kind == "one":
        return env.one()
    if kind == "integral":
        return integral_normalization(nu, env)
    lam = MultiPartition([Partition(nu)])
    roof = roof_hat(tangent_character(lam), env.point)
    if kind == "roof":
        return roof
    if kind == "inverse-roof":
        return 1 / roof
    raise ValueError(kind)


# --------------------------------------------------------------------------
# M(z) and the capping operator


def M_series(n, D, env, conventions=DEFAULT, basis=None):
    """Matrices M_0..M_D of M(z) = O(1) B(z) on the degree-n block, Macdonald basis."""
    ev = TensorEvaluation(n, env, (env.A[0],), margin=n + 2)
    basis = basis or ev.gens[0].basis
    B = B_series(ev, D, 1, conventions.b)
    parts = partitions(n)
    P, Pinv = basis.P[n], basis.Pinv[n]
    O = [O1(nu, env, conventions) for nu in parts]
    out = []
    for d in range(D + 1):
        blk = B[d].block((n,), (n,))
        Bt = Pinv.dot(blk).dot(P)
        out.append(np.array([[O[i] * Bt[i, j] for j in range(len(parts))] for i in range(len(parts))],
                            dtype=object).reshape(len(parts), len(parts)))
    return out, O


def solve_psi(n, D, env, conventions=DEFAULT):
    """Psi_0..Psi_D solving Psi(zq) O(1) = M(z) Psi(z) with Psi(0) = 1 on instanton number n."""
    M, O = M_series(n, D, env, conventions)
    size = len(O)
    if any(not is_zero(M[0][i, j] - (O[i] if i == j else 0)) for i in range(size) for j in range(size)):
        raise ArithmeticError("M(0) differs from O(1)")
    q = env.q
    psi = [identity(size, env.one())]
    for d in range(1, D + 1):
        rhs = zeros(size)
        for j in range(1, d + 1):
            rhs = rhs + matmul(M[j], psi[d - j])
        cur = zeros(size)
        for a in range(size):
            for b in range(size):
                den = q ** d * O[b] - O[a]
                if is_zero(den):
                    raise ResonantSpecialization((n, d, a, b))
                cur[a, b] = rhs[a, b] / den
        psi.append(cur)
    return psi, M, O


def qde_residual(psi, M, O, q):
    """Orders d of Psi(zq) O(1) - M(z) Psi(z) that fail to vanish."""
    bad = []
    size = len(O)
    for d in range(len(psi)):
        lhs = np.array([[psi[d][a, b] * q ** d * O[b] for b in range(size)] for a in range(size)],
                       dtype=object).reshape(size, size)
        rhs = zeros(size)
        for j in range(d + 1):
            rhs = rhs + matmul(M[j], psi[d - j])
        if any(not is_zero(lhs[a, b] - rhs[a, b]) for a in range(size) for b in range(size)):
            bad.append(d)
    return bad


def capped_vertex(n, tau, D, env, conventions=DEFAULT, psi=None):
    """Capped vertex components (one SeriesZ per fixed point, Macdonald basis) at instanton number n."""
    if psi is None:
        psi, _, _ = solve_psi(n, D, env, conventions)
    parts = partitions(n)
    bare = []
    for nu in parts:
        v = bare_vertex(MultiPartition([Partition(nu)]), tau, D, 1, env.point)
        c = basis_normalization(nu, env, conventions.basis_norm)
        bare.append([x * c for x in v.coeffs])
    out = []
    for a in range(len(parts)):
        coeffs = []
        for d in range(D + 1):
            s = env.zero()
            for j in range(d + 1):
                for b in range(len(parts)):
                    s = s + psi[j][a, b] * bare[b][d - j]
            coeffs.append(s)
        out.append(SeriesZ(coeffs, D))
    return parts, out


# --------------------------------------------------------------------------
# wall KZ equation


def solve_wkz(D_block, ev, z, left=(0,), right=(1,)):
    """Lower-triangular J with level-0 part ``D_block`` solving
    z_(1)^d (R^-_0)^-1 hbar^Omega J = J hbar^Omega z_(1)^d.

    The level of a block is the degree it moves into the ``left`` group.
    Each level is solved from the lower ones, blockwise.
    """
    env, N, R = ev.env, ev.N, ev.R
    X = wall_R0_inverse(ev, left, right)
    rl, rr = len(left), len(right)

    def n_left(s):
        return sum(s[i] for i in left)

    def g(s):
        nl, nr = n_left(s), sum(s[i] for i in right)
        return env.hbar_half ** (nl * rr + nr * rl)

    blocks = {k: m for k, m in D_block.blocks.items() if n_left(k[0]) == n_left(k[1])}
    if len(blocks) != len(D_block.blocks):
        raise ValueError("D_block must preserve the left degree")
    by_out = {}
    for (o, m), mat in X.blocks.items():
        if o != m:
            by_out.setdefault(o, []).append((m, mat))
    secs = sorted(sectors(R, N), key=n_left)
    for inp in secs:
        for out in secs:
            if sum(out) != sum(inp) or n_left(out) <= n_left(inp):
                continue
            acc = None
            for mid, xm in by_out.get(out, ()):
                jm = blocks.get((mid, inp))
                if jm is None:
                    continue
                term = xm.dot(jm) * g(mid)
                acc = term if acc is None else acc + term
            if acc is None:
                continue
            den = z ** n_left(out) * g(out) - g(inp) * z ** n_left(inp)
            if is_zero(den):
                raise NonInvertibleAd((out, inp))
            blocks[(out, inp)] = acc * (-(z ** n_left(out)) / den)
    return GradedOperator(R, N, blocks)


def wkz_residual(J, ev, z, left=(0,), right=(1,)):
    """True when J satisfies the wall KZ equation exactly."""
    R, N, env = ev.R, ev.N, ev.env
    zd = z_degree(left, R, N, z)
    hO = hbar_Omega(left, right, R, N, env)
    lhs = zd @ wall_R0_inverse(ev, left, right) @ hO @ J
    rhs = J @ hO @ zd
    return lhs.equals(rhs)


# --------------------------------------------------------------------------
# cocycle identity


def Y_op(ev, z, left, right):
    """Y^{(r1),(r2)}(z) = ev(E(z)) on the factor groups ``left``, ``right``."""
    if not left or not right:
        return ev.identity()
    return E_op(ev, z, left, right)


def verify_cocycle(N, env, z, report=None):
    """Y^{(2),(1)}(z) Y^{(1),(1)}_12(z hbar^1/2) == Y^{(1),(2)}(z) Y^{(1),(1)}_23(z hbar^-1/2) on F^3."""
    report = report or Report()
    ev = TensorEvaluation(N, env, tuple(env.A[:3]))
    h = env.hbar_half
    lhs = Y_op(ev, z, (0, 1), (2,)) @ Y_op(ev, z * h, (0,), (1,))
    rhs = Y_op(ev, z, (0,), (1, 2)) @ Y_op(ev, z / h, (1,), (2,))
    report.add(f"cocycle identity (1,1,1), N={N}", lhs.equals(rhs), lhs.first_difference(rhs))
    report.add("Y^{(r),(0)} = Y^{(0),(r)} = 1",
               Y_op(ev, z, (0, 1, 2), ()).equals(ev.identity())
               and Y_op(ev, z, (), (0, 1, 2)).equals(ev.identity()))
    return report


def psi_fock(n, D, env, basis, conventions=DEFAULT):
    """Psi_0..Psi_D on the degree-n block in the power-sum basis."""
    psi, _, _ = solve_psi(n, D, env, conventions)
    P, Pinv = basis.P[n], basis.Pinv[n]
    return [P.dot(m).dot(Pinv) for m in psi]


def factorization_rhs(N, D, env, conventions=DEFAULT):
    """Y(z) (Psi(z hbar^1/2) x Psi(z hbar^-1/2)) on F(a_1) x F(a_2) as an operator series."""
    ev = TensorEvaluation(N, env, tuple(env.A[:2]))
    basis = ev.gens[0].basis
    h = env.hbar_half
    psis = {n: psi_fock(n, D, env, basis, conventions) for n in range(N + 1)}
    coeffs = []
    for d in range(D + 1):
        blocks = {}
        for sec in sectors(2, N):
            n1, n2 = sec
            acc = None
            for i in range(d + 1):
                term = np.kron(psis[n1][i] * h ** i, psis[n2][d - i] * h ** (i - d))
                acc = term if acc is None else acc + term
            blocks[(sec, sec)] = acc
        coeffs.append(GradedOperator(2, N, blocks))
    diag = OpSeries(coeffs)
    return E_series(ev, D) @ diag, diag, ev


def factorization_report(N, D, env, conventions=DEFAULT, report=None):
    """Lower triangularity and the level-0 part of the factorized capping operator."""
    report = report or Report()
    full, diag, ev = factorization_rhs(N, D, env, conventions)
    lower = all(min(op.triangular_shifts(0), default=0) >= 0 for op in full.coeffs)
    level0 = all(
        GradedOperator(2, N, {k: m for k, m in op.blocks.items() if k[0][0] == k[1][0]}).equals(dg)
        for op, dg in zip(full.coeffs, diag.coeffs))
    unit = GradedOperator(2, N, {k: m for k, m in full[0].blocks.items() if k[0] == k[1]}).equals(ev.identity())
    report.add(f"Y (Psi x Psi) lower triangular (N={N}, D={D})", lower)
    report.add(f"Y (Psi x Psi) level 0 = Psi x Psi (N={N}, D={D})", level0)
    report.add(f"Y (Psi x Psi) invertible diagonal at z=0 (N={N})", unit)
    return report


# --------------------------------------------------------------------------
# rationality


def rationality_check(series, max_total=None, name="series"):
    """Smallest Pade pair (m, n) whose fraction reproduces every computed order."""
    coeffs = list(series.coeffs if isinstance(series, SeriesZ) else series)
    D = len(coeffs) - 1
    max_total = D - 2 if max_total is None else min(max_total, D - 2)
    report = Report()
    for total in range(max_total + 1):
        for m in range(total + 1):
            fit = pade_reconstruct(coeffs, m, total - m)
            if fit is not None and fit.evaluate_series(D) == coeffs:
                report.result[name] = {"m": m, "n": total - m, "fraction": fit.to_text(),
                                       "predicted_orders": D - total}
                report.add(f"{name} is rational", True, {"m": m, "n": total - m})
                return report
    report.result[name] = None
    report.add(f"{name} is rational", False, {"max_total": max_total, "orders": D})
    return report


def truncated_exp(D):
    coeffs, c = [], Fraction(1)
    for k in range(D + 1):
        coeffs.append(c)
        c = c / (k + 1)
    return SeriesZ(coeffs, D)


# --------------------------------------------------------------------------
# suites


def classical_report(n, D, env, conventions=DEFAULT, report=None):
    """z^1..z^D coefficients of the tau = 1 capped vertex vanish."""
    report = report or Report()
    parts, out = capped_vertex(n, Descendent.one(), D, env, conventions)
    bad = [d for d in range(1, D + 1) if not all(is_zero(s.coeffs[d]) for s in out)]
    report.add(f"classical capped vertex n={n} through z^{D}", not bad, {"nonzero_orders": bad})
    return report


def qde_report(n, D, env, conventions=DEFAULT, report=None):
    report = report or Report()
    psi, M, O = solve_psi(n, D, env, conventions)
    bad = qde_residual(psi, M, O, env.q)
    report.add(f"qde residual n={n} through z^{D}", not bad, {"failing_orders": bad})
    return report
