"""Quantum toroidal gl(1) on truncated Fock spaces.

Generators ``e_v`` for arbitrary lattice vectors are produced from the
slope-0 and slope-infinity Heisenberg generators by the empty-triangle
commutation relation, and imprimitive ones through the exponential
generating series of the ``Psi`` elements.  Everything is realised as
:class:`~capvertex.graded.GradedOperator` on a rank-1 Fock space; tensor
products only ever need slope Heisenberg generators on each factor, the
slope-0 coproduct, and central scalars.
"""
from dataclasses import dataclass, replace
from fractions import Fraction
from math import gcd

import numpy as np

from .exactalg import Env, RatFun, is_zero, laurent_terms, lowest_a_term
from .fock import build_macdonald, central_K, diag_op, heis_op
from .graded import GradedOperator, OpSeries, sector_basis, sectors
from .reports import Report


class NoDecomposition(ArithmeticError):
    pass


class TruncationTooSmall(ValueError):
    pass


# --------------------------------------------------------------------------
# lattice bookkeeping


def deg(v):
    return gcd(abs(v[0]), abs(v[1]))


def eps(v):
    """+1 on the half-plane {i > 0} or {i = 0, j > 0}, -1 on its negative."""
    return 1 if v[0] > 0 or (v[0] == 0 and v[1] > 0) else -1


def det(a, b):
    return a[0] * b[1] - a[1] * b[0]


def eps_pair(a, b):
    d = det(a, b)
    if d == 0:
        raise ValueError("collinear vectors have no sign")
    return 1 if d > 0 else -1


def alpha(a, b, reading="symmetric"):
    """Central index alpha(a, b) of the triangle relation.

    The second branch is read as eps_b (eps_a a + eps_b b - eps_{a+b}(a+b))/2;
    ``reading="literal"`` uses eps_b (eps_b b + eps_b b - ...)/2 instead.
    """
    c = (a[0] + b[0], a[1] + b[1])
    ea, eb, ec = eps(a), eps(b), eps(c)
    if eps_pair(a, b) == 1:
        lead, x = ea, (ea * a[0] + eb * b[0] - ec * c[0], ea * a[1] + eb * b[1] - ec * c[1])
    elif reading == "symmetric":
        lead, x = eb, (ea * a[0] + eb * b[0] - ec * c[0], ea * a[1] + eb * b[1] - ec * c[1])
    else:
        lead, x = eb, (2 * eb * b[0] - ec * c[0], 2 * eb * b[1] - ec * c[1])
    if x[0] % 2 or x[1] % 2:
        raise ValueError(f"alpha{a, b} is not a lattice vector under the {reading} reading")
    return (lead * x[0] // 2, lead * x[1] // 2)


def interior_points(a, b, c):
    """Number of lattice points strictly inside the triangle a, b, c (Pick's theorem)."""
    area2 = abs(det((b[0] - a[0], b[1] - a[1]), (c[0] - a[0], c[1] - a[1])))
    boundary = deg((b[0] - a[0], b[1] - a[1])) + deg((c[0] - b[0], c[1] - b[1])) + deg((a[0] - c[0], a[1] - c[1]))
    return (area2 - boundary + 2) // 2


def split_primitive(v):
    """u, w with u + w = v, det(u, w) = +-1, both shorter than v."""
    a, b = v
    if deg(v) != 1:
        raise NoDecomposition(v)
    # extended Euclid: x*b - y*a = 1
    g, s, t = _ext_gcd(b, -a)
    x0, y0 = s, t
    best = None
    norm_v = a * a + b * b
    for sign in (1, -1):
        bx, by = sign * x0, sign * y0
        # shift by multiples of v to land near v/2
        k0 = -round(((bx - a / 2) * a + (by - b / 2) * b) / norm_v) if norm_v else 0
        for k in range(k0 - 2, k0 + 3):
            u = (bx + k * a, by + k * b)
            w = (a - u[0], b - u[1])
            if u == (0, 0) or w == (0, 0):
                continue
            n = max(u[0] ** 2 + u[1] ** 2, w[0] ** 2 + w[1] ** 2)
            if n < norm_v and (best is None or n < best[0]):
                best = (n, u, w)
    if best is None:
        raise NoDecomposition(v)
    return best[1], best[2]


def _ext_gcd(a, b):
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


def n_coeff(k, env):
    """n_k = [t1^k][t2^k](hbar^(-k/2) - hbar^(k/2)) / k with [x] = x^(1/2) - x^(-1/2)."""
    T1, T2, H = env.T1, env.T2, env.hbar_half
    return (T1 ** k - T1 ** (-k)) * (T2 ** k - T2 ** (-k)) * (H ** (-k) - H ** k) / k


def K_scalar(v, env, r=1):
    """K_(x, y) on a rank-r Fock tensor product: hbar^(-r x / 2)."""
    return env.hbar_half ** (-r * v[0]) if v[0] * r else env.one()


# --------------------------------------------------------------------------
# generators



@dataclass(frozen=True)
class Options:
    """Switches for readings that the relations arbitrate."""

    alpha_reading: str = "symmetric"
    sign_reading: str = "m-parity"
    triangle: str = "standard"
    # exponent of K_alpha in the triangle relation
    k_power: int = -1
    heis_norm: str = "t2"


class Generators:
    """Memoized generators e_v on one Fock space F(a) truncated at degree L."""

    def __init__(self, L, env, A=None, basis=None, options=Options()):
        self.L = L
        self.env = env
        self.A = env.A[0] if A is None else A
        self.basis = basis or build_macdonald(L, "plain-inv", env, check=False)
        self.options = options
        self._cache = {}

    def K(self, v):
        return K_scalar(v, self.env)

    def n(self, k):
        return n_coeff(k, self.env)

    def e(self, v):
        v = tuple(v)
        if v not in self._cache:
            self._cache[v] = self._build(v)
        return self._cache[v]

    def _build(self, v):
        a, b = v
        if v == (0, 0):
            raise ValueError("e_(0,0) is not a generator")
        if b == 0:
            return heis_op(a, self.L, self.env, self.options.heis_norm) if abs(a) <= self.L else GradedOperator.zero(1, self.L)
        if a == 0:
            return diag_op(b, self.L, self.env, self.basis, self.A, self.options.sign_reading)
        m = deg(v)
        if m == 1:
            u, w = split_primitive(v)
            eu, ew = self.e(u), self.e(w)
            return eu.commutator(ew).scale(1 / self.triangle_factor(u, w))
        v0 = (a // m, b // m)
        psis = [self.psi(v0, k) for k in range(1, m + 1)]
        return log_coefficient(psis, m).scale(1 / self.n(m))

    def psi(self, v0, k):
        """Psi_{k v0} for primitive v0."""
        if k == 1:
            return self.e(v0).scale(self.n(1))
        v = (k * v0[0], k * v0[1])
        u, _ = split_primitive(v0)
        a = u
        b = (v[0] - a[0], v[1] - a[1])
        if self.options.triangle == "standard":
            assert interior_points((0, 0), a, v) == 0
        else:
            assert interior_points((0, 0), a, b) == 0, "the triangle (0, a, b) has interior points"
        return self.e(a).commutator(self.e(b)).scale(self.n(1) / self.triangle_factor(a, b))

    def triangle_factor(self, a, b):
        """eps_{a,b} K_alpha(a,b)^(+-1): [e_a, e_b] = factor * Psi_{a+b} / n_1."""
        K = self.K(alpha(a, b, self.options.alpha_reading))
        return eps_pair(a, b) * K ** self.options.k_power

    def psi_series(self, v0, m):
        """Psi_{k v0}, k = 0..m, from the exponential of sum n_j e_{j v0} z^j."""
        X = {j: self.e((j * v0[0], j * v0[1])).scale(self.n(j)) for j in range(1, m + 1)}
        return exp_series(X, m, self.L, self.env.one())

    def alpha_slope(self, w, k):
        """alpha^w_k = e_(d(w) k, n(w) k); ``w`` is a Fraction or the string ``"inf"``."""
        dw, nw = slope_parts(w)
        return self.e((dw * k, nw * k))


def log_coefficient(psis, m):
    """Coefficient of z^m in log(1 + sum_k psis[k-1] z^k)."""
    # powers X^j restricted to z-degree <= m, as lists indexed by z-degree
    X = {k: psis[k - 1] for k in range(1, m + 1)}
    total = None
    power = dict(X)
    for j in range(1, m + 1):
        term = power.get(m)
        if term is not None:
            term = term.scale(Fraction((-1) ** (j + 1), j))
            total = term if total is None else total + term
        new = {}
        for d1, A in power.items():
            for d2, B in X.items():
                if d1 + d2 <= m:
                    prod = A @ B
                    new[d1 + d2] = new[d1 + d2] + prod if d1 + d2 in new else prod
        power = new
    return total


def exp_series(X, m, L, one):
    """Coefficients 0..m of exp(sum_j X[j] z^j) for operators X[j]."""
    out = [GradedOperator.identity(1, L, one)] + [None] * m
    power = {0: out[0]}
    for j in range(1, m + 1):
        new = {}
        for d1, A in power.items():
            for d2, B in X.items():
                if d1 + d2 <= m:
                    prod = A @ B
                    new[d1 + d2] = new[d1 + d2] + prod if d1 + d2 in new else prod
        power = new
        for d, A in power.items():
            term = A.scale(Fraction(1, _fact(j)))
            out[d] = term if out[d] is None else out[d] + term
    return [o if o is not None else GradedOperator.zero(1, L) for o in out]


def _fact(j):
    out = 1
    for i in range(2, j + 1):
        out *= i
    return out


def slope_parts(w):
    """(d(w), n(w)) with d(inf)=0, n(inf)=1."""
    if w == "inf":
        return 0, 1
    w = Fraction(w)
    return w.denominator, w.numerator


def exact_e(v, N, env, A=None, options=Options(), start_margin=2):
    """e_v restricted to degrees <= N, with the working truncation grown until exact."""
    margin = start_margin
    while True:
        g = Generators(N + margin, env, A, options=options)
        op = g.e(v)
        if op.valid >= N:
            return op.truncate(N), g
        margin += 2
        if margin > 4 * N + 12:
            raise TruncationTooSmall(v)


# --------------------------------------------------------------------------
# relation checks


def collinear_relation(gens, a, b, N):
    """[e_a, e_b] = delta_{a+b} (K_a^-1 - K_a)/n_deg(a), on inputs of degree <= N."""
    lhs = gens.e(a).commutator(gens.e(b))
    if a[0] + b[0] == 0 and a[1] + b[1] == 0:
        K = gens.K(a)
        scalar = (1 / K - K) / gens.n(deg(a))
        rhs = GradedOperator.identity(1, gens.L, gens.env.one()).scale(scalar)
    else:
        rhs = GradedOperator.zero(1, gens.L)
    if lhs.valid < N:
        raise TruncationTooSmall((a, b, lhs.valid))
    return lhs.equals(rhs, N), lhs.first_difference(rhs, N)


def triangle_closure(gens, N):
    """[e_(1,1), e_(-1,0)] = eps K_alpha e_(0,1) with e_(0,1) the diagonal generator."""
    a, b = (1, 1), (-1, 0)
    lhs = gens.e(a).commutator(gens.e(b))
    rhs = gens.e((0, 1)).scale(gens.triangle_factor(a, b))
    return lhs.equals(rhs, N), lhs.first_difference(rhs, N)


def relation_suite(N, env, bound=3, options=Options(), report=None, pairs="opposite", triangles=0):
    """Collinear relations for vectors with components in [-bound, bound] plus triangle closure."""
    report = report or Report()
    margin = 2
    while True:
        gens = Generators(N + margin, env, options=options)
        vectors = [(i, j) for i in range(-bound, bound + 1) for j in range(-bound, bound + 1) if (i, j) != (0, 0)]
        low = min(gens.e(v).commutator(gens.e((-v[0], -v[1]))).valid for v in vectors)
        if low >= N:
            break
        margin += 2
    done = set()
    for v in vectors:
        partners = [(-v[0], -v[1])]
        if pairs == "all":
            partners = [w for w in vectors if det(v, w) == 0 and w != v]
        for w in partners:
            key = frozenset((v, w))
            if key in done:
                continue
            done.add(key)
            ok, diff = collinear_relation(gens, v, w, N)
            report.add(f"collinear e{v} e{w}", ok, diff and {"block": diff[0], "entry": diff[1:3]})
    ok, diff = triangle_closure(gens, N)
    report.add("triangle closure [e(1,1), e(-1,0)] vs e(0,1)", ok, diff and {"block": diff[0]})
    if triangles:
        triangle_suite(gens, N, triangles, report)
    report.result["working_truncation"] = gens.L
    return report


def triangle_suite(gens, N, bound, report):
    """[e_a, e_b] = eps K Psi_{a+b} / n_1 for deg(a)=1 and empty triangles, components in [-bound, bound]."""
    vecs = [(i, j) for i in range(-bound, bound + 1) for j in range(-bound, bound + 1) if (i, j) != (0, 0)]
    for a in vecs:
        if deg(a) != 1:
            continue
        for b in vecs:
            c = (a[0] + b[0], a[1] + b[1])
            if det(a, b) == 0 or max(abs(c[0]), abs(c[1])) > bound:
                continue
            corner = c if gens.options.triangle == "standard" else b
            if interior_points((0, 0), a, corner):
                continue
            m = deg(c)
            v0 = (c[0] // m, c[1] // m)
            psi = gens.psi_series(v0, m)[m]
            lhs = gens.e(a).commutator(gens.e(b))
            rhs = psi.scale(gens.triangle_factor(a, b) / gens.n(1))
            upto = min(N, lhs.valid, rhs.valid)
            ok = lhs.equals(rhs, upto)
            report.add(f"triangle e{a} e{b}", ok, {"exact_upto": upto})
    return report


# --------------------------------------------------------------------------
# tensor products of Fock spaces


def embed(op, i, R):
    """``op`` acting on factor ``i`` of an R-fold tensor product of rank-1 Fock spaces."""
    one = _unit(op)
    out = None
    for j in range(R):
        f = op if j == i else GradedOperator.identity(1, op.L, one)
        out = f if out is None else out.kron(f)
    return out


def _unit(op):
    for m in op.blocks.values():
        return m.flat[0] ** 0 if not isinstance(m.flat[0], int) else Fraction(1)
    return Fraction(1)


def tensor(ops):
    out = ops[0]
    for op in ops[1:]:
        out = out.kron(op)
    return out


def hbar_Omega(left, right, R, L, env, power=1):
    """hbar^(power (n_L r_R + n_R r_L)/2) on factor groups ``left``, ``right`` of R rank-1 factors."""
    rl, rr = len(left), len(right)

    def fn(sector):
        nl = sum(sector[i] for i in left)
        nr = sum(sector[i] for i in right)
        return env.hbar_half ** (power * (nl * rr + nr * rl))

    return GradedOperator.diagonal(R, L, fn)


def z_degree(group, R, L, z):
    """z^d on the factors in ``group``: multiplication by z^(total degree of the group)."""
    return GradedOperator.diagonal(R, L, lambda s: z ** sum(s[i] for i in group))


class TensorEvaluation:
    """Generators on each factor of F(a_1) x ... x F(a_R), truncated at total degree N.

    ``A`` lists the square roots of the evaluation parameters.  Single-factor
    generators are computed at a larger working truncation and cut back to N
    once they are exact there.
    """

    def __init__(self, N, env, A, options=Options(), margin=None, k_twist=-1):
        self.N = N
        self.env = env
        self.R = len(A)
        self.options = options
        # power of central_K used for the K's inside the slope-0 coproduct
        self.k_twist = k_twist
        L = N + (margin if margin is not None else N + 2)
        basis = build_macdonald(L, "plain-inv", env, check=False)
        self.gens = [Generators(L, env, a, basis, options) for a in A]
        self._cache = {}

    @property
    def one(self):
        return self.env.one()

    def e(self, i, v):
        """e_v on factor i alone (rank-1 operator truncated at N)."""
        key = (i, tuple(v))
        if key not in self._cache:
            if abs(v[0]) > self.N:
                op = GradedOperator.zero(1, self.N)
            else:
                op = self.gens[i].e(v)
                if op.valid < self.N:
                    raise TruncationTooSmall((v, op.valid))
                op = op.truncate(self.N)
            self._cache[key] = op
        return self._cache[key]

    def identity(self, R=None):
        return GradedOperator.identity(R or self.R, self.N, self.one)

    def word(self, word):
        """Evaluate a tensor word: one symbol per factor, see :class:`TensorWord`."""
        ops = []
        for i, sym in enumerate(word):
            ops.append(self.symbol(i, sym))
        return tensor(ops)

    def symbol(self, i, sym):
        kind = sym[0]
        if kind == "1":
            return GradedOperator.identity(1, self.N, self.one)
        if kind == "K":
            return GradedOperator.identity(1, self.N, self.one).scale(
                central_K(1, self.env) ** (self.k_twist * sym[1]))
        if kind == "a":
            # slope-0 alpha_k = e_(k, 0)
            return self.e(i, (sym[1], 0))
        if kind == "e":
            return self.e(i, sym[1])
        raise ValueError(sym)

    def evaluate(self, words):
        """Sum of coefficient * word over a TensorWord."""
        total = GradedOperator.zero(self.R, self.N)
        for w, c in words.terms.items():
            total = total + self.word(w).scale(c)
        return total


class TensorWord:
    """Formal linear combination of pure tensors of slope-0 symbols.

    Symbols: ("1",), ("K", p) for K^p, ("a", k) for alpha_k.  Coefficients
    are field elements.
    """

    def __init__(self, terms):
        self.terms = {}
        for w, c in terms.items():
            if c != 0:
                self.terms[w] = self.terms.get(w, 0) + c

    @classmethod
    def single(cls, sym, one=Fraction(1)):
        return cls({(sym,): one})

    def coproduct(self, pos):
        """Apply Delta to tensor position ``pos``."""
        out = {}
        for w, c in self.terms.items():
            for pair, coef in _delta(w[pos]):
                nw = w[:pos] + pair + w[pos + 1:]
                out[nw] = out.get(nw, 0) + c * coef
        return TensorWord(out)

    def __mul__(self, other):
        """Tensor (outer) product of two words."""
        return TensorWord({a + b: ca * cb for a, ca in self.terms.items() for b, cb in other.terms.items()})


def _delta(sym):
    kind = sym[0]
    if kind == "1":
        return [((("1",), ("1",)), 1)]
    if kind == "K":
        return [((sym, sym), 1)]
    if kind == "a":
        k = sym[1]
        if k < 0:
            return [((sym, ("1",)), 1), ((("K", k), sym), 1)]
        return [((sym, ("K", k)), 1), ((("1",), sym), 1)]
    raise ValueError(f"no coproduct for {sym}")


def coproduct_slope0(sym, r, order="right"):
    """r-fold coproduct of a slope-0 symbol; ``order`` picks which factor is split each time."""
    w = TensorWord.single(sym)
    for j in range(r - 1):
        w = w.coproduct(j if order == "right" else 0)
    return w


def coassociativity(sym, N, env, A):
    """(Delta x 1) Delta and (1 x Delta) Delta of ``sym`` as matrices on a triple product."""
    ev = TensorEvaluation(N, env, A)
    left = ev.evaluate(TensorWord.single(sym).coproduct(0).coproduct(0))
    right = ev.evaluate(TensorWord.single(sym).coproduct(0).coproduct(1))
    return left.equals(right, N), left, right


# --------------------------------------------------------------------------
# R-matrices


def _group_alpha(ev, k, group):
    """Delta^(len(group)) (alpha_k) placed on the factors in ``group``."""
    w = coproduct_slope0(("a", k), len(group))
    out = GradedOperator.zero(ev.R, ev.N)
    for word, c in w.terms.items():
        full = [("1",)] * ev.R
        for pos, i in enumerate(group):
            full[i] = word[pos]
        out = out + ev.word(tuple(full)).scale(c)
    return out


def slope0_pairing(ev, k, left, right):
    """Delta(alpha_-k) on ``left`` times Delta(alpha_k) on ``right``."""
    return _group_alpha(ev, -k, left) @ _group_alpha(ev, k, right)


def wall_R(w, sign, ev, left=(0,), right=(1,)):
    """R^{sign}_w = exp(sum_k n_k alpha^w_{sign k} x alpha^w_{-sign k}) on the tensor space of ``ev``.

    Slope 0 supports factor groups through the coproduct; other finite
    slopes need single factors.
    """
    dw, nw = slope_parts(w)
    if dw == 0:
        raise ValueError("use r_infinity for the vertical slope")
    if nw and (len(left) != 1 or len(right) != 1):
        raise NotImplementedError("no coproduct for nonzero slopes")
    X = GradedOperator.zero(ev.R, ev.N)
    k = 1
    while dw * k <= ev.N:
        j = sign * k
        if nw == 0:
            term = _group_alpha(ev, j, left) @ _group_alpha(ev, -j, right)
        else:
            term = (embed(ev.e(left[0], (dw * j, nw * j)), left[0], ev.R)
                    @ embed(ev.e(right[0], (-dw * j, -nw * j)), right[0], ev.R))
        X = X + term.scale(n_coeff(k, ev.env))
        k += 1
    return X.exp_nilpotent(ev.one)


def _vertical_G(nu, u1, u2):
    """Bracketed part of the slope-infinity eigenvalue as a function of (t1^m, t2^m) = (u1, u2)."""
    ell = len(nu)
    s = 0
    for i, part in enumerate(nu):
        s = s + u1 ** (part - 1) * u2 ** i
    s = s + u2 ** ell / (u1 * (1 - u2))
    return s / (1 - u1)


def vertical_character(mu, nu):
    """Laurent character chi with R_infinity(mu, nu) / R_infinity(0, 0) = prod (1 - x m)^c over chi = sum c m.

    Here x = a_1 / a_2 and the pairing is sum_k n_k e_(0,-k) x e_(0,k).
    """
    S = Env.symbolic(1)
    t1, t2 = S.t1, S.t2
    pref = (S.T1 - 1 / S.T1) * (S.T2 - 1 / S.T2) * (1 / S.hbar_half - S.hbar_half)

    def phi(m, n):
        return pref * _vertical_G(m, 1 / t1, 1 / t2) * _vertical_G(n, t1, t2)

    return laurent_terms(phi(mu, nu) - phi((), ()))


def r_infinity(ev, left=0, right=1):
    """R_infinity = exp(sum_k n_k e_(0,-k) x e_(0,k)) on two rank-1 factors, normalized to 1 on the vacuum.

    The sum over k is infinite; it is resummed through :func:`vertical_character`.
    """
    env = ev.env
    x = (ev.gens[left].A / ev.gens[right].A) ** 2
    basis = ev.gens[0].basis
    cache = {}

    def value(mu, nu):
        if (mu, nu) not in cache:
            out = env.one()
            for exps, c in vertical_character(mu, nu).items():
                out = out * (1 - x * env.mono(exps)) ** int(c)
            cache[(mu, nu)] = out
        return cache[(mu, nu)]

    blocks = {}
    for sector in sectors(ev.R, ev.N):
        labels = sector_basis(sector)
        D = np.empty((len(labels), len(labels)), dtype=object)
        D.fill(env.zero())
        for j, lab in enumerate(labels):
            D[j, j] = value(lab[left], lab[right])
        P = _kron_all([basis.P[n] for n in sector])
        Pinv = _kron_all([basis.Pinv[n] for n in sector])
        blocks[(sector, sector)] = P.dot(D).dot(Pinv)
    return GradedOperator(ev.R, ev.N, blocks)


def _kron_all(mats):
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


# --------------------------------------------------------------------------
# E(z) and B(z)


def E_op(ev, z, left=(0,), right=(1,), power=1):
    """exp(power * sum_k n_k c_k/(1 - z^-k c_k) Delta(alpha_-k) x Delta(alpha_k)), c_k = (K^-k x K^k).

    The factor groups ``left`` and ``right`` carry Fock ranks len(left), len(right).
    """
    env = ev.env
    r1, r2 = len(left), len(right)
    X = GradedOperator.zero(ev.R, ev.N)
    for k in range(1, ev.N + 1):
        c = env.hbar_half ** (k * (r1 - r2)) if r1 != r2 else env.one()
        f = n_coeff(k, env) * c / (1 - z ** (-k) * c)
        X = X + slope0_pairing(ev, k, left, right).scale(power * f)
    return X.exp_nilpotent(ev.one)


def E_series(ev, D, left=(0,), right=(1,)):
    """Taylor coefficients of E(z) at z = 0 through order D, using 1/(1 - z^-k c) = -sum_j z^kj c^-j."""
    env = ev.env
    r1, r2 = len(left), len(right)
    zero = GradedOperator.zero(ev.R, ev.N)
    X = [zero] * (D + 1)
    for k in range(1, min(ev.N, D) + 1):
        c = env.hbar_half ** (k * (r1 - r2))
        P = slope0_pairing(ev, k, left, right)
        j = 1
        while k * j <= D:
            X[k * j] = X[k * j] + P.scale(-n_coeff(k, env) * c ** (1 - j))
            j += 1
    X = OpSeries(X)
    result = OpSeries([ev.identity()] + [zero] * D)
    term = result
    for m in range(1, D + 1):
        term = (term @ X).map(lambda op, m=m: op.scale(Fraction(1, m)))
        result = result + term
    return result


def wall_R0_inverse(ev, left=(0,), right=(1,)):
    """(R^-_0)^-1 = exp(-sum_k n_k Delta(alpha_-k) x Delta(alpha_k))."""
    X = GradedOperator.zero(ev.R, ev.N)
    for k in range(1, ev.N + 1):
        X = X + slope0_pairing(ev, k, left, right).scale(-n_coeff(k, ev.env))
    return X.exp_nilpotent(ev.one)


def farey_slopes(lo, hi, N, include_lo, include_hi):
    """Fractions w with denominator <= N in the interval between lo and hi, sorted increasingly."""
    out = set()
    for d in range(1, N + 1):
        for n in range(lo * d, hi * d + 1):
            w = Fraction(n, d)
            if (w > lo or (include_lo and w == lo)) and (w < hi or (include_hi and w == hi)):
                out.add(w)
    return sorted(out)


@dataclass(frozen=True)
class BConventions:
    """Readings of B(z) arbitrated by the classical capped vertex.

    ``window`` is one of "[-1,0)" (as written), "(-1,0]", "(0,1]", "[0,1)";
    ``sign`` multiplies the exponent; ``order`` is "decreasing" (leftmost
    factor has the largest slope) or "increasing"; ``q_power`` is the sign of
    the q exponent in the pole 1 - z^(-kd) q^(kn) hbar^(...).
    """

    window: str = "(-1,0]"
    sign: int = -1
    order: str = "decreasing"
    q_power: int = -1


WINDOWS = {
    "[-1,0)": (-1, 0, True, False),
    "(-1,0]": (-1, 0, False, True),
    "(0,1]": (0, 1, False, True),
    "[0,1)": (0, 1, True, False),
}


def B_series(ev, D, r=1, conventions=BConventions()):
    """z-series of B(z) on a rank-1 Fock space truncated at ev.N, orders 0..D."""
    lo, hi, ilo, ihi = WINDOWS[conventions.window]
    slopes = farey_slopes(lo, hi, ev.N, ilo, ihi)
    if conventions.order == "decreasing":
        slopes = slopes[::-1]
    out = None
    for w in slopes:
        f = _B_factor(ev, w, D, r, conventions.sign, conventions.q_power)
        out = f if out is None else out @ f
    if out is None:
        out = OpSeries([ev.identity()] + [GradedOperator.zero(1, ev.N)] * D)
    return out


def _B_coefficient(env, w, k, D, r, sign, q_power=-1):
    """Series of sign * n_k h/(1 - z^-kd q^(+-kn) h), h = hbar^(-k r d/2), expanded at z = 0."""
    dw, nw = slope_parts(w)
    h = env.hbar_half ** (-k * r * dw)
    c = env.q ** (q_power * k * nw) * h
    s = [env.zero()] * (D + 1)
    j = 1
    while k * dw * j <= D:
        s[k * dw * j] = -sign * n_coeff(k, env) * h * c ** (-j)
        j += 1
    return s


def _B_factor(ev, w, D, r, sign, q_power=-1):
    """Normal-ordered exponential for one slope."""
    env = ev.env
    dw, nw = slope_parts(w)
    kmax = ev.N // dw
    f = {k: _B_coefficient(env, w, k, D, r, sign, q_power) for k in range(1, kmax + 1)}
    total = OpSeries([ev.identity()] + [GradedOperator.zero(1, ev.N)] * D)
    for mult in _multiplicities(kmax, ev.N, dw):
        if not any(mult.values()):
            continue
        create = ev.identity()
        annihilate = ev.identity()
        scalar = [env.one()] + [env.zero()] * D
        for k, m in mult.items():
            for _ in range(m):
                create = create @ ev.e(0, (-dw * k, -nw * k))
                annihilate = annihilate @ ev.e(0, (dw * k, nw * k))
                scalar = _series_mul(scalar, f[k], D)
            scalar = [x / _fact(m) for x in scalar]
        op = create @ annihilate
        total = total + OpSeries([op.scale(c) for c in scalar])
    return total


def _multiplicities(kmax, N, dw):
    """All {k: m_k} with sum_k dw k m_k <= N."""
    out = [{}]
    for k in range(1, kmax + 1):
        new = []
        for base in out:
            used = sum(dw * kk * m for kk, m in base.items())
            m = 0
            while used + dw * k * m <= N:
                nb = dict(base)
                nb[k] = m
                new.append(nb)
                m += 1
        out = new
    return out


def _series_mul(a, b, D):
    out = [a[0] * 0] * (D + 1)
    for i in range(D + 1):
        if a[i] == 0:
            continue
        for j in range(D + 1 - i):
            if b[j] != 0:
                out[i + j] = out[i + j] + a[i] * b[j]
    return out


# --------------------------------------------------------------------------
# a -> 0 limits and the wall identities


def shifted_evaluation(N, env, left_rank=1, right_rank=1, margin=None):
    """TensorEvaluation with the right group's parameters multiplied by a (symbolic Aaux)."""
    aux = RatFun.var("Aaux")
    env = replace(env, aux=aux)
    A = tuple(env.A[:left_rank]) + tuple(x * aux for x in env.A[left_rank:left_rank + right_rank])
    return TensorEvaluation(N, env, A, margin=margin)


def a_limit(op, var="Aaux"):
    """Entrywise a -> 0 limit of ``op``; returns (limit, None) or (None, witness of a pole)."""
    blocks = {}
    for key, m in op.blocks.items():
        lim = np.empty(m.shape, dtype=object)
        lim.fill(Fraction(0))
        for idx, x in np.ndenumerate(m):
            if is_zero(x):
                continue
            e, g = lowest_a_term(x, var)
            if e < 0:
                return None, {"block": key, "entry": idx, "a_power": Fraction(int(e), 2)}
            if e == 0:
                lim[idx] = g
        blocks[key] = lim
    return GradedOperator(op.rank, op.L, blocks), None


def depends_on(op, var="Aaux"):
    """True when some entry of ``op`` involves ``var``."""
    for m in op.blocks.values():
        for x in m.flat:
            if isinstance(x, RatFun) and not x.is_zero():
                e, g = lowest_a_term(x, var)
                if e != 0 or not is_zero(x - g):
                    return True
    return False


def relevant_slopes(N, bound=2):
    """Nonzero finite slopes in [-bound, bound] whose generators act on an N-truncation."""
    return [w for w in farey_slopes(-bound, bound, N, True, True) if w != 0]


def wall_limit_report(N, env, bound=2, report=None):
    """Wall limits on F(a_1) x F(a_2 a) as a -> 0."""
    report = report or Report()
    ev = shifted_evaluation(N, env)
    R0 = wall_R(0, -1, ev)
    report.add(f"R^-_0 independent of a (N={N})", not depends_on(R0))
    diag = GradedOperator(R0.rank, R0.L, {k: m for k, m in R0.blocks.items() if k[0] == k[1]})
    report.add(f"R^-_0 lower triangular with unit diagonal (N={N})",
               min(R0.triangular_shifts(0)) >= 0 and diag.equals(ev.identity()))
    ident = ev.identity()
    bad_stated, bad_swapped = [], []
    limits = report.result.setdefault(f"wall_limits_N{N}", {})
    for w in relevant_slopes(N, bound):
        for sign in (1, -1):
            lim, pole = a_limit(wall_R(w, sign, ev))
            is_one = lim is not None and lim.equals(ident)
            name = f"R^{'+' if sign > 0 else '-'}_{w}"
            limits[name] = {"limit_is_identity": is_one, "pole": pole}
            if not is_one:
                (bad_stated if (sign < 0) == (w > 0) else bad_swapped).append(
                    f"{name}: " + ("pole" if pole else "limit is not 1"))
    report.add(f"R^-_w(0) = 1 for w > 0 and R^+_w(0) = 1 for w < 0 (N={N})", not bad_stated,
               {"failing": bad_stated} if bad_stated else None)
    report.add(f"R^+_w(0) = 1 for w > 0 and R^-_w(0) = 1 for w < 0 (N={N})", not bad_swapped,
               {"failing": bad_swapped} if bad_swapped else None)
    lim, pole = a_limit(r_infinity(ev))
    target = hbar_Omega((0,), (1,), 2, N, ev.env, power=-1)
    ok = lim is not None and lim.equals(target)
    report.add(f"R_inf(0) = hbar^-Omega (N={N})", ok,
               {"pole": pole, "observed_hbar_power": _diagonal_hbar_powers(lim, ev.env) if lim else None})
    return report


def _diagonal_hbar_powers(op, env, span=24):
    """Per-sector hbar^(1/2) power of a scalar-diagonal operator, or None for a non-monomial block."""
    H = env.hbar_half
    out = {}
    for (o, i), m in sorted(op.blocks.items()):
        if o != i:
            return None
        x = m[0, 0]
        p = next((p for p in range(-span, span + 1) if is_zero(x - H ** p)), None)
        out[str(o)] = None if p is None else Fraction(p, 2)
    return out


def univqkz_check(ev, z, left=(0,), right=(1,)):
    """z_(1)^-d E z_(1)^d == (R^-_0)^-1 hbar^Omega E hbar^-Omega on the groups ``left``, ``right``."""
    R, N = ev.R, ev.N
    E = E_op(ev, z, left, right)
    lhs = z_degree(left, R, N, 1 / z) @ E @ z_degree(left, R, N, z)
    rhs = (wall_R0_inverse(ev, left, right) @ hbar_Omega(left, right, R, N, ev.env) @ E
           @ hbar_Omega(left, right, R, N, ev.env, -1))
    return lhs.equals(rhs), lhs.first_difference(rhs)


def conjugation_check(ev, k, left=(0,), right=(1,), reading="derived"):
    """hbar^Omega (Delta alpha_-k x Delta alpha_k) hbar^-Omega against a K-twist of the same pairing.

    ``reading="derived"`` compares with hbar^(k (r2 - r1)/2), i.e. K^k x K^-k;
    ``"literal"`` with K^-k x K^k.
    """
    R, N, env = ev.R, ev.N, ev.env
    X = slope0_pairing(ev, k, left, right)
    lhs = hbar_Omega(left, right, R, N, env) @ X @ hbar_Omega(left, right, R, N, env, -1)
    r1, r2 = len(left), len(right)
    p = k * (r2 - r1) if reading == "derived" else k * (r1 - r2)
    return lhs.equals(X.scale(env.hbar_half ** p))


def triple_conjugation_check(ev, k):
    """hbar^-Omega_13 (alpha_-k x alpha_k x 1) hbar^Omega_13 == (hbar^(r3/2))^-d_(1) (...) (hbar^(r3/2))^d_(1)."""
    R, N, env = ev.R, ev.N, ev.env
    if R != 3:
        raise ValueError("needs a triple product")
    X = slope0_pairing(ev, k, (0,), (1,))
    lhs = hbar_Omega((0,), (2,), R, N, env, -1) @ X @ hbar_Omega((0,), (2,), R, N, env)
    h = env.hbar_half
    rhs = z_degree((0,), R, N, 1 / h) @ X @ z_degree((0,), R, N, h)
    return lhs.equals(rhs)
