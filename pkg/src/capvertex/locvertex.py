"""Localization data at quasimap fixed points and the bare descendent vertex.

Characters are finite sums of monomials with integer multiplicities.  A
monomial is an exponent vector over ``exactalg.VARS``; because the
variables are square roots, a genuine torus weight such as ``a_1 t1`` has
even exponents ``(2, 0, 0, 2, ...)``.

The tautological bundle at a fixed point is ``V = sum_box phi(box) q^(-d_box)``
and the virtual tangent space is

    T^vir = S(lam, 0) + (S(lam, d) - S(lam, 0)) / (1 - q)

which is a Laurent polynomial without constant term.  The alternative
orientation ``V = sum phi q^d`` divided by ``q - 1`` is available through
:class:`Conventions`; it leaves a constant term at every nonzero degree.
"""
import random
from dataclasses import dataclass
from fractions import Fraction

from .combinat import (DegreeData, MultiPartition, Partition, ShapeMismatch,
                       check_box, enumerate_degree_data, enumerate_multipartitions)
from .exactalg import (NVARS, VARS, DenominatorVanishes, RatFun, SeriesZ, lowest_a_term,
                       ratfun_from_factors, var_index)
from .reports import Report

_T1, _T2, _Q, _AUX = (var_index(v) for v in ("T1", "T2", "Q", "Aaux"))
ZERO = (0,) * NVARS


class ConstantTermPresent(ValueError):
    pass


class NonDivisible(ArithmeticError):
    pass


class NonzeroLeadingExponent(ArithmeticError):
    pass


@dataclass(frozen=True)
class Conventions:
    """``q_orientation=-1``: V uses q^(-d), divisor 1-q.  ``+1``: q^d with divisor q-1.

    ``tau_at_fiber`` evaluates descendents at the Chern roots of V; otherwise
    at ``phi q^d`` regardless of orientation.
    """

    q_orientation: int = -1
    tau_at_fiber: bool = True


DEFAULT = Conventions()


def mono(**exps):
    """Monomial from keyword exponents in square-root units, e.g. ``mono(T1=2)`` is t1."""
    v = [0] * NVARS
    for k, e in exps.items():
        v[var_index(k)] = e
    return tuple(v)


def mono_mul(a, b):
    return tuple(x + y for x, y in zip(a, b))


def mono_pow(a, k):
    return tuple(x * k for x in a)


class Character:
    """Finite formal sum of monomials with integer multiplicities."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            items = terms.items() if isinstance(terms, dict) else ((t, 1) for t in terms)
            for e, m in items:
                e = tuple(e)
                clean[e] = clean.get(e, 0) + m
        self.terms = {e: m for e, m in clean.items() if m}

    def __add__(self, other):
        out = dict(self.terms)
        for e, m in other.terms.items():
            out[e] = out.get(e, 0) + m
        return Character(out)

    def __neg__(self):
        return Character({e: -m for e, m in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return Character({e: m * other for e, m in self.terms.items()})
        out = {}
        for e1, m1 in self.terms.items():
            for e2, m2 in other.terms.items():
                e = mono_mul(e1, e2)
                out[e] = out.get(e, 0) + m1 * m2
        return Character(out)

    __rmul__ = __mul__

    def dual(self):
        return Character({mono_pow(e, -1): m for e, m in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, Character) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __len__(self):
        return len(self.terms)

    def constant_term(self):
        return self.terms.get(ZERO, 0)

    def dimension(self):
        return sum(self.terms.values())

    def to_text(self):
        if not self.terms:
            return "0"
        parts = []
        for e, m in sorted(self.terms.items(), reverse=True):
            factors = [f"{VARS[i]}^{x}" if x != 1 else VARS[i] for i, x in enumerate(e) if x]
            body = "*".join(factors) or "1"
            parts.append(body if m == 1 else f"{m}*{body}")
        return " + ".join(parts)

    def __repr__(self):
        return f"Character({self.to_text()})"


# --------------------------------------------------------------------------
# weights at fixed points


def framing_weight(i, split=None):
    """a_{i+1}, times the splitting parameter a when ``i >= split``."""
    e = [0] * NVARS
    e[var_index(f"A{i + 1}")] = 2
    if split is not None and i >= split:
        e[_AUX] = 2
    return tuple(e)


def box_weight(lam, box, split=None, offset=0):
    """phi(box) = a_{n(box)} t1^x t2^y."""
    check_box(lam, box)
    w = list(framing_weight(box.comp + offset, split))
    w[_T1] += 2 * box.x
    w[_T2] += 2 * box.y
    return tuple(w)


def framing_character(r, split=None, offset=0):
    return Character([framing_weight(i + offset, split) for i in range(r)])


def _check_shape(lam, d):
    if len(d) != len(lam):
        raise ShapeMismatch((lam, d))
    for comp, filling in zip(lam, d):
        if tuple(len(row) for row in filling) != tuple(comp):
            raise ShapeMismatch((lam, d))


def fiber_weights(lam, d, split=None, offset=0, orientation=-1):
    """The monomials phi(box) q^(orientation * d_box), one per box."""
    _check_shape(lam, d)
    out = []
    for box in lam.boxes():
        w = list(box_weight(lam, box, split, offset))
        w[_Q] += 2 * orientation * d[box]
        out.append(tuple(w))
    return out


def taut_character(lam, d, split=None, offset=0, conventions=DEFAULT):
    return Character(fiber_weights(lam, d, split, offset, conventions.q_orientation))


_T1INV = Character([mono(T1=-2)])
_T2INV = Character([mono(T2=-2)])
_HINV = Character([mono(T1=-2, T2=-2)])
_ONE = Character([ZERO])


def s_character(lam, d, split=None, offset=0, conventions=DEFAULT):
    """S = W* V + W V* hbar^-1 - V* V (1 - t1^-1)(1 - t2^-1)."""
    W = framing_character(lam.rank, split, offset)
    V = taut_character(lam, d, split, offset, conventions)
    return W.dual() * V + W * V.dual() * _HINV - V.dual() * V * (_ONE - _T1INV) * (_ONE - _T2INV)


def _divide(c, orientation):
    """Exact division of a character by (1 - q) (orientation -1) or (q - 1) (orientation +1)."""
    groups = {}
    for e, m in c.terms.items():
        rest = list(e)
        k = rest[_Q]
        rest[_Q] = 0
        if k % 2:
            raise NonDivisible("odd power of q^(1/2)")
        groups.setdefault(tuple(rest), {})[k // 2] = m
    out = {}
    for rest, poly in groups.items():
        if sum(poly.values()) != 0:
            raise NonDivisible(f"not divisible by (1-q): {poly}")
        lo, hi = min(poly), max(poly)
        acc = 0
        # f(q) = (1 - q) g(q) gives g_k = sum_{j <= k} f_j
        for k in range(lo, hi):
            acc += poly.get(k, 0)
            if acc:
                e = list(rest)
                e[_Q] = 2 * k
                out[tuple(e)] = acc if orientation < 0 else -acc
    return Character(out)


def tvir_character(lam, d, split=None, offset=0, conventions=DEFAULT):
    s0 = s_character(lam, DegreeData.zero(lam), split, offset, conventions)
    if d.total == 0:
        return s0
    sd = s_character(lam, d, split, offset, conventions)
    return s0 + _divide(sd - s0, conventions.q_orientation)


def tangent_character(lam, split=None, offset=0):
    return s_character(lam, DegreeData.zero(lam), split, offset)


# --------------------------------------------------------------------------
# evaluation


def _eval_monomial(exps, point, keep):
    """Split a monomial into (Fraction coefficient, remaining symbolic exponents)."""
    if point is None:
        return Fraction(1), exps
    coeff = Fraction(1)
    rest = list(exps)
    for i, e in enumerate(exps):
        if e and VARS[i] not in keep:
            coeff *= point[VARS[i]] ** e
            rest[i] = 0
    return coeff, tuple(rest)


def monomial_value(exps, point=None, keep=()):
    c, rest = _eval_monomial(exps, point, keep)
    if any(rest):
        return RatFun.monomial(rest, c)
    return c if point is not None else RatFun(c)


def roof_hat(c, point=None, keep=()):
    """Product of a(w)^m over the terms, with a(w) = 1/(w^(1/2) - w^(-1/2)).

    Exact rational function when ``point`` is None; a Fraction when every
    variable is specialized; otherwise a RatFun in the ``keep`` variables.
    """
    if c.constant_term():
        raise ConstantTermPresent(c.to_text())
    value = Fraction(1)
    nums, dens = [], []
    for e, m in c.terms.items():
        if any(x % 2 for x in e):
            raise ValueError("character weights must be genuine (even exponents)")
        half = tuple(x // 2 for x in e)
        coeff, rest = _eval_monomial(half, point, keep)
        if not any(rest):
            denom = coeff * coeff - 1
            if denom == 0:
                raise DenominatorVanishes(f"roof of a weight equal to 1 at {point}")
            value *= (coeff / denom) ** m
            continue
        top = {rest: coeff}
        bottom = {tuple(2 * x for x in rest): coeff * coeff, ZERO: Fraction(-1)}
        if m > 0:
            nums += [top] * m
            dens += [bottom] * m
        else:
            nums += [bottom] * (-m)
            dens += [top] * (-m)
    if not nums and not dens:
        return value if point is not None and not keep else RatFun(value)
    return ratfun_from_factors(nums, dens) * value


# --------------------------------------------------------------------------
# descendents


class Descendent:
    """Expression tree over symmetric generators.

    Nodes are ``("1",)``, ``("p", k)``, ``("e", k)``, ``("s", partition)``,
    ``("neg", x)``, ``("add", x, y, ...)`` and ``("mul", x, y, ...)``;
    sums and products are kept flat.
    """

    __slots__ = ("node",)

    def __init__(self, node):
        self.node = node

    @classmethod
    def one(cls):
        return cls(("1",))

    @classmethod
    def p(cls, k):
        if k == 0:
            raise ValueError("p[0] is not a generator")
        return cls(("p", int(k)))

    @classmethod
    def e(cls, k):
        if k < 0:
            raise ValueError("e[k] needs k >= 0")
        return cls(("e", int(k)))

    @classmethod
    def s(cls, parts):
        return cls(("s", Partition(parts)))

    def __add__(self, other):
        return Descendent(("add",) + _flat("add", self.node) + _flat("add", other.node))

    def __mul__(self, other):
        return Descendent(("mul",) + _flat("mul", self.node) + _flat("mul", other.node))

    def __neg__(self):
        return Descendent(("neg", self.node))

    def __eq__(self, other):
        return isinstance(other, Descendent) and self.node == other.node

    def __hash__(self):
        return hash(self.node)

    def __repr__(self):
        return f"Descendent({self.to_text()!r})"

    def to_text(self):
        return _print(self.node)

    def is_polynomial(self):
        return _is_poly(self.node)

    def evaluate(self, xs, one=None):
        """Value at the variables ``xs`` (field elements)."""
        if one is None:
            one = xs[0] ** 0 if xs else Fraction(1)
        return _eval(self.node, list(xs), one)


def _flat(kind, node):
    return node[1:] if node[0] == kind else (node,)


def _print(node):
    kind = node[0]
    if kind == "1":
        return "1"
    if kind in ("p", "e"):
        return f"{kind}[{node[1]}]"
    if kind == "s":
        return "s[[" + ",".join(map(str, node[1])) + "]]"
    if kind == "neg":
        inner = node[1]
        body = _print(inner)
        return "-" + (f"({body})" if inner[0] in ("add", "mul") else body)
    if kind == "mul":
        return "*".join(f"({_print(c)})" if c[0] == "add" else _print(c) for c in node[1:])
    return "+".join(_print(c) for c in node[1:])


def _is_poly(node):
    kind = node[0]
    if kind == "p":
        return node[1] > 0
    if kind in ("1", "e", "s"):
        return True
    return all(_is_poly(c) for c in node[1:])


def _power_sum(xs, k, one):
    out = one * 0
    for x in xs:
        out = out + x ** k
    return out


def _elementary(xs, k, one):
    es = [one] + [one * 0] * k
    for x in xs:
        for j in range(k, 0, -1):
            es[j] = es[j] + es[j - 1] * x
    return es[k]


def _complete(xs, k, one):
    hs = [one] + [one * 0] * k
    for x in xs:
        for j in range(1, k + 1):
            hs[j] = hs[j] + hs[j - 1] * x
    return hs[k]


def _schur(xs, lam, one):
    """Jacobi-Trudi determinant in complete homogeneous functions."""
    n = len(lam)
    if n == 0:
        return one
    top = lam[0] + n
    hs = [_complete(xs, k, one) for k in range(top + 1)]

    def h(k):
        return hs[k] if 0 <= k <= top else one * 0

    mat = [[h(lam[i] - i + j) for j in range(n)] for i in range(n)]
    return _det(mat, one)


def _det(mat, one):
    n = len(mat)
    if n == 1:
        return mat[0][0]
    total = one * 0
    for j in range(n):
        if mat[0][j] == 0:
            continue
        minor = [row[:j] + row[j + 1:] for row in mat[1:]]
        term = mat[0][j] * _det(minor, one)
        total = total + term if j % 2 == 0 else total - term
    return total


def _eval(node, xs, one):
    kind = node[0]
    if kind == "1":
        return one
    if kind == "p":
        return _power_sum(xs, node[1], one)
    if kind == "e":
        return _elementary(xs, node[1], one)
    if kind == "s":
        return _schur(xs, node[1], one)
    if kind == "neg":
        return -_eval(node[1], xs, one)
    vals = [_eval(c, xs, one) for c in node[1:]]
    out = vals[0]
    for v in vals[1:]:
        out = out + v if kind == "add" else out * v
    return out


def descendent_eval(tau, lam, d, point=None, keep=(), split=None, offset=0, conventions=DEFAULT):
    """tau evaluated at the Chern roots x_box of the tautological bundle."""
    orient = conventions.q_orientation if conventions.tau_at_fiber else 1
    xs = [monomial_value(w, point, keep) for w in fiber_weights(lam, d, split, offset, orient)]
    symbolic = point is None or bool(keep)
    one = RatFun(1) if symbolic else Fraction(1)
    xs = [RatFun(x) if symbolic and not isinstance(x, RatFun) else x for x in xs]
    return tau.evaluate(xs, one)


# --------------------------------------------------------------------------
# bare vertex


def vertex_term(lam, d, tau, r, point=None, keep=(), split=None, offset=0, conventions=DEFAULT):
    """Localization contribution of one degree datum (without the z power)."""
    tv = tvir_character(lam, d, split, offset, conventions)
    k = d.total
    val = roof_hat(tv, point, keep) * descendent_eval(tau, lam, d, point, keep, split, offset, conventions)
    twist = monomial_value(mono(Q=-r * k), point, keep)
    return val * twist * (-1) ** (k * r)


def bare_vertex(lam, tau, D, r=None, point=None, keep=(), split=None, offset=0,
                conventions=DEFAULT, shuffle_seed=None):
    """Coefficients z^0..z^D of the bare descendent vertex at the fixed point ``lam``."""
    if isinstance(lam, Partition):
        lam = MultiPartition([lam])
    if tau is None:
        tau = Descendent.one()
    r = lam.rank if r is None else r
    coeffs = []
    for k in range(D + 1):
        data = enumerate_degree_data(lam, k)
        if shuffle_seed is not None:
            random.Random(shuffle_seed + k).shuffle(data)
        total = RatFun(0) if point is None or keep else Fraction(0)
        for d in data:
            total = total + vertex_term(lam, d, tau, r, point, keep, split, offset, conventions)
        coeffs.append(total)
    return SeriesZ(coeffs, D)


# --------------------------------------------------------------------------
# factorization check


def facver_check(tau, n, r1, r2, D, point=None, conventions=DEFAULT, report=None):
    """Compare lim_{a->0} V^{(r1+r2)} with the product of shifted lower-rank vertices.

    Symbolic when ``point`` is None; otherwise everything but the splitting
    parameter is specialized and the limit is still taken exactly.
    """
    report = report or Report()
    keep = ("Aaux",) if point is not None else ()
    r = r1 + r2
    hbar_half = mono(T1=1, T2=1)
    for lam in enumerate_multipartitions(n, r):
        lam1, lam2 = MultiPartition(lam[:r1]), MultiPartition(lam[r1:])
        lhs = bare_vertex(lam, tau, D, r, point, keep, split=r1, conventions=conventions)
        cross = normal_roof(lam, r1, point, keep)
        v1 = bare_vertex(lam1, tau, D, r1, point, conventions=conventions)
        v2 = bare_vertex(lam2, Descendent.one(), D, r2, point, offset=r1, conventions=conventions)
        s1 = monomial_value(mono_pow(hbar_half, r2), point)
        s2 = monomial_value(mono_mul(mono_pow(hbar_half, -r1), mono(Q=-2 * r1)), point)
        for k in range(D + 1):
            rhs = 0
            for k1 in range(k + 1):
                rhs = rhs + v1[k1] * s1 ** k1 * v2[k - k1] * s2 ** (k - k1)
            name = f"facver lam={lam!r} z^{k} tau={tau.to_text()}"
            if lhs[k] == 0:
                report.add(name, rhs == 0, {"lhs": 0, "rhs": rhs})
                continue
            e, g = lowest_a_term(RatFun(lhs[k]) / cross)
            if e < 0:
                report.add(name, False, {"leading_exponent": e})
                continue
            g0 = _at_zero(g) if e == 0 else 0
            report.add(name, g0 == RatFun(rhs) if isinstance(rhs, RatFun) else g0 == rhs,
                       {"limit": g0, "rhs": rhs})
    return report


def normal_roof(lam, r1, point=None, keep=()):
    """Roof of the tangent weights at ``lam`` that mix the two framing blocks.

    These come from S(lam, 0) and do not depend on the degree, so they are a
    common factor of every z-coefficient; dividing by them puts the vertex in
    the basis of fixed points of the two smaller moduli spaces.
    """
    lam1, lam2 = MultiPartition(lam[:r1]), MultiPartition(lam[r1:])
    normal = tangent_character(lam, split=r1) - tangent_character(lam1) - tangent_character(lam2, offset=r1)
    return RatFun(roof_hat(normal, point, keep))


def _at_zero(g):
    """Value at Aaux = 0 of a function regular there, free of Aaux at leading order."""
    if "Aaux" in g.variables():
        raise NonzeroLeadingExponent("leading coefficient still depends on Aaux")
    if g.is_constant():
        return g.constant_value()
    return g
