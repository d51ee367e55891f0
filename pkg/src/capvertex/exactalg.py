"""Exact arithmetic kernel.

Everything here is exact: rational numbers are :class:`fractions.Fraction`,
multivariate rational functions are quotients of ``fmpq_mpoly`` polynomials
reduced by their gcd.  The variables are *square roots* of the equivariant
parameters, so that half-integer powers of t1, t2, q, a_i are ordinary
monomials::

    T1 = t1^(1/2), T2 = t2^(1/2), Q = q^(1/2), Ai = a_i^(1/2), Aaux = a^(1/2)

and hbar^(1/2) is identically ``T1*T2``.  A further variable ``Z`` is
available for operators that are rational in the spectral parameter z.
"""
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import flint
import numpy as np

MAX_RANK = 4
VARS = ("T1", "T2", "Q") + tuple(f"A{i}" for i in range(1, MAX_RANK + 1)) + ("Aaux", "Z")
NVARS = len(VARS)
_INDEX = {name: i for i, name in enumerate(VARS)}
_CTX = flint.fmpq_mpoly_ctx.get(VARS, "lex")


class DenominatorVanishes(ZeroDivisionError):
    pass


class ZeroInput(ValueError):
    pass


class InsufficientOrder(ValueError):
    pass


def var_index(name):
    return _INDEX[name]


def _to_fmpq(x):
    if isinstance(x, Fraction):
        return flint.fmpq(x.numerator, x.denominator)
    return flint.fmpq(x)


def _from_fmpq(x):
    return Fraction(int(x.p), int(x.q))


def _split_laurent(exps):
    """Split a Laurent exponent vector into (positive part, negated negative part)."""
    pos = tuple(e if e > 0 else 0 for e in exps)
    neg = tuple(-e if e < 0 else 0 for e in exps)
    return pos, neg


class RatFun:
    """Reduced quotient of two polynomials in the square-root variables.

    The denominator is monic with respect to the lex order on ``VARS`` and
    coprime to the numerator, so structural equality is mathematical
    equality.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, *, _reduced=False):
        if isinstance(num, RatFun):
            num, den0 = num.num, num.den
            den = den0 if den is None else den0 * den
        elif not isinstance(num, flint.fmpq_mpoly):
            num = _CTX.constant(_to_fmpq(num))
        if den is None:
            den = _CTX.constant(1)
        elif not isinstance(den, flint.fmpq_mpoly):
            den = _CTX.constant(_to_fmpq(den))
        if not _reduced:
            if den == 0:
                raise ZeroDivisionError("RatFun with zero denominator")
            if num == 0:
                den = _CTX.constant(1)
            else:
                g = num.gcd(den)
                if g != 1:
                    num = num / g
                    den = den / g
                lc = den.leading_coefficient()
                if lc != 1:
                    num = num / lc
                    den = den / lc
        self.num = num
        self.den = den

    # construction -------------------------------------------------------
    @classmethod
    def var(cls, name):
        return cls(_CTX.gens()[_INDEX[name]], _reduced=True)

    @classmethod
    def monomial(cls, exps, coeff=1):
        """Laurent monomial from a full exponent vector (length ``NVARS``) or a dict."""
        if isinstance(exps, dict):
            vec = [0] * NVARS
            for k, v in exps.items():
                vec[_INDEX[k]] = v
            exps = vec
        pos, neg = _split_laurent(exps)
        num = _CTX.from_dict({pos: _to_fmpq(coeff)})
        den = _CTX.from_dict({neg: 1})
        return cls(num, den, _reduced=coeff != 0)

    @classmethod
    def from_laurent(cls, terms):
        """Build from ``{exponent vector: coefficient}`` with possibly negative exponents."""
        if not terms:
            return cls(0)
        shift = [min(0, min(e[i] for e in terms)) for i in range(NVARS)]
        data = {}
        for e, c in terms.items():
            if c:
                data[tuple(ei - si for ei, si in zip(e, shift))] = _to_fmpq(c)
        num = _CTX.from_dict(data) if data else _CTX.constant(0)
        den = _CTX.from_dict({tuple(-s for s in shift): 1})
        return cls(num, den)

    # arithmetic ---------------------------------------------------------
    @staticmethod
    def _coerce(other):
        if isinstance(other, RatFun):
            return other
        if isinstance(other, (int, Fraction)):
            return RatFun(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return RatFun(self.num + other.num, self.den)
        return RatFun(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFun(-self.num, self.den, _reduced=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.num == 0 or other.num == 0:
            return RatFun(0)
        # cross-cancel before multiplying keeps the operands small
        g1 = self.num.gcd(other.den)
        g2 = other.num.gcd(self.den)
        n = (self.num / g1) * (other.num / g2)
        d = (self.den / g2) * (other.den / g1)
        return RatFun(n, d, _reduced=False)

    __rmul__ = __mul__

    def inverse(self):
        if self.num == 0:
            raise ZeroDivisionError("inverse of zero RatFun")
        return RatFun(self.den, self.num)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        return RatFun(self.num ** k, self.den ** k, _reduced=True)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((str(self.num), str(self.den)))

    def __bool__(self):
        return self.num != 0

    def is_zero(self):
        return self.num == 0

    def __repr__(self):
        return f"RatFun({self.to_text()})"

    # inspection ---------------------------------------------------------
    def variables(self):
        used = set()
        for poly in (self.num, self.den):
            for m in poly.monoms():
                used.update(VARS[i] for i, e in enumerate(m) if e)
        return used

    def is_constant(self):
        return not self.variables()

    def constant_value(self):
        if not self.is_constant():
            raise ValueError("RatFun is not constant")
        return _from_fmpq(self.num.leading_coefficient()) / _from_fmpq(self.den.leading_coefficient())

    def to_text(self):
        n = poly_text(self.num)
        if self.den == 1:
            return n
        return f"({n})/({poly_text(self.den)})"


def poly_text(poly):
    """Canonical text: lex-ordered ``c*T1^e1*...`` terms with ``p/q`` coefficients."""
    if poly == 0:
        return "0"
    parts = []
    for exps, c in sorted(zip(poly.monoms(), poly.coeffs()), reverse=True):
        factors = [f"{VARS[i]}^{e}" if e != 1 else VARS[i] for i, e in enumerate(exps) if e]
        c = _from_fmpq(c)
        if not factors:
            parts.append(str(c))
        elif c == 1:
            parts.append("*".join(factors))
        else:
            parts.append(f"{c}*" + "*".join(factors))
    return " + ".join(parts)


class LaurentPoly:
    """Sparse Laurent polynomial ``{exponent vector: Fraction}`` over ``VARS``."""

    def __init__(self, terms=None):
        self.terms = {}
        for e, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                e = tuple(e)
                c = self.terms.get(e, 0) + c
                if c:
                    self.terms[e] = c
                else:
                    self.terms.pop(e, None)

    def __add__(self, other):
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return LaurentPoly(out)

    def __neg__(self):
        return LaurentPoly({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return LaurentPoly({e: c * other for e, c in self.terms.items()})
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return LaurentPoly(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, LaurentPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def to_ratfun(self):
        return RatFun.from_laurent(self.terms)

    def to_text(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            factors = [f"{VARS[i]}^{x}" if x != 1 else VARS[i] for i, x in enumerate(e) if x]
            parts.append("*".join([str(c)] + factors) if factors else str(c))
        return " + ".join(parts)


# --------------------------------------------------------------------------
# specialization and limits


def specialize(f, assignment):
    """Exact value of ``f`` at ``assignment`` (symbol name -> Fraction).

    Raises DenominatorVanishes when the denominator is zero at the point.
    """
    if isinstance(f, (int, Fraction)):
        return Fraction(f)
    vals = [_to_fmpq(assignment.get(name, 1)) for name in VARS]
    missing = f.variables() - set(assignment)
    if missing:
        raise KeyError(f"assignment misses {sorted(missing)}")
    d = f.den(*vals)
    if d == 0:
        raise DenominatorVanishes(f"denominator of {f.to_text()} vanishes")
    return _from_fmpq(f.num(*vals)) / _from_fmpq(d)


def _lowest_part(poly, k):
    low = None
    data = {}
    for m, c in zip(poly.monoms(), poly.coeffs()):
        if low is None or m[k] < low:
            low, data = m[k], {}
        if m[k] == low:
            mm = list(m)
            mm[k] = 0
            data[tuple(mm)] = c
    return low, _CTX.from_dict(data)


def lowest_a_term(f, var="Aaux"):
    """Leading Laurent behaviour of ``f`` as ``var -> 0``.

    Returns ``(e, g)`` with ``f = var^e * (g + O(var))`` and ``g`` free of
    ``var``.  Exponents are in square-root units of the variable.
    """
    if isinstance(f, (int, Fraction)):
        if f == 0:
            raise ZeroInput("lowest term of zero")
        return 0, RatFun(f)
    if f.is_zero():
        raise ZeroInput("lowest term of zero")
    k = _INDEX[var]
    en, n = _lowest_part(f.num, k)
    ed, d = _lowest_part(f.den, k)
    return en - ed, RatFun(n, d)


def laurent_terms(f):
    """``{exponent vector: Fraction}`` of a RatFun whose denominator is a monomial."""
    if isinstance(f, (int, Fraction)):
        return {(0,) * NVARS: Fraction(f)} if f else {}
    if len(f.den.monoms()) != 1:
        raise ValueError(f"{f.to_text()} is not a Laurent polynomial")
    (dm,), (dc,) = f.den.monoms(), f.den.coeffs()
    return {tuple(int(a - b) for a, b in zip(m, dm)): _from_fmpq(c) / _from_fmpq(dc)
            for m, c in zip(f.num.monoms(), f.num.coeffs())}


# --------------------------------------------------------------------------
# random generic points

_PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97]


def random_point(seed, names=VARS):
    """Distinct prime / prime-ratio values for each name, reproducible from ``seed``."""
    rng = random.Random(seed)
    primes = rng.sample(_PRIMES, 2 * len(names))
    point = {}
    for i, name in enumerate(names):
        p, q = primes[2 * i], primes[2 * i + 1]
        point[name] = Fraction(p, q) if rng.random() < 0.5 else Fraction(q, p)
    return point


# --------------------------------------------------------------------------
# parameter environment


@dataclass(frozen=True)
class Env:
    """Square-root equivariant parameters as field elements.

    ``A`` holds the square roots of the framing parameters a_1..a_r.  The
    elements are either RatFun (symbolic mode) or Fraction (specialized).
    """

    T1: object
    T2: object
    Q: object
    A: tuple
    point: dict = None
    aux: object = None

    @classmethod
    def symbolic(cls, r=1):
        g = {name: RatFun.var(name) for name in VARS}
        return cls(g["T1"], g["T2"], g["Q"], tuple(g[f"A{i}"] for i in range(1, r + 1)), aux=g["Aaux"])

    @classmethod
    def specialized(cls, seed, r=1):
        pt = random_point(seed, VARS)
        return cls(pt["T1"], pt["T2"], pt["Q"], tuple(pt[f"A{i}"] for i in range(1, r + 1)),
                   point=pt, aux=pt["Aaux"])

    @property
    def symbolic_mode(self):
        return isinstance(self.T1, RatFun)

    @property
    def r(self):
        return len(self.A)

    @property
    def t1(self):
        return self.T1 ** 2

    @property
    def t2(self):
        return self.T2 ** 2

    @property
    def q(self):
        return self.Q ** 2

    @property
    def hbar_half(self):
        return self.T1 * self.T2

    @property
    def hbar(self):
        return self.hbar_half ** 2

    def a(self, i):
        return self.A[i] ** 2

    def split(self, r1):
        """Substitute a_j -> a * a_j for j > r1 (square roots multiply by the aux root)."""
        A = tuple(x if i < r1 else self.aux * x for i, x in enumerate(self.A))
        return Env(self.T1, self.T2, self.Q, A, self.point, self.aux)

    def restrict(self, idx):
        """Environment seeing only the framing parameters at positions ``idx``."""
        return Env(self.T1, self.T2, self.Q, tuple(self.A[i] for i in idx), self.point, self.aux)

    def one(self):
        return RatFun(1) if self.symbolic_mode else Fraction(1)

    def zero(self):
        return RatFun(0) if self.symbolic_mode else Fraction(0)

    def mono(self, exps):
        """Evaluate a monomial given as a full exponent vector over ``VARS`` (aux and Z excluded)."""
        out = self.one()
        vals = (self.T1, self.T2, self.Q) + self.A
        for i, e in enumerate(exps[:3 + MAX_RANK]):
            if e:
                if i >= len(vals):
                    raise ValueError("monomial uses a framing parameter beyond the rank")
                out = out * vals[i] ** e
        if exps[_INDEX["Aaux"]]:
            out = out * self.aux ** exps[_INDEX["Aaux"]]
        return out


def hbar_half_power(env, k):
    """hbar^(k/2)."""
    return env.hbar_half ** k


def z_taylor(f, D, var="Z"):
    """Taylor coefficients of ``f`` in ``var`` at 0 through order D; they are free of ``var``."""
    if not isinstance(f, RatFun):
        return [f] + [Fraction(0)] * D
    k = _INDEX[var]

    def by_power(poly):
        groups = {}
        for exps, c in poly.to_dict().items():
            e = list(exps)
            p, e[k] = e[k], 0
            groups.setdefault(p, {})[tuple(e)] = c
        return {p: RatFun(_CTX.from_dict(d)) for p, d in groups.items()}

    num, den = by_power(f.num), by_power(f.den)
    if 0 not in den:
        raise DenominatorVanishes(f"{var} = 0 is a pole")
    out = []
    for d in range(D + 1):
        s = num.get(d, RatFun(0))
        for j in range(1, d + 1):
            if j in den:
                s = s - den[j] * out[d - j]
        out.append(s / den[0])
    return out


# --------------------------------------------------------------------------
# truncated power series in z


class SeriesZ:
    """Power series in z truncated after ``order`` (coefficients any field elements)."""

    def __init__(self, coeffs, order=None):
        coeffs = list(coeffs)
        if order is None:
            order = len(coeffs) - 1
        coeffs = coeffs[:order + 1]
        coeffs += [0] * (order + 1 - len(coeffs))
        self.coeffs = coeffs
        self.order = order

    def __getitem__(self, d):
        return self.coeffs[d]

    def __len__(self):
        return self.order + 1

    def __add__(self, other):
        o = min(self.order, other.order)
        return SeriesZ([a + b for a, b in zip(self.coeffs[:o + 1], other.coeffs[:o + 1])], o)

    def __sub__(self, other):
        o = min(self.order, other.order)
        return SeriesZ([a - b for a, b in zip(self.coeffs[:o + 1], other.coeffs[:o + 1])], o)

    def __mul__(self, other):
        if not isinstance(other, SeriesZ):
            return SeriesZ([c * other for c in self.coeffs], self.order)
        o = min(self.order, other.order)
        out = []
        for d in range(o + 1):
            s = 0
            for j in range(d + 1):
                s = s + self.coeffs[j] * other.coeffs[d - j]
            out.append(s)
        return SeriesZ(out, o)

    __rmul__ = __mul__

    def rescale(self, c):
        """Series of f(c z)."""
        out, p = [], 1
        for a in self.coeffs:
            out.append(a * p)
            p = p * c
        return SeriesZ(out, self.order)

    def map(self, fn):
        return SeriesZ([fn(c) for c in self.coeffs], self.order)

    def __eq__(self, other):
        return (isinstance(other, SeriesZ) and self.order == other.order
                and all(a == b for a, b in zip(self.coeffs, other.coeffs)))

    def __repr__(self):
        return f"SeriesZ({self.coeffs!r})"


# --------------------------------------------------------------------------
# Pade reconstruction


class PadeFit(NamedTuple):
    num: list
    den: list

    def evaluate_series(self, order):
        """Taylor coefficients of num/den through ``order``."""
        out = []
        for i in range(order + 1):
            s = self.num[i] if i < len(self.num) else Fraction(0)
            for j in range(1, min(i, len(self.den) - 1) + 1):
                s -= self.den[j] * out[i - j]
            out.append(s)
        return out

    def to_text(self):
        def fmt(cs):
            terms = [f"{c}*z^{i}" if i else str(c) for i, c in enumerate(cs) if c]
            return " + ".join(terms) or "0"
        return f"({fmt(self.num)})/({fmt(self.den)})"


def pade_reconstruct(coeffs, m, n):
    """Rational p/q with deg p <= m, deg q <= n, q(0)=1 matching ``coeffs`` to order m+n.

    Returns None when no such fraction exists.
    """
    s = [Fraction(c) for c in (coeffs.coeffs if isinstance(coeffs, SeriesZ) else coeffs)]
    if len(s) < m + n + 1:
        raise InsufficientOrder(f"need {m + n + 1} coefficients, have {len(s)}")

    def c(i):
        return s[i] if i >= 0 else Fraction(0)

    # rows: order i in m+1..m+n,  sum_{j=1..n} q_j s_{i-j} = -s_i
    rows = [[c(i - j) for j in range(1, n + 1)] + [-c(i)] for i in range(m + 1, m + n + 1)]
    sol = _solve_consistent(rows, n)
    if sol is None:
        return None
    den = [Fraction(1)] + sol
    num = [sum((den[j] * c(i - j) for j in range(0, min(i, n) + 1)), Fraction(0)) for i in range(m + 1)]
    fit = PadeFit(num, den)
    if fit.evaluate_series(m + n) != s[:m + n + 1]:
        return None
    while len(fit.num) > 1 and fit.num[-1] == 0:
        fit.num.pop()
    while len(fit.den) > 1 and fit.den[-1] == 0:
        fit.den.pop()
    return fit


def _solve_consistent(rows, ncols):
    """Gaussian elimination on an augmented system; free variables set to 0."""
    rows = [list(r) for r in rows]
    pivots = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pv = rows[r][col]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
    for i in range(r, len(rows)):
        if rows[i][ncols] != 0:
            return None
    sol = [Fraction(0)] * ncols
    for i, col in enumerate(pivots):
        sol[col] = rows[i][ncols]
    return sol


# --------------------------------------------------------------------------
# exact dense linear algebra on object arrays


def is_zero(x):
    return x.is_zero() if isinstance(x, RatFun) else x == 0


def zeros(n, m=None):
    out = np.empty((n, n if m is None else m), dtype=object)
    out.fill(Fraction(0))
    return out


def identity(n, one=Fraction(1)):
    out = zeros(n)
    for i in range(n):
        out[i, i] = one
    return out


def matmul(a, b):
    n, k = a.shape
    k2, m = b.shape
    assert k == k2
    out = zeros(n, m)
    for i in range(n):
        row = a[i]
        nz = [(j, row[j]) for j in range(k) if not is_zero(row[j])]
        if not nz:
            continue
        for c in range(m):
            s = 0
            for j, x in nz:
                y = b[j, c]
                if not is_zero(y):
                    s = s + x * y
            out[i, c] = s
    return out


def inverse(mat):
    """Inverse by Gauss-Jordan elimination over an exact field."""
    n = mat.shape[0]
    a = [list(mat[i]) + [Fraction(1) if i == j else Fraction(0) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((i for i in range(col, n) if not is_zero(a[i][col])), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        pv = a[col][col]
        a[col] = [x / pv for x in a[col]]
        for i in range(n):
            if i != col and not is_zero(a[i][col]):
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[col])]
    out = zeros(n)
    for i in range(n):
        for j in range(n):
            out[i, j] = a[i][n + j]
    return out


def _laurent_to_poly(terms):
    """Split ``{exps: coeff}`` into (polynomial, monomial shift) with the shift's exponents <= 0."""
    shift = tuple(min(0, min(e[i] for e in terms)) for i in range(NVARS))
    data = {}
    for e, c in terms.items():
        if c:
            data[tuple(ei - si for ei, si in zip(e, shift))] = _to_fmpq(c)
    return _CTX.from_dict(data), shift


def ratfun_from_factors(num_factors, den_factors):
    """Product of Laurent numerator factors over Laurent denominator factors, reduced once.

    Each factor is a ``{exponent vector: coefficient}`` dict.  Building the
    product from raw polynomials and normalizing at the end avoids a gcd per
    factor.
    """
    num = _CTX.constant(1)
    den = _CTX.constant(1)
    shift = [0] * NVARS
    for f in num_factors:
        p, s = _laurent_to_poly(f)
        num *= p
        shift = [a + b for a, b in zip(shift, s)]
    for f in den_factors:
        p, s = _laurent_to_poly(f)
        den *= p
        shift = [a - b for a, b in zip(shift, s)]
    pos, neg = _split_laurent(shift)
    num *= _CTX.from_dict({pos: 1})
    den *= _CTX.from_dict({neg: 1})
    return RatFun(num, den)
