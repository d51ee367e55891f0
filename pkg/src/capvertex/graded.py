"""Degree-graded block operators on truncated Fock spaces and their tensor products.

A space is a tensor product of ``rank`` Fock spaces truncated at total
degree ``L``.  Sectors are tuples ``(n_1, ..., n_rank)`` and the basis of a
sector is the product of power-sum bases.  An operator stores only its
nonzero blocks ``(sector_out, sector_in) -> matrix``.

Products of truncated operators are exact only on inputs whose
intermediate images stay inside the truncation.  Each operator carries
``valid``: the largest input total degree on which all of its blocks are
exact.
"""
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np

from .combinat import enumerate_partitions
from .exactalg import is_zero


@lru_cache(maxsize=None)
def partitions(n):
    return tuple(enumerate_partitions(n))


@lru_cache(maxsize=None)
def sectors(rank, L):
    """All degree tuples of length ``rank`` with total at most ``L``."""
    out = []
    for t in product(range(L + 1), repeat=rank):
        if sum(t) <= L:
            out.append(t)
    out.sort(key=lambda s: (sum(s), tuple(-x for x in s)))
    return tuple(out)


def sector_dim(sector):
    d = 1
    for n in sector:
        d *= len(partitions(n))
    return d


def sector_basis(sector):
    """Basis labels of a sector: tuples of partitions."""
    return list(product(*(partitions(n) for n in sector)))


def _zero_like(x):
    return x * 0


def mat_is_zero(m):
    return all(is_zero(x) for x in m.flat)


def mat_eq(a, b):
    return a.shape == b.shape and all(is_zero(x - y) for x, y in zip(a.flat, b.flat))


class GradedOperator:
    def __init__(self, rank, L, blocks=None, valid=None, shifts=None):
        self.rank = rank
        self.L = L
        self.blocks = {}
        for key, m in (blocks or {}).items():
            if not mat_is_zero(m):
                self.blocks[key] = m
        self.valid = L if valid is None else min(valid, L)
        if shifts is None:
            shifts = {sum(o) - sum(i) for (o, i) in self.blocks}
        self.shifts = frozenset(shifts)

    # constructors -------------------------------------------------------
    @classmethod
    def identity(cls, rank, L, one=Fraction(1)):
        blocks = {}
        for s in sectors(rank, L):
            n = sector_dim(s)
            m = np.empty((n, n), dtype=object)
            m.fill(_zero_like(one))
            for i in range(n):
                m[i, i] = one
            blocks[(s, s)] = m
        return cls(rank, L, blocks)

    @classmethod
    def zero(cls, rank, L):
        return cls(rank, L, {}, shifts=set())

    @classmethod
    def diagonal(cls, rank, L, fn):
        """Block-diagonal operator with ``fn(sector)`` a scalar or a list of diagonal entries."""
        blocks = {}
        for s in sectors(rank, L):
            n = sector_dim(s)
            vals = fn(s)
            if not isinstance(vals, (list, tuple)):
                vals = [vals] * n
            m = np.empty((n, n), dtype=object)
            m.fill(_zero_like(vals[0]) if n else 0)
            for i in range(n):
                m[i, i] = vals[i]
            blocks[(s, s)] = m
        return cls(rank, L, blocks)

    # arithmetic ---------------------------------------------------------
    def _check(self, other):
        if self.rank != other.rank or self.L != other.L:
            raise ValueError("operators live on different spaces")

    def __add__(self, other):
        self._check(other)
        blocks = dict(self.blocks)
        for k, m in other.blocks.items():
            blocks[k] = blocks[k] + m if k in blocks else m
        return GradedOperator(self.rank, self.L, blocks, min(self.valid, other.valid),
                              self.shifts | other.shifts)

    def __neg__(self):
        return GradedOperator(self.rank, self.L, {k: -m for k, m in self.blocks.items()},
                              self.valid, self.shifts)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return GradedOperator(self.rank, self.L, {k: m * c for k, m in self.blocks.items()},
                              self.valid, self.shifts)

    def __mul__(self, c):
        if isinstance(c, GradedOperator):
            return self @ c
        return self.scale(c)

    __rmul__ = scale

    def __matmul__(self, other):
        self._check(other)
        by_in = {}
        for (o, i), m in self.blocks.items():
            by_in.setdefault(i, []).append((o, m))
        blocks = {}
        for (mid, i), m2 in other.blocks.items():
            for o, m1 in by_in.get(mid, ()):
                prod = m1.dot(m2)
                blocks[(o, i)] = blocks[(o, i)] + prod if (o, i) in blocks else prod
        # an input of degree n leaves ``other`` in degree n + shift
        valid = min(other.valid, self.valid - max(other.shifts, default=0))
        shifts = {a + b for a in self.shifts for b in other.shifts}
        return GradedOperator(self.rank, self.L, blocks, valid, shifts)

    def commutator(self, other):
        return self @ other - other @ self

    def map_entries(self, fn):
        return GradedOperator(self.rank, self.L,
                              {k: np.vectorize(fn, otypes=[object])(m) for k, m in self.blocks.items()},
                              self.valid, self.shifts)

    # comparison ---------------------------------------------------------
    def block(self, out, inp):
        m = self.blocks.get((tuple(out), tuple(inp)))
        if m is None:
            m = np.empty((sector_dim(out), sector_dim(inp)), dtype=object)
            m.fill(Fraction(0))
        return m

    def restricted(self, upto=None):
        """Blocks with input total degree <= upto (default: the exact range)."""
        upto = self.valid if upto is None else upto
        return {k: m for k, m in self.blocks.items() if sum(k[1]) <= upto}

    def equals(self, other, upto=None):
        upto = min(self.valid, other.valid) if upto is None else upto
        a, b = self.restricted(upto), other.restricted(upto)
        for k in set(a) | set(b):
            if k in a and k in b:
                if not mat_eq(a[k], b[k]):
                    return False
            elif not mat_is_zero(a.get(k, b.get(k))):
                return False
        return True

    def is_zero(self, upto=None):
        return all(mat_is_zero(m) for m in self.restricted(upto).values())

    def first_difference(self, other, upto=None):
        """A witness ``(block key, row, col, lhs, rhs)`` for the first mismatch, or None."""
        upto = min(self.valid, other.valid) if upto is None else upto
        a, b = self.restricted(upto), other.restricted(upto)
        for k in sorted(set(a) | set(b)):
            ma = a.get(k)
            mb = b.get(k)
            if ma is None:
                ma = np.zeros_like(mb)
            if mb is None:
                mb = np.zeros_like(ma)
            for (r, c), x in np.ndenumerate(ma):
                if not is_zero(x - mb[r, c]):
                    return k, r, c, x, mb[r, c]
        return None

    def is_block_diagonal(self):
        return all(o == i for (o, i), m in self.blocks.items())

    def triangular_shifts(self, factor=0):
        """Set of k with A_(k) nonzero, k the degree change of tensor factor ``factor``."""
        return {o[factor] - i[factor] for (o, i) in self.blocks}

    # structure ----------------------------------------------------------
    def kron(self, other):
        """Tensor product of operators; the result is truncated at ``max(L)``."""
        L = max(self.L, other.L)
        rank = self.rank + other.rank
        blocks = {}
        for (o1, i1), m1 in self.blocks.items():
            for (o2, i2), m2 in other.blocks.items():
                if sum(o1) + sum(o2) <= L and sum(i1) + sum(i2) <= L:
                    blocks[(o1 + o2, i1 + i2)] = np.kron(m1, m2)
        shifts = {a + b for a in self.shifts for b in other.shifts}
        # a block is dropped only when its total output degree exceeds L
        valid = min(self.valid, other.valid, L - max(0, max(shifts, default=0)))
        return GradedOperator(rank, L, blocks, valid, shifts)

    def truncate(self, L):
        blocks = {k: m for k, m in self.blocks.items() if sum(k[0]) <= L and sum(k[1]) <= L}
        valid = min(self.valid, L - max(0, max(self.shifts, default=0)))
        return GradedOperator(self.rank, L, blocks, valid, self.shifts)

    def permute(self, perm):
        """Reorder tensor factors: new factor j is old factor ``perm[j]``."""
        blocks = {}
        for (o, i), m in self.blocks.items():
            no = tuple(o[p] for p in perm)
            ni = tuple(i[p] for p in perm)
            rows = _perm_index(o, perm)
            cols = _perm_index(i, perm)
            blocks[(no, ni)] = m[np.ix_(rows, cols)]
        return GradedOperator(self.rank, self.L, blocks, self.valid, self.shifts)

    def exp_nilpotent(self, one=None):
        """exp(X) for X nilpotent on the truncation (all blocks strictly change a grading)."""
        one = one if one is not None else _one_of(self)
        result = GradedOperator.identity(self.rank, self.L, one)
        term = result
        j = 0
        while True:
            j += 1
            term = (term @ self).scale(Fraction(1, j))
            if term.is_zero(self.L):
                break
            result = result + term
            if j > 4 * (self.L + 1):
                raise ArithmeticError("exponent is not nilpotent on the truncation")
        result.valid = self.valid
        return result

    def dense(self, upto=None):
        """Dense matrix on all sectors of total degree <= upto, with the sector order."""
        upto = self.L if upto is None else upto
        secs = [s for s in sectors(self.rank, self.L) if sum(s) <= upto]
        offs, pos = {}, 0
        for s in secs:
            offs[s] = pos
            pos += sector_dim(s)
        out = np.empty((pos, pos), dtype=object)
        out.fill(Fraction(0))
        for (o, i), m in self.blocks.items():
            if o in offs and i in offs:
                out[offs[o]:offs[o] + m.shape[0], offs[i]:offs[i] + m.shape[1]] = m
        return out, secs

    @classmethod
    def from_dense(cls, rank, L, mat, secs):
        offs, pos = {}, 0
        for s in secs:
            offs[s] = pos
            pos += sector_dim(s)
        blocks = {}
        for o in secs:
            for i in secs:
                blocks[(o, i)] = mat[offs[o]:offs[o] + sector_dim(o), offs[i]:offs[i] + sector_dim(i)]
        return cls(rank, L, blocks)

    def __repr__(self):
        return f"GradedOperator(rank={self.rank}, L={self.L}, blocks={len(self.blocks)}, valid={self.valid})"


def _one_of(op):
    for m in op.blocks.values():
        for x in m.flat:
            return x ** 0 if not isinstance(x, int) else Fraction(1)
    return Fraction(1)


@lru_cache(maxsize=None)
def _perm_index_cached(sector, perm):
    old = sector_basis(sector)
    new_sector = tuple(sector[p] for p in perm)
    index = {b: k for k, b in enumerate(old)}
    return [index[tuple(nb[perm.index(j)] for j in range(len(perm)))] for nb in sector_basis(new_sector)]


def _perm_index(sector, perm):
    return _perm_index_cached(tuple(sector), tuple(perm))


class OpSeries:
    """Truncated power series in z with GradedOperator coefficients, orders 0..D."""

    def __init__(self, coeffs):
        self.coeffs = list(coeffs)

    @property
    def D(self):
        return len(self.coeffs) - 1

    def __getitem__(self, d):
        return self.coeffs[d]

    def __add__(self, other):
        return OpSeries([a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __matmul__(self, other):
        D = min(self.D, other.D)
        out = []
        for d in range(D + 1):
            acc = None
            for j in range(d + 1):
                term = self.coeffs[j] @ other.coeffs[d - j]
                acc = term if acc is None else acc + term
            out.append(acc)
        return OpSeries(out)

    def scale_series(self, s):
        """Multiply by a scalar series given as a list of coefficients."""
        out = []
        for d in range(self.D + 1):
            acc = None
            for j in range(d + 1):
                if j < len(s) and s[j] != 0:
                    term = self.coeffs[d - j].scale(s[j])
                    acc = term if acc is None else acc + term
            out.append(acc if acc is not None else self.coeffs[d].scale(0))
        return OpSeries(out)

    def rescale(self, c):
        """Series of A(c z)."""
        return OpSeries([m.scale(c ** d) for d, m in enumerate(self.coeffs)])

    def map(self, fn):
        return OpSeries([fn(m) for m in self.coeffs])
