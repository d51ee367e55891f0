"""Partitions, multipartitions, boxes and plane-partition degree data.

Conventions: a box ``(x, y)`` of a partition sits in row ``y`` and column
``x`` (both 0-based), so row ``y`` has ``parts[y]`` boxes.  Degree data are
stored row-major per component.
"""
import json
from functools import lru_cache
from typing import NamedTuple


class BoxOutsideShape(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


class Partition(tuple):
    """Weakly decreasing tuple of positive parts."""

    def __new__(cls, parts=()):
        parts = tuple(int(p) for p in parts)
        if any(p <= 0 for p in parts) or any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"not a partition: {parts}")
        return super().__new__(cls, parts)

    @property
    def size(self):
        return sum(self)

    def boxes(self):
        for y, row in enumerate(self):
            for x in range(row):
                yield x, y

    def conjugate(self):
        if not self:
            return Partition()
        return Partition(sum(1 for p in self if p > j) for j in range(self[0]))

    def dominates(self, other):
        """Dominance order on partitions of the same size."""
        s = t = 0
        for i in range(max(len(self), len(other))):
            s += self[i] if i < len(self) else 0
            t += other[i] if i < len(other) else 0
            if s < t:
                return False
        return True

    def __repr__(self):
        return "[" + ",".join(map(str, self)) + "]"


class MultiPartition(tuple):
    """An r-tuple of partitions."""

    def __new__(cls, comps):
        return super().__new__(cls, tuple(c if isinstance(c, Partition) else Partition(c) for c in comps))

    @property
    def size(self):
        return sum(c.size for c in self)

    @property
    def rank(self):
        return len(self)

    def boxes(self):
        for i, comp in enumerate(self):
            for x, y in comp.boxes():
                yield Box(i, x, y)

    def __repr__(self):
        return "[" + ",".join(repr(c) for c in self) + "]"


class Box(NamedTuple):
    comp: int
    x: int
    y: int


def check_box(lam, box):
    if not 0 <= box.comp < len(lam):
        raise BoxOutsideShape(box)
    part = lam[box.comp]
    if not (0 <= box.y < len(part) and 0 <= box.x < part[box.y]):
        raise BoxOutsideShape(box)


class DegreeData(tuple):
    """Per-component row-major fillings of a multipartition shape."""

    def __new__(cls, shape, fillings):
        fillings = tuple(tuple(tuple(int(v) for v in row) for row in comp) for comp in fillings)
        obj = super().__new__(cls, fillings)
        obj.shape = shape
        return obj

    @classmethod
    def zero(cls, shape):
        return cls(shape, [[[0] * row for row in comp] for comp in shape])

    @property
    def total(self):
        return sum(v for comp in self for row in comp for v in row)

    def __getitem__(self, key):
        if isinstance(key, Box):
            return tuple.__getitem__(self, key.comp)[key.y][key.x]
        return tuple.__getitem__(self, key)

    def items(self):
        for box in self.shape.boxes():
            yield box, self[box]

    def __repr__(self):
        return repr([[list(row) for row in comp] for comp in self])


# Degree data grow weakly away from the corner box (reverse plane partitions).
# Setting this to False gives ordinary plane partitions instead.
INCREASING = True


def is_monotone(filling, increasing=None):
    """Monotonicity along rows and columns of one component."""
    inc = INCREASING if increasing is None else increasing
    for y, row in enumerate(filling):
        for x, v in enumerate(row):
            nbrs = []
            if x + 1 < len(row):
                nbrs.append(row[x + 1])
            if y + 1 < len(filling) and x < len(filling[y + 1]):
                nbrs.append(filling[y + 1][x])
            if any((w < v) if inc else (w > v) for w in nbrs):
                return False
    return True


@lru_cache(maxsize=None)
def _partitions(n, maxpart):
    if n == 0:
        return ((),)
    out = []
    for first in range(min(n, maxpart), 0, -1):
        for rest in _partitions(n - first, first):
            out.append((first,) + rest)
    return tuple(out)


def enumerate_partitions(n):
    """All partitions of n, in reverse lexicographic order."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return [Partition(p) for p in _partitions(n, n)]


def enumerate_multipartitions(n, r):
    """All r-tuples of partitions with total size n."""
    if n < 0 or r < 1:
        raise ValueError("need n >= 0 and r >= 1")
    if r == 1:
        return [MultiPartition([p]) for p in enumerate_partitions(n)]
    out = []
    for k in range(n, -1, -1):
        for first in enumerate_partitions(k):
            for rest in enumerate_multipartitions(n - k, r - 1):
                out.append(MultiPartition((first,) + tuple(rest)))
    return out


def _fillings(shape, d):
    """Monotone fillings of a single partition with total d, row by row."""
    rows = list(shape)

    def rec(y, remaining, above):
        if y == len(rows):
            if remaining == 0:
                yield ()
            return
        for row in _row_fillings(rows[y], remaining, above):
            for rest in rec(y + 1, remaining - sum(row), row):
                yield (row,) + rest

    yield from rec(0, d, None)


def _row_fillings(length, remaining, above):
    def rec(x, rem, prev):
        if x == length:
            yield ()
            return
        if INCREASING:
            lo = max(prev, above[x]) if above is not None else prev
            hi = rem // (length - x)
            values = range(lo, hi + 1)
        else:
            hi = min(rem, prev)
            if above is not None:
                hi = min(hi, above[x])
            values = range(hi, -1, -1)
        for v in values:
            for rest in rec(x + 1, rem - v, v):
                yield (v,) + rest

    yield from rec(0, remaining, 0 if INCREASING else remaining)


def enumerate_degree_data(lam, d):
    """All stable degree data of total ``d`` on the multipartition ``lam``."""
    if d < 0:
        raise ValueError("d must be non-negative")
    if isinstance(lam, Partition):
        lam = MultiPartition([lam])
    out = []

    def rec(i, remaining, acc):
        if i == len(lam):
            if remaining == 0:
                out.append(DegreeData(lam, acc))
            return
        later = sum(c.size for c in lam[i + 1:])
        for k in range(remaining, -1, -1):
            if k and not lam[i]:
                continue
            if remaining - k and not later:
                continue
            for filling in _fillings(lam[i], k):
                rec(i + 1, remaining - k, acc + [filling])

    rec(0, d, [])
    return out


def parse_partition(text):
    """Parse ``[3,1,1]``."""
    parts = json.loads(text)
    return Partition(parts)


def parse_multipartition(text):
    """Parse ``[[3,1],[2]]``."""
    return MultiPartition(json.loads(text))
