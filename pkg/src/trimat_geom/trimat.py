"""The ring T_n(q) of lower triangular n x n matrices over GF(q).

Entries on and below the diagonal are stored row-major:
(1,1), (2,1), (2,2), (3,1), (3,2), (3,3), ...  The integer code of a matrix
is sum(entries[i] * q**i); every canonical submodule code depends on this
order, so it must never change.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ContextMismatch, ContextTooLarge, DimensionMismatch, DimensionUnsupported
from .gf import FieldTable

MIN_N, MAX_N = 2, 4
# Dense multiplication tables beyond this many ring elements get too big.
MAX_RING_SIZE = 4096


def tri_size(n: int) -> int:
    return n * (n + 1) // 2


def pos(i: int, j: int) -> int:
    """Storage slot of entry (i, j), 1-based, j <= i."""
    return i * (i - 1) // 2 + (j - 1)


def diagonal_slots(n: int) -> list[int]:
    return [pos(i, i) for i in range(1, n + 1)]


@dataclass(frozen=True)
class TriMatrix:
    field: FieldTable
    n: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if len(self.entries) != tri_size(self.n):
            raise DimensionMismatch(f"expected {tri_size(self.n)} entries for n={self.n}")
        if any(not 0 <= e < self.field.q for e in self.entries):
            raise ValueError(f"entries must be field indices in 0..{self.field.q - 1}")

    @classmethod
    def from_rows(cls, field: FieldTable, rows) -> "TriMatrix":
        """Accept full square rows ``[[1,0],[2,1]]`` or triangle rows ``[[1],[2,1]]``."""
        n = len(rows)
        entries = []
        for i, row in enumerate(rows, start=1):
            if len(row) not in (i, n):
                raise DimensionMismatch(f"row {i} has {len(row)} entries")
            if len(row) == n and any(row[j] for j in range(i, n)):
                raise ValueError("entries above the diagonal must be zero")
            entries.extend(int(v) for v in row[:i])
        return cls(field, n, tuple(entries))

    @classmethod
    def from_code(cls, field: FieldTable, n: int, code: int) -> "TriMatrix":
        q = field.q
        entries = []
        for _ in range(tri_size(n)):
            code, r = divmod(code, q)
            entries.append(r)
        if code:
            raise ValueError("code out of range")
        return cls(field, n, tuple(entries))

    @classmethod
    def identity(cls, field: FieldTable, n: int) -> "TriMatrix":
        e = [0] * tri_size(n)
        for s in diagonal_slots(n):
            e[s] = 1
        return cls(field, n, tuple(e))

    @classmethod
    def zero(cls, field: FieldTable, n: int) -> "TriMatrix":
        return cls(field, n, (0,) * tri_size(n))

    @property
    def code(self) -> int:
        q = self.field.q
        return sum(e * q**i for i, e in enumerate(self.entries))

    def __getitem__(self, ij):
        i, j = ij
        if j > i:
            return 0
        return self.entries[pos(i, j)]

    def to_rows(self) -> list[list[int]]:
        return [[self[i, j] for j in range(1, self.n + 1)] for i in range(1, self.n + 1)]

    def __str__(self):
        return str(self.to_rows()).replace(" ", "")

    def __add__(self, other):
        return mat_add(self, other)

    def __mul__(self, other):
        return mat_mul(self, other)


def _check_same(a: TriMatrix, b: TriMatrix):
    if a.n != b.n or a.field != b.field:
        raise DimensionMismatch(f"cannot combine T_{a.n}({a.field.q}) with T_{b.n}({b.field.q})")


def mat_add(a: TriMatrix, b: TriMatrix) -> TriMatrix:
    _check_same(a, b)
    add = a.field.add
    return TriMatrix(a.field, a.n, tuple(int(add[x, y]) for x, y in zip(a.entries, b.entries)))


def mat_mul(a: TriMatrix, b: TriMatrix) -> TriMatrix:
    _check_same(a, b)
    f, n = a.field, a.n
    out = []
    for i in range(1, n + 1):
        for j in range(1, i + 1):
            acc = 0
            for k in range(j, i + 1):
                acc = int(f.add[acc, f.mul[a[i, k], b[k, j]]])
            out.append(acc)
    return TriMatrix(f, n, tuple(out))


def is_unit(a: TriMatrix) -> bool:
    return all(a.entries[s] != 0 for s in diagonal_slots(a.n))


@dataclass(frozen=True, eq=False)
class RingContext:
    """All q^{S_n} elements of T_n(q) with precomputed tables.

    ``entries[c]`` decodes code c; ``mul[a, b]`` is the code of a*b.
    ``units`` and ``radical`` are sorted code arrays.
    """

    field: FieldTable
    n: int
    size: int
    entries: np.ndarray
    mul: np.ndarray
    units: np.ndarray
    radical: np.ndarray
    identity: int

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def s(self) -> int:
        return tri_size(self.n)

    def __repr__(self):
        return f"RingContext(n={self.n}, q={self.q})"

    def matrix(self, code: int) -> TriMatrix:
        return TriMatrix(self.field, self.n, tuple(int(v) for v in self.entries[code]))

    def code_of(self, m: TriMatrix) -> int:
        if m.n != self.n or m.field != self.field:
            raise ContextMismatch(f"{m} does not belong to T_{self.n}({self.q})")
        return m.code

    def add_codes(self, a, b):
        """Vectorised addition on code arrays."""
        e = self.field.add[self.entries[a], self.entries[b]]
        return e @ self._weights()

    def _weights(self):
        return self.field.q ** np.arange(self.s, dtype=np.int64)


def _mul_table(field: FieldTable, n: int, entries: np.ndarray) -> np.ndarray:
    size = len(entries)
    weights = field.q ** np.arange(tri_size(n), dtype=np.int64)
    table = np.zeros((size, size), dtype=np.int32)
    chunk = max(1, 2**20 // size)
    for lo in range(0, size, chunk):
        a = entries[lo : lo + chunk]
        code = np.zeros((len(a), size), dtype=np.int64)
        for i in range(1, n + 1):
            for j in range(1, i + 1):
                acc = np.zeros((len(a), size), dtype=np.int64)
                for k in range(j, i + 1):
                    term = field.mul[a[:, pos(i, k)][:, None], entries[:, pos(k, j)][None, :]]
                    acc = field.add[acc, term]
                code += acc * weights[pos(i, j)]
        table[lo : lo + chunk] = code
    return table


@lru_cache(maxsize=8)
def _context(n: int, field: FieldTable) -> RingContext:
    s = tri_size(n)
    size = field.q**s
    if size > MAX_RING_SIZE:
        raise ContextTooLarge(f"T_{n}({field.q}) has {size} elements; the dense engine supports at most {MAX_RING_SIZE}")
    codes = np.arange(size, dtype=np.int64)
    entries = np.stack([(codes // field.q**i) % field.q for i in range(s)], axis=1)
    diag = entries[:, diagonal_slots(n)]
    units = codes[(diag != 0).all(axis=1)]
    radical = codes[(diag == 0).all(axis=1)]
    mul = _mul_table(field, n, entries)
    for arr in (entries, mul, units, radical):
        arr.setflags(write=False)
    return RingContext(
        field=field,
        n=n,
        size=size,
        entries=entries,
        mul=mul,
        units=units,
        radical=radical,
        identity=TriMatrix.identity(field, n).code,
    )


def ring_context(n: int, field: FieldTable) -> RingContext:
    if not MIN_N <= n <= MAX_N:
        raise DimensionUnsupported(f"n={n} is outside the supported range {MIN_N}..{MAX_N}")
    return _context(int(n), field)
