"""Finite fields GF(q) as exhaustive lookup tables.

Elements are indexed by the base-p value of their coefficient vector over
GF(p) (constant term is the least significant digit), so index 0 is zero and
index 1 is one. For q = p^k with k > 1 the field is GF(p)[x]/(f) with f the
lexicographically smallest monic irreducible of degree k, coefficients
compared constant-term first.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NotPrimePower, OrderTooLarge

DEFAULT_MAX_Q = 16
MAX_Q_ENV = "TRIMAT_GEOM_MAX_Q"


def max_order() -> int:
    value = os.environ.get(MAX_Q_ENV)
    if not value:
        return DEFAULT_MAX_Q
    try:
        return int(value)
    except ValueError:
        raise OrderTooLarge(f"{MAX_Q_ENV}={value!r} is not an integer") from None


def prime_power(q: int) -> tuple[int, int]:
    """Return (p, k) with q = p**k, or raise NotPrimePower."""
    if q < 2:
        raise NotPrimePower(f"q={q} is not a prime power")
    p = next(d for d in itertools.count(2) if q % d == 0)
    k, rest = 0, q
    while rest % p == 0:
        rest //= p
        k += 1
    if rest != 1:
        raise NotPrimePower(f"q={q} has at least two distinct prime factors")
    return p, k


@dataclass(frozen=True, eq=False)
class FieldTable:
    """Arithmetic tables of GF(q) over element indices 0..q-1.

    ``inv`` has length q; ``inv[0]`` is a 0 placeholder and never a true
    inverse.
    """

    q: int
    p: int
    k: int
    add: np.ndarray
    mul: np.ndarray
    neg: np.ndarray
    inv: np.ndarray
    poly: tuple[int, ...]

    def __eq__(self, other):
        if not isinstance(other, FieldTable):
            return NotImplemented
        return self.q == other.q and self.poly == other.poly

    def __hash__(self):
        return hash((self.q, self.poly))

    def __repr__(self):
        return f"FieldTable(q={self.q})"

    def sub(self, a, b):
        return self.add[a, self.neg[b]]

    def div(self, a, b):
        if b == 0:
            raise ZeroDivisionError("division by zero in GF(%d)" % self.q)
        return int(self.mul[a, self.inv[b]])

    def power(self, a: int, e: int) -> int:
        r = 1
        for _ in range(e):
            r = int(self.mul[r, a])
        return r


def _poly_mulmod(a, b, f, p):
    k = len(f) - 1
    prod = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    # f is monic of degree k; reduce from the top
    for d in range(len(prod) - 1, k - 1, -1):
        c = prod[d]
        if c:
            for i in range(k + 1):
                prod[d - k + i] = (prod[d - k + i] - c * f[i]) % p
    return prod[:k] + [0] * (k - len(prod[:k]))


def _poly_divides(d, f, p):
    """True if monic d divides f over GF(p)."""
    rem = list(f)
    dd = len(d) - 1
    for top in range(len(rem) - 1, dd - 1, -1):
        c = rem[top]
        if c:
            for i in range(dd + 1):
                rem[top - dd + i] = (rem[top - dd + i] - c * d[i]) % p
    return not any(rem[:dd])


def is_irreducible(f: tuple[int, ...], p: int) -> bool:
    """Trial division of monic f (constant term first) by monic polys."""
    k = len(f) - 1
    for deg in range(1, k // 2 + 1):
        for low in itertools.product(range(p), repeat=deg):
            if _poly_divides(list(low) + [1], list(f), p):
                return False
    return True


def smallest_irreducible(p: int, k: int) -> tuple[int, ...]:
    for low in itertools.product(range(p), repeat=k):
        f = tuple(low) + (1,)
        if is_irreducible(f, p):
            return f
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


@lru_cache(maxsize=None)
def _build(q: int) -> FieldTable:
    p, k = prime_power(q)
    if k == 1:
        idx = np.arange(q)
        add = (idx[:, None] + idx[None, :]) % q
        mul = (idx[:, None] * idx[None, :]) % q
        poly = (0, 1)
    else:
        poly = smallest_irreducible(p, k)
        digits = [[(i // p**j) % p for j in range(k)] for i in range(q)]
        weights = [p**j for j in range(k)]

        def index(vec):
            return sum(c * w for c, w in zip(vec, weights))

        add = np.array(
            [[index([(x + y) % p for x, y in zip(digits[a], digits[b])]) for b in range(q)] for a in range(q)]
        )
        mul = np.array(
            [[index(_poly_mulmod(digits[a], digits[b], poly, p)) for b in range(q)] for a in range(q)]
        )
    add = add.astype(np.int64)
    mul = mul.astype(np.int64)
    neg = np.argmin(add, axis=1).astype(np.int64)  # add[a, neg[a]] == 0
    inv = np.zeros(q, dtype=np.int64)
    inv[1:] = np.argmax(mul[1:] == 1, axis=1)
    for arr in (add, mul, neg, inv):
        arr.setflags(write=False)
    return FieldTable(q=q, p=p, k=k, add=add, mul=mul, neg=neg, inv=inv, poly=poly)


def field_make(q: int) -> FieldTable:
    """Build (or fetch the cached) arithmetic tables for GF(q)."""
    q = int(q)
    if q < 2:
        raise NotPrimePower(f"q={q} is not a prime power")
    prime_power(q)
    if q > max_order():
        raise OrderTooLarge(f"q={q} exceeds the ceiling {max_order()} (set {MAX_Q_ENV} to raise it)")
    return _build(q)


def field_elements(t: FieldTable) -> list[int]:
    return list(range(t.q))
