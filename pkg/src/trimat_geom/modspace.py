"""Pairs (X, Y) in the free left module 2T_n(q) and their cyclic submodules.

A pair code is ``code(X) * |T_n(q)| + code(Y)``.  Submodules are stored as
sorted arrays of pair codes, which makes equality, containment and hashing
cheap.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import parallel
from .errors import ContextMismatch, NotFree
from .trimat import RingContext, TriMatrix, diagonal_slots

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModPair:
    x: TriMatrix
    y: TriMatrix

    def __post_init__(self):
        if self.x.n != self.y.n or self.x.field != self.y.field:
            raise ContextMismatch("both components must live in the same ring")

    @classmethod
    def from_rows(cls, field_table, x_rows, y_rows) -> "ModPair":
        return cls(TriMatrix.from_rows(field_table, x_rows), TriMatrix.from_rows(field_table, y_rows))

    @classmethod
    def from_code(cls, ctx: RingContext, code: int) -> "ModPair":
        xc, yc = divmod(int(code), ctx.size)
        return cls(ctx.matrix(xc), ctx.matrix(yc))

    @property
    def n(self):
        return self.x.n

    @property
    def code(self) -> int:
        return self.x.code * self.x.field.q ** (self.x.n * (self.x.n + 1) // 2) + self.y.code

    def __str__(self):
        return f"({self.x}, {self.y})"


def pair_code(ctx: RingContext, g) -> int:
    if isinstance(g, ModPair):
        if g.n != ctx.n or g.x.field != ctx.field:
            raise ContextMismatch(f"pair {g} does not belong to 2T_{ctx.n}({ctx.q})")
        return g.code
    code = int(g)
    if not 0 <= code < ctx.size**2:
        raise ContextMismatch(f"pair code {code} out of range for 2T_{ctx.n}({ctx.q})")
    return code


# -- vectorised kernels on pair codes ---------------------------------------


def split(ctx: RingContext, codes):
    return np.divmod(np.asarray(codes, dtype=np.int64), ctx.size)


def left_multiples(ctx: RingContext, codes, multipliers=None):
    """Array of shape (len(multipliers), len(codes)): A * g for every A and g."""
    x, y = split(ctx, codes)
    rows = ctx.mul if multipliers is None else ctx.mul[multipliers]
    return rows[:, x].astype(np.int64) * ctx.size + rows[:, y]


def submodule_elements(ctx: RingContext, code: int) -> np.ndarray:
    x, y = divmod(int(code), ctx.size)
    return np.unique(ctx.mul[:, x].astype(np.int64) * ctx.size + ctx.mul[:, y])


def cyclic_orders(ctx: RingContext, codes) -> np.ndarray:
    """Order of T_n(q)g for each pair code g."""
    m = left_multiples(ctx, codes)
    m.sort(axis=0)
    return 1 + np.count_nonzero(np.diff(m, axis=0), axis=0)


def unimodular_mask(ctx: RingContext, codes) -> np.ndarray:
    x, y = split(ctx, codes)
    d = diagonal_slots(ctx.n)
    ex, ey = ctx.entries[x][..., d], ctx.entries[y][..., d]
    return ((ex != 0) | (ey != 0)).all(axis=-1)


def orbit_min(ctx: RingContext, codes) -> np.ndarray:
    """Smallest pair code in the unit orbit of each g."""
    return left_multiples(ctx, codes, ctx.units).min(axis=0)


# -- public operations --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Submodule:
    """A cyclic submodule T_n(q)(X, Y) as a sorted array of pair codes."""

    ctx: RingContext = field(repr=False)
    elements: np.ndarray = field(repr=False)
    canonical_code: int
    is_free: bool
    is_unimodular_generated: bool

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def is_nonunimodular_free(self) -> bool:
        return self.is_free and not self.is_unimodular_generated

    @property
    def canonical_generator(self) -> ModPair:
        return ModPair.from_code(self.ctx, self.canonical_code)

    @property
    def key(self) -> bytes:
        return self.elements.tobytes()

    def __contains__(self, g) -> bool:
        code = pair_code(self.ctx, g)
        i = np.searchsorted(self.elements, code)
        return bool(i < len(self.elements) and self.elements[i] == code)

    def __eq__(self, other):
        if not isinstance(other, Submodule):
            return NotImplemented
        return self.ctx is other.ctx and np.array_equal(self.elements, other.elements)

    def __hash__(self):
        return hash((id(self.ctx), self.key))

    def __repr__(self):
        return f"Submodule(order={self.order}, generator={self.canonical_generator})"


def generators(ctx: RingContext, elements: np.ndarray) -> np.ndarray:
    """All g in the submodule with T_n(q)g equal to it, ascending."""
    orders = np.empty(len(elements), dtype=np.int64)
    step = max(1, 2**19 // ctx.size)
    for lo in range(0, len(elements), step):
        orders[lo : lo + step] = cyclic_orders(ctx, elements[lo : lo + step])
    return elements[orders == len(elements)]


def _make_submodule(ctx, elements, canonical_code) -> Submodule:
    free = len(elements) == ctx.size
    uni = bool(free and unimodular_mask(ctx, elements).any())
    elements.setflags(write=False)
    return Submodule(ctx, elements, int(canonical_code), free, uni)


def cyclic_submodule(ctx: RingContext, g) -> Submodule:
    """T_n(q)g with its canonical (smallest-code) generator and flags."""
    code = pair_code(ctx, g)
    elements = submodule_elements(ctx, code)
    start = int(orbit_min(ctx, [code])[0])
    # a generator smaller than the unit-orbit minimum would have to sit below it
    below = elements[elements < start]
    gens = generators(ctx, below) if len(below) else below
    canonical = int(gens[0]) if len(gens) else start
    return _make_submodule(ctx, elements, canonical)


def is_free(ctx: RingContext, g) -> bool:
    """True iff A(X, Y) = (0, 0) forces A = 0."""
    x, y = divmod(pair_code(ctx, g), ctx.size)
    return int(np.count_nonzero((ctx.mul[:, x] == 0) & (ctx.mul[:, y] == 0))) == 1


def is_unimodular(g: ModPair) -> bool:
    return all(g.x.entries[s] != 0 or g.y.entries[s] != 0 for s in diagonal_slots(g.n))


def submodule_contains(a: Submodule, b: Submodule) -> bool:
    """True iff b is a subset of a."""
    if a.ctx is not b.ctx:
        raise ContextMismatch("submodules come from different rings")
    if b.order > a.order:
        return False
    idx = np.searchsorted(a.elements, b.elements)
    idx[idx == len(a.elements)] = 0
    return bool(np.array_equal(a.elements[idx], b.elements))


def generator_orbit(ctx: RingContext, g, strict: bool = True) -> list[ModPair]:
    """The pairs U*g for U in the unit group, deduplicated, ascending by code.

    For a free submodule these are exactly its generators. For a non-free
    one NotFree is raised (with the orbit attached) unless ``strict`` is
    False.
    """
    code = pair_code(ctx, g)
    orbit = np.unique(left_multiples(ctx, [code], ctx.units)[:, 0])
    pairs = [ModPair.from_code(ctx, c) for c in orbit]
    if not is_free(ctx, code):
        if strict:
            raise NotFree(f"{ModPair.from_code(ctx, code)} does not generate a free submodule", orbit=pairs)
        log.debug("orbit of non-free pair %s has %d elements", code, len(pairs))
    return pairs


def is_outlier(ctx: RingContext, line, g) -> bool:
    """True iff g lies in none of the given points of the projective line."""
    code = pair_code(ctx, g)
    return not any(code in point for point in line)


# -- exhaustive enumeration -----------------------------------------------------


def _orbit_min_chunk(codes):
    return orbit_min(parallel.shared(), codes)


def _elements_chunk(reps):
    ctx = parallel.shared()
    return [submodule_elements(ctx, r) for r in reps]


class SubmoduleRegistry:
    """Every cyclic submodule of 2T_n(q), indexed by a dense integer ID.

    IDs follow ascending canonical-generator code, so they are identical for
    any worker count.  ``sub_of[code]`` is the ID of the submodule generated
    by pair ``code``.
    """

    def __init__(self, ctx: RingContext, submodules: list[Submodule], sub_of: np.ndarray):
        self.ctx = ctx
        self.submodules = submodules
        self.sub_of = sub_of
        self._by_key = {s.key: i for i, s in enumerate(submodules)}

    def __len__(self):
        return len(self.submodules)

    def __getitem__(self, sid: int) -> Submodule:
        return self.submodules[sid]

    def id_of(self, sub: Submodule) -> int:
        return self._by_key[sub.key]

    def id_of_pair(self, g) -> int:
        return int(self.sub_of[pair_code(self.ctx, g)])

    def ids(self, predicate) -> list[int]:
        return [i for i, s in enumerate(self.submodules) if predicate(s)]


def build_registry(ctx: RingContext, workers=None, chunk: int = 4096) -> SubmoduleRegistry:
    """Enumerate all cyclic submodules of 2T_n(q) with orbit pruning.

    Phase one maps every pair code to its unit-orbit minimum (a pair and its
    unit multiples always generate the same submodule); phase two builds one
    element set per distinct orbit, deduplicates by element set, and assigns
    IDs in canonical-generator order.
    """
    total = ctx.size**2
    codes = np.arange(total, dtype=np.int64)
    mins = parallel.ordered_map(_orbit_min_chunk, parallel.chunked(codes, chunk), ctx, workers)
    rep_of = np.concatenate(mins)
    reps = np.unique(rep_of)
    log.info("T_%d(%d): %d pairs, %d unit orbits", ctx.n, ctx.q, total, len(reps))

    parts = parallel.ordered_map(_elements_chunk, parallel.chunked(reps, 256), ctx, workers)
    groups: dict[bytes, list] = {}
    for rep, elements in zip(reps, (e for part in parts for e in part)):
        key = elements.tobytes()
        if key in groups:
            groups[key][1].append(int(rep))
        else:
            groups[key] = [elements, [int(rep)]]

    ordered = sorted(groups.values(), key=lambda item: min(item[1]))
    submodules = []
    rep_to_id = np.empty(len(reps), dtype=np.int64)
    for sid, (elements, rs) in enumerate(ordered):
        submodules.append(_make_submodule(ctx, elements, min(rs)))
        rep_to_id[np.searchsorted(reps, rs)] = sid
    sub_of = rep_to_id[np.searchsorted(reps, rep_of)]
    sub_of.setflags(write=False)
    return SubmoduleRegistry(ctx, submodules, sub_of)
