"""Census of the projective line P(T_n(q)) and its companion submodules.

Everything here is brute force over the registry of all cyclic submodules.
The explicit generator families, closed-form counts and printed freeness
criteria are kept separate and are only ever compared against it.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionUnsupported
from .gf import FieldTable
from .modspace import ModPair, SubmoduleRegistry, build_registry, cyclic_submodule, unimodular_mask
from .trimat import RingContext, TriMatrix, pos

log = logging.getLogger(__name__)

# label of the "first set"; k-sets are labelled by the field index k
INF = "inf"


def set_key(label) -> str:
    return INF if label == INF else f"k:{label}"


def parse_set_key(text: str):
    text = text.strip()
    if text in (INF, "first", "∞"):
        return INF
    if text.startswith("k:"):
        return int(text[2:])
    raise ValueError(f"bad set label {text!r}; expected 'first' or 'k:<element>'")


# -- normal forms ------------------------------------------------------------


def _rows(m: TriMatrix):
    return [list(r) for r in m.to_rows()]


def normal_form(ctx: RingContext, g: ModPair) -> ModPair:
    """Reduce g by invertible lower triangular row operations.

    Rows are processed top to bottom.  The pivot of row i is its diagonal
    entry on the preferred side (X when y22 = 0, else Y) when nonzero,
    otherwise on the other side; the row is scaled so the pivot is 1 and the
    pivot column is cleared in all rows below.  Rows with both diagonal
    entries zero are left alone.  For unimodular pairs, and for the
    non-free submodules that carry the affine planes, this yields exactly the
    representatives used to list points and planes.
    """
    f = ctx.field
    n = ctx.n
    X, Y = _rows(g.x), _rows(g.y)
    prefer_x = Y[1][1] == 0
    for i in range(n):
        first, second = (X, Y) if prefer_x else (Y, X)
        if first[i][i]:
            side = first
        elif second[i][i]:
            side = second
        else:
            continue
        scale = int(f.inv[side[i][i]])
        for M in (X, Y):
            M[i] = [int(f.mul[scale, v]) for v in M[i]]
        for r in range(i + 1, n):
            c = side[r][i]
            if c:
                for M in (X, Y):
                    M[r] = [int(f.sub(a, f.mul[c, b])) for a, b in zip(M[r], M[i])]
    return ModPair.from_rows(f, X, Y)


def set_label(ctx: RingContext, g: ModPair):
    """INF for the first set, else k = x22 / y22."""
    x22, y22 = g.x[2, 2], g.y[2, 2]
    if y22 == 0:
        return INF
    return int(ctx.field.mul[x22, ctx.field.inv[y22]])


def subset_label(nf: ModPair) -> tuple[int, int, int, int]:
    """(x32, x33, y32, y33) read off a normal form (n = 3)."""
    return (nf.x[3, 2], nf.x[3, 3], nf.y[3, 2], nf.y[3, 3])


# -- census --------------------------------------------------------------------


@dataclass
class LineCensus:
    ctx: RingContext
    registry: SubmoduleRegistry
    points: list[int] = field(default_factory=list)
    nonuni_fcs: list[int] = field(default_factory=list)
    shielded: list[int] = field(default_factory=list)
    # id -> (set label, subset label or None)
    point_partition: dict = field(default_factory=dict)
    shielded_partition: dict = field(default_factory=dict)
    normal_forms: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.ctx.n

    @property
    def q(self):
        return self.ctx.q

    def sub(self, sid):
        return self.registry[sid]

    def normal(self, sid) -> ModPair:
        nf = self.normal_forms.get(sid)
        if nf is None:
            nf = normal_form(self.ctx, self.registry[sid].canonical_generator)
            self.normal_forms[sid] = nf
        return nf

    def union_mask(self, ids) -> np.ndarray:
        mask = np.zeros(self.ctx.size**2, dtype=bool)
        for sid in ids:
            mask[self.registry[sid].elements] = True
        return mask

    def containing(self, ids, candidates) -> dict:
        """For each id in ``ids``, the candidates whose element set holds its generator."""
        index = {}
        for c in candidates:
            for code in self.registry[c].elements:
                index.setdefault(int(code), []).append(c)
        return {sid: sorted(index.get(self.registry[sid].canonical_code, [])) for sid in ids}


def _new_census(ctx, census, workers):
    if census is not None:
        return census
    return LineCensus(ctx, build_registry(ctx, workers=workers))


def _label(census, sid):
    nf = census.normal(sid)
    if census.n == 2:
        return (set_label(census.ctx, nf), None)
    return (set_label(census.ctx, nf), subset_label(nf))


def enumerate_points(ctx: RingContext, census=None, workers=None, partition=True) -> LineCensus:
    """Free submodules generated by unimodular pairs, with the set/subset partition."""
    if partition and ctx.n not in (2, 3):
        raise DimensionUnsupported(f"point partition is only defined for n = 2, 3 (got n={ctx.n})")
    census = _new_census(ctx, census, workers)
    census.points = census.registry.ids(lambda s: s.is_free and s.is_unimodular_generated)
    if partition:
        census.point_partition = {sid: _label(census, sid) for sid in census.points}
    return census


def enumerate_nonunimodular_fcs(ctx: RingContext, census=None, workers=None) -> LineCensus:
    census = _new_census(ctx, census, workers)
    census.nonuni_fcs = census.registry.ids(lambda s: s.is_nonunimodular_free)
    return census


def enumerate_shielded(ctx: RingContext, census: LineCensus) -> LineCensus:
    """Non-free cyclic submodules lying in no non-unimodular free one.

    T(X,Y) lies in a submodule iff (X,Y) does, so it suffices to test each
    canonical generator against the union of the non-unimodular FCS.
    """
    covered = census.union_mask(census.nonuni_fcs)
    reg = census.registry
    census.shielded = [i for i, s in enumerate(reg.submodules) if not s.is_free and not covered[s.canonical_code]]
    if ctx.n in (2, 3):
        census.shielded_partition = {sid: _label(census, sid) for sid in census.shielded}
    return census


def line_census(ctx: RingContext, workers=None) -> LineCensus:
    census = enumerate_points(ctx, workers=workers, partition=ctx.n in (2, 3))
    enumerate_nonunimodular_fcs(ctx, census)
    enumerate_shielded(ctx, census)
    return census


def outlier_mask(census: LineCensus) -> np.ndarray:
    return ~census.union_mask(census.points)


def outlier_report(census: LineCensus) -> dict:
    """Compare outlier-hood with non-unimodularity over the whole pair space."""
    ctx = census.ctx
    codes = np.arange(ctx.size**2, dtype=np.int64)
    outl = outlier_mask(census)
    nonuni = ~unimodular_mask(ctx, codes)
    nonuni[0] = True
    diff = codes[outl != nonuni]
    gens = np.isin(census.registry.sub_of, census.nonuni_fcs)
    return {
        "outliers": int(outl.sum()),
        "nonunimodular": int(nonuni.sum()),
        "outlier_not_nonunimodular": [int(c) for c in diff if outl[c]][:50],
        "nonunimodular_not_outlier": int(np.count_nonzero(nonuni & ~outl)),
        "outlier_generators_of_nonuni_fcs": int(np.count_nonzero(gens)),
        "generators_all_outliers": bool(outl[gens].all()),
    }


# -- closed forms ----------------------------------------------------------------


def abstract_plane_count(n: int, q: int) -> int:
    return (q + 1) ** (n - 1) * q ** (3 * (n - 1) * (n - 2) // 2)


def closed_forms(n: int, q: int) -> dict:
    if n == 2:
        return {
            "points": q * (q + 1) ** 2,
            "nonuni_fcs": q + 1,
            "shielded": q**2 * (q + 1),
            "outlier_generators": (q - 1) ** 2 * (q + 1) * q,
            "affine_planes": q + 1,
            "abstract_planes": abstract_plane_count(n, q),
        }
    if n == 3:
        return {
            "points": (q + 1) ** 3 * q**3,
            "nonuni_fcs": (q + 1) ** 2 * (2 * q**2 + q + 1),
            "shielded": (q + 1) ** 2 * q**5,
            "outlier_generators": (q - 1) ** 3 * q**3 * (q + 1) ** 2 * (2 * q**2 + q + 1),
            "affine_planes": q**3 * (q + 1) ** 2,
            "abstract_planes": abstract_plane_count(n, q),
            "two_affine_planes": q * (q + 1) ** 2,
        }
    return {}


# -- order-q submodules for n = 2 -----------------------------------------------------


def classify_order_q_n2(census: LineCensus) -> dict:
    """Split the order-q submodules into type (a) and the q+1 type-(b) sets."""
    ctx = census.ctx
    if ctx.n != 2:
        raise DimensionUnsupported("order-q classification is stated for n = 2")
    radical = set(int(c) for c in ctx.radical)
    type_a, type_b = [], {}
    for sid, sub in enumerate(census.registry.submodules):
        if sub.order != ctx.q:
            continue
        g = sub.canonical_generator
        if g.x.code in radical and g.y.code in radical:
            type_a.append(sid)
        else:
            type_b.setdefault(set_label(ctx, census.normal(sid)), []).append(sid)
    return {"a": type_a, "b": dict(sorted(type_b.items(), key=lambda kv: (kv[0] != INF, kv[0] if kv[0] != INF else 0)))}


# -- explicit generator families -------------------------------------------------------------


def _pair(f, X, Y):
    return ModPair.from_rows(f, X, Y)


def theorem_nonuni_generators_n2(f: FieldTable) -> list[tuple[str, ModPair]]:
    out = [("first", _pair(f, [[1, 0], [0, 0]], [[0, 0], [1, 0]]))]
    for k in range(f.q):
        out.append((f"k:{k}", _pair(f, [[k, 0], [1, 0]], [[1, 0], [0, 0]])))
    return out


def theorem_nonuni_generators_n3(f: FieldTable) -> list[tuple[str, ModPair]]:
    """The eight first-set and eight k-set generator templates, fully expanded."""
    F = range(f.q)
    out = []

    def add(tag, X, Y):
        out.append((tag, _pair(f, X, Y)))

    for x32, y32, y33 in itertools.product(F, F, F):
        add("first.1", [[1], [0, 0], [0, x32, 1]], [[0], [1, 0], [0, y32, y33]])
    for x32, y32 in itertools.product(F, F):
        add("first.2", [[1], [0, 0], [0, x32, 0]], [[0], [1, 0], [0, y32, 1]])
    for x32 in F:
        add("first.3", [[1], [0, 0], [0, x32, 0]], [[0], [1, 0], [0, 1, 0]])
    add("first.4", [[1], [0, 0], [0, 1, 0]], [[0], [1, 0], [0, 0, 0]])
    for y21, y22, y31 in itertools.product(F, F, F):
        add("first.5", [[1], [0, 1], [0, 0, 0]], [[0], [y21, y22], [y31, 1, 0]])
    for y21, y22 in itertools.product(F, F):
        add("first.6", [[1], [0, 1], [0, 0, 0]], [[0], [y21, y22], [1, 0, 0]])
    for y21, y31 in itertools.product(F, F):
        add("first.7", [[1], [0, 0], [0, 1, 0]], [[0], [y21, 1], [y31, 0, 0]])
    for y21 in F:
        add("first.8", [[1], [0, 0], [0, 0, 0]], [[0], [y21, 1], [1, 0, 0]])

    for k in F:
        for x32, x33, y32 in itertools.product(F, F, F):
            add(f"k:{k}.1", [[k], [1, 0], [0, x32, x33]], [[1], [0, 0], [0, y32, 1]])
        for x32, y32 in itertools.product(F, F):
            add(f"k:{k}.2", [[k], [1, 0], [0, x32, 1]], [[1], [0, 0], [0, y32, 0]])
        for y32 in F:
            add(f"k:{k}.3", [[k], [1, 0], [0, 1, 0]], [[1], [0, 0], [0, y32, 0]])
        add(f"k:{k}.4", [[k], [1, 0], [0, 0, 0]], [[1], [0, 0], [0, 1, 0]])
        for x21, x22, x31 in itertools.product(F, F, F):
            add(f"k:{k}.5", [[k], [x21, x22], [x31, 1, 0]], [[1], [0, 1], [0, 0, 0]])
        for x21, x22 in itertools.product(F, F):
            add(f"k:{k}.6", [[k], [x21, x22], [1, 0, 0]], [[1], [0, 1], [0, 0, 0]])
        for x21, x31 in itertools.product(F, F):
            add(f"k:{k}.7", [[k], [x21, 1], [x31, 0, 0]], [[1], [0, 0], [0, 1, 0]])
        for x21 in F:
            add(f"k:{k}.8", [[k], [x21, 1], [1, 0, 0]], [[1], [0, 0], [0, 0, 0]])
    return out


def theorem_family_check(census: LineCensus) -> dict:
    """Compare the explicit non-unimodular FCS families with brute force.

    Each listed generator is expanded with cyclic_submodule directly (not via
    the registry's pair lookup) and then matched by element set.
    """
    ctx = census.ctx
    if ctx.n == 2:
        family = theorem_nonuni_generators_n2(ctx.field)
    elif ctx.n == 3:
        family = theorem_nonuni_generators_n3(ctx.field)
    else:
        raise DimensionUnsupported("generator families exist for n = 2, 3 only")
    reg = census.registry
    ids, not_free, per_tag = set(), [], {}
    for tag, g in family:
        sub = cyclic_submodule(ctx, g)
        sid = reg.id_of(sub)
        ids.add(sid)
        per_tag.setdefault(tag.split(".")[0], set()).add(sid)
        if not sub.is_nonunimodular_free:
            not_free.append(str(g))
    brute = set(census.nonuni_fcs)
    set_sizes = {t: len(v) for t, v in per_tag.items()}
    overlaps = sum(set_sizes.values()) - len(ids)
    return {
        "listed_generators": len(family),
        "distinct_submodules": len(ids),
        "brute_force": len(brute),
        "equal": ids == brute,
        "missing": sorted(brute - ids),
        "extra": sorted(ids - brute),
        "not_nonunimodular_free": not_free,
        "set_sizes": set_sizes,
        "cross_set_overlaps": overlaps,
    }


# -- printed freeness criteria ------------------------------------------------------------------


class _Arith:
    """Field operations that work elementwise on scalars and numpy arrays.

    ``inv(0)`` is 0, so a printed formula that divides by a zero entry still
    evaluates (and the disagreement shows up in the comparison).
    """

    def __init__(self, f: FieldTable):
        self.f = f

    def mul(self, *args):
        acc = args[0]
        for a in args[1:]:
            acc = self.f.mul[acc, a]
        return acc

    def add(self, a, b):
        return self.f.add[a, b]

    def sub(self, a, b):
        return self.f.add[a, self.f.neg[b]]

    def inv(self, a):
        return self.f.inv[a]


def _slots(ctx, codes):
    x, y = np.divmod(np.asarray(codes, dtype=np.int64), ctx.size)
    ex, ey = ctx.entries[x], ctx.entries[y]

    def get(e, i, j):
        return e[..., pos(i, j)]

    return ex, ey, get


def _free_nonuni_n2(ctx, codes):
    a = _Arith(ctx.field)
    ex, ey, g = _slots(ctx, codes)
    x11, x21, x22 = g(ex, 1, 1), g(ex, 2, 1), g(ex, 2, 2)
    y11, y21, y22 = g(ey, 1, 1), g(ey, 2, 1), g(ey, 2, 2)
    lead = (x22 == 0) & (y22 == 0)
    c1 = (x11 == 0) & (y11 != 0) & (x21 != 0)
    c2 = (x11 != 0) & (y11 == 0) & (y21 != 0)
    c3 = (x11 != 0) & (y11 != 0) & (x21 == 0) & (y21 != 0)
    c4 = (x11 != 0) & (y11 != 0) & (x21 != 0) & (y21 != a.mul(a.inv(x11), x21, y11))
    return lead & (c1 | c2 | c3 | c4)


def fast_free_nonuni_n2(ctx: RingContext, g) -> bool:
    """Closed-form freeness test for a non-unimodular pair of 2T(q)."""
    if ctx.n != 2:
        raise DimensionUnsupported("this criterion is for n = 2")
    code = g.code if isinstance(g, ModPair) else int(g)
    return bool(_free_nonuni_n2(ctx, [code])[0])


def _free_nonuni_n3(ctx, codes, table="printed", with_branch=False):
    a = _Arith(ctx.field)
    ex, ey, g = _slots(ctx, codes)
    x11, x21, x22, x31, x32, x33 = (g(ex, i, j) for i, j in [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2), (3, 3)])
    y11, y21, y22, y31, y32, y33 = (g(ey, i, j) for i, j in [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2), (3, 3)])
    corrected = table == "corrected"
    if table not in ("printed", "corrected"):
        raise ValueError("table must be 'printed' or 'corrected'")

    z22 = (x22 == 0) & (y22 == 0)
    row3_nonzero = (x32 != 0) | (x33 != 0) | (y32 != 0) | (y33 != 0)
    B = (x22 == 0) & (y22 != 0)
    C = (x22 != 0) & (y22 == 0)
    D = (x22 != 0) & (y22 != 0)
    lam_y = a.mul(a.inv(y22), y32)  # y22^-1 y32
    lam_x = a.mul(a.inv(x22), x32)  # x22^-1 x32
    par_d = x32 == a.mul(x22, lam_y)

    # case 1: x11 = 0, y11 != 0
    t = a.mul(x21, lam_y)
    b1_first = (x31 != t) if corrected else (x31 != a.mul(x21, lam_x))
    c1 = {
        "a": z22 & (x21 != 0) & row3_nonzero,
        "b": B & (b1_first | ((x31 == t) & (x32 != 0))),
        "c": C & ((x31 != a.mul(x21, lam_x)) | ((x31 == a.mul(x21, lam_x)) & (y32 != 0))),
        "d": D & (~par_d | (par_d & (x31 != t))),
    }
    # case 2: x11 != 0, y11 = 0
    t2 = a.mul(y21, lam_y)
    d2_tail = (y31 != t2) if corrected else (x31 != a.mul(x21, lam_y))
    c2 = {
        "a": z22 & (y21 != 0) & row3_nonzero,
        "b": B & ((y31 != t2) | ((y31 == t2) & (x32 != 0))),
        "c": C & ((y31 != a.mul(y21, lam_x)) | ((y31 == a.mul(y21, lam_x)) & (y32 != 0))),
        "d": D & (~par_d | (par_d & d2_tail)),
    }
    # case 3: x11, y11 != 0
    r = a.mul(x11, a.inv(y11))
    base = a.add(a.mul(r, y31), 0)
    skew = a.sub(x21, a.mul(r, y21))
    a3 = z22 & (x21 != a.mul(r, y21))
    if corrected:
        a3 = a3 & row3_nonzero
    c3 = {
        "a": a3,
        "b": B & ((x32 != 0) | ((x32 == 0) & (x31 != a.add(base, a.mul(skew, lam_y))))),
        "c": C & ((y32 != 0) | ((y32 == 0) & (x31 != a.add(base, a.mul(skew, lam_x))))),
        "d": D & (~par_d | (par_d & (x31 != a.add(base, a.mul(skew, lam_y))))),
    }
    k1 = (x11 == 0) & (y11 != 0)
    k2 = (x11 != 0) & (y11 == 0)
    k3 = (x11 != 0) & (y11 != 0)
    # the printed leading clause is corrupt; both tables use the reading
    # that is implied by non-unimodularity once x11 or y11 is nonzero
    lead = z22 | ((x33 == 0) & (y33 == 0))
    result = np.zeros(np.shape(x11), dtype=bool)
    branch = np.full(np.shape(x11), "", dtype=object)
    for case_mask, conds, num in ((k1, c1, 1), (k2, c2, 2), (k3, c3, 3)):
        for letter, cond in conds.items():
            hit = lead & case_mask & cond
            branch[hit & ~result] = f"{num}({letter})"
            result |= hit
    return (result, branch) if with_branch else result


def fast_free_nonuni_n3(ctx: RingContext, g, table: str = "printed") -> bool:
    """Evaluate the n = 3 condition table for a non-unimodular pair.

    ``table='printed'`` follows the condition table as printed (apart
    from the unreadable leading clause); ``table='corrected'`` repairs
    conditions 1(b), 2(d) and 3(a).
    """
    if ctx.n != 3:
        raise DimensionUnsupported("this criterion is for n = 3")
    code = g.code if isinstance(g, ModPair) else int(g)
    return bool(_free_nonuni_n3(ctx, [code], table)[0])


def fast_path_report(census: LineCensus, table: str = "printed", limit: int = 200) -> dict:
    """Agreement of a closed-form criterion with brute force on all non-unimodular pairs."""
    ctx = census.ctx
    codes = np.arange(ctx.size**2, dtype=np.int64)
    codes = codes[~unimodular_mask(ctx, codes)]
    reg = census.registry
    brute = np.array([s.is_free for s in reg.submodules])[reg.sub_of[codes]]
    if ctx.n == 2:
        fast, branch = _free_nonuni_n2(ctx, codes), None
    elif ctx.n == 3:
        fast, branch = _free_nonuni_n3(ctx, codes, table, with_branch=True)
    else:
        raise DimensionUnsupported("closed-form criteria exist for n = 2, 3 only")
    bad = np.flatnonzero(fast != brute)
    diff = []
    for i in bad[:limit]:
        g = ModPair.from_code(ctx, codes[i])
        diff.append(
            {
                "pair": int(codes[i]),
                "x": g.x.to_rows(),
                "y": g.y.to_rows(),
                "brute_force": bool(brute[i]),
                "criterion": bool(fast[i]),
                "branch": (branch[i] or None) if branch is not None else None,
            }
        )
    by_branch = {}
    if branch is not None:
        for i in bad:
            key = branch[i] or "none"
            by_branch[key] = by_branch.get(key, 0) + 1
    total = len(codes)
    return {
        "n": ctx.n,
        "q": ctx.q,
        "table": table if ctx.n == 3 else "printed",
        "pairs": total,
        "agree": int(total - len(bad)),
        "agreement": (total - len(bad)) / total if total else 1.0,
        "disagreements": int(len(bad)),
        "false_positive": int(np.count_nonzero(fast & ~brute)),
        "false_negative": int(np.count_nonzero(~fast & brute)),
        "by_branch": by_branch,
        "diff": diff,
    }
