"""Affine planes, projective closures and 2-affine planes of P(T_n(q)).

Points of an affine plane are shielded submodules, lines are points of the
projective line, and incidence is always genuine submodule containment.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import NotAnAffinePlane, OrderTooLargeForSearch, SelectorInvalid, SubsetInvalid, DimensionUnsupported
from .gf import field_make
from .modspace import ModPair, cyclic_submodule, submodule_contains
from .projline import INF, LineCensus, classify_order_q_n2, set_key, set_label, subset_label

MAX_SEARCH_Q = 4


@dataclass
class IncidenceStructure:
    name: str
    points: tuple
    lines: tuple
    incidence: dict  # line id -> sorted tuple of point ids
    labels: dict = field(default_factory=dict)

    def point_set(self, line) -> frozenset:
        return frozenset(self.incidence[line])

    def lines_through(self) -> dict:
        out = {p: [] for p in self.points}
        for line in self.lines:
            for p in self.incidence[line]:
                out[p].append(line)
        return out

    def same_shape(self, other) -> bool:
        return (
            tuple(self.points) == tuple(other.points)
            and tuple(self.lines) == tuple(other.lines)
            and {k: tuple(v) for k, v in self.incidence.items()} == {k: tuple(v) for k, v in other.incidence.items()}
        )

    def __eq__(self, other):
        if not isinstance(other, IncidenceStructure):
            return NotImplemented
        return self.name == other.name and self.same_shape(other) and self.labels == other.labels


@dataclass
class AxiomReport:
    kind: str
    a1_holds: bool = False
    a2_holds: bool = False
    a3_holds: bool = False
    a1_failures: list = field(default_factory=list)
    a2_failures: list = field(default_factory=list)
    a3_witness: tuple | None = None
    order: int | None = None
    parallel_classes: list = field(default_factory=list)
    parallel_is_equivalence: bool = False
    projective: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        if self.kind == "affine":
            return self.a1_holds and self.a2_holds and self.a3_holds and self.order is not None
        return all(self.projective.get(k) for k in ("two_points_one_line", "two_lines_one_point", "quadrilateral")) and (
            self.order is not None
        )

    def as_dict(self) -> dict:
        out = {"kind": self.kind, "holds": self.holds, "order": self.order}
        if self.kind == "affine":
            out.update(
                a1=self.a1_holds,
                a2=self.a2_holds,
                a3=self.a3_holds,
                parallel_classes=[list(c) for c in self.parallel_classes],
                parallel_is_equivalence=self.parallel_is_equivalence,
            )
        else:
            out.update(self.projective)
        return out


# -- axiom checks ---------------------------------------------------------------

_MAX_WITNESSES = 20


def _pair_line_counts(s: IncidenceStructure):
    counts = {}
    for line in s.lines:
        for a, b in itertools.combinations(s.incidence[line], 2):
            counts[(a, b)] = counts.get((a, b), 0) + 1
    return counts


def _non_collinear_triple(s: IncidenceStructure, sets):
    for a, b, c in itertools.combinations(s.points, 3):
        if not any(a in ps and b in ps and c in ps for ps in sets):
            return (a, b, c)
    return None


def _parallel_classes(s: IncidenceStructure, sets):
    classes, seen = [], set()
    for line in s.lines:
        if line in seen:
            continue
        cls = [m for m in s.lines if m == line or not (sets[line] & sets[m])]
        seen.update(cls)
        classes.append(tuple(cls))
    ok = all(not (sets[a] & sets[b]) for cls in classes for a, b in itertools.combinations(cls, 2))
    ok = ok and sum(len(c) for c in classes) == len(s.lines)
    return classes, ok


def check_affine_axioms(s: IncidenceStructure) -> AxiomReport:
    rep = AxiomReport("affine")
    sets = {line: s.point_set(line) for line in s.lines}
    counts = _pair_line_counts(s)
    pts = sorted(s.points)
    for a, b in itertools.combinations(pts, 2):
        c = counts.get((a, b), 0) + counts.get((b, a), 0)
        if c != 1:
            rep.a1_failures.append((a, b, c))
    rep.a1_holds = not rep.a1_failures
    through = s.lines_through()
    for line in s.lines:
        for p in pts:
            if p in sets[line]:
                continue
            misses = [m for m in through[p] if not (sets[m] & sets[line])]
            if len(misses) != 1:
                rep.a2_failures.append((line, p, len(misses)))
    rep.a2_holds = not rep.a2_failures
    rep.a3_witness = _non_collinear_triple(s, list(sets.values()))
    rep.a3_holds = rep.a3_witness is not None
    del rep.a1_failures[_MAX_WITNESSES:], rep.a2_failures[_MAX_WITNESSES:]
    rep.parallel_classes, rep.parallel_is_equivalence = _parallel_classes(s, sets)
    sizes = {len(v) for v in sets.values()}
    if rep.a1_holds and rep.a2_holds and rep.a3_holds and len(sizes) == 1:
        m = sizes.pop()
        if len(s.points) == m * m and len(s.lines) == m * m + m:
            rep.order = m
    return rep


def check_projective_axioms(s: IncidenceStructure) -> AxiomReport:
    rep = AxiomReport("projective")
    sets = {line: s.point_set(line) for line in s.lines}
    counts = _pair_line_counts(s)
    bad_points = []
    for a, b in itertools.combinations(sorted(s.points), 2):
        c = counts.get((a, b), 0) + counts.get((b, a), 0)
        if c != 1:
            bad_points.append((a, b, c))
    bad_lines = [(l, m, len(sets[l] & sets[m])) for l, m in itertools.combinations(s.lines, 2) if len(sets[l] & sets[m]) != 1]
    quad = None
    for cand in itertools.combinations(sorted(s.points), 4):
        if not any(len(ps.intersection(cand)) >= 3 for ps in sets.values()):
            quad = cand
            break
    rep.projective = {
        "two_points_one_line": not bad_points,
        "two_lines_one_point": not bad_lines,
        "quadrilateral": quad is not None,
        "point_failures": bad_points[:_MAX_WITNESSES],
        "line_failures": bad_lines[:_MAX_WITNESSES],
        "quadrilateral_witness": list(quad) if quad else None,
    }
    sizes = {len(v) for v in sets.values()}
    if not bad_points and not bad_lines and quad and len(sizes) == 1:
        m = sizes.pop() - 1
        if len(s.points) == len(s.lines) == m * m + m + 1:
            rep.order = m
    return rep


# -- affine planes --------------------------------------------------------------------


def _point_index(census: LineCensus):
    """Sorted (element code, point id) arrays over every point of the line."""
    cached = getattr(census, "_point_index", None)
    if cached is None:
        reg = census.registry
        codes = np.concatenate([reg[p].elements for p in census.points])
        owners = np.repeat(np.array(census.points, dtype=np.int64), [reg[p].order for p in census.points])
        order = np.argsort(codes, kind="stable")
        cached = (codes[order], owners[order])
        census._point_index = cached
    return cached


def points_containing(census: LineCensus, sid: int) -> list[int]:
    """Points of P(T_n(q)) that contain submodule ``sid`` (genuine containment)."""
    codes, owners = _point_index(census)
    g = census.registry[sid].canonical_code
    lo, hi = np.searchsorted(codes, g), np.searchsorted(codes, g, side="right")
    sub = census.registry[sid]
    return sorted(int(p) for p in owners[lo:hi] if submodule_contains(census.registry[int(p)], sub))


def shielded_key(census: LineCensus, sid: int):
    nf = census.normal(sid)
    label = census.shielded_partition[sid][0]
    if census.n == 2:
        return (label,)
    return (label, subset_label(nf), nf.x[2, 1], nf.y[2, 1])


def _selector_groups(census: LineCensus) -> dict:
    groups = getattr(census, "_selector_groups", None)
    if groups is None:
        groups = {}
        for sid in census.shielded:
            groups.setdefault(shielded_key(census, sid), []).append(sid)
        census._selector_groups = groups
    return groups


def _sort_key(sel):
    return tuple((0, 0) if v == INF else (1, v) for v in _flatten(sel))


def _flatten(sel):
    for v in sel:
        if isinstance(v, tuple):
            yield from v
        else:
            yield v


def plane_selectors(census: LineCensus) -> list[tuple]:
    """All selectors, in a fixed order: (set,) for n=2, (set, subset, p21, r21) for n=3."""
    if census.n not in (2, 3):
        raise DimensionUnsupported("planes are built for n = 2, 3")
    return sorted(_selector_groups(census), key=_sort_key)


def normalize_selector(census: LineCensus, selector) -> tuple:
    if not isinstance(selector, tuple):
        selector = (selector,)
    if census.n == 3 and len(selector) == 4 and not isinstance(selector[1], tuple):
        raise SelectorInvalid("the n = 3 subset must be a 4-tuple (x32, x33, y32, y33)")
    return selector


def describe_pair(g: ModPair) -> dict:
    return {"x": g.x.to_rows(), "y": g.y.to_rows()}


def entity_label(census: LineCensus, sid: int, role: str, **extra) -> dict:
    sub = census.registry[sid]
    label = {"role": role, "generator": str(sub.canonical_generator), "order": sub.order}
    part = census.point_partition.get(sid) or census.shielded_partition.get(sid)
    if part is not None:
        label["set"] = set_key(part[0])
        if part[1] is not None:
            label["subset"] = list(part[1])
    label.update(extra)
    return label


def build_affine_plane(census: LineCensus, selector) -> IncidenceStructure:
    selector = normalize_selector(census, selector)
    pts = _selector_groups(census).get(selector)
    if not pts:
        raise SelectorInvalid(f"no shielded submodules match selector {selector!r}")
    pts = sorted(pts)
    lines = sorted({line for p in pts for line in points_containing(census, p)})
    inc = {line: tuple(p for p in pts if submodule_contains(census.registry[line], census.registry[p])) for line in lines}
    labels = {p: entity_label(census, p, "point") for p in pts}
    labels.update({line: entity_label(census, line, "line") for line in lines})
    return IncidenceStructure(f"affine{_selector_name(selector)}", tuple(pts), tuple(lines), inc, labels)


def _selector_name(selector) -> str:
    parts = []
    for v in selector:
        if v == INF:
            parts.append("first")
        elif isinstance(v, tuple):
            parts.append("(" + ",".join(map(str, v)) + ")")
        else:
            parts.append(str(v))
    return "[" + ";".join(parts) + "]"


def _selector_xy22(census: LineCensus, selector) -> tuple[int, int]:
    return (1, 0) if selector[0] == INF else (int(selector[0]), 1)


def new_point_generator(census: LineCensus, x11: int, y11: int) -> ModPair:
    """Point at infinity for a parallel class with first-column entries (x11, y11)."""
    f, n = census.ctx.field, census.n
    X = [[0] * (i + 1) for i in range(n)]
    Y = [[0] * (i + 1) for i in range(n)]
    X[n - 1][0], Y[n - 1][0] = x11, y11
    return ModPair.from_rows(f, X, Y)


def new_line_generator(census: LineCensus, x22: int, y22: int) -> ModPair:
    """Line at infinity from the Kronecker-delta formula."""
    f = census.ctx.field
    d = 1 if y22 == 0 else 0
    if census.n == 2:
        return ModPair.from_rows(f, [[x22], [y22, 0]], [[y22], [d, 0]])
    return ModPair.from_rows(f, [[x22], [y22, 0], [0, d, 0]], [[y22], [d, 0], [0, y22, 0]])


def projective_closure(plane: IncidenceStructure, census: LineCensus) -> IncidenceStructure:
    report = check_affine_axioms(plane)
    if not report.holds:
        raise NotAnAffinePlane(f"{plane.name} fails the affine axioms")
    reg = census.registry
    new_points = []
    for cls in report.parallel_classes:
        nf = census.normal(cls[0])
        g = new_point_generator(census, nf.x[1, 1], nf.y[1, 1])
        new_points.append(reg.id_of(cyclic_submodule(census.ctx, g)))
    selector = _selector_of(census, plane)
    line_gen = new_line_generator(census, *_selector_xy22(census, selector))
    new_line = reg.id_of(cyclic_submodule(census.ctx, line_gen))
    points = tuple(plane.points) + tuple(new_points)
    lines = tuple(plane.lines) + ((new_line,) if new_line not in plane.lines else ())
    inc = {line: tuple(p for p in points if submodule_contains(reg[line], reg[p])) for line in lines}
    labels = dict(plane.labels)
    for p in new_points:
        labels[p] = entity_label(census, p, "point", at_infinity=True)
    labels[new_line] = entity_label(census, new_line, "line", at_infinity=True)
    return IncidenceStructure(plane.name.replace("affine", "closure", 1), points, lines, inc, labels)


def _selector_of(census: LineCensus, plane: IncidenceStructure):
    return shielded_key(census, plane.points[0])


def closure_line_formula_report(census: LineCensus) -> dict:
    """Evaluate the line-at-infinity formula for every (x22, y22) in F(q)^2."""
    reg, q = census.registry, census.q
    inf_points = sorted(
        {reg.id_of(cyclic_submodule(census.ctx, new_point_generator(census, 1, y))) for y in range(q)}
        | {reg.id_of(cyclic_submodule(census.ctx, new_point_generator(census, 0, 1)))}
    )
    rows, failures = [], []
    nonuni = set(census.nonuni_fcs)
    for x22, y22 in itertools.product(range(q), repeat=2):
        sub = cyclic_submodule(census.ctx, new_line_generator(census, x22, y22))
        sid = reg.id_of(sub)
        contains = all(submodule_contains(sub, reg[p]) for p in inf_points)
        row = {
            "x22": x22,
            "y22": y22,
            "id": sid,
            "free": sub.is_free,
            "nonunimodular_free": sid in nonuni,
            "contains_all_new_points": contains,
            "used_by_closure": (x22, y22) == (1, 0) or y22 == 1,
        }
        rows.append(row)
        if not (row["nonunimodular_free"] and contains):
            failures.append(row)
    return {
        "points_at_infinity": inf_points,
        "rows": rows,
        "failures": failures,
        "failures_in_used_cases": [r for r in failures if r["used_by_closure"]],
    }


# -- 2-affine planes ----------------------------------------------------------------------------


def subset_labels(census: LineCensus) -> list[tuple]:
    """All (set, subset) pairs of P(T_3(q)), in selector order."""
    if census.n != 3:
        raise DimensionUnsupported("2-affine planes exist for n = 3 only")
    seen = []
    for sel in plane_selectors(census):
        if sel[:2] not in seen:
            seen.append(sel[:2])
    return seen


def build_2affine_plane(census: LineCensus, subset, reading: str = "every") -> IncidenceStructure:
    """Points: point-sets of the affine planes of a subset; lines: their parallel classes.

    A point-set is incident with a class when every member (``reading='every'``)
    or at least one member (``reading='some'``) lies in some line of the class.
    """
    if census.n != 3:
        raise DimensionUnsupported("2-affine planes exist for n = 3 only")
    if reading not in ("every", "some"):
        raise ValueError("reading must be 'every' or 'some'")
    subset = tuple(subset)
    sels = [s for s in plane_selectors(census) if s[:2] == subset]
    if not sels:
        raise SubsetInvalid(f"no affine planes in subset {subset!r}")
    point_sets, classes = [], []
    for sel in sels:
        plane = build_affine_plane(census, sel)
        point_sets.append(tuple(plane.points))
        for cls in check_affine_axioms(plane).parallel_classes:
            key = tuple(sorted(cls))
            if key not in classes:
                classes.append(key)
    classes.sort()
    holders = {s: set(points_containing(census, s)) for ps in point_sets for s in ps}
    quant = all if reading == "every" else any
    npts = len(point_sets)
    points = tuple(range(npts))
    lines = tuple(range(npts, npts + len(classes)))
    inc = {}
    for lid, cls in zip(lines, classes):
        members = set(cls)
        inc[lid] = tuple(i for i, ps in enumerate(point_sets) if quant(holders[s] & members for s in ps))
    labels = {i: {"role": "point-set", "members": list(ps), "selector": _selector_name(sel)} for i, (ps, sel) in enumerate(zip(point_sets, sels))}
    labels.update({lid: {"role": "parallel-class", "members": list(cls)} for lid, cls in zip(lines, classes)})
    name = f"2affine{_selector_name(subset)}" + ("" if reading == "every" else "-some")
    return IncidenceStructure(name, points, lines, inc, labels)


# -- corollaries --------------------------------------------------------------------------------


def _slots_except(nf: ModPair, skip) -> tuple:
    n = nf.n
    cells = [(i, j) for i in range(1, n + 1) for j in range(1, i + 1) if (i, j) not in skip]
    return tuple(nf.x[c] for c in cells) + tuple(nf.y[c] for c in cells)


def _partition(items, key) -> set:
    groups = {}
    for it in items:
        groups.setdefault(key(it), set()).add(it)
    return {frozenset(g) for g in groups.values()}


def check_corollaries(census: LineCensus) -> dict:
    """Compare the slot-based characterizations with the constructed planes."""
    n = census.n
    if n not in (2, 3):
        raise DimensionUnsupported("corollaries are stated for n = 2, 3")
    planes = [build_affine_plane(census, s) for s in plane_selectors(census)]
    reports = [check_affine_axioms(p) for p in planes]
    nf = census.normal
    corner = (n, 1)
    out = {}

    truth_classes = {frozenset(c) for r in reports for c in r.parallel_classes}
    covered = set().union(*truth_classes)
    # classes from different planes are either identical or disjoint
    out["classes_form_partition"] = sum(len(c) for c in truth_classes) == len(covered)

    if n == 2:
        plane_sets = {frozenset(p.lines) for p in planes}
        out["same_plane_iff_x22_y22"] = plane_sets == _partition(covered, lambda l: set_label(census.ctx, nf(l)))
        out["same_class_iff_x11_y11"] = truth_classes == _partition(
            covered, lambda l: (set_label(census.ctx, nf(l)), nf(l).x[1, 1], nf(l).y[1, 1])
        )
    else:
        sub_of_plane = {}
        for p in planes:
            sel = _selector_of(census, p)
            sub_of_plane.setdefault(sel[:2], set()).update(p.lines)
        truth_subsets = {frozenset(v) for v in sub_of_plane.values()}
        out["same_subset_iff_slots"] = truth_subsets == _partition(
            covered, lambda l: (nf(l).x[2, 2], nf(l).x[3, 2], nf(l).x[3, 3], nf(l).y[2, 2], nf(l).y[3, 2], nf(l).y[3, 3])
        )
        out["lines_cover_all_points"] = covered == set(census.points)
    out["same_class_iff_equal_off_corner"] = truth_classes == _partition(covered, lambda l: _slots_except(nf(l), {corner}))
    out["distinct_in_class_iff_corner_differs"] = all(
        len({(nf(l).x[corner], nf(l).y[corner]) for l in cls}) == len(cls) for cls in truth_classes
    )
    out["all_hold"] = all(out.values())
    return out


def check_infinity_n2(census: LineCensus) -> dict:
    """Points at infinity, type-(a) submodules and the non-unimodular FCS (n = 2)."""
    reg = census.registry
    type_a = set(classify_order_q_n2(census)["a"])
    planes = [build_affine_plane(census, s) for s in plane_selectors(census)]
    closures = [projective_closure(p, census) for p in planes]
    at_inf = [frozenset(c.points[len(p.points):]) for p, c in zip(planes, closures)]
    closure_lines = [c.lines[-1] for c in closures]
    nonuni = set(census.nonuni_fcs)
    union_pts = set().union(*(set(c.incidence[c.lines[-1]]) for c in closures))
    return {
        "same_points_at_infinity": len(set(at_inf)) == 1,
        "points_at_infinity_are_type_a": at_inf[0] == frozenset(type_a),
        "closure_lines_are_nonuni_fcs": all(l in nonuni for l in closure_lines),
        "closure_line_union_is_type_a": union_pts == type_a,
        "nonuni_contain_all_type_a": all(submodule_contains(reg[f], reg[a]) for f in nonuni for a in type_a),
        "nonuni_contain_no_shielded": not any(submodule_contains(reg[f], reg[s]) for f in nonuni for s in census.shielded),
    }


# -- isomorphism search ----------------------------------------------------------------------------


def classical_plane(q: int, projective: bool = False) -> tuple[list, list[frozenset]]:
    """AG(2,q) or PG(2,q) as (points, lines) with points given as coordinate tuples."""
    f = field_make(q)
    F = range(q)
    if not projective:
        pts = [(a, b) for a in F for b in F]
        lines = [frozenset((x, int(f.add[f.mul[m, x], c])) for x in F) for m in F for c in F]
        lines += [frozenset((c, y) for y in F) for c in F]
        return pts, lines
    pts = [(1, a, b) for a in F for b in F] + [(0, 1, b) for b in F] + [(0, 0, 1)]

    def dot(u, v):
        acc = 0
        for a, b in zip(u, v):
            acc = int(f.add[acc, f.mul[a, b]])
        return acc

    lines = [frozenset(p for p in pts if dot(p, l) == 0) for l in pts]
    return pts, lines


def isomorphism_to_classical(s: IncidenceStructure, q: int, projective: bool = False):
    """Backtracking search for a collinearity-preserving point bijection.

    Returns a dict point id -> classical coordinates, or None if no bijection
    exists.
    """
    if q > MAX_SEARCH_Q:
        raise OrderTooLargeForSearch(f"isomorphism search is limited to q <= {MAX_SEARCH_Q}")
    cpts, clines = classical_plane(q, projective)
    sets = [frozenset(s.incidence[l]) for l in s.lines]
    if len(s.points) != len(cpts) or len(sets) != len(clines):
        return None
    if sorted(map(len, sets)) != sorted(map(len, clines)):
        return None
    cline_of = {}
    for i, cl in enumerate(clines):
        for a, b in itertools.combinations(sorted(cl), 2):
            cline_of[(a, b)] = cline_of[(b, a)] = i
    order = sorted(s.points)
    s_lines_of = {p: [i for i, ls in enumerate(sets) if p in ls] for p in order}
    image, used = {}, set()
    # image line index chosen for each structure line once two of its points are placed
    line_img = {}

    def consistent(p, c):
        for li in s_lines_of[p]:
            if li in line_img:
                if c not in clines[line_img[li]]:
                    return False
            else:
                placed = [image[o] for o in sets[li] if o in image]
                if placed and (placed[0], c) not in cline_of:
                    return False
        # points not on a common structure line must not be classically collinear with it
        return True

    def place(k):
        if k == len(order):
            return True
        p = order[k]
        for c in cpts:
            if c in used or not consistent(p, c):
                continue
            image[p] = c
            used.add(c)
            added = []
            for li in s_lines_of[p]:
                if li not in line_img:
                    placed = [image[o] for o in sets[li] if o in image and o != p]
                    if placed:
                        line_img[li] = cline_of[(placed[0], c)]
                        added.append(li)
            if len(set(line_img.values())) == len(line_img) and place(k + 1):
                return True
            for li in added:
                del line_img[li]
            del image[p]
            used.discard(c)
        return False

    if not place(0):
        return None
    # final confirmation: every structure line maps onto a classical line
    mapped = {frozenset(image[p] for p in ls) for ls in sets}
    if mapped != set(clines):
        return None
    return dict(image)
