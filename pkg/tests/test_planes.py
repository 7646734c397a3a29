from __future__ import annotations

import pytest

from oracles import FIGURE1_CLOSURE_LINE, FIGURE1_PLANES
from trimat_geom import planes as P
from trimat_geom.errors import NotAnAffinePlane, OrderTooLargeForSearch, SelectorInvalid, SubsetInvalid
from trimat_geom.export import element_label, figure1_pair_label
from trimat_geom.modspace import ModPair, submodule_contains
from trimat_geom.projline import INF, classify_order_q_n2


def _structure(points, lines):
    return P.IncidenceStructure("t", tuple(points), tuple(range(len(lines))), {i: tuple(sorted(l)) for i, l in enumerate(lines)})


AG2 = _structure(range(4), [(0, 1), (2, 3), (0, 2), (1, 3), (0, 3), (1, 2)])
FANO = _structure(range(7), [(0, 1, 2), (0, 3, 4), (0, 5, 6), (1, 3, 5), (1, 4, 6), (2, 3, 6), (2, 4, 5)])


def test_axioms_on_small_planes():
    rep = P.check_affine_axioms(AG2)
    assert rep.holds and rep.order == 2
    assert len(rep.parallel_classes) == 3 and rep.parallel_is_equivalence
    prep = P.check_projective_axioms(FANO)
    assert prep.holds and prep.order == 2


def test_repeated_line_breaks_a1():
    bad = _structure(range(4), [(0, 1), (0, 1), (2, 3), (0, 2), (1, 3), (0, 3), (1, 2)])
    rep = P.check_affine_axioms(bad)
    assert not rep.a1_holds
    assert (0, 1, 2) in rep.a1_failures


def test_collinear_points_break_a3():
    rep = P.check_affine_axioms(_structure(range(3), [(0, 1, 2)]))
    assert not rep.a3_holds and not rep.holds


def test_affine_plane_is_not_projective():
    rep = P.check_projective_axioms(AG2)
    assert not rep.projective["two_lines_one_point"] and not rep.holds


@pytest.mark.parametrize("n,q", [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3)])
def test_every_plane_and_closure(census, n, q):
    c = census(n, q)
    sels = P.plane_selectors(c)
    assert len(sels) == (q + 1) ** (n - 1) * q ** (3 * (n - 1) * (n - 2) // 2)
    for sel in sels:
        plane = P.build_affine_plane(c, sel)
        rep = P.check_affine_axioms(plane)
        assert rep.holds and rep.order == q
        assert len(plane.points) == q * q and len(plane.lines) == q * q + q
        assert all(len(cls) == q for cls in rep.parallel_classes) and len(rep.parallel_classes) == q + 1
        through = plane.lines_through()
        assert all(len(v) == q + 1 for v in through.values())
        closure = P.projective_closure(plane, c)
        prep = P.check_projective_axioms(closure)
        assert prep.holds and prep.order == q
        assert len(closure.points) == len(closure.lines) == q * q + q + 1


def test_incidence_is_containment(census):
    c = census(3, 2)
    plane = P.build_affine_plane(c, P.plane_selectors(c)[5])
    for line in plane.lines:
        for p in plane.points:
            assert (p in plane.incidence[line]) == submodule_contains(c.registry[line], c.registry[p])


@pytest.mark.parametrize("q", [2, 3, 4])
def test_closure_uniqueness_n2(census, q):
    c = census(2, q)
    rep = P.check_infinity_n2(c)
    assert all(rep.values()), rep


def test_closure_entities_are_real_submodules(census):
    c = census(2, 3)
    plane = P.build_affine_plane(c, (INF,))
    closure = P.projective_closure(plane, c)
    new_points = closure.points[len(plane.points):]
    assert set(new_points) == set(classify_order_q_n2(c)["a"])
    assert closure.lines[-1] in c.nonuni_fcs
    assert all(closure.labels[p]["at_infinity"] for p in new_points)


@pytest.mark.parametrize("n,q", [(2, 3), (3, 2), (3, 3)])
def test_closure_line_formula(census, n, q):
    rep = P.closure_line_formula_report(census(n, q))
    assert not rep["failures_in_used_cases"]
    # only the zero pair fails, which no affine plane uses
    assert [(r["x22"], r["y22"]) for r in rep["failures"]] == [(0, 0)]
    assert len(rep["points_at_infinity"]) == q + 1


@pytest.mark.parametrize("q,count,shape", [(2, 18, (4, 6)), (3, 48, (9, 12))])
def test_2affine_planes(census, q, count, shape):
    c = census(3, q)
    subsets = P.subset_labels(c)
    assert len(subsets) == count
    for sub in subsets:
        s = P.build_2affine_plane(c, sub)
        assert (len(s.points), len(s.lines)) == shape
        rep = P.check_affine_axioms(s)
        assert rep.holds and rep.order == q


def test_2affine_some_reading(census):
    c = census(3, 2)
    for sub in P.subset_labels(c):
        assert P.check_affine_axioms(P.build_2affine_plane(c, sub, reading="some")).holds


@pytest.mark.parametrize("n,q", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_corollaries(census, n, q):
    rep = P.check_corollaries(census(n, q))
    assert rep["all_hold"], rep


def test_figure1_concordance(census):
    c = census(2, 2)
    label_sets = []
    for sel in P.plane_selectors(c):
        plane = P.build_affine_plane(c, sel)
        label_sets.append({tuple(int(v) for v in element_label(c, p).strip("()").split(",")) for p in plane.points})
        closure = P.projective_closure(plane, c)
        line_pts = closure.incidence[closure.lines[-1]]
        assert {tuple(int(v) for v in element_label(c, p).strip("()").split(",")) for p in line_pts} == FIGURE1_CLOSURE_LINE
    assert sorted(map(sorted, label_sets)) == sorted(map(sorted, FIGURE1_PLANES))


def test_figure1_point_labels(census):
    c = census(2, 2)
    # E11 -> 1 and E22 -> 3 combine by XOR, so (I, 0) is labelled (2, 0)
    assert figure1_pair_label(ModPair.from_rows(c.ctx.field, [[1], [0, 1]], [[0], [0, 0]])) == (2, 0)


@pytest.mark.parametrize("n,q", [(2, 2), (2, 3), (3, 2)])
def test_isomorphism_found(census, n, q):
    c = census(n, q)
    for sel in P.plane_selectors(c)[:6]:
        plane = P.build_affine_plane(c, sel)
        iso = P.isomorphism_to_classical(plane, q)
        assert iso is not None and len(set(iso.values())) == q * q
        closure = P.projective_closure(plane, c)
        assert P.isomorphism_to_classical(closure, q, projective=True) is not None


def test_isomorphism_2affine(census):
    c = census(3, 3)
    s = P.build_2affine_plane(c, P.subset_labels(c)[0])
    assert P.isomorphism_to_classical(s, 3) is not None


def test_isomorphism_negative_controls():
    flipped = _structure(range(4), [(0, 1), (2, 3), (0, 2), (1, 3), (0, 3), (1, 2, 0)])
    assert P.isomorphism_to_classical(flipped, 2) is None
    # right sizes, wrong geometry: two lines swapped for a pair of copies
    weird = _structure(range(4), [(0, 1), (2, 3), (0, 1), (2, 3), (0, 3), (1, 2)])
    assert P.isomorphism_to_classical(weird, 2) is None
    assert P.isomorphism_to_classical(FANO, 2, projective=True) is not None
    with pytest.raises(OrderTooLargeForSearch):
        P.isomorphism_to_classical(AG2, 5)


def test_isomorphism_q4(census):
    c = census(2, 4)
    plane = P.build_affine_plane(c, P.plane_selectors(c)[0])
    assert P.isomorphism_to_classical(plane, 4) is not None


def test_errors(census):
    c2, c3 = census(2, 2), census(3, 2)
    with pytest.raises(SelectorInvalid):
        P.build_affine_plane(c2, (7,))
    with pytest.raises(SubsetInvalid):
        P.build_2affine_plane(c3, (INF, (1, 1, 1, 1)))
    with pytest.raises(NotAnAffinePlane):
        P.projective_closure(_structure(range(3), [(0, 1, 2)]), c2)
