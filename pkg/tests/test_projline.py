from __future__ import annotations

import itertools
from collections import Counter

import numpy as np
import pytest

from oracles import OracleField, is_free_by_rank
from trimat_geom import projline as pl
from trimat_geom.errors import DimensionUnsupported
from trimat_geom.modspace import ModPair, generator_orbit, is_unimodular


@pytest.mark.parametrize("n,q", [(2, 2), (2, 3), (2, 4), (2, 5), (3, 2), (3, 3)])
def test_counts_match_closed_forms(census, n, q):
    c = census(n, q)
    forms = pl.closed_forms(n, q)
    assert len(c.points) == forms["points"]
    assert len(c.nonuni_fcs) == forms["nonuni_fcs"]
    assert len(c.shielded) == forms["shielded"]
    assert pl.outlier_report(c)["outlier_generators_of_nonuni_fcs"] == forms["outlier_generators"]


@pytest.mark.parametrize("n,q", [(2, 2), (2, 3), (3, 2)])
def test_points_are_exactly_unimodular_orbits(census, n, q):
    c = census(n, q)
    ctx = c.ctx
    reg = c.registry
    F = OracleField(q)
    point_set = set(c.points)
    for code in range(ctx.size**2):
        g = ModPair.from_code(ctx, code)
        sid = reg.id_of_pair(code)
        if is_unimodular(g):
            assert sid in point_set
        elif sid in point_set:
            raise AssertionError("a non-unimodular pair generates a point")
        if sid in c.nonuni_fcs:
            assert is_free_by_rank(F, g.x.to_rows(), g.y.to_rows())


@pytest.mark.parametrize("n,q", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_partition_shape(census, n, q):
    c = census(n, q)
    sets = Counter(v[0] for v in c.point_partition.values())
    assert len(sets) == q + 1
    assert set(sets.values()) == {len(c.points) // (q + 1)}
    shielded_sets = Counter(v[0] for v in c.shielded_partition.values())
    assert set(shielded_sets.values()) == {len(c.shielded) // (q + 1)}
    if n == 3:
        subsets = Counter(c.point_partition.values())
        assert len(subsets) == (q + 1) * (q * q + q)
        assert set(subsets.values()) == {q * q * (q + 1)}
        shielded_subsets = Counter(c.shielded_partition.values())
        assert set(shielded_subsets.values()) == {q**4}
        assert set(subsets) == set(shielded_subsets)


@pytest.mark.parametrize("n,q", [(2, 3), (3, 2)])
def test_normal_form_is_orbit_invariant(census, n, q):
    c = census(n, q)
    rng = np.random.default_rng(3)
    for sid in rng.choice(c.points + c.shielded, size=40, replace=False):
        sub = c.registry[int(sid)]
        orbit = generator_orbit(c.ctx, sub.canonical_code, strict=False)
        forms = {pl.normal_form(c.ctx, g) for g in orbit}
        assert len(forms) == 1
        assert forms.pop().code in sub


def test_normal_forms_of_points_n2(census):
    # first set: (I, [[y11],[y21,0]]) or ([[0],[x21,1]], [[1],[0,0]]); k-set: Y has unit diagonal
    c = census(2, 3)
    for sid in c.points:
        nf = c.normal(sid)
        label = c.point_partition[sid][0]
        if label == pl.INF:
            assert nf.y[2, 2] == 0 and nf.x[2, 2] == 1
            assert (nf.x[1, 1], nf.x[2, 1]) == (1, 0) or (nf.x[1, 1], nf.y[1, 1], nf.y[2, 1]) == (0, 1, 0)
        else:
            assert nf.y[2, 2] == 1 and nf.x[2, 2] == label


def test_subset_labels_n3(census):
    c = census(3, 2)
    for sid in c.points:
        x32, x33, y32, y33 = c.point_partition[sid][1]
        assert x33 == 1 or y33 == 1
        if c.point_partition[sid][0] == pl.INF:
            assert x32 == 0


@pytest.mark.parametrize("n,q", [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3)])
def test_theorem_families_equal_brute_force(census, n, q):
    rep = pl.theorem_family_check(census(n, q))
    assert rep["equal"], rep
    assert not rep["not_nonunimodular_free"]
    assert rep["listed_generators"] == rep["distinct_submodules"] == pl.closed_forms(n, q)["nonuni_fcs"]


@pytest.mark.parametrize("q", [2, 3, 4])
def test_order_q_classification(census, q):
    c = census(2, q)
    cls = pl.classify_order_q_n2(c)
    assert len(cls["a"]) == q + 1
    assert len(cls["b"]) == q + 1
    assert all(len(v) == q * q for v in cls["b"].values())
    # the type-(b) submodules are exactly the shielded ones
    assert sorted(itertools.chain.from_iterable(cls["b"].values())) == sorted(c.shielded)


@pytest.mark.parametrize("q", [2, 3, 4])
def test_fast_path_n2_is_exact(census, q):
    rep = pl.fast_path_report(census(2, q))
    assert rep["disagreements"] == 0 and rep["agreement"] == 1.0


@pytest.mark.parametrize("q", [2, 3])
def test_fast_path_n3_report(census, q):
    c = census(3, q)
    fixed = pl.fast_path_report(c, table="corrected")
    assert fixed["disagreements"] == 0
    printed = pl.fast_path_report(c, table="printed")
    assert printed["disagreements"] > 0
    assert set(printed["by_branch"]) <= {"1(b)", "2(d)", "3(a)", "none"}
    for row in printed["diff"]:
        g = ModPair.from_rows(c.ctx.field, row["x"], row["y"])
        assert g.code == row["pair"]
        assert row["brute_force"] == is_free_by_rank(OracleField(q), row["x"], row["y"])


def test_scalar_criteria(census):
    c2, c3 = census(2, 2), census(3, 2)
    f = c2.ctx.field
    assert pl.fast_free_nonuni_n2(c2.ctx, ModPair.from_rows(f, [[1], [0, 0]], [[0], [1, 0]]))
    assert not pl.fast_free_nonuni_n2(c2.ctx, ModPair.from_rows(f, [[1], [1, 0]], [[1], [1, 0]]))
    g = ModPair.from_rows(f, [[1], [0, 0], [0, 1, 0]], [[0], [1, 0], [0, 0, 0]])
    assert pl.fast_free_nonuni_n3(c3.ctx, g) and pl.fast_free_nonuni_n3(c3.ctx, g, table="corrected")
    with pytest.raises(DimensionUnsupported):
        pl.fast_free_nonuni_n3(c2.ctx, g)
    with pytest.raises(DimensionUnsupported):
        pl.fast_free_nonuni_n2(c3.ctx, g)


def test_n4_partition_rejected(ctx):
    c4 = ctx(4, 2)
    with pytest.raises(DimensionUnsupported):
        pl.enumerate_points(c4)


def test_abstract_formula_matches_closed_forms():
    for q in (2, 3, 4, 5):
        assert pl.abstract_plane_count(2, q) == pl.closed_forms(2, q)["affine_planes"]
        assert pl.abstract_plane_count(3, q) == pl.closed_forms(3, q)["affine_planes"]


def test_set_keys():
    assert pl.parse_set_key("first") == pl.INF
    assert pl.parse_set_key("k:2") == 2
    assert pl.set_key(pl.INF) == "inf" and pl.set_key(3) == "k:3"
    with pytest.raises(ValueError):
        pl.parse_set_key("second")
