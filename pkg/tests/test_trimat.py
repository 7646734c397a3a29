from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import OracleField, matmul
from trimat_geom.errors import ContextMismatch, ContextTooLarge, DimensionMismatch, DimensionUnsupported
from trimat_geom.gf import field_make
from trimat_geom.trimat import TriMatrix, is_unit, mat_add, mat_mul, pos, ring_context, tri_size

CASES = [(2, 2), (2, 3), (2, 4), (2, 5), (3, 2), (3, 3), (4, 2)]


@pytest.mark.parametrize("n,q", CASES)
def test_sizes(n, q):
    ctx = ring_context(n, field_make(q))
    s = tri_size(n)
    assert ctx.size == q**s
    assert len(ctx.units) == (q - 1) ** n * q ** (s - n)
    assert len(ctx.radical) == q ** (s - n)
    assert ctx.mul.shape == (ctx.size, ctx.size)


def test_storage_order():
    assert [pos(i, j) for i in range(1, 4) for j in range(1, i + 1)] == list(range(6))
    f = field_make(3)
    m = TriMatrix.from_rows(f, [[1, 0, 0], [2, 0, 0], [0, 1, 2]])
    assert m.entries == (1, 2, 0, 0, 1, 2)
    assert m.code == 1 + 2 * 3 + 1 * 3**4 + 2 * 3**5
    assert TriMatrix.from_code(f, 3, m.code) == m
    assert TriMatrix.from_rows(f, [[1], [2, 0], [0, 1, 2]]) == m


def test_str_layout():
    f = field_make(2)
    assert str(TriMatrix.from_rows(f, [[1, 0], [0, 0]])) == "[[1,0],[0,0]]"


@pytest.mark.parametrize("n,q", [(2, 3), (2, 4), (3, 2)])
def test_mul_table_matches_oracle_exhaustively(n, q):
    ctx = ring_context(n, field_make(q))
    F = OracleField(q)
    rows = [ctx.matrix(c).to_rows() for c in range(ctx.size)]
    rng = np.random.default_rng(0)
    for a in rng.choice(ctx.size, size=min(ctx.size, 60), replace=False):
        for b in range(ctx.size):
            assert ctx.matrix(int(ctx.mul[a, b])).to_rows() == matmul(F, rows[a], rows[b])


@settings(max_examples=80, deadline=None)
@given(a=st.integers(0, 3**6 - 1), b=st.integers(0, 3**6 - 1), c=st.integers(0, 3**6 - 1))
def test_ring_axioms_n3_q3(a, b, c):
    ctx = ring_context(3, field_make(3))
    A, B, C = (ctx.matrix(v) for v in (a, b, c))
    assert (A * B) * C == A * (B * C)
    assert A * (B + C) == A * B + A * C
    assert mat_mul(A, ctx.matrix(ctx.identity)) == A
    assert ctx.mul[a, b] == (A * B).code
    assert ctx.add_codes(np.array([a]), np.array([b]))[0] == mat_add(A, B).code


@pytest.mark.parametrize("n,q", [(2, 3), (3, 2)])
def test_units_are_exactly_invertibles(n, q):
    ctx = ring_context(n, field_make(q))
    invertible = {a for a in range(ctx.size) if (ctx.mul[a] == ctx.identity).any()}
    assert invertible == set(ctx.units.tolist())
    assert all(is_unit(ctx.matrix(u)) for u in ctx.units[:20])


@pytest.mark.parametrize("n,q", [(2, 3), (3, 2)])
def test_radical_is_nilpotent_ideal(n, q):
    ctx = ring_context(n, field_make(q))
    J = set(ctx.radical.tolist())
    for j in ctx.radical:
        assert set(ctx.mul[:, j].tolist()) <= J
        assert set(ctx.mul[j, :].tolist()) <= J
        x = j
        for _ in range(n - 1):
            x = ctx.mul[x, j]
        assert x == 0


def test_errors():
    f2, f3 = field_make(2), field_make(3)
    with pytest.raises(DimensionUnsupported):
        ring_context(5, f2)
    with pytest.raises(DimensionUnsupported):
        ring_context(1, f2)
    with pytest.raises(ContextTooLarge):
        ring_context(4, f3)
    with pytest.raises(DimensionMismatch):
        TriMatrix.identity(f2, 2) * TriMatrix.identity(f2, 3)
    with pytest.raises(DimensionMismatch):
        TriMatrix.identity(f2, 2) + TriMatrix.identity(f3, 2)
    with pytest.raises(ValueError):
        TriMatrix.from_rows(f2, [[1, 1], [0, 1]])
    with pytest.raises(ValueError):
        TriMatrix.from_rows(f2, [[2], [0, 1]])
    with pytest.raises(ContextMismatch):
        ring_context(2, f2).code_of(TriMatrix.identity(f3, 2))
