from __future__ import annotations

from functools import lru_cache

import pytest

from trimat_geom.gf import field_make
from trimat_geom.projline import line_census
from trimat_geom.trimat import ring_context


@lru_cache(maxsize=None)
def cached_census(n: int, q: int):
    return line_census(ring_context(n, field_make(q)), workers=1)


@pytest.fixture
def census():
    return cached_census


@pytest.fixture
def ctx():
    return lambda n, q: ring_context(n, field_make(q))
