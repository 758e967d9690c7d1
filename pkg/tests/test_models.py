"""Level graph construction: counts, measures, cells, serialization."""
import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from quecert import models
from quecert.errors import DomainError, LevelCapError
from quecert.models import (
    GASKET,
    INTERVAL,
    build_level,
    by_name,
    cell_of,
    edge_count,
    levelgraph_from_json,
    validate_word,
    vertex_count,
)


def test_by_name():
    assert by_name("interval") is INTERVAL
    assert by_name("gasket") is GASKET
    with pytest.raises(DomainError):
        by_name("pentagon")


def test_vertex_and_edge_counts():
    # 2^m + 1 and 2^m on the interval
    assert [vertex_count(INTERVAL, m) for m in range(5)] == [2, 3, 5, 9, 17]
    assert [edge_count(INTERVAL, m) for m in range(5)] == [1, 2, 4, 8, 16]
    # (3^{m+1} + 3)/2 and 3^{m+1} on the gasket
    assert [vertex_count(GASKET, m) for m in range(4)] == [3, 6, 15, 42]
    assert [edge_count(GASKET, m) for m in range(4)] == [3, 9, 27, 81]


@pytest.mark.parametrize("model", [INTERVAL, GASKET])
@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_build_level_counts(model, m):
    g = build_level(model, m)
    assert g.n == vertex_count(model, m)
    assert len(g.edges) == edge_count(model, m)
    assert len(g.cells) == model.num_contractions**m
    assert sum(g.measure) == 1


def test_level_cap():
    with pytest.raises(LevelCapError):
        build_level(INTERVAL, INTERVAL.max_level + 1)
    with pytest.raises(LevelCapError):
        build_level(GASKET, GASKET.max_level + 1)
    with pytest.raises(DomainError):
        build_level(INTERVAL, -1)


def test_interval_level_one_exact():
    g = build_level(INTERVAL, 1)
    assert g.vertices == (Fraction(0), Fraction(1, 2), Fraction(1))
    assert g.boundary == (0, 2)
    assert g.edges == ((0, 1), (1, 2))
    assert g.conductance == 2
    assert g.measure == (Fraction(1, 4), Fraction(1, 2), Fraction(1, 4))


def test_gasket_level_one_exact():
    g = build_level(GASKET, 1)
    # ascending lexicographic order of the barycentric pairs
    assert g.vertices == (
        (Fraction(0), Fraction(0)),
        (Fraction(0), Fraction(1, 2)),
        (Fraction(0), Fraction(1)),
        (Fraction(1, 2), Fraction(0)),
        (Fraction(1, 2), Fraction(1, 2)),
        (Fraction(1), Fraction(0)),
    )
    assert g.conductance == Fraction(5, 3)
    # corners carry 1/3 of a cell measure, midpoints 2/3 of one
    assert g.measure == (
        Fraction(1, 9),
        Fraction(2, 9),
        Fraction(1, 9),
        Fraction(2, 9),
        Fraction(2, 9),
        Fraction(1, 9),
    )
    assert len(g.edges) == 9


def test_gasket_conductance_growth():
    for m in range(4):
        g = build_level(GASKET, m)
        assert g.conductance == Fraction(5, 3) ** m


def test_canonical_ordering():
    for model, m in [(INTERVAL, 3), (GASKET, 2)]:
        g = build_level(model, m)
        assert list(g.vertices) == sorted(g.vertices)


def test_boundary_vertices():
    g = build_level(GASKET, 2)
    corners = [g.vertices[i] for i in g.boundary]
    assert corners == [
        (Fraction(0), Fraction(0)),
        (Fraction(0), Fraction(1)),
        (Fraction(1), Fraction(0)),
    ]


def test_cell_of_oracles():
    # first interval contraction: left half
    assert cell_of(INTERVAL, (1,)) == (Fraction(0), Fraction(1, 2))
    assert cell_of(INTERVAL, (2, 2)) == (Fraction(3, 4), Fraction(1))
    # first gasket contraction keeps the corner at the origin
    c = cell_of(GASKET, (1,))
    assert c == (
        (Fraction(0), Fraction(0)),
        (Fraction(1, 2), Fraction(0)),
        (Fraction(0), Fraction(1, 2)),
    )


def test_validate_word():
    assert validate_word(INTERVAL, [1, 2]) == (1, 2)
    with pytest.raises(DomainError):
        validate_word(INTERVAL, (0,))
    with pytest.raises(DomainError):
        validate_word(INTERVAL, (3,))
    with pytest.raises(DomainError):
        validate_word(GASKET, (4,))


def test_cells_partition_vertices():
    g = build_level(GASKET, 2)
    covered = set()
    for word, idx in g.cells.items():
        assert len(word) == 2
        assert len(idx) == 3
        covered.update(idx)
    assert covered == set(range(g.n))


def test_index_of():
    g = build_level(INTERVAL, 2)
    assert g.index_of(Fraction(1, 2)) == 2
    with pytest.raises(DomainError):
        g.index_of(Fraction(1, 3))


def test_json_round_trip():
    for model, m in [(INTERVAL, 2), (GASKET, 1)]:
        g = build_level(model, m)
        doc = json.loads(json.dumps(g.to_json()))
        g2 = levelgraph_from_json(doc)
        assert g2.vertices == g.vertices
        assert g2.edges == g.edges
        assert g2.measure == g.measure
        assert g2.cells == g.cells


def test_json_rejects_tampering():
    doc = build_level(INTERVAL, 1).to_json()
    doc["edges"] = doc["edges"][:-1]
    with pytest.raises(DomainError):
        levelgraph_from_json(doc)


@given(st.lists(st.integers(1, 2), min_size=1, max_size=6))
def test_interval_cells_have_width_2_to_minus_m(word):
    lo, hi = cell_of(INTERVAL, word)
    assert hi - lo == Fraction(1, 2 ** len(word))
    assert 0 <= lo < hi <= 1


@given(st.lists(st.integers(1, 3), min_size=1, max_size=5))
def test_gasket_cell_corners_are_level_vertices(word):
    corners = cell_of(GASKET, word)
    g = build_level(GASKET, len(word))
    for p in corners:
        assert g.index_of(p) >= 0
    # corners of one cell are pairwise distinct
    assert len(set(corners)) == 3


@given(st.integers(0, 5), st.data())
def test_apply_map_stays_in_triangle(m, data):
    j = data.draw(st.integers(1, 3))
    g = build_level(GASKET, min(m, 3))
    v = data.draw(st.sampled_from(list(g.vertices)))
    a, b = GASKET.apply_map(j, v)
    assert 0 <= a and 0 <= b and a + b <= 1
