"""Self-similar models and their level graphs.

Two models are provided: the unit interval refined dyadically, and the
Sierpinski gasket.  A level-m graph carries exact rational vertex
coordinates so that cell corners shared between neighbouring cells
deduplicate by equality, never by floating-point tolerance.

Interval vertices are single rationals k/2^m in [0, 1].  Gasket vertices
are pairs (a, b) of rationals with denominator 2^m: the barycentric
coordinates of the point with respect to the corners (p2, p3), i.e.
x = p1 + a (p2 - p1) + b (p3 - p1).  The corners are p1 = (0, 0),
p2 = (1, 0), p3 = (0, 1) in these coordinates.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Tuple, Union

from .errors import DomainError, LevelCapError

Vertex = Union[Fraction, Tuple[Fraction, Fraction]]

_HALF = Fraction(1, 2)


@dataclass(frozen=True)
class FractalModel:
    """Static description of one self-similar model.

    Conductance at level m is conductance_base**m on every edge; the
    measure weight of a vertex is measure_cell_factor**m times the
    boundary or interior factor.  delta prefactor/base give the proven
    closeness rate prefactor * base**m for the level-m approximation.
    """

    name: str
    num_contractions: int
    boundary_size: int
    conductance_base: Fraction
    measure_cell_factor: Fraction
    boundary_weight_factor: Fraction
    interior_weight_factor: Fraction
    max_level: int
    default_fine_offset: int
    delta_prefactor: float
    delta_base: float

    def boundary_vertices(self) -> tuple:
        if self.name == "interval":
            return (Fraction(0), Fraction(1))
        return (
            (Fraction(0), Fraction(0)),
            (Fraction(1), Fraction(0)),
            (Fraction(0), Fraction(1)),
        )

    def apply_map(self, j: int, v: Vertex) -> Vertex:
        """Image of vertex v under the j-th contraction (1-based)."""
        if not 1 <= j <= self.num_contractions:
            raise DomainError(
                f"letter {j} outside alphabet 1..{self.num_contractions}"
            )
        if self.name == "interval":
            return (v + (j - 1)) * _HALF
        a, b = v
        if j == 1:
            return (a * _HALF, b * _HALF)
        if j == 2:
            return ((a + 1) * _HALF, b * _HALF)
        return (a * _HALF, (b + 1) * _HALF)

    def theory_delta(self, m: int) -> float:
        """Proven closeness rate of the level-m approximation."""
        return self.delta_prefactor * self.delta_base**m


INTERVAL = FractalModel(
    name="interval",
    num_contractions=2,
    boundary_size=2,
    conductance_base=Fraction(2),
    measure_cell_factor=Fraction(1, 2),
    boundary_weight_factor=Fraction(1, 2),
    interior_weight_factor=Fraction(1),
    max_level=8,
    default_fine_offset=5,
    delta_prefactor=1.0 + math.sqrt(2.0),
    delta_base=0.5,
)

GASKET = FractalModel(
    name="gasket",
    num_contractions=3,
    boundary_size=3,
    conductance_base=Fraction(5, 3),
    measure_cell_factor=Fraction(1, 3),
    boundary_weight_factor=Fraction(1, 3),
    interior_weight_factor=Fraction(2, 3),
    max_level=7,
    default_fine_offset=3,
    delta_prefactor=(1.0 + math.sqrt(3.0)) * math.sqrt(2.0 / 3.0),
    delta_base=5.0**-0.5,
)

MODELS = {m.name: m for m in (INTERVAL, GASKET)}


def by_name(name: str) -> FractalModel:
    try:
        return MODELS[name]
    except KeyError:
        raise DomainError(f"unknown model {name!r}; pick one of {sorted(MODELS)}")


def validate_word(model: FractalModel, word) -> tuple:
    """Check letters against the model alphabet, return the word as a tuple."""
    w = tuple(word)
    for letter in w:
        if not isinstance(letter, int) or not 1 <= letter <= model.num_contractions:
            raise DomainError(
                f"letter {letter!r} outside alphabet 1..{model.num_contractions}"
            )
    return w


def cell_of(model: FractalModel, word) -> tuple:
    """Exact corner coordinates of the cell indexed by the given word.

    The empty word gives the whole space: the interval endpoints or the
    gasket corner triple.
    """
    w = validate_word(model, word)
    corners = model.boundary_vertices()
    for letter in reversed(w):
        corners = tuple(model.apply_map(letter, v) for v in corners)
    return corners


def vertex_count(model: FractalModel, m: int) -> int:
    if m < 0:
        raise DomainError("level must be nonnegative")
    if model.name == "interval":
        return 2**m + 1
    return (3 ** (m + 1) + 3) // 2


def edge_count(model: FractalModel, m: int) -> int:
    if m < 0:
        raise DomainError("level must be nonnegative")
    if model.name == "interval":
        return 2**m
    return 3 ** (m + 1)


@dataclass(frozen=True, eq=False)
class LevelGraph:
    """Weighted graph of one refinement level.

    vertices are in canonical order (ascending by exact coordinate) and
    all downstream matrices inherit that order.  All edges of a level
    share one conductance; measure entries are the exact weights.
    """

    model: FractalModel
    level: int
    vertices: tuple
    boundary: tuple  # indices of the model boundary vertices
    edges: tuple  # (i, j) index pairs with i < j
    conductance: Fraction
    measure: tuple  # Fraction per vertex
    cells: dict  # word -> corner index tuple, image order of V0

    def __post_init__(self):
        object.__setattr__(
            self, "_index", {v: i for i, v in enumerate(self.vertices)}
        )

    @property
    def n(self) -> int:
        return len(self.vertices)

    def index_of(self, v: Vertex) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise DomainError(f"{v!r} is not a level-{self.level} vertex")

    def to_json(self) -> dict:
        def enc(v):
            if isinstance(v, Fraction):
                return [v.numerator, v.denominator]
            return [[c.numerator, c.denominator] for c in v]

        c = self.conductance
        return {
            "schema": "levelgraph/1",
            "model": self.model.name,
            "level": self.level,
            "vertices": [enc(v) for v in self.vertices],
            "boundary": list(self.boundary),
            "edges": [[i, j, c.numerator, c.denominator] for i, j in self.edges],
            "measure": [[w.numerator, w.denominator] for w in self.measure],
        }


@lru_cache(maxsize=None)
def build_level(model: FractalModel, m: int, max_level: int | None = None) -> LevelGraph:
    """Construct the level-m graph with exact-rational vertex identity."""
    cap = model.max_level if max_level is None else max_level
    if m < 0:
        raise DomainError("level must be nonnegative")
    if m > cap:
        raise LevelCapError(
            f"level {m} exceeds the cap {cap} for model {model.name}"
        )

    v0 = model.boundary_vertices()
    seen: dict = {}
    cell_corner_coords: list = []
    words = itertools.product(range(1, model.num_contractions + 1), repeat=m)
    for word in words:
        corners = cell_of(model, word)
        cell_corner_coords.append((word, corners))
        for v in corners:
            seen[v] = None

    vertices = tuple(sorted(seen))
    index = {v: i for i, v in enumerate(vertices)}
    cells = {
        word: tuple(index[v] for v in corners)
        for word, corners in cell_corner_coords
    }

    edge_set = set()
    for corner_idx in cells.values():
        for i, j in itertools.combinations(corner_idx, 2):
            edge_set.add((i, j) if i < j else (j, i))
    edges = tuple(sorted(edge_set))

    v0_set = set(v0)
    measure = tuple(
        model.measure_cell_factor**m
        * (
            model.boundary_weight_factor
            if v in v0_set
            else model.interior_weight_factor
        )
        for v in vertices
    )

    graph = LevelGraph(
        model=model,
        level=m,
        vertices=vertices,
        boundary=tuple(sorted(index[v] for v in v0)),
        edges=edges,
        conductance=model.conductance_base**m,
        measure=measure,
        cells=cells,
    )

    # construction identities, exact in rational arithmetic
    assert sum(measure) == 1
    assert len(vertices) == vertex_count(model, m)
    assert len(edges) == edge_count(model, m)
    return graph


def levelgraph_from_json(doc: dict) -> LevelGraph:
    """Rebuild a LevelGraph from its JSON document (validating the schema)."""
    if doc.get("schema") != "levelgraph/1":
        raise DomainError(f"unsupported schema {doc.get('schema')!r}")
    model = by_name(doc["model"])
    graph = build_level(model, int(doc["level"]))
    body = {k: v for k, v in doc.items() if k != "meta"}
    if graph.to_json() != body:
        raise DomainError("document does not match the canonical construction")
    return graph
