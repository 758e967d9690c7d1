"""Discrete energy forms on level graphs.

A level graph turns into a pencil (L, M): symmetric stiffness matrix L
assembled from edge conductances, diagonal mass matrix M from the
measure weights.  The Laplacian of the level is the operator pencil,
never an explicitly formed M^{-1}L unless asked for.

Also here: harmonic extension (closed-form rule and an independent
linear-solve minimizer), the Schur-complement compatibility check, the
resistance metric and the pointwise Hoelder estimate.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg as sla

from .errors import DomainError, NumericsError
from .models import FractalModel, LevelGraph, build_level, vertex_count

_HALF = Fraction(1, 2)


@dataclass(eq=False)
class FormPencil:
    """Stiffness L and diagonal mass M of one discrete energy form.

    M is stored as the 1-D array of diagonal entries.  graph is kept for
    vertex lookup when the pencil comes from a fractal level; pencils of
    other origins (the obstacle demo) leave it as None.
    """

    L: np.ndarray
    M: np.ndarray
    level: int | None = None
    model: str | None = None
    graph: LevelGraph | None = None
    _G: np.ndarray | None = field(default=None, repr=False)
    _spectral: object = field(default=None, repr=False)  # eigensolve cache

    @property
    def n(self) -> int:
        return self.M.shape[0]

    def energy(self, f) -> float:
        f = np.asarray(f)
        return float(np.real(np.vdot(f, self.L @ f)))

    def mass_norm(self, f) -> float:
        f = np.asarray(f)
        return float(np.sqrt(np.real(np.vdot(f, self.M * f))))

    def energy_norm(self, f) -> float:
        """Form norm: sqrt(|f|_mu^2 + E(f))."""
        return float(np.sqrt(self.mass_norm(f) ** 2 + max(self.energy(f), 0.0)))

    def energy_metric(self) -> np.ndarray:
        """Dense Gram matrix of the form norm, diag(M) + L."""
        if self._G is None:
            self._G = self.L + np.diag(self.M)
        return self._G

    def laplacian(self) -> np.ndarray:
        """Dense M^{-1} L; prefer the pencil form where possible."""
        return self.L / self.M[:, None]


def assemble(graph: LevelGraph) -> FormPencil:
    """Pencil of one level.  Entries accumulate in exact rationals
    (conductance times integer degree) and convert to double once, one
    half-ulp of rounding per entry; with a dyadic conductance the row
    sums stay exactly zero."""
    n = graph.n
    c = graph.conductance
    deg = [0] * n
    for i, j in graph.edges:
        deg[i] += 1
        deg[j] += 1
    L = np.zeros((n, n))
    off = -float(c)
    for i, j in graph.edges:
        L[i, j] = off
        L[j, i] = off
    for i in range(n):
        L[i, i] = float(c * deg[i])
    M = np.array([float(w) for w in graph.measure])
    return FormPencil(L=L, M=M, level=graph.level, model=graph.model.name, graph=graph)


def level_pencil(model: FractalModel, m: int) -> FormPencil:
    return assemble(build_level(model, m))


def _level_from_size(model: FractalModel, n: int) -> int:
    for m in range(model.max_level + 1):
        if vertex_count(model, m) == n:
            return m
    raise DomainError(f"no {model.name} level has {n} vertices")


def extension_matrix(model: FractalModel, m: int) -> np.ndarray:
    """Prolongation V_m -> V_{m+1} by one-step harmonic extension.

    Coarse vertices keep their value.  Interval: a new midpoint averages
    the two cell endpoints.  Gasket: a new vertex takes 2/5 of each
    adjacent cell corner and 1/5 of the opposite one.
    """
    coarse = build_level(model, m)
    fine = build_level(model, m + 1)
    P = np.zeros((fine.n, coarse.n))
    for k, v in enumerate(coarse.vertices):
        P[fine.index_of(v), k] = 1.0
    for corner_idx in coarse.cells.values():
        coords = [coarse.vertices[i] for i in corner_idx]
        if model.name == "interval":
            a, b = coords
            r = fine.index_of((a + b) * _HALF)
            P[r, corner_idx[0]] = 0.5
            P[r, corner_idx[1]] = 0.5
        else:
            for (ia, a), (ib, b) in itertools.combinations(
                zip(corner_idx, coords), 2
            ):
                mid = ((a[0] + b[0]) * _HALF, (a[1] + b[1]) * _HALF)
                r = fine.index_of(mid)
                (ic,) = [k for k in corner_idx if k not in (ia, ib)]
                P[r, ia] = 0.4
                P[r, ib] = 0.4
                P[r, ic] = 0.2
    return P


def harmonic_extension(model: FractalModel, f) -> np.ndarray:
    """Energy-minimizing extension of coarse values one level down."""
    f = np.asarray(f, dtype=float)
    m = _level_from_size(model, f.shape[0])
    return extension_matrix(model, m) @ f


def harmonic_extension_minimized(model: FractalModel, f) -> np.ndarray:
    """Same extension via the constrained minimization itself (interior
    linear solve).  Independent of the closed-form rule; used to
    cross-check it."""
    f = np.asarray(f, dtype=float)
    m = _level_from_size(model, f.shape[0])
    coarse = build_level(model, m)
    fine = build_level(model, m + 1)
    Lf = assemble(fine).L
    keep = [fine.index_of(v) for v in coarse.vertices]
    interior = sorted(set(range(fine.n)) - set(keep))
    g = np.zeros(fine.n)
    g[keep] = f
    if interior:
        A = Lf[np.ix_(interior, interior)]
        b = -Lf[np.ix_(interior, keep)] @ f
        try:
            g[interior] = sla.solve(A, b, assume_a="pos")
        except np.linalg.LinAlgError as e:
            raise NumericsError(f"interior solve failed: {e}")
    return g


def schur_compatibility_residual(model: FractalModel, m: int) -> float:
    """Relative Frobenius distance between L_m and the Schur complement
    of L_{m+1} onto V_m.  Compatibility of the hierarchy means this is
    zero up to roundoff."""
    coarse = build_level(model, m)
    fine = build_level(model, m + 1)
    Lc = assemble(coarse).L
    Lf = assemble(fine).L
    keep = [fine.index_of(v) for v in coarse.vertices]
    interior = sorted(set(range(fine.n)) - set(keep))
    A = Lf[np.ix_(keep, keep)]
    B = Lf[np.ix_(keep, interior)]
    D = Lf[np.ix_(interior, interior)]
    try:
        S = A - B @ sla.solve(D, B.T, assume_a="pos")
    except np.linalg.LinAlgError as e:
        raise NumericsError(f"singular interior block at level {m + 1}: {e}")
    return float(np.linalg.norm(S - Lc) / np.linalg.norm(Lc))


def resolve_vertex(pencil: FormPencil, x) -> int:
    """Map a vertex reference to a row index.

    Pencils with a level graph take exact coordinates (a rational for
    the interval, a rational pair for the gasket); bare integers are
    promoted to interval coordinates.  Graph-free pencils take indices.
    """
    g = pencil.graph
    if g is None:
        if not isinstance(x, (int, np.integer)):
            raise DomainError("pencil has no vertex coordinates; pass an index")
        if not 0 <= int(x) < pencil.n:
            raise DomainError(f"index {x} out of range")
        return int(x)
    if g.model.name == "interval":
        return g.index_of(Fraction(x))
    if isinstance(x, tuple) and len(x) == 2:
        return g.index_of((Fraction(x[0]), Fraction(x[1])))
    raise DomainError(f"{x!r} is not a valid gasket vertex (need a pair)")


def resistance(pencil: FormPencil, x, y) -> float:
    """Effective resistance: reciprocal of the minimal energy among
    functions with u(x) = 1, u(y) = 0.  Solved by grounding both
    vertices and eliminating the rest."""
    ix = resolve_vertex(pencil, x)
    iy = resolve_vertex(pencil, y)
    if ix == iy:
        raise DomainError("resistance needs two distinct vertices")
    # canonical role assignment: same arithmetic for (x,y) and (y,x)
    a, b = (ix, iy) if ix < iy else (iy, ix)
    L = pencil.L
    rest = [k for k in range(pencil.n) if k != a and k != b]
    u = np.zeros(pencil.n)
    u[a] = 1.0
    if rest:
        A = L[np.ix_(rest, rest)]
        try:
            u[rest] = sla.solve(A, -L[rest, a], assume_a="pos")
        except np.linalg.LinAlgError as e:
            raise NumericsError(f"grounded solve failed: {e}")
    e = float(u @ L @ u)
    if e <= 0.0:
        raise NumericsError("minimal energy not positive; graph disconnected?")
    return 1.0 / e


def hoelder_check(pencil: FormPencil, u, x, y):
    """Evaluate |u(x)-u(y)|^2 against E(u) R(x,y)."""
    u = np.asarray(u, dtype=float)
    ix = resolve_vertex(pencil, x)
    iy = resolve_vertex(pencil, y)
    lhs = float(abs(u[ix] - u[iy]) ** 2)
    rhs = pencil.energy(u) * resistance(pencil, x, y)
    return lhs, rhs, lhs <= rhs * (1.0 + 1e-10)


def pencil_to_json(pencil: FormPencil) -> dict:
    """Sparse JSON form: upper-triangle coordinate triplets plus the
    mass diagonal.  Dense matrices are never serialized."""
    L = pencil.L
    n = pencil.n
    iu = np.triu_indices(n)
    vals = L[iu]
    nz = vals != 0.0
    triplets = [
        [int(i), int(j), float(v)]
        for i, j, v in zip(iu[0][nz], iu[1][nz], vals[nz])
    ]
    return {
        "schema": "pencil/1",
        "model": pencil.model,
        "level": pencil.level,
        "L": triplets,
        "M": [float(w) for w in pencil.M],
    }


def pencil_from_json(doc: dict) -> FormPencil:
    if doc.get("schema") != "pencil/1":
        raise DomainError(f"unsupported schema {doc.get('schema')!r}")
    M = np.asarray(doc["M"], dtype=float)
    n = M.shape[0]
    L = np.zeros((n, n))
    for i, j, v in doc["L"]:
        L[i, j] = v
        L[j, i] = v
    return FormPencil(L=L, M=M, level=doc.get("level"), model=doc.get("model"))
