"""Identification operators between a coarse and a fine level.

Four maps tie level m to level M > m: the prolongation J (iterated
harmonic extension, columns are the coarse splines), its weighted
adjoint Jp, the form-domain copy J1 = J, and the sampling map Jp1 that
evaluates fine vectors at the coarse vertices.  The fine level stands
in for the limit space.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .forms import FormPencil, extension_matrix, level_pencil, resolve_vertex
from .models import FractalModel, build_level


@dataclass(eq=False)
class IdentificationPair:
    coarse: FormPencil
    fine: FormPencil
    J: np.ndarray  # (n_M, n_m) prolongation
    Jp: np.ndarray  # (n_m, n_M) weighted adjoint of J
    Jp1: np.ndarray  # (n_m, n_M) sampling at the coarse vertices
    coarse_indices: tuple  # fine row index of each coarse vertex

    @property
    def J1(self) -> np.ndarray:
        """Form-domain prolongation; identical to J here."""
        return self.J

    @property
    def levels(self) -> tuple:
        return (self.coarse.level, self.fine.level)


def weighted_adjoint(J: np.ndarray, M_coarse: np.ndarray, M_fine: np.ndarray) -> np.ndarray:
    """Adjoint of J as a map between the weighted l2 spaces."""
    return (J.T * M_fine[None, :]) / M_coarse[:, None]


def build_identification(
    model: FractalModel, m: int, M: int | None = None
) -> IdentificationPair:
    """Identification pair between levels m and M.

    M defaults to m plus the model's fine offset, clipped to the level
    cap.  J is the product of single-level extensions; Jp is derived
    from J so adjointness is an identity of the construction.
    """
    if M is None:
        M = min(m + model.default_fine_offset, model.max_level)
    if not 0 <= m < M:
        raise DomainError(f"need 0 <= m < M, got m={m}, M={M}")
    coarse = level_pencil(model, m)
    fine = level_pencil(model, M)

    J = np.eye(coarse.n)
    for k in range(m, M):
        J = extension_matrix(model, k) @ J
    Jp = weighted_adjoint(J, coarse.M, fine.M)

    fine_graph = build_level(model, M)
    coarse_indices = tuple(
        fine_graph.index_of(v) for v in build_level(model, m).vertices
    )
    Jp1 = np.zeros((coarse.n, fine.n))
    for k, r in enumerate(coarse_indices):
        Jp1[k, r] = 1.0

    return IdentificationPair(
        coarse=coarse,
        fine=fine,
        J=J,
        Jp=Jp,
        Jp1=Jp1,
        coarse_indices=coarse_indices,
    )


def identity_pair(model: FractalModel, m: int) -> IdentificationPair:
    """Degenerate pair of a level with itself; every map the identity."""
    pencil = level_pencil(model, m)
    eye = np.eye(pencil.n)
    return IdentificationPair(
        coarse=pencil,
        fine=pencil,
        J=eye.copy(),
        Jp=eye.copy(),
        Jp1=eye.copy(),
        coarse_indices=tuple(range(pencil.n)),
    )


def column_spline(pair: IdentificationPair, x) -> np.ndarray:
    """Fine-level values of the coarse spline sitting at vertex x: the
    column of J that is 1 at x and 0 at the other coarse vertices."""
    k = resolve_vertex(pair.coarse, x)
    return pair.J[:, k].copy()
