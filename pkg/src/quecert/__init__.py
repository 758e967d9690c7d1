"""Certified closeness of graph Laplacian hierarchies.

Builds the dyadic interval and Sierpinski gasket level graphs, the
prolongation/sampling identification maps between levels, and measures
the tight constant of every inequality in the closeness framework,
together with the spectral consequences (resolvent, heat, projection,
eigenvalue and eigenvector comparisons) and a 1D obstacle demo.
"""

from .errors import (
    BoundViolationError,
    ConfigError,
    DomainError,
    LevelCapError,
    NumericsError,
    QueError,
)
from .models import GASKET, INTERVAL, FractalModel, LevelGraph, build_level, by_name, cell_of, vertex_count
from .forms import (
    FormPencil,
    assemble,
    harmonic_extension,
    level_pencil,
    resistance,
    schur_compatibility_residual,
)
from .identify import IdentificationPair, build_identification, column_spline, identity_pair
from .certify import (
    QueCertificate,
    certify,
    combine_lemma_b,
    compose,
    delta_from_delta_hat,
    delta_hat_from_delta,
    gnrs_verdict,
    operator_level_certificate,
    operator_transitivity_bound,
    weighted_operator_norm,
)
from .spectral import (
    SpectralDecomposition,
    convergence_table,
    eigensolve,
    eigenvector_comparison,
    hausdorff_distance,
    heat_comparison,
    heat_constant,
    projection_comparison,
    projection_constants,
    resolvent_comparison,
    resolvent_constant,
)
from .obstacle import (
    ObstacleModel,
    build_obstacle_model,
    build_extension,
    certify_obstacle,
    elliptic_regularity_constant,
    measure_smallness_delta,
    sweep_obstacle,
)

__version__ = "0.1.0"
