"""Randomized eigensolvers for singular matrix pencils, with statistical
verification of their probabilistic condition-number behavior."""

__version__ = "0.1.0"

from .matcore import (
    EigenTriple,
    FieldKind,
    SingularPencilSuspected,
    generalized_eigen,
    nullspace_basis,
    qr_positive,
    rank_with_tol,
)
from .pencil import NormalRankInfo, Pencil, ZeroMatrix, normal_rank, scale_one_norm
from .randstat import (
    DistributionModel,
    RngState,
    TailBound,
    cdf_factor,
    cdf_product,
    expected_factor,
    expected_product,
    gaussian_matrix,
    ks_critical,
    ks_statistic,
    ks_two_sample,
    pdf_factor,
    pdf_product,
    sample_factor,
    sample_product,
    sphere_direction,
    stiefel_uniform,
    tail_bound,
)
from .kcfgen import (
    GroundTruth,
    IllConditionedDisguise,
    KcfBlock,
    KcfParseError,
    KcfSpec,
    assemble,
    corpus,
    disguise,
    jordan,
    left_singular,
    nilpotent,
    paper_pencil,
    parse_kcf_string,
    right_singular,
)
from .oracle import (
    DegenerateProjection,
    EigenvalueTruth,
    NotSimpleOrWrongRank,
    SensitivityResult,
    WeakCondEstimate,
    alpha_closed_form,
    directional_sensitivity,
    eig_witness,
    gamma_exact,
    weak_cond_estimate,
)
from .solvers import (
    CrossCheckReport,
    DistinctnessFailure,
    EigRecord,
    GenericityFailure,
    MatchFailure,
    MethodConfig,
    SolveReport,
    cross_check,
    solve,
    solve_augment,
    solve_modify,
    solve_project,
)
from .experiments import (
    BoundsTable,
    McReport,
    bounds_figure,
    mc_ratio,
    real_on_complex_experiment,
)
from .mmio import MatrixMarketError, read_matrix, write_matrix

__all__ = [name for name in dir() if not name.startswith("_")]
