"""Elliptic regularization lab for dissipative reaction-diffusion dynamics.

Solves the singularly perturbed elliptic problem on a semi-infinite
cylinder, its parabolic limit, and the dynamical-systems experiments that
compare the two: equilibrium censuses, unstable-manifold attractor clouds,
convergence-rate sweeps, periodic tracking and averaging.
"""

from .config import ExperimentConfig, load_config
from .dynamics import (
    CloudParams,
    EquilibriumRecord,
    PointCloud,
    attractor_distance_experiment,
    averaging_experiment,
    cloud_resolution,
    find_equilibria,
    hausdorff_dist,
    heteroclinic_classify,
    rate_fit,
    sample_attractor,
    spectral_analyze,
    spectral_split,
    symmetric_dist,
    track_periodic_solution,
    trajectory_vs_limit,
    unstable_manifold_sample,
)
from .elliptic import (
    Clamp,
    ProcessContext,
    ZeroTimeDerivative,
    default_dt,
    discrete_cascade,
    lambda0_margin,
    process_map,
    regularity_probe,
    solve_truncated_bvp,
    variational_process,
)
from .errors import (
    AsymmetricA,
    AverageNotConverged,
    BranchAmbiguity,
    DegenerateData,
    EigenFailure,
    EmptyCloud,
    FixedPointDiverged,
    FormatError,
    IoError,
    LabError,
    MissingPotential,
    NewtonDiverged,
    NonFiniteValue,
    NonHyperbolicLimit,
    NonPositiveData,
    NotHyperbolic,
    ParseError,
    ShapeMismatch,
    SingularJacobian,
    SlabOutOfRange,
    ValidationError,
)
from .fieldio import load_field, save_field
from .forcing import (
    Constant,
    FastScaled,
    Heteroclinic,
    Patchwork,
    Periodic,
    Quasiperiodic,
    eval_forcing,
    finest_scale,
    forcing_mean,
    forcing_period,
    negate_forcing,
    time_average,
)
from .model import (
    CouplingMatrices,
    CylinderField,
    CylinderGrid,
    Field,
    Nonlinearity,
    NonlinearityReport,
    SpatialGrid,
    Trajectory,
    apply_elliptic_operator,
    check_nonlinearity,
    cubic_nonlinearity,
    grad_cells,
    laplacian,
    linear_nonlinearity,
    sine_field,
    surrogate_v_norm,
    symbol_A,
    weighted_norm,
    zero_nonlinearity,
)
from .newton import NewtonOptions, damped_newton
from .parabolic import (
    LimitContext,
    StepOptions,
    implicit_step,
    limit_context_from_mean,
    lyapunov_value,
    semigroup_evolve,
    variational_evolve,
)
from .reports import Report, Table, Verdict, export_report
from .runner import run

__all__ = [
    "AsymmetricA",
    "AverageNotConverged",
    "BranchAmbiguity",
    "CloudParams",
    "Constant",
    "CouplingMatrices",
    "Clamp",
    "CylinderField",
    "CylinderGrid",
    "DegenerateData",
    "EigenFailure",
    "EmptyCloud",
    "EquilibriumRecord",
    "ExperimentConfig",
    "FastScaled",
    "Field",
    "FixedPointDiverged",
    "FormatError",
    "Heteroclinic",
    "IoError",
    "LabError",
    "LimitContext",
    "MissingPotential",
    "NewtonDiverged",
    "NewtonOptions",
    "NonFiniteValue",
    "NonHyperbolicLimit",
    "NonPositiveData",
    "Nonlinearity",
    "NonlinearityReport",
    "NotHyperbolic",
    "ParseError",
    "Patchwork",
    "Periodic",
    "PointCloud",
    "ProcessContext",
    "Quasiperiodic",
    "Report",
    "ShapeMismatch",
    "SingularJacobian",
    "SlabOutOfRange",
    "SpatialGrid",
    "StepOptions",
    "Table",
    "Trajectory",
    "ValidationError",
    "Verdict",
    "ZeroTimeDerivative",
    "apply_elliptic_operator",
    "attractor_distance_experiment",
    "averaging_experiment",
    "check_nonlinearity",
    "cloud_resolution",
    "cubic_nonlinearity",
    "damped_newton",
    "default_dt",
    "discrete_cascade",
    "eval_forcing",
    "export_report",
    "find_equilibria",
    "finest_scale",
    "forcing_mean",
    "forcing_period",
    "grad_cells",
    "hausdorff_dist",
    "heteroclinic_classify",
    "implicit_step",
    "lambda0_margin",
    "laplacian",
    "limit_context_from_mean",
    "linear_nonlinearity",
    "load_config",
    "load_field",
    "lyapunov_value",
    "negate_forcing",
    "process_map",
    "rate_fit",
    "regularity_probe",
    "run",
    "sample_attractor",
    "save_field",
    "semigroup_evolve",
    "sine_field",
    "solve_truncated_bvp",
    "spectral_analyze",
    "spectral_split",
    "surrogate_v_norm",
    "symbol_A",
    "symmetric_dist",
    "time_average",
    "track_periodic_solution",
    "trajectory_vs_limit",
    "unstable_manifold_sample",
    "variational_evolve",
    "variational_process",
    "weighted_norm",
    "zero_nonlinearity",
]
