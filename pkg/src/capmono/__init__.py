"""Numerical verification suite for capacitary monotonicity, bending-energy
floors, and shrinking-sphere flows on warped-product model manifolds."""

from .config import ExperimentConfig, GridSpec, ModelEntry, default_config, load_config
from .errors import (
    CapmonoError,
    ConfigError,
    CriterionMismatch,
    CrossCheckFailed,
    Divergence,
    DomainError,
    InsufficientSamples,
    NoiseDominated,
    NonConvergence,
    NotApplicable,
    NotThreeDimensional,
    RootNotBracketed,
    StepUnderflow,
)
from .geometry import (
    FAMILY_BUILDERS,
    ModelManifold,
    WarpProfile,
    area_sphere,
    avr,
    bishop_gromov,
    build_model,
    classify_parabolicity,
    sphere_area,
    volume_ball,
)
from .mcf import FlowTrace, check_flow, flow_sphere, huisken_derivative_check, iso_ratio
from .monotone import (
    LimitResult,
    MonotoneSample,
    colding_a,
    default_beta_grid,
    dpsi_beta,
    du_beta,
    limit_formula,
    limit_t0,
    phi_beta,
    psi_beta,
    rigidity_split,
    sharp_gradient_profile,
    spheroid_du_beta,
    spheroid_u_beta,
    u_beta,
)
from .potential import (
    RadialPotential,
    SpheroidPotential,
    harmonic_residual,
    solve_exterior,
    spheroid_exterior,
    verify_asymptotics,
)
from .report import CheckReport, make_report
from .runner import execute, run
from .willmore import (
    DerivedConstants,
    KasueBounds,
    SurfaceSpec,
    ale_infimum,
    check_willmore,
    confocal_spheroid_surface,
    coordinate_sphere,
    derived_constants,
    kasue_bounds,
    kasue_statement_detail,
    willmore_energy,
)

__version__ = "0.1.0"

__all__ = [
    "ExperimentConfig",
    "GridSpec",
    "ModelEntry",
    "default_config",
    "load_config",
    "CapmonoError",
    "ConfigError",
    "CriterionMismatch",
    "CrossCheckFailed",
    "Divergence",
    "DomainError",
    "InsufficientSamples",
    "NoiseDominated",
    "NonConvergence",
    "NotApplicable",
    "NotThreeDimensional",
    "RootNotBracketed",
    "StepUnderflow",
    "FAMILY_BUILDERS",
    "ModelManifold",
    "WarpProfile",
    "area_sphere",
    "avr",
    "bishop_gromov",
    "build_model",
    "classify_parabolicity",
    "sphere_area",
    "volume_ball",
    "FlowTrace",
    "check_flow",
    "flow_sphere",
    "huisken_derivative_check",
    "iso_ratio",
    "LimitResult",
    "MonotoneSample",
    "colding_a",
    "default_beta_grid",
    "dpsi_beta",
    "du_beta",
    "limit_formula",
    "limit_t0",
    "phi_beta",
    "psi_beta",
    "rigidity_split",
    "sharp_gradient_profile",
    "spheroid_du_beta",
    "spheroid_u_beta",
    "u_beta",
    "RadialPotential",
    "SpheroidPotential",
    "harmonic_residual",
    "solve_exterior",
    "spheroid_exterior",
    "verify_asymptotics",
    "CheckReport",
    "make_report",
    "execute",
    "run",
    "DerivedConstants",
    "KasueBounds",
    "SurfaceSpec",
    "ale_infimum",
    "check_willmore",
    "confocal_spheroid_surface",
    "coordinate_sphere",
    "derived_constants",
    "kasue_bounds",
    "kasue_statement_detail",
    "willmore_energy",
    "__version__",
]
