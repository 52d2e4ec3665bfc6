"""Dark-state lithography toolkit.

Simulates the sub-wavelength ground-state density patterns written by
sequences of standing-wave exposures on three-level atoms, including the
decoherence response of each exposure step, and fits exposure plans to
arbitrary 1D and 2D target patterns.
"""

from .atom import (
    LambdaParams,
    build_liouvillian,
    dark_state,
    evolve,
    ground_state,
    quench_retention,
    steady_state,
    unit_step_retention,
    validate_density_matrix,
)
from .errors import ConvergenceError, NumericError
from .fields import (
    BeamRealization,
    ExposurePlan,
    StandingWaveFactor,
    load_plan,
    plan_from_json,
    plan_to_json,
    point_plan,
    realize_factor,
    rotated_plan,
    save_plan,
    uniform_phase_plan,
)
from .fit import (
    FitOptions,
    FitProblem,
    FitResult,
    StartDiagnostics,
    fit_1d,
    fit_2d,
    normalized_distance,
    sample_grid_1d,
)
from .fourier import (
    LaurentCoeffs,
    product_coefficients,
    product_normalization,
    symmetric_coefficients,
    truncated_target_series,
)
from .pattern import (
    Grid1D,
    Grid2D,
    Profile,
    closed_form_uniform,
    decoherent_product_profile,
    factor_profile,
    fringe_period,
    fwhm,
    point_spread,
    product_profile,
    product_profile_2d,
    quench_localization_profile,
    write_profile_csv,
)
from .targets import TargetSpec, c_shape_target, load_target_samples, square_target

__version__ = "0.1.0"

__all__ = [
    "BeamRealization",
    "ConvergenceError",
    "ExposurePlan",
    "FitOptions",
    "FitProblem",
    "FitResult",
    "Grid1D",
    "Grid2D",
    "LambdaParams",
    "LaurentCoeffs",
    "NumericError",
    "Profile",
    "StandingWaveFactor",
    "StartDiagnostics",
    "TargetSpec",
    "build_liouvillian",
    "c_shape_target",
    "closed_form_uniform",
    "dark_state",
    "decoherent_product_profile",
    "evolve",
    "factor_profile",
    "fit_1d",
    "fit_2d",
    "fringe_period",
    "fwhm",
    "ground_state",
    "load_plan",
    "load_target_samples",
    "normalized_distance",
    "plan_from_json",
    "plan_to_json",
    "point_plan",
    "point_spread",
    "product_coefficients",
    "product_normalization",
    "product_profile",
    "product_profile_2d",
    "quench_localization_profile",
    "quench_retention",
    "realize_factor",
    "rotated_plan",
    "sample_grid_1d",
    "save_plan",
    "square_target",
    "steady_state",
    "symmetric_coefficients",
    "truncated_target_series",
    "uniform_phase_plan",
    "unit_step_retention",
    "validate_density_matrix",
    "write_profile_csv",
]
