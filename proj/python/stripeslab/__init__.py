"""Python access to the stripe lab core."""

from ._stripeslab import (  # noqa: F401
    ModelParams,
    StripesError,
    c_tau,
    double_well,
    energy_gradient,
    gradient_flow,
    j_c,
    kernel_moments,
    lower_bound_report,
    minimize_profile,
    noise_field,
    omega_gap_ratio,
    optimal_period,
    sharp_stripe_energy,
    sorting_defect,
    stripe_metrics,
    total_energy,
    transition_energy,
)

__version__ = "0.1.0"
