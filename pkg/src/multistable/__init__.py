"""Simulation and verification of localisable, multifractional and
multistable stochastic processes."""

__version__ = "0.1.0"

from .analysis import (
    CheckResult,
    DiagnosticReport,
    ScalingProbeResult,
    empirical_cf,
    estimate_alpha,
    estimate_h,
    ks_critical,
    ks_distance,
    moment_scaling_check,
    scaling_probe,
    transfer_condition_probe,
)
from .functables import FuncTable, as_table, eval_func
from .kernels import (
    DivergentNormError,
    KernelSpec,
    NormResult,
    QuadConfig,
    ab_norm,
    alpha_norm,
    c_alpha,
    eval_kernel,
    fbm_normalizer,
    series_normalizer,
)
from .poisson import (
    PointFunctional,
    PoissonCloud,
    Rectangle,
    cf_closed_form,
    choose_truncation,
    completion_std,
    generate_cloud,
    sin2_bound,
    sum_functional,
    tail_moment_bound,
    tail_variance_rate,
)
from .processes import (
    ConfigError,
    GridError,
    ProcessSpec,
    SamplePath,
    SimulationConfig,
    TruncationConfig,
    WienerConfig,
    apply_amplitude,
    ensemble,
    field_pair_sampler,
    simulate,
    simulate_fbm,
    simulate_lmmm,
    simulate_lmsm,
    simulate_log_fractional_msm,
    simulate_lsfm,
    simulate_mbm,
    simulate_moving_average,
    simulate_multistable_diagonal,
    simulate_multistable_levy,
    simulate_multistable_rou,
    simulate_reverse_ou,
    simulate_stable_levy,
)
from .rng import (
    RngStream,
    StableParams,
    sample_gaussian,
    sample_poisson_count,
    sample_stable,
    sample_uniform,
    seed_stream,
)
