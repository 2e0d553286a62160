"""trawlspec: simulation and spectral estimation for long-range dependent
discrete-time trawl processes."""

__version__ = "0.1.0"

from .seeds import (  # noqa: F401
    Binomial,
    MixedPoisson,
    Poisson,
    RandomLine,
    SeedDraw,
    UnsupportedSeedError,
    sample_seed_at,
    seed_cov,
    seed_cumulant,
    seed_mean,
    seed_spec_from_config,
)
from .trawl import (  # noqa: F401
    ArfimaMatched,
    Explicit,
    Geometric,
    Power,
    ResourceLimitError,
    SimulationConfig,
    TimeSeries,
    TrawlModel,
    arfima_acv,
    model_from_config,
    sequence_tail_sum,
    sequence_value,
    simulate,
    spectral_params,
    theoretical_acv,
    theoretical_mean,
    truncation_index,
)
from .spectral import (  # noqa: F401
    KernelSpec,
    Periodogram,
    TrigPoly,
    default_kernel,
    empirical_acv,
    fd_value,
    integrate_periodogram_against,
    kernel_estimate,
    periodogram,
    trigpoly_eval,
)
from .whittle import (  # noqa: F401
    FitResult,
    PositivityError,
    SpectralModel,
    WhittleConfig,
    arfima_reduced_contrast,
    fit_whittle,
    is_canonical,
    local_whittle,
    spectral_model_eval,
    whittle_contrast,
)
from .oracle import (  # noqa: F401
    DecayScanReport,
    acv_error_rate_scan,
    arfima_quadrature_check,
    empcov_fluctuation_scan,
    empirical_cum4,
    levy_cum4,
    sample_at_lags,
    simulate_arfima_gaussian,
)
from .experiment import ExperimentConfig, ExperimentReport, run_experiment  # noqa: F401
