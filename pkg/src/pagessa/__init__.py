"""Page-matrix singular spectrum analysis for multivariate time series."""

__version__ = "0.1.0"

from .panel import (  # noqa: F401
    IngestError,
    LatentPanel,
    Panel,
    ParseError,
    initialize_missing,
    load_csv,
    observed_fraction,
    save_csv,
)
from .embed import (  # noqa: F401
    EmbedError,
    HankelMatrix,
    PageMatrix,
    PageTensor,
    StackedPage,
    hankel,
    hankel_window,
    numeric_rank,
    page,
    page_tensor,
    stacked_hankel,
    stacked_page,
)
from .hsvt import (  # noqa: F401
    EnergyThreshold,
    Fixed,
    HsvtModel,
    MedianThreshold,
    RankPolicy,
    effective_rank,
    estimate,
    fit_hsvt,
)
from .mssa import (  # noqa: F401
    ForecastModel,
    ImputeResult,
    RollingForecastResult,
    ZeroDesignError,
    default_window,
    fit_forecaster,
    forecast,
    forecast_at_offsets,
    impute,
    rolling_forecast,
)
from .metrics import for_err, imp_err, nrmse  # noqa: F401
from .variance import VarianceResult, estimate_variance  # noqa: F401
from .tssa import CpModel, compare_regimes, te3_fit, tssa_impute, vanilla_me_impute  # noqa: F401
from .diagnostics import RankScalingReport, Suitability, mssa_suitability, rank_scaling_report  # noqa: F401
from .synth import (  # noqa: F401
    CalculusResult,
    Constant,
    CorruptionSpec,
    FactorModelSpec,
    GaussianNoise,
    HarmonicMix,
    HarmonicTerm,
    LinearRecurrence,
    NoNoise,
    Polynomial,
    PoissonObservations,
    SmoothPeriodic,
    calculus_check,
    corrupt,
    generate_latent,
    hankel_rank_oracle,
    mixture_of_harmonics_panel,
    rank_bound,
    signal_values,
)
from .experiments import ConfigError, ExperimentReport, impute_eval_protocol, run_experiment  # noqa: F401
