"""Similarity-weighted GARCH volatility forecast adjustment for news shocks.

Donor series that experienced similar shocks are fit with a shock fixed
effect; the estimates are pooled with simplex weights chosen so the
weighted donor profiles match the target's volatility profile, and the
pooled effect corrects the target's GARCH variance forecast.
"""

from .errors import (
    BlockCountMismatch,
    ConfigurationInfeasible,
    DegenerateData,
    DimensionMismatch,
    DomainError,
    InsufficientHistory,
    InvalidShockWindow,
    NonpositiveGroundTruth,
    NonpositiveInput,
    NonpositiveVariance,
    NonstationaryParams,
    NotConverged,
    ReplicationFailed,
    SynthvolError,
    ValidationError,
)
from .estimation import (
    FitConfig,
    FitResult,
    fit_garch,
    fit_shock_fixed_effect,
    gaussian_qml_loglik,
)
from .evaluation import (
    LossTriple,
    RVConfig,
    ape_loss,
    intraday_block_returns,
    loss_triple,
    mse_loss,
    ql_advantage,
    ql_loss,
    realized_volatility,
)
from .garch import (
    CovariateModel,
    GarchParams,
    ShockSpec,
    SimulatedPath,
    filter_variance,
    forecast,
    shock_window,
    simulate_path,
    unconditional_variance,
    variance_step,
)
from .montecarlo import (
    CellResult,
    GridConfig,
    GridResult,
    build_delta,
    run_grid,
    run_replication,
    write_grid_csv,
)
from .multiverse import (
    MultiverseConfig,
    MultiverseResult,
    MultiverseRow,
    enumerate_configs,
    run_multiverse,
    write_multiverse_csv,
)
from .pipeline import Donor, ForecastReport, TargetSeries, run_forecast_pipeline
from .similarity import (
    OlsContrast,
    VolatilityProfile,
    WeightSolution,
    aggregate_shock,
    mean_shock,
    ols_covariate_contrast,
    singular_value_shares,
    solve_weights,
    standardize,
)

__version__ = "0.1.0"
