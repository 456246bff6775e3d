"""Windowed trade-tick analytics.

Market trades carry two observables per deal — money paid and quantity
exchanged — and every derived statistic here (weighted mean price and
return, their volatilities, coefficients of variation, aggregate and
composite-variable uncertainty, and the two-moment Gaussian forecast
ceiling) is computed from those observables over tumbling time windows.
"""

from ._version import REPORT_SCHEMA_VERSION, __version__
from .composite import (
    ComponentStat,
    CompositeStats,
    CorrelationMatrix,
    MonteCarloResult,
    composite_stats,
    monte_carlo_composite_oracle,
    profit_stats,
)
from .errors import (
    DataError,
    DegeneracyError,
    DegenerateWindowError,
    EmptyLaggedWindowError,
    EmptyWindowError,
    EngineError,
    IncompleteSpecError,
    InfeasibleSpecError,
    IngestError,
    InvalidStatsError,
    InvalidTickError,
    PairingError,
    SchemaError,
    UndefinedCVError,
    UnsortedInputError,
)
from .gaussian import (
    GaussianApprox,
    GaussianGap,
    cdf,
    gaussian_from_stats,
    gaussian_gap,
    pdf,
    quantile,
)
from .macro import (
    AggregateStats,
    CvTransfer,
    Deal,
    DealPool,
    aggregate,
    cv_transfer_check,
    pool_from_arrays,
)
from .moments import (
    MomentSet,
    coefficient_of_variation_sq,
    cross_correlation,
    moment,
    volatility,
    window_moments,
)
from .price import (
    PriceStats,
    price_cv_sq,
    price_stats_closed_form,
    price_stats_direct,
    vwap,
    weights_order2,
)
from .returns import (
    LaggedSeries,
    LaggedTick,
    ReturnStats,
    build_lagged,
    build_lagged_arrays,
    mean_return,
    return_cv_sq,
    return_stats_closed_form,
    return_stats_direct,
)
from .synth import (
    GENERATOR_ID,
    SHARD_SIZE,
    Constant,
    Gamma,
    GenSpec,
    Lognormal,
    agent_pool,
    attainable_corr_range,
    generate,
    generate_arrays,
    iter_generated_chunks,
)
from .ticks import (
    TradeTick,
    TumblingPartitioner,
    WindowSeries,
    WindowSpec,
    partition,
    partition_arrays,
    price_of,
)
from .tickio import (
    TICK_SCHEMAS,
    AnalysisReport,
    canonical_json,
    iter_tick_chunks,
    load_composite_spec,
    load_genspec,
    read_deals,
    read_ticks,
    write_report,
    write_ticks,
)

__all__ = [
    "__version__",
    "REPORT_SCHEMA_VERSION",
    # ticks & windows
    "TradeTick",
    "WindowSpec",
    "WindowSeries",
    "price_of",
    "partition",
    "partition_arrays",
    "TumblingPartitioner",
    # frequency moments
    "MomentSet",
    "moment",
    "volatility",
    "cross_correlation",
    "coefficient_of_variation_sq",
    "window_moments",
    # market price
    "PriceStats",
    "vwap",
    "weights_order2",
    "price_stats_direct",
    "price_stats_closed_form",
    "price_cv_sq",
    # market return
    "LaggedTick",
    "LaggedSeries",
    "ReturnStats",
    "build_lagged",
    "build_lagged_arrays",
    "mean_return",
    "return_stats_direct",
    "return_stats_closed_form",
    "return_cv_sq",
    # macro aggregation
    "Deal",
    "DealPool",
    "AggregateStats",
    "CvTransfer",
    "aggregate",
    "cv_transfer_check",
    "pool_from_arrays",
    # composite variables
    "ComponentStat",
    "CorrelationMatrix",
    "CompositeStats",
    "MonteCarloResult",
    "composite_stats",
    "profit_stats",
    "monte_carlo_composite_oracle",
    # gaussian ceiling
    "GaussianApprox",
    "GaussianGap",
    "gaussian_from_stats",
    "pdf",
    "cdf",
    "quantile",
    "gaussian_gap",
    # synthetic streams
    "Lognormal",
    "Gamma",
    "Constant",
    "GenSpec",
    "generate",
    "generate_arrays",
    "iter_generated_chunks",
    "agent_pool",
    "attainable_corr_range",
    "GENERATOR_ID",
    "SHARD_SIZE",
    # io
    "TICK_SCHEMAS",
    "read_ticks",
    "iter_tick_chunks",
    "write_ticks",
    "read_deals",
    "AnalysisReport",
    "write_report",
    "canonical_json",
    "load_composite_spec",
    "load_genspec",
    # errors
    "EngineError",
    "DataError",
    "DegeneracyError",
    "InvalidTickError",
    "UnsortedInputError",
    "PairingError",
    "IngestError",
    "SchemaError",
    "IncompleteSpecError",
    "InfeasibleSpecError",
    "InvalidStatsError",
    "EmptyWindowError",
    "DegenerateWindowError",
    "UndefinedCVError",
    "EmptyLaggedWindowError",
]
