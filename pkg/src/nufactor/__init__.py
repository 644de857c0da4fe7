"""Short-interval prime-factor-count statistics and saddle-point densities."""

from .counts import (
    CountRecord,
    MertensSum,
    OmegaHistogram,
    RoughCount,
    mertens_sum,
    omega_histogram,
    restricted_count,
    rough_count,
    windowed_count,
)
from .density import (
    DEFAULT_CONFIG,
    ConvergenceError,
    DensityEstimate,
    DivergenceError,
    EulerProductConfig,
    HtParams,
    SaddlePoint,
    density_crude_bounds,
    density_homothety,
    density_ht,
    density_landau,
    density_small_nu,
    ht_parameters,
    log_big_g,
    log_euler_h,
    solve_saddle,
)
from .divisors import DivisorSumReport, short_divisor_sum, square_harmonic_sum, tau_k
from .minorants import (
    PairCount,
    ParameterError,
    ScaleParams,
    SharpCount,
    minorant_prime,
    minorant_sharp,
    scale_params,
)
from .sieve import (
    FactoredInterval,
    PrimeTable,
    SieveRangeError,
    TableTooSmallError,
    build_prime_table,
    cached_prime_table,
    sieve_interval,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
