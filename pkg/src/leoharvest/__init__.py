"""Analytics and Monte Carlo simulation for delay-tolerant LEO satellite data harvesting.

Satellites are modelled by an orbit/satellite Cox point process: a Poisson
number of circular orbits with random longitude and inclination, each
carrying a Poisson number of satellites moving at a common angular speed.
"""
from .analytics import (
    AdaptiveModulation,
    CoxParams,
    FixedModulation,
    coverage_probability,
    data_per_pass,
    delay_cdf,
    expected_visible_orbits,
    expected_visible_satellites,
    harvest_time_fraction,
    harvesting_capacity,
    infinite_delay_probability,
    moment_match_polar_to_cox,
    moment_match_residuals,
    nearest_distance_pdf,
    wraparound_limit,
    zero_delay_probability,
)
from .channel import LinkBudget, NakagamiFading, fading_ccdf, sample_fading, snr
from .constellation import (
    Constellation,
    MotionParams,
    Orbit,
    Satellite,
    propagate,
    sample_cox,
    sample_polar,
    satellite_position_ecef,
    visible_satellites,
)
from .errors import (
    ConfigError,
    DegenerateGeometry,
    DomainError,
    LeoHarvestError,
    OutOfCap,
    OutOfRange,
    OutOfValidity,
    QuadratureFailure,
)
from .geometry import (
    OrbitGeometry,
    in_cap,
    kappa,
    max_azimuth_xi,
    user_satellite_distance,
    visible_arc_half_angle,
)
from .quadrature import DEFAULT_QUAD, QuadratureSpec, integrate_1d, integrate_semi_infinite
from .simulator import (
    MetricEstimate,
    SimConfig,
    estimate_capacity,
    estimate_delay_cdf,
    estimate_infinite_delay,
    estimate_polar_time_fraction,
    estimate_time_fraction,
    estimate_visible_count,
    estimate_visible_orbits,
    simulate_pass,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
