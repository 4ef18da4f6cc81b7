"""Closed-form performance metrics of the orbit/satellite Cox constellation.

All inclination integrals run over the complement angle ``x = |phi - pi/2|``
from 0 to a cap half-angle ``c`` (``xi`` for the communication range, or
``kappa(u)`` for a smaller range ``u``). They are evaluated after the
substitution ``x = c sin(t)``, which removes the square-root branch point at
the tangent orbit ``x = c`` and, for the nearest-distance density, the
inverse square root as well.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import geometry as geo
from .channel import LinkBudget, NakagamiFading, fading_ccdf
from .constellation import MotionParams
from .errors import DegenerateGeometry, DomainError, OutOfValidity
from .geometry import OrbitGeometry
from .quadrature import DEFAULT_QUAD, QuadratureSpec, integrate_1d, truncation_point

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class CoxParams:
    """Mean number of orbits ``lam`` and mean satellites per orbit ``mu``."""

    lam: float
    mu: float

    def __post_init__(self):
        for name in ("lam", "mu"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise DomainError(f"{name} must be positive and finite, got {v}")


@dataclass(frozen=True)
class FixedModulation:
    """``rate_bits`` bits per symbol whenever the SNR exceeds ``tau`` (linear)."""

    rate_bits: int
    tau: float

    def __post_init__(self):
        if self.rate_bits < 1 or not self.tau > 0:
            raise DomainError("fixed modulation needs rate_bits >= 1 and tau > 0")


@dataclass(frozen=True)
class AdaptiveModulation:
    """Rate follows ``log2(1 + SNR)``."""


ModulationScheme = Union[FixedModulation, AdaptiveModulation]


# --- cap sweep ---------------------------------------------------------------


def _cap_sweep(cap: float, t: np.ndarray):
    """Nodes ``x = cap sin t`` with the arc half-angle, its squared sine, and ``dx/dt``."""
    x = cap * np.sin(t)
    gap = 2.0 * cap * np.sin(0.25 * math.pi - 0.5 * t) ** 2  # cap - x, without cancellation
    s2 = np.sin(gap) * np.sin(cap + x) / np.cos(x) ** 2
    s2 = np.clip(s2, 0.0, 1.0)
    arc = np.arcsin(np.sqrt(s2))
    return x, arc, s2, cap * np.cos(t)


def _over_cap(cap: float, integrand, quad: QuadratureSpec) -> float:
    """``int_0^cap integrand(x, arc, s2) dx`` using the sine substitution."""
    if cap <= 0.0:
        return 0.0

    def f(t):
        x, arc, s2, jac = _cap_sweep(cap, t)
        return integrand(x, arc, s2) * jac

    return integrate_1d(f, 0.0, HALF_PI, quad)


def mean_arc_integral(cap: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``int_0^cap cos(x) arcsin(sqrt(1 - cos^2(cap) sec^2(x))) dx``."""
    return _over_cap(cap, lambda x, arc, s2: np.cos(x) * arc, quad)


def _miss_integral(cap: float, mu: float, sweep_angle: float, quad: QuadratureSpec) -> float:
    """``int_0^cap cos(x) (1 - exp(-mu/(2 pi) (2 arc + sweep_angle))) dx``.

    The probability that a band orbit shows at least one satellite on its
    visible arc widened by ``sweep_angle`` radians, weighted by the orbit density.
    """
    k = mu / (2.0 * math.pi)
    return _over_cap(cap, lambda x, arc, s2: np.cos(x) * -np.expm1(-k * (2.0 * arc + sweep_angle)), quad)


# --- counts and time fraction -------------------------------------------------


def expected_visible_orbits(params: CoxParams, xi: float) -> float:
    if not 0.0 <= xi <= HALF_PI:
        raise DomainError(f"xi must lie in [0, pi/2], got {xi}")
    return params.lam * math.sin(xi)


def expected_visible_satellites(params: CoxParams, geom: OrbitGeometry,
                                quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Mean number of satellites within ``gamma`` of the user."""
    return params.lam * params.mu / math.pi * mean_arc_integral(geom.xi, quad)


def harvest_time_fraction(params: CoxParams, geom: OrbitGeometry,
                          quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Long-run fraction of time with at least one satellite in range."""
    return -math.expm1(-params.lam * _miss_integral(geom.xi, params.mu, 0.0, quad))


# --- delay --------------------------------------------------------------------


def wraparound_limit(geom: OrbitGeometry, motion: MotionParams) -> float:
    """Largest delay for which the widened arc still fits on one orbit, ``(2 pi - 2 xi) / omega_s``."""
    return (2.0 * math.pi - 2.0 * geom.xi) / motion.omega_s


def delay_cdf(params: CoxParams, geom: OrbitGeometry, motion: MotionParams, d: float,
              quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``P(D <= d)`` for the wait until a satellite first comes within range.

    At ``d = 0`` this is the zero-delay probability (the mass of the atom at
    zero). Beyond :func:`wraparound_limit` the widened arc would wrap round
    the orbit and the closed form undercounts the void probability, so the
    evaluation is refused with :class:`OutOfValidity`.
    """
    if d < 0:
        raise DomainError(f"delay must be non-negative, got {d}")
    limit = wraparound_limit(geom, motion)
    if d >= limit:
        raise OutOfValidity(f"d={d} s is past the wraparound limit {limit:.6g} s")
    return -math.expm1(-params.lam * _miss_integral(geom.xi, params.mu, motion.omega_s * d, quad))


def zero_delay_probability(params: CoxParams, geom: OrbitGeometry,
                           quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    return harvest_time_fraction(params, geom, quad)


def infinite_delay_probability(params: CoxParams, geom: OrbitGeometry) -> float:
    """Probability that no orbit crosses the cap at all, ``exp(-lam sin xi)``."""
    return math.exp(-params.lam * math.sin(geom.xi))


# --- data per pass ------------------------------------------------------------


def _pass_distance(geom: OrbitGeometry, phi: float, w):
    # w is measured from the top of the pass (argument pi/2)
    return np.sqrt(geom.r_o**2 - 2.0 * geom.r_o * geom.r_e * np.cos(w) * math.sin(phi) + geom.r_e**2)


def _rate_cutoff(link: LinkBudget, fading: NakagamiFading, d_min: float, quad: QuadratureSpec) -> float:
    """Rate beyond which ``P(SNR > 2^v - 1)`` is below ``tail_cutoff`` at every distance >= ``d_min``."""
    c = d_min**link.alpha / link.snr_at_1m
    return truncation_point(lambda v: fading_ccdf(fading, math.expm1(v * math.log(2.0)) * c), 0.0, quad)


def _mean_log_rate(link: LinkBudget, fading: NakagamiFading, d: float, v_max: float,
                   quad: QuadratureSpec) -> float:
    """``E[log2(1 + SNR)]`` at distance ``d`` as ``int_0^v_max P(SNR > 2^v - 1) dv``."""
    c = d**link.alpha / link.snr_at_1m
    return integrate_1d(lambda v: fading_ccdf(fading, np.expm1(v * math.log(2.0)) * c), 0.0, v_max, quad)


def data_per_pass(phi: float, geom: OrbitGeometry, link: LinkBudget, fading: NakagamiFading,
                  motion: MotionParams, scheme: ModulationScheme,
                  quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Expected bits uploaded to one satellite crossing the cap on an orbit of inclination ``phi``.

    The integral runs over the whole visible arc ``[-w0, w0]`` around the
    top of the pass, i.e. the full time from entering to leaving range.
    """
    w0 = geo.visible_arc_half_angle(geom, phi)
    if w0 == 0.0:
        return 0.0
    if isinstance(scheme, FixedModulation):
        k = scheme.tau / link.snr_at_1m

        def per_angle(w):
            return fading_ccdf(fading, k * _pass_distance(geom, phi, w) ** link.alpha)

        return 2.0 * scheme.rate_bits * link.bandwidth / motion.omega_s * integrate_1d(per_angle, 0.0, w0, quad)
    if isinstance(scheme, AdaptiveModulation):
        d_min = float(_pass_distance(geom, phi, 0.0))
        v_max = _rate_cutoff(link, fading, d_min, quad)

        def per_angle(w):
            return np.array([_mean_log_rate(link, fading, float(d), v_max, quad)
                             for d in np.atleast_1d(_pass_distance(geom, phi, w))])

        return 2.0 * link.bandwidth / motion.omega_s * integrate_1d(per_angle, 0.0, w0, quad)
    raise TypeError(f"unsupported modulation scheme {scheme!r}")


# --- nearest satellite distance and capacity ---------------------------------


def void_factor(geom: OrbitGeometry, mu: float, phi, u: float):
    """Probability that an orbit of inclination ``phi`` has no satellite within ``u`` of the user.

    ``exp(-(mu/pi) arcsin(sqrt(1 - cos^2(kappa) csc^2(phi))))`` with
    ``kappa = kappa(u)``; equals 1 for orbits that miss the smaller cap.
    """
    arc = geo.arc_half_angles(geo.kappa(geom, u), np.asarray(phi, dtype=float) - HALF_PI)
    out = np.exp(-mu / math.pi * arc)
    return float(out) if np.ndim(out) == 0 else out


def nearest_void_probability(params: CoxParams, geom: OrbitGeometry, u: float,
                             quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``P(no satellite within distance u)``."""
    return math.exp(-params.lam * _miss_integral(geo.kappa(geom, u), params.mu, 0.0, quad))


def nearest_distance_pdf(params: CoxParams, geom: OrbitGeometry, u: float,
                         quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Density of the distance to the nearest satellite at ``r_a <= u <= horizon``.

    Differentiating the void probability in ``u`` gives
    ``lam mu u / (pi r_e r_o) * int_0^kappa gbar(x,u) / sqrt(1 - cos^2 kappa sec^2 x) dx``
    times the void probability itself. The ``cos(x)`` orbit density cancels
    the ``sec(x)`` coming out of the derivative of the arc, so no secant
    remains under the integral.
    """
    cap = geo.kappa(geom, u)
    mu = params.mu
    if cap <= 0.0:
        # kappa -> 0: the inner integral tends to pi/2
        inner = 0.5 * math.pi
    else:
        def f(t):
            x, arc, _, _ = _cap_sweep(cap, t)
            # (dx/dt) / sqrt(s2) with the vanishing factor sin(pi/4 - t/2) cancelled:
            # cos t = 2 sin(b) cos(b) and sin(gap) = 2 cap sin^2(b) sinc(gap), b = pi/4 - t/2
            b = 0.25 * math.pi - 0.5 * t
            gap = 2.0 * cap * np.sin(b) ** 2
            ratio = 2.0 * cap * np.cos(b) * np.cos(x) / np.sqrt(
                2.0 * cap * np.sinc(gap / math.pi) * np.sin(cap + x))
            return np.exp(-mu / math.pi * arc) * ratio

        inner = integrate_1d(f, 0.0, HALF_PI, quad)
    density = params.lam * mu * u / (math.pi * geom.r_e * geom.r_o) * inner
    return density * nearest_void_probability(params, geom, u, quad)


def _over_range(params: CoxParams, geom: OrbitGeometry, weight, quad: QuadratureSpec) -> float:
    """``int_{r_a}^{gamma} f(u) weight(u) du`` for the nearest-distance density ``f``."""
    def f(us):
        return np.array([nearest_distance_pdf(params, geom, float(u), quad) * weight(float(u)) for u in us])

    return integrate_1d(f, geom.r_a, geom.gamma, quad)


def coverage_probability(params: CoxParams, geom: OrbitGeometry, link: LinkBudget,
                         fading: NakagamiFading, tau: float,
                         quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``P(SNR > tau)`` on the uplink to the nearest satellite within range (0 when none is)."""
    k = tau / link.snr_at_1m
    return _over_range(params, geom, lambda u: fading_ccdf(fading, k * u**link.alpha), quad)


def harvesting_capacity(params: CoxParams, geom: OrbitGeometry, link: LinkBudget,
                        fading: NakagamiFading, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Mean achievable uplink rate (bit/s) to the nearest satellite within range.

    ``B_w int_0^inf P(SNR > 2^v - 1) dv`` with the rate integral moved inside
    the distance integral. The rate axis is cut where the fading tail at the
    shortest possible distance ``r_a`` drops below ``quad.tail_cutoff``.
    """
    v_max = _rate_cutoff(link, fading, geom.r_a, quad)
    per_bandwidth = _over_range(params, geom, lambda u: _mean_log_rate(link, fading, u, v_max, quad), quad)
    return link.bandwidth * per_bandwidth


# --- polar moment matching ----------------------------------------------------


def moment_match_polar_to_cox(polar_lambda: float, polar_mu: float, geom: OrbitGeometry,
                              quad: QuadratureSpec = DEFAULT_QUAD) -> CoxParams:
    """Cox intensities with the same mean visible orbits and satellites as a polar constellation.

    Every 90 degree orbit passes over the user, so the polar constellation
    shows ``polar_lambda`` orbits and ``polar_lambda polar_mu xi / pi``
    satellites on average.
    """
    if not (polar_lambda > 0 and polar_mu > 0):
        raise DomainError("polar constellation parameters must be positive")
    xi = geom.xi
    if xi <= 0.0:
        raise DegenerateGeometry("gamma equals the altitude; the cap is a single point")
    lam_bar = polar_lambda / math.sin(xi)
    mu_bar = polar_lambda * polar_mu * xi / (lam_bar * mean_arc_integral(xi, quad))
    return CoxParams(lam_bar, mu_bar)


def moment_match_residuals(polar_lambda: float, polar_mu: float, matched: CoxParams,
                           geom: OrbitGeometry, quad: QuadratureSpec = DEFAULT_QUAD) -> tuple[float, float]:
    """Relative mismatch of the mean visible orbits and the mean visible satellites."""
    xi = geom.xi
    orbits = expected_visible_orbits(matched, xi)
    sats = expected_visible_satellites(matched, geom, quad)
    target_sats = polar_lambda * polar_mu * xi / math.pi
    return (orbits - polar_lambda) / polar_lambda, (sats - target_sats) / target_sats

