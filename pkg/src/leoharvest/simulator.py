"""Monte Carlo estimators for every closed-form metric.

Trials are generated in fixed-size chunks. Chunk ``k`` draws from its own
stream ``SeedSequence(base_seed, spawn_key=(k,))``, so an estimate depends
only on ``(base_seed, trials)`` and never on how many worker threads ran the
chunks (``LEOH_THREADS`` caps that number). Per-trial values are concatenated
in chunk order before reduction.

The estimators use raw geometry only: a satellite is visible when its
Euclidean distance to the user is at most ``gamma``. Orbits whose highest
point ``r_o sin(phi)`` stays below the cap plane ``z = r_o cos(xi)`` are
never drawn, since they cannot contribute to any metric. Instantaneous
snapshots also draw only satellites whose argument lies within ``xi`` of
the top of the orbit, the only ones that can be in range at that instant.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np

from .analytics import AdaptiveModulation, CoxParams, FixedModulation, ModulationScheme
from .channel import LinkBudget, NakagamiFading, sample_fading
from .constellation import (
    MotionParams,
    polar_arguments,
    sample_satellites_on,
    wrap_2pi,
)
from .errors import DomainError, OutOfCap
from .geometry import OrbitGeometry, user_satellite_distance

CHUNK_TRIALS = 10_000
PASS_CHUNK_TRIALS = 500
POLAR_CHUNK_TRIALS = 1_000
DEFAULT_PASS_STEPS = 1000


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo settings.

    ``time_step`` (seconds) only matters for pass simulation; ``None`` splits
    each pass into :data:`DEFAULT_PASS_STEPS` equal steps.
    """

    trials: int = 100_000
    base_seed: int = 0
    time_step: float | None = None
    include_earth_rotation: bool = False
    confidence_level: float = 0.95

    def __post_init__(self):
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if self.time_step is not None and not self.time_step > 0:
            raise DomainError("time_step must be positive")
        if not 0.0 < self.confidence_level < 1.0:
            raise DomainError("confidence_level must lie in (0, 1)")


@dataclass(frozen=True)
class MetricEstimate:
    metric_name: str
    mean: float
    half_width: float
    trials: int
    seed: int
    confidence_level: float = 0.95

    @property
    def std_error(self) -> float:
        return self.half_width / _z(self.confidence_level) if self.half_width else 0.0


def _z(level: float) -> float:
    return NormalDist().inv_cdf(0.5 + 0.5 * level)


def estimate_from_samples(name: str, values: np.ndarray, sim: SimConfig) -> MetricEstimate:
    """Sample mean with a normal-approximation confidence half-width."""
    n = values.size
    mean = float(np.mean(values)) if n else math.nan
    sd = float(np.std(values, ddof=1)) if n > 1 else 0.0
    return MetricEstimate(name, mean, _z(sim.confidence_level) * sd / math.sqrt(n), n, sim.base_seed,
                          sim.confidence_level)


def chunk_rng(base_seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(base_seed % 2**64, spawn_key=(chunk,)))


def worker_count() -> int:
    env = os.environ.get("LEOH_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def run_chunks(sim: SimConfig, chunk_trials: int,
               body: Callable[[np.random.Generator, int], np.ndarray]) -> np.ndarray:
    """Run ``body(rng, n)`` over every chunk and concatenate the per-trial arrays in order."""
    sizes = [chunk_trials] * (sim.trials // chunk_trials)
    if sim.trials % chunk_trials:
        sizes.append(sim.trials % chunk_trials)

    def job(k):
        return body(chunk_rng(sim.base_seed, k), sizes[k])

    workers = min(worker_count(), len(sizes))
    if workers <= 1:
        parts = [job(k) for k in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    return np.concatenate(parts, axis=0)


# --- Cox snapshots -------------------------------------------------------------


@dataclass
class _Snapshot:
    n: int
    band_orbits: np.ndarray  # per trial
    trial: np.ndarray  # per satellite on a band orbit
    phi: np.ndarray
    omega: np.ndarray
    direction: np.ndarray


def _cox_snapshot(rng: np.random.Generator, n: int, params: CoxParams, geom: OrbitGeometry,
                  epoch: float = 0.0, motion: MotionParams | None = None,
                  earth_rotation: bool = False, window: bool = False) -> _Snapshot:
    # Only orbits with sin(phi) > cos(xi) can reach the cap. cos(phi) is uniform on
    # [-1, 1], so those form a Poisson(lam sin xi) thinning with cos(phi) uniform
    # on (-sin xi, sin xi); drawing them directly skips the rest.
    s_xi = math.sin(geom.xi)
    counts = rng.poisson(params.lam * s_xi, size=n)
    orbit_trial = np.repeat(np.arange(n), counts)
    m = orbit_trial.size
    theta = math.pi * rng.random(m)
    phi = np.arccos(s_xi * (2.0 * rng.random(m) - 1.0))
    if window:
        # The pole-to-satellite angle is at least |w - pi/2|, so at this instant only
        # arguments within xi of pi/2 can be in range; thin to that window.
        counts_w = rng.poisson(params.mu * geom.xi / math.pi, size=m)
        sat_orbit = np.repeat(np.arange(m), counts_w)
        omega = 0.5 * math.pi + geom.xi * (2.0 * rng.random(sat_orbit.size) - 1.0)
    else:
        sat_orbit, omega = sample_satellites_on(rng, m, params.mu)
    direction = np.ones(sat_orbit.size)
    sat_phi = phi[sat_orbit]
    if epoch:
        omega = wrap_2pi(omega + motion.omega_s * epoch)
        if earth_rotation:
            # longitudes past pi are re-expressed as (theta - pi, pi - phi), traversed backwards
            turns = np.floor((theta + motion.omega_e * epoch) / math.pi).astype(np.int64)
            flip = (turns % 2 == 1)[sat_orbit]
            sat_phi = np.where(flip, math.pi - sat_phi, sat_phi)
            omega = np.where(flip, wrap_2pi(math.pi - omega), omega)
            direction = np.where(flip, -1.0, 1.0)
    return _Snapshot(n, counts, orbit_trial[sat_orbit],
                     sat_phi, omega, direction)


def _visible(snap: _Snapshot, geom: OrbitGeometry) -> tuple[np.ndarray, np.ndarray]:
    dist = user_satellite_distance(geom, snap.phi, snap.omega)
    return dist <= geom.gamma, dist


def _snapshot_estimator(name: str, params: CoxParams, geom: OrbitGeometry, sim: SimConfig,
                        reduce: Callable[[_Snapshot, np.random.Generator], np.ndarray],
                        epoch: float = 0.0, motion: MotionParams | None = None) -> MetricEstimate:
    def body(rng, n):
        snap = _cox_snapshot(rng, n, params, geom, epoch, motion, sim.include_earth_rotation,
                             window=not epoch)
        return reduce(snap, rng)

    return estimate_from_samples(name, run_chunks(sim, CHUNK_TRIALS, body).astype(float), sim)


def estimate_visible_orbits(params: CoxParams, geom: OrbitGeometry, sim: SimConfig) -> MetricEstimate:
    """Mean number of orbits whose plane crosses the cap."""
    return _snapshot_estimator("visible_orbits", params, geom, sim, lambda s, rng: s.band_orbits)


def estimate_visible_count(params: CoxParams, geom: OrbitGeometry, sim: SimConfig) -> MetricEstimate:
    """Mean number of satellites within ``gamma``."""
    def reduce(s, rng):
        vis, _ = _visible(s, geom)
        return np.bincount(s.trial[vis], minlength=s.n)

    return _snapshot_estimator("visible_sats", params, geom, sim, reduce)


def estimate_time_fraction(params: CoxParams, geom: OrbitGeometry, sim: SimConfig,
                           epoch: float = 0.0, motion: MotionParams | None = None) -> MetricEstimate:
    """Fraction of snapshots with at least one satellite in range.

    A non-zero ``epoch`` moves every sampled constellation forward by that
    many seconds first (Earth rotation included when the config asks for
    it); by time invariance the estimate should not change.
    """
    if epoch and motion is None:
        raise DomainError("propagating snapshots needs motion parameters")

    def reduce(s, rng):
        vis, _ = _visible(s, geom)
        return np.bincount(s.trial[vis], minlength=s.n) > 0

    return _snapshot_estimator("time_fraction", params, geom, sim, reduce, epoch, motion)


def estimate_capacity(params: CoxParams, geom: OrbitGeometry, link: LinkBudget, fading: NakagamiFading,
                      sim: SimConfig) -> MetricEstimate:
    """Mean ``B_w log2(1 + SNR)`` to the nearest satellite in range; 0 when none is."""
    def reduce(s, rng):
        vis, dist = _visible(s, geom)
        nearest = np.full(s.n, np.inf)
        np.minimum.at(nearest, s.trial[vis], dist[vis])
        h = sample_fading(fading, rng, s.n)
        covered = np.isfinite(nearest)
        rate = np.zeros(s.n)
        snr = link.snr_at_1m * h[covered] * nearest[covered] ** (-link.alpha)
        rate[covered] = link.bandwidth * np.log2(1.0 + snr)
        return rate

    return _snapshot_estimator("capacity", params, geom, sim, reduce)


def _entry_delays(s: _Snapshot, geom: OrbitGeometry, motion: MotionParams) -> np.ndarray:
    """Per-trial wait until a satellite first comes within range (inf if none ever does)."""
    vis, _ = _visible(s, geom)
    # the orbit lies in the cap for sin(w) >= cos(xi)/sin(phi): w in [w1, pi - w1]
    w1 = np.arcsin(np.minimum(math.cos(geom.xi) / np.sin(s.phi), 1.0))
    forward = wrap_2pi(w1 - s.omega)
    backward = wrap_2pi(s.omega - (math.pi - w1))
    wait = np.where(s.direction > 0, forward, backward) / motion.omega_s
    wait = np.where(vis, 0.0, wait)
    delay = np.full(s.n, np.inf)
    np.minimum.at(delay, s.trial, wait)
    return delay


def sample_delays(params: CoxParams, geom: OrbitGeometry, motion: MotionParams, sim: SimConfig) -> np.ndarray:
    """Raw per-trial delays in seconds."""
    def body(rng, n):
        return _entry_delays(_cox_snapshot(rng, n, params, geom), geom, motion)

    return run_chunks(sim, CHUNK_TRIALS, body)


def estimate_delay_cdf(params: CoxParams, geom: OrbitGeometry, motion: MotionParams,
                       d_grid: Sequence[float], sim: SimConfig) -> list[MetricEstimate]:
    """Empirical ``P(D <= d)`` at every ``d`` in ``d_grid``.

    Entry times are exact: a satellite already in range waits 0, any other
    satellite on a crossing orbit waits for its argument to reach the cap
    edge. Earth rotation turns the orbit planes about the user's own axis,
    so it leaves every entry time unchanged and is not simulated here.
    """
    delays = sample_delays(params, geom, motion, sim)
    return [estimate_from_samples("delay_cdf", (delays <= d).astype(float), sim) for d in d_grid]


def estimate_infinite_delay(params: CoxParams, geom: OrbitGeometry, motion: MotionParams,
                            sim: SimConfig) -> MetricEstimate:
    """Fraction of trials in which no satellite ever comes within range."""
    delays = sample_delays(params, geom, motion, sim)
    return estimate_from_samples("p_inf_delay", np.isinf(delays).astype(float), sim)


# --- single pass ---------------------------------------------------------------


def simulate_pass(phi: float, geom: OrbitGeometry, link: LinkBudget, fading: NakagamiFading,
                  motion: MotionParams, scheme: ModulationScheme, sim: SimConfig) -> MetricEstimate:
    """Bits uploaded while one satellite crosses the cap, time-stepped.

    The pass runs from the entry argument ``w1`` to ``pi - w1``. Each step
    uses the distance at the step midpoint and a fresh fading draw, so the
    step length doubles as the coherence time.
    """
    ratio = math.cos(geom.xi) / math.sin(phi)
    if ratio > 1.0 + 1e-12:
        raise OutOfCap(f"inclination {phi} does not meet the cap (xi={geom.xi})")
    w1 = math.asin(min(ratio, 1.0))
    span = math.pi - 2.0 * w1
    duration = span / motion.omega_s
    if duration == 0.0:
        return MetricEstimate("data_per_pass", 0.0, 0.0, sim.trials, sim.base_seed, sim.confidence_level)
    steps = DEFAULT_PASS_STEPS if sim.time_step is None else max(1, math.ceil(duration / sim.time_step))
    dt = duration / steps
    w = w1 + (np.arange(steps) + 0.5) * (span / steps)
    dist = user_satellite_distance(geom, phi, w)
    gain = link.snr_at_1m * dist ** (-link.alpha)

    def body(rng, n):
        snr = sample_fading(fading, rng, (n, steps)) * gain
        if isinstance(scheme, FixedModulation):
            per_step = scheme.rate_bits * link.bandwidth * dt * (snr > scheme.tau)
        elif isinstance(scheme, AdaptiveModulation):
            per_step = link.bandwidth * dt * np.log2(1.0 + snr)
        else:
            raise TypeError(f"unsupported modulation scheme {scheme!r}")
        return per_step.sum(axis=1)

    return estimate_from_samples("data_per_pass", run_chunks(sim, PASS_CHUNK_TRIALS, body), sim)


# --- polar reference constellation --------------------------------------------


def _polar_visible_counts(rng, n, n_orbits, n_sats, geom, spacing):
    counts = np.zeros(n, dtype=np.int64)
    for i in range(n):
        owner, omega = polar_arguments(rng, n_orbits, n_sats, spacing)
        counts[i] = np.count_nonzero(user_satellite_distance(geom, math.pi / 2, omega) <= geom.gamma)
    return counts


def estimate_polar_time_fraction(n_orbits: int, n_sats: int, geom: OrbitGeometry, sim: SimConfig,
                                 spacing: str = "even") -> MetricEstimate:
    """Fraction of snapshots of the polar constellation with a satellite in range of the user."""
    def body(rng, n):
        return _polar_visible_counts(rng, n, n_orbits, n_sats, geom, spacing) > 0

    return estimate_from_samples("polar_time_fraction", run_chunks(sim, POLAR_CHUNK_TRIALS, body).astype(float), sim)


def estimate_polar_visible_count(n_orbits: int, n_sats: int, geom: OrbitGeometry, sim: SimConfig,
                                 spacing: str = "even") -> MetricEstimate:
    def body(rng, n):
        return _polar_visible_counts(rng, n, n_orbits, n_sats, geom, spacing)

    return estimate_from_samples("polar_visible_sats", run_chunks(sim, POLAR_CHUNK_TRIALS, body).astype(float), sim)
