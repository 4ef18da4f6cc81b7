"""Uplink budget, Nakagami-m power fading and instantaneous SNR.

Everything here is stored in linear units. Conversions from dB/dBm happen
once, in :func:`db_to_linear` / :func:`dbm_to_watts`, at the config boundary.

Fading power ``H`` is Gamma distributed with integer shape ``m`` and unit
mean. Samples come from ``numpy.random.Generator.gamma`` (Marsaglia-Tsang),
which is deterministic for a given seeded generator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def noise_power_from_density(density_dbm_per_hz: float, bandwidth: float) -> float:
    """Thermal noise power in watts over ``bandwidth`` Hz."""
    if bandwidth <= 0:
        raise DomainError(f"bandwidth must be positive, got {bandwidth}")
    return 10.0 ** ((density_dbm_per_hz + 10.0 * math.log10(bandwidth) - 30.0) / 10.0)


@dataclass(frozen=True)
class LinkBudget:
    """Transmit power ``p`` [W], aggregate gain ``g``, path-loss exponent, noise [W], bandwidth [Hz]."""

    p: float
    g: float
    alpha: float
    noise_power: float
    bandwidth: float

    def __post_init__(self):
        for name in ("p", "g", "noise_power", "bandwidth"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.alpha >= 2:
            raise DomainError(f"path-loss exponent must be >= 2, got {self.alpha}")

    @property
    def snr_at_1m(self) -> float:
        """Received SNR at one meter with unit fading, ``p g / sigma^2``."""
        return self.p * self.g / self.noise_power


@dataclass(frozen=True)
class NakagamiFading:
    m: int = 1

    def __post_init__(self):
        if isinstance(self.m, bool) or int(self.m) != self.m or self.m < 1:
            raise DomainError(f"Nakagami shape must be a positive integer, got {self.m}")
        object.__setattr__(self, "m", int(self.m))


def fading_ccdf(fading: NakagamiFading, x):
    """``P(H > x) = exp(-m x) * sum_{k<m} (m x)^k / k!``.

    Accepts scalars or arrays; negative ``x`` raises :class:`DomainError`.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("fading CCDF is defined for x >= 0")
    mx = fading.m * x
    term = np.ones_like(mx)
    total = np.ones_like(mx)
    for k in range(1, fading.m):
        term = term * mx / k
        total = total + term
    out = np.exp(-mx) * total
    return float(out) if out.ndim == 0 else out


def sample_fading(fading: NakagamiFading, rng: np.random.Generator, size=None):
    """Draw fading power(s), Gamma(shape=m, scale=1/m)."""
    return rng.gamma(fading.m, 1.0 / fading.m, size=size)


def snr(link: LinkBudget, h, d):
    """Instantaneous SNR ``p g h d^-alpha / sigma^2``; distances below one meter are rejected."""
    d = np.asarray(d, dtype=float)
    if np.any(d < 1.0):
        raise DomainError("path-loss model requires d >= 1 m")
    out = link.snr_at_1m * np.asarray(h, dtype=float) * d ** (-link.alpha)
    return float(out) if out.ndim == 0 else out
