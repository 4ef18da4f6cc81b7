"""Spherical geometry between the typical user at ``(0, 0, r_e)`` and circular orbits.

Angles are radians and lengths are meters throughout. The functions accept
numpy arrays where that is natural (distances, cap membership); the ones with
error conditions are scalar.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OutOfCap, OutOfRange

# sqrt arguments in [-TANGENCY_SLACK, 0) are treated as exact tangency
TANGENCY_SLACK = 1e-12


@dataclass(frozen=True)
class OrbitGeometry:
    """Earth radius ``r_e``, orbit radius ``r_o`` and communication range ``gamma``."""

    r_e: float
    r_o: float
    gamma: float

    def __post_init__(self):
        if not (self.r_e > 0 and self.r_o > self.r_e):
            raise DomainError(f"need r_o > r_e > 0, got r_e={self.r_e}, r_o={self.r_o}")
        lo, hi = self.r_o - self.r_e, self.horizon_range
        # a few ulps of slack so that gamma = sqrt(r_o^2 - r_e^2) computed elsewhere is accepted
        eps = 1e-12 * hi
        if not (lo - eps <= self.gamma <= hi + eps):
            raise DomainError(f"gamma={self.gamma} outside [{lo}, {hi}]")

    @classmethod
    def from_altitude(cls, r_e: float, altitude: float, gamma: float) -> "OrbitGeometry":
        return cls(r_e=r_e, r_o=r_e + altitude, gamma=gamma)

    @property
    def r_a(self) -> float:
        """Orbit altitude ``r_o - r_e``."""
        return self.r_o - self.r_e

    @property
    def horizon_range(self) -> float:
        """Largest admissible range, the distance to a satellite on the horizon."""
        return math.sqrt(self.r_o**2 - self.r_e**2)

    @property
    def xi(self) -> float:
        return max_azimuth_xi(self)


def _cap_angle(geom: OrbitGeometry, u: float) -> float:
    # 1 - cos(k) = (u^2 - r_a^2) / (2 r_e r_o) = 2 sin^2(k/2); avoids arccos near 1
    s = (u - geom.r_a) * (u + geom.r_a) / (4.0 * geom.r_e * geom.r_o)
    return 2.0 * math.asin(math.sqrt(min(max(s, 0.0), 1.0)))


def max_azimuth_xi(geom: OrbitGeometry) -> float:
    """Polar half-angle of the cap of points within ``gamma`` of the user.

    Equal to ``arccos((r_e^2 + r_o^2 - gamma^2) / (2 r_e r_o))`` by the cosine
    law, evaluated through the half-angle form so that small caps keep full
    relative precision.
    """
    return _cap_angle(geom, geom.gamma)


def kappa(geom: OrbitGeometry, u: float) -> float:
    """Cap half-angle for communication range ``u``.

    Raises :class:`OutOfRange` unless ``r_a <= u <= sqrt(r_o^2 - r_e^2)``.
    """
    eps = 1e-12 * geom.horizon_range
    if not (geom.r_a - eps <= u <= geom.horizon_range + eps):
        raise OutOfRange(f"u={u} outside [{geom.r_a}, {geom.horizon_range}]")
    return _cap_angle(geom, u)


def arc_sine_argument(cap: float, tilt):
    """``1 - cos^2(cap) sec^2(tilt)`` in a cancellation-free form.

    ``tilt`` is the distance of the inclination from pi/2. The identity
    ``cos^2(t) - cos^2(c) = sin(c - t) sin(c + t)`` keeps the value accurate
    near tangency, where the naive expression loses every digit.
    """
    tilt = np.abs(tilt)
    return np.sin(cap - tilt) * np.sin(cap + tilt) / np.cos(tilt) ** 2


def arc_half_angles(cap: float, tilt) -> np.ndarray:
    """Vectorised visible half-arc; zero wherever the orbit misses the cap."""
    s = np.clip(arc_sine_argument(cap, tilt), 0.0, 1.0)
    return np.arcsin(np.sqrt(s))


def visible_arc_half_angle(geom: OrbitGeometry, phi: float) -> float:
    """Half the angular extent of the arc where orbit inclination ``phi`` meets the cap.

    The full arc length is ``2 * r_o * visible_arc_half_angle(geom, phi)``.
    Tangent orbits (``|phi - pi/2| = xi``) give 0. Orbits that miss the cap
    raise :class:`OutOfCap`.
    """
    s = float(arc_sine_argument(max_azimuth_xi(geom), phi - math.pi / 2))
    if s < -TANGENCY_SLACK:
        raise OutOfCap(f"inclination {phi} does not meet the cap (xi={geom.xi})")
    return math.asin(math.sqrt(min(max(s, 0.0), 1.0)))


def user_satellite_distance(geom: OrbitGeometry, phi, omega):
    """Distance from ``(0, 0, r_e)`` to the satellite at argument ``omega`` on an orbit of inclination ``phi``."""
    r_e, r_o = geom.r_e, geom.r_o
    return np.sqrt(r_o**2 - 2.0 * r_e * r_o * np.sin(omega) * np.sin(phi) + r_e**2)


def in_cap(geom: OrbitGeometry, phi, omega):
    """True where the satellite is within ``gamma`` of the user."""
    return user_satellite_distance(geom, phi, omega) <= geom.gamma
