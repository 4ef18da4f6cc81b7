"""Orbit/satellite Cox point process, a polar reference constellation, and satellite motion.

Orbits are points ``(theta, phi)`` of a Poisson process on ``[0, pi) x [0, pi]``
with intensity ``lambda sin(phi) / (2 pi)``; each orbit carries a Poisson
number (mean ``mu``) of satellites with i.i.d. uniform arguments.

Every orbit also records the sense in which its satellites travel
(``direction = +1`` means increasing argument). Sampled orbits always start
with ``+1``; the sign only flips when Earth rotation pushes a longitude past
``pi`` and the orbit is re-expressed inside the rectangle as
``(theta - pi, pi - phi)``, which traverses the same great circle backwards.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .geometry import OrbitGeometry, user_satellite_distance

TWO_PI = 2.0 * math.pi
GM_EARTH = 3.986004418e14  # m^3 / s^2
EARTH_ROTATION_RATE = 7.2921159e-5  # rad / s, sidereal


def keplerian_rate(r_o: float) -> float:
    """Angular speed of a circular Keplerian orbit of radius ``r_o`` meters."""
    return math.sqrt(GM_EARTH / r_o**3)


def wrap_2pi(x):
    """Map angles into ``[0, 2 pi)``; exact multiples and rounding up to ``2 pi`` land on 0."""
    y = np.mod(x, TWO_PI)
    y = np.where(y >= TWO_PI, 0.0, y)
    return float(y) if np.ndim(y) == 0 else y


@dataclass(frozen=True)
class Orbit:
    theta: float
    phi: float
    direction: int = 1


@dataclass(frozen=True)
class Satellite:
    orbit: int
    omega: float


@dataclass(frozen=True)
class MotionParams:
    """Along-track angular speed ``omega_s`` and Earth rotation rate ``omega_e`` (rad/s)."""

    omega_s: float
    omega_e: float = EARTH_ROTATION_RATE

    def __post_init__(self):
        if not self.omega_s > 0:
            raise ValueError(f"omega_s must be positive, got {self.omega_s}")
        if not self.omega_e >= 0:
            raise ValueError(f"omega_e must be non-negative, got {self.omega_e}")

    @classmethod
    def kepler(cls, geom: OrbitGeometry, omega_e: float = EARTH_ROTATION_RATE) -> "MotionParams":
        return cls(omega_s=keplerian_rate(geom.r_o), omega_e=omega_e)


@dataclass(frozen=True)
class Constellation:
    geom: OrbitGeometry
    orbits: tuple[Orbit, ...] = ()
    satellites: tuple[Satellite, ...] = ()
    epoch: float = 0.0
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "orbits", tuple(self.orbits))
        object.__setattr__(self, "satellites", tuple(self.satellites))
        n = len(self.orbits)
        for s in self.satellites:
            if not 0 <= s.orbit < n:
                raise ValueError(f"satellite refers to orbit {s.orbit}, constellation has {n}")

    def __len__(self) -> int:
        return len(self.satellites)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(orbit index, inclination, argument)`` of every satellite as arrays."""
        if "arrays" not in self._cache:
            idx = np.fromiter((s.orbit for s in self.satellites), dtype=np.int64, count=len(self))
            omega = np.fromiter((s.omega for s in self.satellites), dtype=float, count=len(self))
            phi_o = np.fromiter((o.phi for o in self.orbits), dtype=float, count=len(self.orbits))
            self._cache["arrays"] = (idx, phi_o[idx], omega)
        return self._cache["arrays"]

    def to_dict(self) -> dict:
        orbits = []
        for o in self.orbits:
            item = {"theta": o.theta, "phi": o.phi}
            if o.direction != 1:
                item["direction"] = o.direction
            orbits.append(item)
        return {
            "geom": {"r_e": self.geom.r_e, "r_o": self.geom.r_o, "gamma": self.geom.gamma},
            "epoch": self.epoch,
            "orbits": orbits,
            "satellites": [{"orbit": s.orbit, "omega": s.omega} for s in self.satellites],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Constellation":
        g = data["geom"]
        return cls(
            geom=OrbitGeometry(r_e=float(g["r_e"]), r_o=float(g["r_o"]), gamma=float(g["gamma"])),
            orbits=tuple(Orbit(float(o["theta"]), float(o["phi"]), int(o.get("direction", 1)))
                         for o in data["orbits"]),
            satellites=tuple(Satellite(int(s["orbit"]), float(s["omega"])) for s in data["satellites"]),
            epoch=float(data.get("epoch", 0.0)),
        )

    def dumps(self) -> str:
        # float repr is shortest round-trip, so the text reloads bit-exactly
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def loads(cls, text: str) -> "Constellation":
        return cls.from_dict(json.loads(text))


# --- batched sampling -------------------------------------------------------


def sample_orbit_counts(rng: np.random.Generator, n_trials: int, lam: float) -> np.ndarray:
    return rng.poisson(lam, size=n_trials)


def sample_orbit_angles(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Longitudes uniform on ``[0, pi)``; inclinations with density ``sin(phi)/2`` by inverse CDF."""
    theta = math.pi * rng.random(n)
    phi = np.arccos(1.0 - 2.0 * rng.random(n))
    return theta, phi


def sample_satellites_on(rng: np.random.Generator, n_orbits: int, mu: float) -> tuple[np.ndarray, np.ndarray]:
    """Poisson(``mu``) satellites on each of ``n_orbits`` orbits.

    Returns the owning orbit index of every satellite and its argument.
    """
    counts = rng.poisson(mu, size=n_orbits)
    owner = np.repeat(np.arange(n_orbits), counts)
    omega = TWO_PI * rng.random(owner.size)
    return owner, omega


def sample_cox(geom: OrbitGeometry, lam: float, mu: float, rng: np.random.Generator) -> Constellation:
    """One realisation of the orbit/satellite Cox process."""
    if not (lam > 0 and mu > 0):
        raise ValueError(f"lambda and mu must be positive, got {lam}, {mu}")
    n = int(sample_orbit_counts(rng, 1, lam)[0])
    theta, phi = sample_orbit_angles(rng, n)
    owner, omega = sample_satellites_on(rng, n, mu)
    return Constellation(
        geom=geom,
        orbits=tuple(Orbit(float(t), float(p)) for t, p in zip(theta, phi)),
        satellites=tuple(Satellite(int(i), float(w)) for i, w in zip(owner, omega)),
    )


def sample_polar(geom: OrbitGeometry, n_orbits: int, n_sats_per_orbit: int, rng: np.random.Generator,
                 spacing: str = "even") -> Constellation:
    """Polar reference constellation: ``n_orbits`` planes at 90 degrees inclination.

    Longitudes are evenly spaced on ``[0, pi)``. With ``spacing="even"`` each
    plane carries exactly ``n_sats_per_orbit`` satellites ``2 pi / n`` apart
    behind one uniform random phase; with ``spacing="poisson"`` the count is
    Poisson with that mean and the arguments are i.i.d. uniform.
    """
    if n_orbits < 1 or n_sats_per_orbit < 1:
        raise ValueError("polar constellation needs at least one orbit and one satellite")
    orbits = tuple(Orbit(math.pi * k / n_orbits, math.pi / 2) for k in range(n_orbits))
    owner, omega = polar_arguments(rng, n_orbits, n_sats_per_orbit, spacing)
    return Constellation(geom=geom, orbits=orbits,
                         satellites=tuple(Satellite(int(i), float(w)) for i, w in zip(owner, omega)))


def polar_arguments(rng: np.random.Generator, n_orbits: int, n_sats: int,
                    spacing: str = "even") -> tuple[np.ndarray, np.ndarray]:
    if spacing == "even":
        phase = TWO_PI * rng.random(n_orbits)
        grid = TWO_PI * np.arange(n_sats) / n_sats
        omega = wrap_2pi(phase[:, None] + grid[None, :]).ravel()
        owner = np.repeat(np.arange(n_orbits), n_sats)
        return owner, omega
    if spacing == "poisson":
        return sample_satellites_on(rng, n_orbits, n_sats)
    raise ValueError(f"unknown spacing {spacing!r}; expected 'even' or 'poisson'")


# --- motion and positions ---------------------------------------------------


def propagate(c: Constellation, dt: float, motion: MotionParams) -> Constellation:
    """Advance satellites by ``omega_s dt`` along track and longitudes by ``omega_e dt``.

    A longitude leaving ``[0, pi)`` is folded back as ``(theta - pi, pi - phi)``
    with reversed direction; the satellite arguments on that orbit become
    ``pi - omega`` so every position is unchanged by the fold.
    """
    if dt < 0:
        raise ValueError("dt must be non-negative")
    folded: dict[int, bool] = {}
    orbits = []
    for i, o in enumerate(c.orbits):
        theta = o.theta + motion.omega_e * dt
        turns = math.floor(theta / math.pi)
        theta -= turns * math.pi
        if theta >= math.pi:
            theta, turns = 0.0, turns + 1
        flip = turns % 2 == 1
        folded[i] = flip
        orbits.append(Orbit(theta, math.pi - o.phi, -o.direction) if flip else Orbit(theta, o.phi, o.direction))
    sats = []
    for s in c.satellites:
        o = c.orbits[s.orbit]
        omega = s.omega + o.direction * motion.omega_s * dt
        if folded[s.orbit]:
            omega = math.pi - omega
        sats.append(Satellite(s.orbit, wrap_2pi(omega)))
    return replace(c, orbits=tuple(orbits), satellites=tuple(sats), epoch=c.epoch + dt)


def satellite_position_ecef(geom: OrbitGeometry, orbit: Orbit, omega) -> np.ndarray:
    """Cartesian position of the satellite at argument ``omega`` (array of shape ``(..., 3)``).

    In-plane point ``(r_o cos w, r_o sin w, 0)``, tilted by the inclination
    about the x-axis, then turned by the longitude about the z-axis.
    """
    omega = np.asarray(omega, dtype=float)
    x0 = geom.r_o * np.cos(omega)
    y0 = geom.r_o * np.sin(omega)
    cp, sp = math.cos(orbit.phi), math.sin(orbit.phi)
    y1, z1 = y0 * cp, y0 * sp
    ct, st = math.cos(orbit.theta), math.sin(orbit.theta)
    return np.stack([ct * x0 - st * y1, st * x0 + ct * y1, z1], axis=-1)


def visible_satellites(c: Constellation) -> list[tuple[Satellite, float]]:
    """Satellites within ``gamma`` of the user, nearest first."""
    if not c.satellites:
        return []
    _, phi, omega = c.arrays()
    dist = user_satellite_distance(c.geom, phi, omega)
    idx = np.flatnonzero(dist <= c.geom.gamma)
    idx = idx[np.argsort(dist[idx], kind="stable")]
    return [(c.satellites[i], float(dist[i])) for i in idx]


def ecef_rows(c: Constellation) -> Iterable[tuple[int, float, float, float]]:
    for k, o in enumerate(c.orbits):
        members = [s for s in c.satellites if s.orbit == k]
        if not members:
            continue
        xyz = satellite_position_ecef(c.geom, o, [s.omega for s in members])
        for row in xyz:
            yield k, float(row[0]), float(row[1]), float(row[2])
