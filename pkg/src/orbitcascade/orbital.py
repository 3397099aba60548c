"""Shell geometry, equilibrium layout and Walker phasing.

All angles are radians. Degrees appear only in ``ShellConfig.inclination_deg``
and at the CLI boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

MU_EARTH_KM3_S2 = 398600.4418
R_EARTH_KM = 6378.137

ALTITUDE_RANGE_KM = (200.0, 2000.0)


def _check_altitude(altitude_km: float) -> None:
    lo, hi = ALTITUDE_RANGE_KM
    if not (lo <= altitude_km <= hi):
        raise DomainError(f"altitude {altitude_km} km outside [{lo}, {hi}] km")


def semi_major_axis_km(altitude_km: float) -> float:
    return R_EARTH_KM + altitude_km


def mean_motion(altitude_km: float) -> float:
    """Two-body mean motion (rad/s) of a circular orbit at ``altitude_km``."""
    _check_altitude(altitude_km)
    a = semi_major_axis_km(altitude_km)
    return math.sqrt(MU_EARTH_KM3_S2 / a**3)


def mean_motion_from_sma(a_km: float) -> float:
    if a_km <= 0:
        raise DomainError("semi-major axis must be positive")
    return math.sqrt(MU_EARTH_KM3_S2 / a_km**3)


def altitude_offset_km(omega_dev: float | np.ndarray, omega_eq: float, a_km: float):
    """Altitude change implied by a mean-motion offset (linearized Kepler III).

    delta_a = -(2a / (3 omega)) * delta_omega
    """
    return -(2.0 * a_km / (3.0 * omega_eq)) * np.asarray(omega_dev)


@dataclass(frozen=True)
class ShellConfig:
    """One orbital shell: ``num_orbits`` planes of ``sats_per_orbit`` satellites."""

    num_orbits: int
    sats_per_orbit: int
    altitude_km: float
    inclination_deg: float = 53.0
    phase_factor_f: int = 0
    total_sats: int = field(init=False)

    def __post_init__(self):
        if int(self.num_orbits) != self.num_orbits or self.num_orbits < 1:
            raise DomainError("num_orbits must be an integer >= 1")
        if int(self.sats_per_orbit) != self.sats_per_orbit or self.sats_per_orbit < 1:
            raise DomainError("sats_per_orbit must be an integer >= 1")
        _check_altitude(self.altitude_km)
        f = self.phase_factor_f
        if int(f) != f or not (0 <= f < self.num_orbits):
            raise DomainError(
                f"phase_factor_f must be an integer in [0, {self.num_orbits - 1}]"
            )
        object.__setattr__(self, "num_orbits", int(self.num_orbits))
        object.__setattr__(self, "sats_per_orbit", int(self.sats_per_orbit))
        object.__setattr__(self, "phase_factor_f", int(f))
        object.__setattr__(self, "total_sats", self.num_orbits * self.sats_per_orbit)

    def to_dict(self) -> dict:
        return {
            "num_orbits": self.num_orbits,
            "sats_per_orbit": self.sats_per_orbit,
            "altitude_km": self.altitude_km,
            "inclination_deg": self.inclination_deg,
            "phase_factor_f": self.phase_factor_f,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ShellConfig":
        return cls(
            num_orbits=int(d["num_orbits"]),
            sats_per_orbit=int(d["sats_per_orbit"]),
            altitude_km=float(d["altitude_km"]),
            inclination_deg=float(d.get("inclination_deg", 53.0)),
            phase_factor_f=int(d.get("phase_factor_f", 0)),
        )


@dataclass(frozen=True)
class EquilibriumState:
    spacing_rad: float
    mean_motion_rad_s: float

    def __post_init__(self):
        if not (0.0 < self.spacing_rad <= 2.0 * math.pi):
            raise DomainError("spacing_rad must lie in (0, 2*pi]")
        if not self.mean_motion_rad_s > 0.0:
            raise DomainError("mean_motion_rad_s must be positive")


@dataclass(frozen=True)
class RingState:
    """Deviation of every ring satellite from the equilibrium.

    ``dtheta_dev[i]`` is the spacing deviation of satellite ``i`` to its leader
    ``i - 1`` (mod n), ``omega_dev[i]`` its mean-motion deviation.
    """

    time_s: float
    dtheta_dev: np.ndarray
    omega_dev: np.ndarray

    def __post_init__(self):
        dth = np.asarray(self.dtheta_dev, dtype=float)
        om = np.asarray(self.omega_dev, dtype=float)
        if dth.ndim != 1 or dth.shape != om.shape:
            raise DomainError("dtheta_dev and omega_dev must be 1-D arrays of equal length")
        if dth.size < 2:
            raise DomainError("a ring needs at least 2 satellites")
        object.__setattr__(self, "dtheta_dev", dth)
        object.__setattr__(self, "omega_dev", om)

    @property
    def n(self) -> int:
        return self.dtheta_dev.size

    @classmethod
    def zeros(cls, n: int, time_s: float = 0.0) -> "RingState":
        return cls(time_s, np.zeros(n), np.zeros(n))

    def telescoping_residual(self) -> float:
        """Sum of spacing deviations; zero on a closed ring."""
        return float(np.sum(self.dtheta_dev))

    def as_vector(self) -> np.ndarray:
        """Interleaved ``[dθ_1, ω_1, dθ_2, ω_2, ...]`` layout."""
        y = np.empty(2 * self.n)
        y[0::2] = self.dtheta_dev
        y[1::2] = self.omega_dev
        return y

    @classmethod
    def from_vector(cls, y: np.ndarray, time_s: float = 0.0) -> "RingState":
        y = np.asarray(y, dtype=float)
        return cls(time_s, y[0::2].copy(), y[1::2].copy())


def equilibrium(config: ShellConfig) -> EquilibriumState:
    return EquilibriumState(
        spacing_rad=2.0 * math.pi / config.sats_per_orbit,
        mean_motion_rad_s=mean_motion(config.altitude_km),
    )


def walker_phase_units(config: ShellConfig) -> np.ndarray:
    """Phase of every satellite in integer units of 2π/(num_orbits·sats_per_orbit).

    Returned shape is ``(num_orbits, sats_per_orbit)``.
    """
    P, S, F = config.num_orbits, config.sats_per_orbit, config.phase_factor_f
    k = np.arange(S)
    p = np.arange(P)
    return (k[None, :] * P + F * p[:, None]) % (P * S)


def walker_phases(config: ShellConfig) -> np.ndarray:
    total = config.num_orbits * config.sats_per_orbit
    return walker_phase_units(config) * (2.0 * math.pi / total)


def walker_min_spacing(config: ShellConfig) -> float:
    """Smallest in-plane phase separation between any two satellites of the shell.

    Two satellites differ in phase by ``(dk·P + F·dp)`` units of ``2π/(P·S)``, so
    enumerating ``dk`` in ``[0, S)`` and ``dp`` in ``(-P, P)`` covers every pair.
    """
    P, S, F = config.num_orbits, config.sats_per_orbit, config.phase_factor_f
    total = P * S
    if total == 1:
        return 2.0 * math.pi
    dk = np.arange(S)[:, None]
    dp = np.arange(-(P - 1), P)[None, :]
    m = (dk * P + F * dp) % total
    valid = ~((dk == 0) & (dp == 0))
    d = np.minimum(m, total - m)[valid]
    return float(d.min()) * 2.0 * math.pi / total
