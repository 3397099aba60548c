"""Synthetic ephemeris traces with known ground truth.

Used to validate the analysis pipeline: a simulated ring is rendered as
per-satellite position/velocity samples on a single inclined circular plane,
and plain circular tracks can be given a semi-major-axis step.
"""
from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from ..orbital import MU_EARTH_KM3_S2, mean_motion, semi_major_axis_km
from ..simulator import SimResult
from .records import EphemerisRecord

DEFAULT_EPOCH_S = 1_767_225_600.0  # 2026-01-01T00:00:00Z


def _plane_basis(inclination_deg: float, raan_deg: float = 0.0):
    """Unit vectors spanning the orbit plane: node direction and its in-plane normal."""
    inc = math.radians(inclination_deg)
    raan = math.radians(raan_deg)
    node = np.array([math.cos(raan), math.sin(raan), 0.0])
    perp = np.array(
        [-math.sin(raan) * math.cos(inc), math.cos(raan) * math.cos(inc), math.sin(inc)]
    )
    return node, perp


def _state(radius_km, phase_rad, rate_rad_s, node, perp):
    c, s = math.cos(phase_rad), math.sin(phase_rad)
    r = radius_km * (c * node + s * perp)
    v = radius_km * rate_rad_s * (-s * node + c * perp)
    return r, v


def ring_ephemeris(
    result: SimResult,
    altitude_km: float,
    sat_ids: Optional[Sequence[str]] = None,
    epoch0_s: float = DEFAULT_EPOCH_S,
    inclination_deg: float = 53.0,
    omega_noise: float = 0.0,
    seed: int = 0,
) -> list[EphemerisRecord]:
    """Render a simulated ring as ephemeris records, one per satellite per sample.

    Satellite ``i`` trails satellite ``i - 1`` by the equilibrium spacing plus
    its simulated spacing deviation. Its orbital radius follows the linearized
    Kepler relation for its rate deviation, and its velocity is tangential
    with angular rate ``ω* + ω̃_i``, so ``|r × v| / r²`` returns the simulated
    rate exactly. ``omega_noise`` multiplies every rate deviation by
    ``1 + omega_noise·N(0, 1)``.
    """
    n = result.dtheta.shape[1]
    if sat_ids is None:
        sat_ids = [f"SAT-{i:04d}" for i in range(n)]
    if len(sat_ids) != n:
        raise ValueError("need one id per ring satellite")
    w_eq = mean_motion(altitude_km)
    a_eq = semi_major_axis_km(altitude_km)
    spacing = 2.0 * math.pi / n
    node, perp = _plane_basis(inclination_deg)

    t = result.times
    om = result.omega.copy()
    if omega_noise:
        rng = np.random.default_rng(seed)
        om = om * (1.0 + omega_noise * rng.standard_normal(om.shape))
    # phase drift of the head satellite, integrated from its rate deviation
    drift0 = np.concatenate(
        [[0.0], np.cumsum(0.5 * (result.omega[1:, 0] + result.omega[:-1, 0]) * np.diff(t))]
    )
    theta0 = w_eq * t + drift0
    offsets = np.cumsum(spacing + result.dtheta[:, 1:], axis=1)
    theta = np.concatenate([theta0[:, None], theta0[:, None] - offsets], axis=1)
    radius = a_eq * (1.0 - (2.0 / 3.0) * om / w_eq)

    out = []
    for k in range(t.size):
        for i in range(n):
            r, v = _state(radius[k, i], theta[k, i], w_eq + om[k, i], node, perp)
            out.append(EphemerisRecord(sat_ids[i], epoch0_s + float(t[k]), r, v))
    return out


def circular_track(
    sat_id: str,
    epochs_s: Sequence[float],
    a_km: Sequence[float] | float,
    phase0_rad: float = 0.0,
    inclination_deg: float = 53.0,
) -> list[EphemerisRecord]:
    """Circular-orbit samples whose vis-viva semi-major axis equals ``a_km``.

    ``a_km`` may vary per sample, which models an impulsive altitude change.
    """
    epochs = np.asarray(epochs_s, dtype=float)
    a = np.broadcast_to(np.asarray(a_km, dtype=float), epochs.shape)
    node, perp = _plane_basis(inclination_deg)
    out = []
    for t, ak in zip(epochs, a):
        w = math.sqrt(MU_EARTH_KM3_S2 / ak**3)
        r, v = _state(ak, phase0_rad + w * (t - epochs[0]), w, node, perp)
        out.append(EphemerisRecord(sat_id, float(t), r, v))
    return out
