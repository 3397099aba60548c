"""Pairwise collision probability on the conjunction plane.

The combined position covariance and miss vector are projected onto the plane
normal to the relative velocity, rotated into the covariance principal axes,
and the 2D Gaussian is integrated over the combined hard-body disk.
"""
from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DataError, DegenerateGeometryError, DomainError, NumericalError

log = logging.getLogger(__name__)

SIGMA_FLOOR_KM = 1e-9


@dataclass(frozen=True)
class StateVector:
    position_km: np.ndarray
    velocity_km_s: np.ndarray
    covariance: np.ndarray
    radius_km: float

    def __post_init__(self):
        r = np.asarray(self.position_km, dtype=float).reshape(3)
        v = np.asarray(self.velocity_km_s, dtype=float).reshape(3)
        c = np.asarray(self.covariance, dtype=float).reshape(3, 3)
        if not np.allclose(c, c.T, rtol=1e-12, atol=1e-15):
            raise DataError("covariance must be symmetric")
        tr = float(np.trace(c))
        if np.linalg.eigvalsh(c).min() < -1e-12 * max(tr, 0.0):
            raise DataError("covariance must be positive semi-definite")
        if not self.radius_km > 0:
            raise DomainError("radius_km must be positive")
        if not np.linalg.norm(v) > 0:
            raise DomainError("velocity must be nonzero")
        object.__setattr__(self, "position_km", r)
        object.__setattr__(self, "velocity_km_s", v)
        object.__setattr__(self, "covariance", c)


@dataclass(frozen=True)
class ConjunctionGeometry:
    miss_x_km: float
    miss_y_km: float
    sigma_x_km: float
    sigma_y_km: float
    combined_radius_km: float

    def __post_init__(self):
        if not (self.sigma_x_km > 0 and self.sigma_y_km > 0):
            raise DomainError("sigmas must be positive")
        if not self.combined_radius_km > 0:
            raise DomainError("combined radius must be positive")

    @property
    def miss_distance_km(self) -> float:
        return math.hypot(self.miss_x_km, self.miss_y_km)


@dataclass(frozen=True)
class CdmRecord:
    object_a_id: str
    object_b_id: str
    tca: float
    pc: float
    miss_distance_km: float

    def __post_init__(self):
        if not (0.0 <= self.pc <= 1.0):
            raise DataError(f"pc {self.pc} outside [0, 1]")
        if not self.miss_distance_km >= 0:
            raise DataError("miss distance must be non-negative")

    def involves(self, obj_id: str) -> bool:
        return obj_id in (self.object_a_id, self.object_b_id)


def project_to_conjunction_plane(a: StateVector, b: StateVector) -> ConjunctionGeometry:
    vr = b.velocity_km_s - a.velocity_km_s
    vr_norm = np.linalg.norm(vr)
    cross = np.cross(b.velocity_km_s, a.velocity_km_s)
    cross_norm = np.linalg.norm(cross)
    scale = np.linalg.norm(a.velocity_km_s) * np.linalg.norm(b.velocity_km_s)
    if vr_norm == 0.0 or cross_norm <= 1e-12 * scale:
        raise DegenerateGeometryError("velocities are parallel; conjunction plane undefined")
    e1 = vr / vr_norm
    e2 = cross / cross_norm
    e3 = np.cross(e1, e2)
    Q = np.column_stack([e2, e3])

    combined = a.covariance + b.covariance
    tr = float(np.trace(combined))
    if np.linalg.eigvalsh(combined).min() < -1e-12 * max(tr, 0.0):
        raise DataError("combined covariance is not positive semi-definite")
    C = Q.T @ combined @ Q
    C = 0.5 * (C + C.T)
    evals, U = np.linalg.eigh(C)
    U = U / np.linalg.norm(U, axis=0)

    miss = U.T @ Q.T @ (b.position_km - a.position_km)
    sig = np.sqrt(np.clip(evals, 0.0, None))
    if np.any(sig < SIGMA_FLOOR_KM):
        log.warning("projected sigma below %g km; flooring", SIGMA_FLOOR_KM)
        sig = np.maximum(sig, SIGMA_FLOOR_KM)
    return ConjunctionGeometry(
        miss_x_km=float(miss[0]),
        miss_y_km=float(miss[1]),
        sigma_x_km=float(sig[0]),
        sigma_y_km=float(sig[1]),
        combined_radius_km=float(a.radius_km + b.radius_km),
    )


@lru_cache(maxsize=None)
def _gl(m: int):
    return np.polynomial.legendre.leggauss(m)


def _gl_panel(f, a: float, b: float, m: int) -> float:
    x, w = _gl(m)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    return float(half * np.dot(w, f(mid + half * x)))


def adaptive_gauss_legendre(f, a, b, rtol, atol=1e-300, order=10, max_panels=20000):
    """Globally adaptive composite Gauss–Legendre quadrature of a vectorized f.

    Each panel's error is estimated as the difference between one ``order``-point
    rule and the two half-panel rules; the worst panel is bisected until the
    summed error estimate is within ``max(rtol·|I|, atol)``.

    Returns ``(integral, error_estimate)``.
    """

    def panel(lo, hi):
        whole = _gl_panel(f, lo, hi, order)
        mid = 0.5 * (lo + hi)
        left = _gl_panel(f, lo, mid, order)
        right = _gl_panel(f, mid, hi, order)
        return left + right, abs(left + right - whole)

    # seed with a few panels so narrow features are not missed
    edges = np.linspace(a, b, 5)
    heap = []
    total = 0.0
    err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, e = panel(lo, hi)
        heapq.heappush(heap, (-e, lo, hi, val))
        total += val
        err += e
    n_panels = len(heap)
    while err > max(rtol * abs(total), atol):
        if n_panels >= max_panels:
            raise NumericalError(
                f"quadrature did not converge: error {err:.3g} vs target "
                f"{max(rtol * abs(total), atol):.3g}",
                achieved_error=err,
            )
        neg_e, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        total -= val
        err += neg_e
        for l2, h2 in ((lo, mid), (mid, hi)):
            v2, e2 = panel(l2, h2)
            heapq.heappush(heap, (-e2, l2, h2, v2))
            total += v2
            err += e2
        n_panels += 1
    # recompute to shed accumulated rounding in the running sums
    total = math.fsum(item[3] for item in heap)
    err = math.fsum(-item[0] for item in heap)
    return total, err


def collision_probability(geom: ConjunctionGeometry, rel_tol: float = 1e-9) -> float:
    """Gaussian mass of the miss-distance distribution inside the hard-body disk.

    Integrated in polar coordinates (r in [0, R], φ in [0, 2π]) so that the disk
    boundary is a coordinate line, with nested adaptive Gauss–Legendre rules.
    """
    if not (0.0 < rel_tol <= 1e-3):
        raise DomainError("rel_tol must lie in (0, 1e-3]")
    xm, ym = geom.miss_x_km, geom.miss_y_km
    sx, sy = geom.sigma_x_km, geom.sigma_y_km
    R = geom.combined_radius_km
    norm = 1.0 / (2.0 * math.pi * sx * sy)

    # quick exit: the disk lies entirely in a region where the density underflows
    d = math.hypot(xm, ym)
    smax = max(sx, sy)
    if d > R and 0.5 * ((d - R) / smax) ** 2 > 745.0:
        return 0.0

    inner_tol = rel_tol * 0.1

    def inner(r):
        r = np.atleast_1d(r)
        out = np.empty(r.shape)
        for idx, ri in enumerate(r):
            if ri == 0.0:
                out[idx] = 0.0
                continue

            def g(phi, ri=ri):
                x = ri * np.cos(phi)
                y = ri * np.sin(phi)
                q = ((x - xm) / sx) ** 2 + ((y - ym) / sy) ** 2
                return np.exp(-0.5 * q)

            val, _ = adaptive_gauss_legendre(g, 0.0, 2.0 * math.pi, inner_tol)
            out[idx] = ri * val
        return out

    val, err = adaptive_gauss_legendre(inner, 0.0, R, rel_tol * 0.5)
    pc = norm * val
    return float(min(max(pc, 0.0), 1.0))


def pc_monte_carlo(
    geom: ConjunctionGeometry, samples: int = 1_000_000, seed: int = 0
) -> tuple[float, float]:
    """Monte-Carlo estimate of Pc and its binomial standard error."""
    if samples < 1000:
        raise DomainError("pc_monte_carlo needs at least 1000 samples")
    rng = np.random.default_rng(seed)
    R2 = geom.combined_radius_km**2
    hits = 0
    chunk = 1_000_000
    left = samples
    while left > 0:
        m = min(chunk, left)
        x = rng.normal(geom.miss_x_km, geom.sigma_x_km, m)
        y = rng.normal(geom.miss_y_km, geom.sigma_y_km, m)
        hits += int(np.count_nonzero(x * x + y * y <= R2))
        left -= m
    p = hits / samples
    return p, math.sqrt(p * (1.0 - p) / samples)


def is_high_risk(pc: float, threshold: float = 1e-5) -> bool:
    if not (0.0 <= pc <= 1.0 and 0.0 <= threshold <= 1.0):
        raise DomainError("probabilities must lie in [0, 1]")
    return pc >= threshold
