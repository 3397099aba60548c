"""From ephemeris traces to maneuver events, policy sensitivities and cascade chains."""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from ..conjunction import CdmRecord
from ..errors import DataError, DomainError, InferenceError
from ..orbital import MU_EARTH_KM3_S2, EquilibriumState
from ..simulator import ManeuverEvent
from ..stability import PolicyParams
from .records import EphemerisRecord, semi_major_axis

TWO_PI = 2.0 * math.pi


def group_by_satellite(
    records: Iterable[EphemerisRecord] | Mapping[str, Sequence[EphemerisRecord]],
) -> dict[str, list[EphemerisRecord]]:
    """Per-satellite series in input order; raises if any series is not strictly time-sorted."""
    if isinstance(records, Mapping):
        groups = {k: list(v) for k, v in records.items()}
    else:
        groups = defaultdict(list)
        for rec in records:
            groups[rec.sat_id].append(rec)
        groups = dict(groups)
    for sat, series in groups.items():
        t = [r.epoch_s for r in series]
        if any(b <= a for a, b in zip(t, t[1:])):
            raise DataError(f"series for {sat} is not strictly time-sorted")
    return groups


def argument_of_latitude(r: np.ndarray, v: np.ndarray) -> np.ndarray:
    """In-plane angle from the ascending node, radians in [0, 2π). Rows are samples."""
    h = np.cross(r, v)
    h_hat = h / np.linalg.norm(h, axis=-1, keepdims=True)
    node = np.cross(np.array([0.0, 0.0, 1.0]), h)
    nn = np.linalg.norm(node, axis=-1, keepdims=True)
    equatorial = nn[..., 0] < 1e-12 * np.linalg.norm(h, axis=-1)
    node = np.where(equatorial[..., None], np.array([1.0, 0.0, 0.0]), node / np.where(nn == 0, 1, nn))
    perp = np.cross(h_hat, node)
    return np.mod(np.arctan2(np.sum(r * perp, axis=-1), np.sum(r * node, axis=-1)), TWO_PI)


def angular_rate(r: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``|r × v| / r²``, rad/s."""
    return np.linalg.norm(np.cross(r, v), axis=-1) / np.sum(r * r, axis=-1)


@dataclass(frozen=True)
class RingTrace:
    """A shell observed at common epochs, with ring adjacency by phase.

    ``leader[k, i]`` is the satellite directly ahead of ``i`` at epoch ``k``
    and ``dtheta[k, i]`` the phase gap to it.
    """

    sat_ids: tuple[str, ...]
    epochs_s: np.ndarray
    theta: np.ndarray
    omega: np.ndarray
    sma_km: np.ndarray
    leader: np.ndarray
    dtheta: np.ndarray

    @property
    def n(self) -> int:
        return len(self.sat_ids)

    def follower_of(self, k: int, i: int) -> int:
        return int(np.flatnonzero(self.leader[k] == i)[0])


def build_ring_trace(records) -> RingTrace:
    groups = group_by_satellite(records)
    if not groups:
        raise DataError("no ephemeris records")
    ids = tuple(sorted(groups))
    common = set.intersection(*(set(r.epoch_s for r in groups[s]) for s in ids))
    if not common:
        raise DataError("satellites share no common epochs")
    epochs = np.array(sorted(common))
    T, n = epochs.size, len(ids)
    r = np.empty((T, n, 3))
    v = np.empty((T, n, 3))
    sma = np.empty((T, n))
    for j, sat in enumerate(ids):
        by_t = {rec.epoch_s: rec for rec in groups[sat]}
        for k, t in enumerate(epochs):
            rec = by_t[t]
            r[k, j] = rec.position_km
            v[k, j] = rec.velocity_km_s
            sma[k, j] = semi_major_axis(rec)
    theta = argument_of_latitude(r, v)
    omega = angular_rate(r, v)
    order = np.argsort(theta, axis=1, kind="stable")
    leader = np.empty((T, n), dtype=int)
    rows = np.arange(T)[:, None]
    leader[rows, order] = np.roll(order, -1, axis=1)
    dtheta = np.mod(theta[rows, leader] - theta, TWO_PI)
    if n == 1:
        dtheta[:] = TWO_PI
    return RingTrace(ids, epochs, theta, omega, sma, leader, dtheta)


def _uniform_step(epochs: np.ndarray) -> float:
    if epochs.size < 2:
        raise InferenceError("need at least two epochs")
    d = np.diff(epochs)
    h = float(np.median(d))
    if np.max(np.abs(d - h)) > 1e-6 * h + 1e-6:
        raise InferenceError("epochs must be uniformly spaced for differentiation")
    return h


def five_point_derivative(x: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central difference along axis 0; first and last two rows are NaN."""
    d = np.full(x.shape, np.nan)
    d[2:-2] = (-x[4:] + 8.0 * x[3:-1] - 8.0 * x[1:-3] + x[:-4]) / (12.0 * h)
    return d


@dataclass(frozen=True)
class PolicyEstimate:
    params: PolicyParams
    residual_rms: float
    sample_count: int

    def __post_init__(self):
        if self.sample_count < 10:
            raise DomainError("sample_count must be at least 10")
        if not self.residual_rms >= 0:
            raise DomainError("residual_rms must be non-negative")

    def to_dict(self) -> dict:
        return {
            "alpha1": self.params.alpha1,
            "alpha2": self.params.alpha2,
            "alpha3": self.params.alpha3,
            "residual_rms": self.residual_rms,
            "sample_count": self.sample_count,
        }


def infer_policy(
    records,
    eq: EquilibriumState,
    min_samples: int = 10,
    noise_floor: float = 1e-12,
    exclude: Sequence[ManeuverEvent] = (),
) -> PolicyEstimate:
    """Least-squares fit of ``dω̃_i/dt = α1·Δθ̃_i − α2·ω̃_i + α3·ω̃_{i−1}`` to a shell trace.

    Rates are differentiated with the five-point central stencil, so the two
    samples at each end of the trace do not contribute rows. Deviations no
    larger than ``noise_floor`` times their reference scale (ω* for rates, 2π
    for spacings) are treated as zero: positions rendered from an exact
    equilibrium still carry rounding noise of that order.

    Rows whose stencil spans an ``exclude`` event (an external impulse, which
    the law does not model) are dropped for that satellite and its follower.
    """
    tr = build_ring_trace(records)
    if tr.n < 2:
        raise InferenceError("need at least two satellites")
    h = _uniform_step(tr.epochs_s)
    om_dev = tr.omega - eq.mean_motion_rad_s
    dth_dev = tr.dtheta - eq.spacing_rad
    rows = np.arange(tr.epochs_s.size)[:, None]
    om_lead = om_dev[rows, tr.leader]
    dom = five_point_derivative(om_dev, h)
    keep = np.zeros(om_dev.shape, dtype=bool)
    keep[2:-2] = True
    index = {sat: j for j, sat in enumerate(tr.sat_ids)}
    t = tr.epochs_s
    for ev in exclude:
        j = index.get(ev.sat_id)
        if j is None:
            continue
        for k in range(2, t.size - 2):
            if t[k - 2] < ev.time_s <= t[k + 2]:
                keep[k, j] = False
                keep[k, tr.follower_of(k, j)] = False
    X = np.column_stack([dth_dev[keep], -om_dev[keep], om_lead[keep]])
    y = dom[keep]
    if y.size < min_samples:
        raise InferenceError(f"only {y.size} usable samples, need {min_samples}")
    floor = noise_floor * np.array([TWO_PI, eq.mean_motion_rad_s, eq.mean_motion_rad_s])
    if np.any(np.max(np.abs(X), axis=0) <= floor):
        raise InferenceError("design matrix is rank-deficient (a regressor is zero to rounding)")
    scale = np.linalg.norm(X, axis=0)
    Xs = X / scale
    sv = np.linalg.svd(Xs, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        raise InferenceError("design matrix is rank-deficient")
    coef, *_ = np.linalg.lstsq(Xs, y, rcond=None)
    coef = coef / scale
    resid = y - X @ coef
    try:
        params = PolicyParams(float(coef[0]), float(coef[1]), float(coef[2]))
    except DomainError as exc:
        raise InferenceError(f"fitted sensitivities violate sign assumptions: {coef}") from exc
    return PolicyEstimate(params, float(np.sqrt(np.mean(resid**2))), int(y.size))


def detect_external_maneuvers(
    records,
    cdms: Sequence[CdmRecord],
    pc_threshold: float = 1e-5,
    sma_dev_km: float = 1.0,
    cdm_window_s: float = 86_400.0,
    baseline_samples: int = 24,
    min_baseline: int = 3,
) -> list[ManeuverEvent]:
    """Flag collision-avoidance maneuvers: a semi-major-axis jump preceded by a risky conjunction.

    The prediction for each sample is the median semi-major axis of up to
    ``baseline_samples`` preceding samples. A run of consecutive deviating
    samples counts once, at its first sample, and only if a report with
    ``pc >= pc_threshold`` involving the satellite has its TCA within
    ``cdm_window_s`` before (or at) that epoch.
    """
    groups = group_by_satellite(records)
    ids = sorted(groups)
    by_obj: dict[str, list[CdmRecord]] = defaultdict(list)
    for c in cdms:
        if c.pc >= pc_threshold:
            by_obj[c.object_a_id].append(c)
            if c.object_b_id != c.object_a_id:
                by_obj[c.object_b_id].append(c)
    events = []
    for idx, sat in enumerate(ids):
        series = groups[sat]
        a = np.array([semi_major_axis(r) for r in series])
        in_run = False
        for k in range(min_baseline, a.size):
            pred = float(np.median(a[max(0, k - baseline_samples):k]))
            dev = a[k] - pred
            if abs(dev) < sma_dev_km:
                in_run = False
                continue
            if in_run:
                continue
            in_run = True
            t = series[k].epoch_s
            risky = [c for c in by_obj.get(sat, ()) if t - cdm_window_s <= c.tca <= t]
            if not risky:
                continue
            worst = max(risky, key=lambda c: c.pc)
            other = worst.object_b_id if worst.object_a_id == sat else worst.object_a_id
            w = math.sqrt(MU_EARTH_KM3_S2 / pred**3)
            impulse = -(3.0 * w / (2.0 * pred)) * dev
            events.append(ManeuverEvent(idx, t, impulse, "external", sat_id=sat, counterpart_id=other))
    events.sort(key=lambda e: (e.time_s, e.sat_id))
    return events


@dataclass(frozen=True)
class ChainHop:
    sat_id: str
    epoch_s: float
    dtheta_before_rad: float
    dtheta_after_rad: float


@dataclass(frozen=True)
class CascadeChain:
    seed_event: ManeuverEvent
    hops: tuple[ChainHop, ...]

    def __post_init__(self):
        t = [self.seed_event.time_s] + [h.epoch_s for h in self.hops]
        if any(b <= a for a, b in zip(t, t[1:])):
            raise DataError("hop epochs must strictly increase along a chain")

    @property
    def hop_count(self) -> int:
        return len(self.hops)

    def to_dict(self) -> dict:
        e = self.seed_event
        return {
            "seed": {
                "sat_id": e.sat_id,
                "counterpart_id": e.counterpart_id,
                "time_s": e.time_s,
                "impulse_rad_s": e.impulse_rad_s,
            },
            "hop_count": self.hop_count,
            "hops": [
                {
                    "sat_id": h.sat_id,
                    "epoch_s": h.epoch_s,
                    "dtheta_before_rad": h.dtheta_before_rad,
                    "dtheta_after_rad": h.dtheta_after_rad,
                }
                for h in self.hops
            ],
        }


def _response_index(sign_series: np.ndarray, start: int, stop: int) -> Optional[int]:
    """First index in ``(start, stop)`` where the sign differs from the previous sample."""
    for k in range(max(start + 1, 1), stop):
        a, b = sign_series[k - 1], sign_series[k]
        if a != 0 and b != 0 and a != b:
            return k
    return None


def extract_cascade_chains(
    records,
    seed_events: Sequence[ManeuverEvent],
    trigger_threshold_rad: float,
    eq: Optional[EquilibriumState] = None,
    window_s: Optional[float] = None,
    decouple_sma_km: Optional[float] = None,
    require_response: bool = True,
) -> list[CascadeChain]:
    """Walk each seed's followers hop by hop along the ring.

    The follower of the current chain front joins the chain at the first
    epoch strictly after the front's own maneuver where its spacing deviation
    is at or above ``trigger_threshold_rad``. With ``require_response`` the
    follower must also be seen correcting: its rate derivative (five-point
    stencil) changes sign at or after the crossing. The walk stops at the
    seed's own leader, when no follower qualifies within ``window_s`` of the
    front's maneuver, or when the front's semi-major axis has moved at least
    ``decouple_sma_km`` from the equilibrium value.
    """
    if not trigger_threshold_rad > 0:
        raise DomainError("trigger_threshold_rad must be positive")
    tr = build_ring_trace(records)
    T = tr.epochs_s.size
    spacing = eq.spacing_rad if eq is not None else TWO_PI / tr.n
    dth_dev = tr.dtheta - spacing
    if eq is not None:
        a_eq = (MU_EARTH_KM3_S2 / eq.mean_motion_rad_s**2) ** (1.0 / 3.0)
    else:
        a_eq = float(np.median(tr.sma_km[0]))
    sign_dom = None
    if require_response:
        h = _uniform_step(tr.epochs_s)
        sign_dom = np.sign(np.nan_to_num(five_point_derivative(tr.omega, h)))
    index = {s: j for j, s in enumerate(tr.sat_ids)}

    chains = []
    for seed in seed_events:
        if seed.sat_id not in index:
            raise DataError(f"seed satellite {seed.sat_id!r} not in the trace")
        k0 = int(np.searchsorted(tr.epochs_s, seed.time_s - 1e-9))
        hops: list[ChainHop] = []
        if k0 >= T:
            chains.append(CascadeChain(seed, ()))
            continue
        seed_j = index[seed.sat_id]
        front, k_front = seed_j, k0
        k_check = k0
        while True:
            f = tr.follower_of(k_front, front)
            if f == seed_j or f == front:
                break
            k_stop = T
            if window_s is not None:
                k_stop = int(np.searchsorted(tr.epochs_s, tr.epochs_s[k_front] + window_s, side="right"))
            hit = None
            for k in range(k_check, k_stop):
                if decouple_sma_km is not None and abs(tr.sma_km[k, front] - a_eq) >= decouple_sma_km:
                    break
                if k > k_front and abs(dth_dev[k, f]) >= trigger_threshold_rad:
                    hit = k
                    break
            if hit is None:
                break
            k_after = hit
            if require_response:
                k_resp = _response_index(sign_dom[:, f], hit - 1, k_stop)
                if k_resp is None:
                    break
                k_after = k_resp
            hops.append(
                ChainHop(
                    sat_id=tr.sat_ids[f],
                    epoch_s=float(tr.epochs_s[hit]),
                    dtheta_before_rad=float(tr.dtheta[hit - 1, f]),
                    dtheta_after_rad=float(tr.dtheta[k_after, f]),
                )
            )
            front, k_front = f, hit
            k_check = hit + 1
        chains.append(CascadeChain(seed, tuple(hops)))
    return chains
