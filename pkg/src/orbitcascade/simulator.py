"""Time-domain simulation of the cascaded maneuver ring.

The continuous linearized dynamics (pairwise or bilateral) are integrated with
fixed-step RK4. A discrete event layer on top records which satellites are
forced to maneuver: the external seed maneuver, then hop by hop along the ring
each follower whose spacing deviation reaches the trigger threshold.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterator, Literal, Optional

import numpy as np

from .errors import DomainError, NumericalError
from .orbital import RingState, altitude_offset_km, mean_motion, semi_major_axis_km
from .stability import PolicyParams

PolicyKind = Literal["pairwise", "bilateral"]
POLICY_KINDS = ("pairwise", "bilateral")


def derivative(state: RingState, p: PolicyParams, kind: PolicyKind = "pairwise") -> RingState:
    """Right-hand side of the linearized ring dynamics.

    Satellite ``i`` follows ``i - 1`` (indices mod n).
    """
    dth, om = state.dtheta_dev, state.omega_dev
    om_lead = np.roll(om, 1)
    d_dth = om_lead - om
    if kind == "pairwise":
        d_om = p.alpha1 * dth - p.alpha2 * om + p.alpha3 * om_lead
    elif kind == "bilateral":
        dth_next = np.roll(dth, -1)
        om_next = np.roll(om, -1)
        d_om = p.alpha1 * (dth - dth_next) + p.alpha3 * ((om_lead - om) - (om - om_next))
    else:
        raise DomainError(f"unknown policy kind {kind!r}")
    return RingState(state.time_s, d_dth, d_om)


def _rk4_vec(y: np.ndarray, f, dt: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _vector_field(p: PolicyParams, kind: PolicyKind):
    def f(y):
        return derivative(RingState.from_vector(y), p, kind).as_vector()

    return f


def step(state: RingState, p: PolicyParams, kind: PolicyKind, dt_s: float) -> RingState:
    """One classical RK4 step of length ``dt_s``."""
    if not dt_s > 0:
        raise DomainError("dt_s must be positive")
    with np.errstate(over="ignore", invalid="ignore"):
        y = _rk4_vec(state.as_vector(), _vector_field(p, kind), dt_s)
    if not np.all(np.isfinite(y)):
        raise NumericalError("state became non-finite (numerical blow-up)")
    return RingState.from_vector(y, state.time_s + dt_s)


def rk4_matrix(n: int, p: PolicyParams, kind: PolicyKind, dt_s: float) -> np.ndarray:
    """The linear map one RK4 step applies to the interleaved state vector.

    Built column by column from the same RK4 step, so repeated multiplication
    reproduces ``step`` up to rounding.
    """
    f = _vector_field(p, kind)
    eye = np.eye(2 * n)
    return np.column_stack([_rk4_vec(eye[:, j], f, dt_s) for j in range(2 * n)])


def propagate(
    state: RingState,
    p: PolicyParams,
    kind: PolicyKind,
    dt_s: float,
    steps: int,
    record_stride: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Advance ``steps`` RK4 steps; returns sample times and interleaved states.

    Samples are taken every ``record_stride`` steps, always including the first
    and last state.
    """
    if not dt_s > 0:
        raise DomainError("dt_s must be positive")
    M = rk4_matrix(state.n, p, kind, dt_s)
    y = state.as_vector()
    times = [state.time_s]
    ys = [y.copy()]
    for k in range(1, steps + 1):
        y = M @ y
        if k % record_stride == 0 or k == steps:
            times.append(state.time_s + k * dt_s)
            ys.append(y.copy())
    return np.array(times), np.array(ys)


@dataclass(frozen=True)
class ManeuverEvent:
    sat_index: int
    time_s: float
    impulse_rad_s: float
    cause: Literal["external", "cascaded"]
    sat_id: str = ""
    counterpart_id: str = ""


def inject_perturbation(
    state: RingState, sat_index: int, impulse_rad_s: float
) -> tuple[RingState, ManeuverEvent]:
    if not (0 <= sat_index < state.n):
        raise DomainError(f"satellite index {sat_index} out of range")
    om = state.omega_dev.copy()
    om[sat_index] += impulse_rad_s
    new = RingState(state.time_s, state.dtheta_dev.copy(), om)
    return new, ManeuverEvent(sat_index, state.time_s, impulse_rad_s, "external")


@dataclass(frozen=True)
class Perturbation:
    sat_index: int = 0
    impulse_rad_s: float = -1e-7
    start_s: float = 0.0


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one cascade run.

    ``trigger_threshold_rad`` defaults to 10% of the uniform spacing 2π/n.
    ``decouple_altitude_km = inf`` disables the altitude cutoff.
    ``quiescence_window_steps = 0`` disables early termination on quiescence.
    """

    n: int
    params: PolicyParams
    policy_kind: PolicyKind = "pairwise"
    dt_s: float = 1.0
    duration_s: float = 86400.0
    trigger_threshold_rad: Optional[float] = None
    decouple_altitude_km: float = 1.0
    altitude_km: float = 550.0
    perturbation: Perturbation = field(default_factory=Perturbation)
    record_stride: int = 1
    quiescence_window_steps: int = 1000
    quiescence_checks: int = 5

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise DomainError("n must be an integer >= 3")
        if self.policy_kind not in POLICY_KINDS:
            raise DomainError(f"policy_kind must be one of {POLICY_KINDS}")
        if not self.dt_s > 0:
            raise DomainError("dt_s must be positive")
        if not self.duration_s >= self.dt_s:
            raise DomainError("duration_s must be >= dt_s")
        if self.trigger_threshold_rad is None:
            object.__setattr__(self, "trigger_threshold_rad", 0.1 * 2.0 * math.pi / self.n)
        if not self.trigger_threshold_rad > 0:
            raise DomainError("trigger_threshold_rad must be positive")
        if not self.decouple_altitude_km > 0:
            raise DomainError("decouple_altitude_km must be positive")
        if not (0 <= self.perturbation.sat_index < self.n):
            raise DomainError("perturbation satellite index out of range")
        if self.record_stride < 1:
            raise DomainError("record_stride must be >= 1")

    @property
    def steps(self) -> int:
        return int(round(self.duration_s / self.dt_s))

    def with_kind(self, kind: PolicyKind) -> "SimConfig":
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        d["policy_kind"] = kind
        return SimConfig(**d)


@dataclass
class SimResult:
    times: np.ndarray
    dtheta: np.ndarray
    omega: np.ndarray
    events: list[ManeuverEvent]
    chain_hops: int
    terminated_by: Literal["duration", "decoupling", "quiescence"]
    blow_up: bool = False
    policy_kind: str = "pairwise"

    @property
    def amplification_factor(self) -> float:
        return amplification_factor(self)

    def samples(self) -> Iterator[RingState]:
        for t, dth, om in zip(self.times, self.dtheta, self.omega):
            yield RingState(float(t), dth, om)

    @property
    def cascaded_events(self) -> list[ManeuverEvent]:
        return [e for e in self.events if e.cause == "cascaded"]

    def summary(self) -> dict:
        return {
            "policy_kind": self.policy_kind,
            "n": int(self.dtheta.shape[1]),
            "events": [asdict(e) for e in self.events],
            "external_events": sum(e.cause == "external" for e in self.events),
            "cascaded_events": len(self.cascaded_events),
            "amplification_factor": self.amplification_factor,
            "chain_hops": self.chain_hops,
            "terminated_by": self.terminated_by,
            "blow_up": self.blow_up,
            "final_time_s": float(self.times[-1]),
        }

    def to_csv(self) -> str:
        n = self.dtheta.shape[1]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            ["time_s"] + [f"dtheta_{i}" for i in range(n)] + [f"omega_{i}" for i in range(n)]
        )
        for t, dth, om in zip(self.times, self.dtheta, self.omega):
            w.writerow([f"{t:.9g}"] + [f"{v:.9g}" for v in dth] + [f"{v:.9g}" for v in om])
        return buf.getvalue()

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


def amplification_factor(result) -> float:
    """Cascaded maneuvers per external maneuver.

    Accepts a ``SimResult`` or any iterable of ``ManeuverEvent``.
    """
    events = result.events if hasattr(result, "events") else list(result)
    ext = sum(e.cause == "external" for e in events)
    if ext == 0:
        raise DomainError("no external events; amplification factor undefined")
    casc = sum(e.cause == "cascaded" for e in events)
    return casc / ext


def run_cascade(config: SimConfig) -> SimResult:
    """Integrate one perturbation and record the resulting maneuver cascade.

    The chain advances from the seed satellite to its followers: satellite
    ``front + 1`` is recorded as a cascaded maneuver at the first step strictly
    after ``front``'s own maneuver at which its spacing deviation is at or above
    the trigger threshold, so the chain advances at most one hop per step. The chain stops at the seed's leader (one full pass), or when the
    chain front has drifted at least ``decouple_altitude_km`` in altitude.
    """
    n = config.n
    p = config.params
    thr = config.trigger_threshold_rad
    dt = config.dt_s
    steps = config.steps
    pert = config.perturbation

    omega_eq = mean_motion(config.altitude_km)
    a_km = semi_major_axis_km(config.altitude_km)
    M = rk4_matrix(n, p, config.policy_kind, dt)

    y = np.zeros(2 * n)
    events: list[ManeuverEvent] = []
    times, states = [0.0], [y.copy()]
    seed = pert.sat_index
    front: Optional[int] = None
    front_step = -1
    chain_done = False
    hops = 0
    terminated_by = "duration"
    blow_up = False
    last_norm = None
    decreasing = 0

    def check_chain(k, t):
        nonlocal front, front_step, hops, chain_done, terminated_by
        dalt = altitude_offset_km(y[2 * front + 1], omega_eq, a_km)
        if abs(dalt) >= config.decouple_altitude_km:
            terminated_by = "decoupling"
            chain_done = True
            return True
        nxt = (front + 1) % n
        if nxt == seed:
            chain_done = True
            return False
        if k > front_step and abs(y[2 * nxt]) >= thr:
            events.append(ManeuverEvent(nxt, t, float(y[2 * nxt + 1]), "cascaded"))
            front = nxt
            front_step = k
            hops += 1
        return False

    for k in range(steps + 1):
        t = k * dt
        if front is None and t >= pert.start_s - 1e-9 * dt:
            state, ev = inject_perturbation(
                RingState.from_vector(y, t), pert.sat_index, pert.impulse_rad_s
            )
            y = state.as_vector()
            events.append(ev)
            front = seed
            front_step = k
            if k == 0:
                states[0] = y.copy()
        if front is not None and not chain_done:
            if check_chain(k, t):
                break
        if (
            front is not None
            and config.quiescence_window_steps > 0
            and k > 0
            and k % config.quiescence_window_steps == 0
        ):
            dth = y[0::2]
            cur = float(np.linalg.norm(dth))
            if np.max(np.abs(dth)) < thr / 10.0 and last_norm is not None and cur < last_norm:
                decreasing += 1
            else:
                decreasing = 0
            last_norm = cur
            if decreasing >= config.quiescence_checks:
                terminated_by = "quiescence"
                break
        if k == steps:
            break
        with np.errstate(over="ignore", invalid="ignore"):
            y_new = M @ y
        if not np.all(np.isfinite(y_new)):
            blow_up = True
            terminated_by = "duration"
            break
        y = y_new
        if (k + 1) % config.record_stride == 0 or k + 1 == steps:
            times.append((k + 1) * dt)
            states.append(y.copy())

    if times[-1] != k * dt:
        times.append(k * dt)
        states.append(y.copy())
    arr = np.array(states)
    return SimResult(
        times=np.array(times),
        dtheta=arr[:, 0::2],
        omega=arr[:, 1::2],
        events=events,
        chain_hops=hops,
        terminated_by=terminated_by,
        blow_up=blow_up,
        policy_kind=config.policy_kind,
    )
