"""Write a synthetic shell trace and conjunction table for the infer/chains commands.

The ring is simulated with a known policy, one satellite is kicked after a
risky conjunction, and every satellite is rendered as ephemeris samples.

    python scripts/make_synthetic_traces.py --out-dir data/
    orbitcascade infer --ephemeris data/ephemeris.csv
    orbitcascade chains --ephemeris data/ephemeris.csv --cdm data/cdm.csv --threshold <printed value>
"""
from __future__ import annotations

import argparse
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from orbitcascade.conjunction import CdmRecord
from orbitcascade.ingest import emit_cdm, emit_ephemeris, ring_ephemeris
from orbitcascade.ingest.synthetic import DEFAULT_EPOCH_S
from orbitcascade.orbital import RingState
from orbitcascade.simulator import Perturbation, SimConfig, inject_perturbation, propagate, run_cascade
from orbitcascade.stability import PolicyParams


@dataclass(frozen=True)
class TraceConfig:
    n: int = 16
    alpha1: float = 1e-8
    alpha2: float = 1e-4
    alpha3: float = 1e-5
    altitude_km: float = 550.0
    dt_s: float = 60.0
    duration_s: float = 3e5
    kick_time_s: float = 3600.0
    impulse_rad_s: float = -1e-6
    pc: float = 2e-5
    omega_noise: float = 0.0
    seed: int = 0

    @property
    def params(self) -> PolicyParams:
        return PolicyParams(self.alpha1, self.alpha2, self.alpha3)


def trigger_threshold(cfg: TraceConfig) -> float:
    """Half the first follower's peak spacing deviation after the kick."""
    s, _ = inject_perturbation(RingState.zeros(cfg.n), 0, cfg.impulse_rad_s)
    _, ys = propagate(s, cfg.params, "pairwise", cfg.dt_s, 1000, 1)
    return 0.5 * float(np.abs(ys[:, 2]).max())


def build(cfg: TraceConfig):
    thr = trigger_threshold(cfg)
    sim = SimConfig(
        n=cfg.n, params=cfg.params, dt_s=cfg.dt_s, duration_s=cfg.duration_s,
        altitude_km=cfg.altitude_km, decouple_altitude_km=math.inf, trigger_threshold_rad=thr,
        perturbation=Perturbation(0, cfg.impulse_rad_s, cfg.kick_time_s), quiescence_window_steps=0,
    )
    res = run_cascade(sim)
    recs = ring_ephemeris(res, cfg.altitude_km, omega_noise=cfg.omega_noise, seed=cfg.seed)
    cdm = CdmRecord(recs[0].sat_id, "DEBRIS-0001", DEFAULT_EPOCH_S + cfg.kick_time_s - 600.0, cfg.pc, 0.15)
    return res, recs, [cdm], thr


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="synthetic")
    for name, field in TraceConfig.__dataclass_fields__.items():
        ap.add_argument(f"--{name.replace('_', '-')}", type=type(field.default), default=field.default)
    args = vars(ap.parse_args())
    out = Path(args.pop("out_dir"))
    cfg = TraceConfig(**args)
    res, recs, cdms, thr = build(cfg)
    out.mkdir(parents=True, exist_ok=True)
    (out / "ephemeris.csv").write_text(emit_ephemeris(recs))
    (out / "cdm.csv").write_text(emit_cdm(cdms))
    meta = {"config": asdict(cfg), "trigger_threshold_rad": thr, "cascaded_events": len(res.cascaded_events)}
    (out / "truth.json").write_text(json.dumps(meta, indent=2) + "\n")
    print(json.dumps(meta, indent=2))


if __name__ == "__main__":
    main()
