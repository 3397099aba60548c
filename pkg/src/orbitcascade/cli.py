"""Command-line entry point.

Every subcommand accepts ``--config FILE``, an INI file whose section named
after the subcommand holds keys spelled like the long flags (dashes become
underscores). Flags given on the command line override the file.

Exit codes: 0 success, 1 usage or input error, 2 negative verdict
(``stability`` on an unstable policy).
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from .conjunction import ConjunctionGeometry, collision_probability, is_high_risk, pc_monte_carlo
from .errors import OrbitCascadeError
from .ingest import (
    build_ring_trace,
    detect_external_maneuvers,
    extract_cascade_chains,
    infer_policy,
    parse_cdm,
    parse_cdm_geometry,
    parse_ephemeris,
)
from .orbital import EquilibriumState, mean_motion
from .simulator import Perturbation, SimConfig, run_cascade
from .stability import (
    PolicyParams,
    blowup_horizon,
    capacity_bound,
    lifetime_time_of_nth,
    maneuver_count,
    max_real_part,
    safe_distance_bound,
    stability_verdict,
    sup_gain_imag_axis,
)

EXIT_OK, EXIT_USAGE, EXIT_NEGATIVE = 0, 1, 2
DEFAULT_SEED = 20240601
SIG_DIGITS = 9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def fmt(x: float) -> str:
    return f"{x:.{SIG_DIGITS}g}"


def _round(obj: Any) -> Any:
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(fmt(x)) if math.isfinite(x) else None
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(_round(obj), indent=2, sort_keys=True)


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


# --- option plumbing ---------------------------------------------------------

_OPTION_TYPES: dict[str, dict[str, Any]] = {}


def _opt(p: argparse.ArgumentParser, name: str, type_=float, default=None, help_=None, **kw):
    """Register ``--name`` with default ``None`` so the config file can fill it in."""
    dest = name.replace("-", "_")
    _OPTION_TYPES.setdefault(p.prog, {})[dest] = (type_, default)
    p.add_argument(f"--{name}", dest=dest, type=type_, default=None, help=help_, **kw)


def _resolve(args: argparse.Namespace, section: str, prog: str) -> argparse.Namespace:
    conf = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"config file not found: {path}")
        cp = configparser.ConfigParser()
        cp.read(path)
        if cp.has_section(section):
            conf = dict(cp.items(section))
    for dest, (type_, default) in _OPTION_TYPES.get(prog, {}).items():
        if getattr(args, dest, None) is not None:
            continue
        if dest in conf:
            raw = conf[dest]
            try:
                if type_ is bool:
                    val = raw.strip().lower() in ("1", "true", "yes", "on")
                else:
                    val = type_(raw)
            except ValueError as exc:
                raise UsageError(f"config key {dest}: {exc}") from None
            setattr(args, dest, val)
        else:
            setattr(args, dest, default)
    return args


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _params(args) -> PolicyParams:
    _require(args, "alpha1", "alpha2", "alpha3")
    return PolicyParams(args.alpha1, args.alpha2, args.alpha3)


def _read(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"input file not found: {p}")
    return p.read_text(encoding="utf-8")


# --- subcommands -------------------------------------------------------------


def cmd_stability(args) -> int:
    p = _params(args)
    p.require_pairwise()
    v = stability_verdict(p)
    out = {
        "alpha1": p.alpha1,
        "alpha2": p.alpha2,
        "alpha3": p.alpha3,
        "stable": v.stable,
        "margin": v.margin,
        "sup_gain": sup_gain_imag_axis(p),
    }
    if args.n:
        out["max_real_part"] = {str(n): max_real_part(p, n) for n in args.n}
    _emit(dumps(out), args.out)
    return EXIT_OK if v.stable else EXIT_NEGATIVE


def cmd_pc(args) -> int:
    if args.cdm:
        rows = []
        for rec, geom in parse_cdm_geometry(_read(args.cdm)):
            row = {
                "object_a_id": rec.object_a_id,
                "object_b_id": rec.object_b_id,
                "tca_s": rec.tca,
                "pc_reported": rec.pc,
                "pc_computed": None,
                "abs_diff": None,
                "high_risk": is_high_risk(rec.pc, args.threshold),
            }
            if geom is not None:
                pc = collision_probability(geom, args.rel_tol)
                row.update(pc_computed=pc, abs_diff=abs(pc - rec.pc), high_risk=is_high_risk(pc, args.threshold))
            rows.append(row)
        _emit(dumps({"rows": rows, "threshold": args.threshold}), args.out)
        return EXIT_OK
    _require(args, "miss_x", "miss_y", "sigma_x", "sigma_y", "radius")
    geom = ConjunctionGeometry(args.miss_x, args.miss_y, args.sigma_x, args.sigma_y, args.radius)
    pc = collision_probability(geom, args.rel_tol)
    out = {"pc": pc, "high_risk": is_high_risk(pc, args.threshold), "threshold": args.threshold}
    if args.mc_samples:
        est, se = pc_monte_carlo(geom, args.mc_samples, args.seed)
        out["monte_carlo"] = {"pc": est, "stderr": se, "samples": args.mc_samples, "seed": args.seed}
    _emit(dumps(out), args.out)
    return EXIT_OK


def _sim_config(args, kind: str) -> SimConfig:
    _require(args, "n")
    return SimConfig(
        n=args.n,
        params=_params(args),
        policy_kind=kind,
        dt_s=args.dt,
        duration_s=args.duration,
        trigger_threshold_rad=args.threshold,
        decouple_altitude_km=args.decouple_km,
        altitude_km=args.altitude,
        perturbation=Perturbation(args.sat, args.impulse, args.start),
        record_stride=args.stride,
        quiescence_window_steps=args.quiescence_window,
    )


def cmd_simulate(args) -> int:
    if args.policy not in ("pairwise", "bilateral"):
        raise UsageError("--policy must be pairwise or bilateral")
    if args.paired:
        results = {k: run_cascade(_sim_config(args, k)) for k in ("pairwise", "bilateral")}
        pw, bl = results["pairwise"], results["bilateral"]
        a_pw, a_bl = pw.amplification_factor, bl.amplification_factor
        out = {
            "pairwise": pw.summary(),
            "bilateral": bl.summary(),
            "comparison": {
                "pairwise_amplification": a_pw,
                "bilateral_amplification": a_bl,
                "ratio": (a_bl / a_pw) if a_pw > 0 else None,
                "bilateral_not_worse": a_bl <= a_pw,
            },
        }
        if args.out_csv:
            base = Path(args.out_csv)
            for k, r in results.items():
                base.with_name(f"{base.stem}_{k}{base.suffix}").write_text(r.to_csv())
    else:
        res = run_cascade(_sim_config(args, args.policy))
        out = res.summary()
        if args.out_csv:
            Path(args.out_csv).write_text(res.to_csv())
    _emit(dumps(out), args.out)
    return EXIT_OK


SWEEP_COLUMNS = (
    "alpha1", "alpha2", "alpha3", "margin", "stable", "sup_gain",
    "dtheta_safe_rad", "max_sats", "capacity_gbps", "lifetime_horizon",
)


def sweep_row(a1: float, a2: float, a3: float, c_max: float, f: int, gbps: float, t0: float) -> list[str]:
    p = PolicyParams(a1, a2, a3)
    v = stability_verdict(p)
    h = sup_gain_imag_axis(p)
    if v.stable:
        dsafe = safe_distance_bound(p, c_max)
        max_sats, cap = capacity_bound(dsafe, f, gbps)
        cells = [fmt(dsafe), str(max_sats), fmt(cap), "inf"]
    else:
        cells = ["", "", "", fmt(blowup_horizon(h, t0))]
    return [fmt(a1), fmt(a2), fmt(a3), fmt(v.margin), str(v.stable).lower(), fmt(h)] + cells


def _sweep_chunk(task):
    rows, a2, c_max, f, gbps, t0 = task
    return [sweep_row(a1, a2, a3, c_max, f, gbps, t0) for a1, a3 in rows]


def cmd_sweep(args) -> int:
    _require(args, "alpha2", "alpha1_min", "alpha1_max", "alpha3_min", "alpha3_max")
    if args.alpha1_num < 1 or args.alpha3_num < 1:
        raise UsageError("grid sizes must be >= 1")
    if args.alpha3_max >= args.alpha2:
        raise UsageError("alpha3 grid must stay below alpha2")
    a1s = np.linspace(args.alpha1_min, args.alpha1_max, args.alpha1_num)
    a3s = np.linspace(args.alpha3_min, args.alpha3_max, args.alpha3_num)
    cells = [(float(a1), float(a3)) for a1 in a1s for a3 in a3s]
    common = (args.alpha2, args.c_max, args.phase_factor, args.gbps, args.t0)
    if args.workers > 1 and len(cells) > 1:
        size = math.ceil(len(cells) / (4 * args.workers))
        tasks = [(cells[i:i + size],) + common for i in range(0, len(cells), size)]
        with ProcessPoolExecutor(max_workers=args.workers) as ex:
            rows = [r for chunk in ex.map(_sweep_chunk, tasks) for r in chunk]
    else:
        rows = _sweep_chunk((cells,) + common)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    w.writerows(rows)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _equilibrium(args) -> EquilibriumState:
    _require(args, "sats_per_ring")
    if args.sats_per_ring < 2:
        raise UsageError("--sats-per-ring must be >= 2")
    return EquilibriumState(2.0 * math.pi / args.sats_per_ring, mean_motion(args.altitude))


def cmd_infer(args) -> int:
    _require(args, "ephemeris")
    records = parse_ephemeris(_read(args.ephemeris))
    if args.sats_per_ring is None:
        args.sats_per_ring = build_ring_trace(records).n
    exclude = []
    if args.cdm:
        exclude = detect_external_maneuvers(
            records, parse_cdm(_read(args.cdm)), pc_threshold=args.pc_threshold,
            sma_dev_km=args.sma_dev_km, cdm_window_s=args.cdm_window,
        )
    est = infer_policy(records, _equilibrium(args), exclude=exclude)
    _emit(dumps(est.to_dict()), args.out)
    return EXIT_OK


def cmd_chains(args) -> int:
    _require(args, "ephemeris", "cdm", "threshold")
    records = parse_ephemeris(_read(args.ephemeris))
    cdms = parse_cdm(_read(args.cdm))
    seeds = detect_external_maneuvers(
        records, cdms, pc_threshold=args.pc_threshold, sma_dev_km=args.sma_dev_km,
        cdm_window_s=args.cdm_window,
    )
    eq = None
    if args.sats_per_ring is not None:
        eq = _equilibrium(args)
    chains = extract_cascade_chains(
        records, seeds, args.threshold, eq=eq, window_s=args.window,
        decouple_sma_km=args.decouple_sma_km,
    )
    out = {
        "seed_count": len(seeds),
        "total_hops": sum(c.hop_count for c in chains),
        "chains": [c.to_dict() for c in chains],
    }
    _emit(dumps(out), args.out)
    return EXIT_OK


def cmd_lifetime(args) -> int:
    _require(args, "h", "t0")
    out: dict[str, Any] = {"h": args.h, "t0": args.t0}
    if args.h > 1.0:
        out["blowup_horizon"] = blowup_horizon(args.h, args.t0)
    if args.maneuvers is not None:
        out["time_of_nth"] = lifetime_time_of_nth(args.h, args.t0, args.maneuvers, at_unity=True)
    if args.time is not None:
        out["maneuver_count"] = maneuver_count(args.h, args.t0, args.time)
    _emit(dumps(out), args.out)
    return EXIT_OK


def cmd_capacity(args) -> int:
    _require(args, "phase_factor", "dtheta_safe")
    max_sats, cap = capacity_bound(args.dtheta_safe, args.phase_factor, args.gbps)
    out = {
        "phase_factor": args.phase_factor,
        "dtheta_safe_rad": args.dtheta_safe,
        "per_sat_gbps": args.gbps,
        "max_sats": max_sats,
        "capacity_gbps": cap,
    }
    _emit(dumps(out), args.out)
    return EXIT_OK


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="orbitcascade", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="INI file; section [%s]" % name)
        p.add_argument("--out", help="write the main output here instead of stdout")
        p.set_defaults(func=func, section=name)
        return p

    def alphas(p):
        _opt(p, "alpha1", help_="sensitivity to spacing, 1/s^2")
        _opt(p, "alpha2", help_="sensitivity to own rate, 1/s")
        _opt(p, "alpha3", help_="sensitivity to leader rate, 1/s")

    p = add("stability", cmd_stability, "stability verdict for a pairwise policy")
    alphas(p)
    p.add_argument("--n", type=int, nargs="*", help="ring sizes for max eigenvalue real part")

    p = add("pc", cmd_pc, "collision probability from geometry or a conjunction table")
    for name in ("miss-x", "miss-y", "sigma-x", "sigma-y", "radius"):
        _opt(p, name, help_="km")
    _opt(p, "rel-tol", default=1e-9)
    _opt(p, "threshold", default=1e-5, help_="high-risk probability threshold")
    _opt(p, "mc-samples", type_=int, default=0, help_="also run a Monte-Carlo check")
    _opt(p, "seed", type_=int, default=DEFAULT_SEED)
    _opt(p, "cdm", type_=str, help_="conjunction-report CSV to recompute row by row")

    p = add("simulate", cmd_simulate, "run a cascade simulation")
    alphas(p)
    _opt(p, "n", type_=int)
    _opt(p, "policy", type_=str, default="pairwise")
    _opt(p, "dt", default=1.0)
    _opt(p, "duration", default=86400.0)
    _opt(p, "threshold", help_="trigger threshold, rad (default 10%% of 2pi/n)")
    _opt(p, "decouple-km", default=1.0)
    _opt(p, "altitude", default=550.0)
    _opt(p, "sat", type_=int, default=0)
    _opt(p, "impulse", default=-1e-7)
    _opt(p, "start", default=0.0)
    _opt(p, "stride", type_=int, default=1)
    _opt(p, "quiescence-window", type_=int, default=1000)
    _opt(p, "out-csv", type_=str)
    p.add_argument("--paired", action="store_true", help="run pairwise and bilateral and compare")

    p = add("sweep", cmd_sweep, "grid sweep over alpha1 and alpha3")
    for name in ("alpha1-min", "alpha1-max", "alpha3-min", "alpha3-max", "alpha2"):
        _opt(p, name)
    _opt(p, "alpha1-num", type_=int, default=10)
    _opt(p, "alpha3-num", type_=int, default=10)
    _opt(p, "c-max", default=1e-7, help_="worst-case rate amplitude, rad/s")
    _opt(p, "phase-factor", type_=int, default=1)
    _opt(p, "gbps", default=20.0)
    _opt(p, "t0", default=1.0)
    _opt(p, "workers", type_=int, default=1)

    p = add("infer", cmd_infer, "fit policy sensitivities to an ephemeris trace")
    _opt(p, "ephemeris", type_=str)
    _opt(p, "sats-per-ring", type_=int)
    _opt(p, "altitude", default=550.0)
    _opt(p, "cdm", type_=str, help_="conjunction table; detected external maneuvers are left out of the fit")
    _opt(p, "pc-threshold", default=1e-5)
    _opt(p, "sma-dev-km", default=1.0)
    _opt(p, "cdm-window", default=86400.0)

    p = add("chains", cmd_chains, "detect external maneuvers and extract cascade chains")
    _opt(p, "ephemeris", type_=str)
    _opt(p, "cdm", type_=str)
    _opt(p, "threshold", help_="spacing-deviation trigger, rad")
    _opt(p, "pc-threshold", default=1e-5)
    _opt(p, "sma-dev-km", default=1.0)
    _opt(p, "cdm-window", default=86400.0)
    _opt(p, "window", help_="max wait for the next hop, s")
    _opt(p, "decouple-sma-km")
    _opt(p, "sats-per-ring", type_=int)
    _opt(p, "altitude", default=550.0)

    p = add("lifetime", cmd_lifetime, "cascade timing for a per-hop gain")
    _opt(p, "h")
    _opt(p, "t0")
    _opt(p, "maneuvers", type_=int)
    _opt(p, "time")

    p = add("capacity", cmd_capacity, "largest shell size for a safe spacing")
    _opt(p, "phase-factor", type_=int)
    _opt(p, "dtheta-safe")
    _opt(p, "gbps", default=20.0)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        _resolve(args, args.section, f"{parser.prog} {args.command}")
        return args.func(args)
    except UsageError as exc:
        print(f"orbitcascade {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OrbitCascadeError, ValueError) as exc:
        print(f"orbitcascade {args.command}: error: {exc}", file=sys.stderr)
        rows = getattr(exc, "rows", None)
        if rows:
            print(f"rows: {', '.join(map(str, rows))}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
