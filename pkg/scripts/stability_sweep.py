"""Grid over (α1, α3) at fixed α2: stability margin, peak gain, safe spacing and capacity.

Writes the same CSV columns as ``orbitcascade sweep`` and prints where the
stability boundary α1 = (α2² − α3²)/2 crosses the grid.

    python scripts/stability_sweep.py --alpha2 1e-4 --num 50 --out sweep.csv
"""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass

import numpy as np

from orbitcascade.cli import SWEEP_COLUMNS, sweep_row


@dataclass(frozen=True)
class SweepConfig:
    alpha2: float = 1e-4
    alpha1_max: float = 1e-8
    num: int = 40
    c_max: float = 1e-7
    phase_factor: int = 1
    gbps: float = 20.0


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, field in SweepConfig.__dataclass_fields__.items():
        ap.add_argument(f"--{name.replace('_', '-')}", type=type(field.default), default=field.default)
    ap.add_argument("--out", help="CSV path (default stdout)")
    args = vars(ap.parse_args())
    out = args.pop("out")
    cfg = SweepConfig(**args)
    a1s = np.linspace(cfg.alpha1_max / cfg.num, cfg.alpha1_max, cfg.num)
    a3s = np.linspace(0.02, 0.98, cfg.num) * cfg.alpha2
    rows = [sweep_row(a1, cfg.alpha2, a3, cfg.c_max, cfg.phase_factor, cfg.gbps, 1.0) for a1 in a1s for a3 in a3s]
    fh = open(out, "w", newline="") if out else sys.stdout
    w = csv.writer(fh)
    w.writerow(SWEEP_COLUMNS)
    w.writerows(rows)
    stable = sum(r[4] == "true" for r in rows)
    print(f"{stable}/{len(rows)} cells stable", file=sys.stderr)
    for a3 in a3s[:: max(1, cfg.num // 8)]:
        boundary = 0.5 * (cfg.alpha2**2 - a3**2)
        print(f"alpha3 = {a3:.3e}: boundary alpha1 = {boundary:.3e}", file=sys.stderr)


if __name__ == "__main__":
    main()
