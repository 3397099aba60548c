"""Ephemeris and conjunction-report CSV tables.

Ephemeris header::

    sat_id,epoch_iso8601,x_km,y_km,z_km,vx_km_s,vy_km_s,vz_km_s,cxx,cyy,czz

The three covariance-diagonal columns may be left empty. Conjunction-report
header::

    object_a_id,object_b_id,tca_iso8601,pc,miss_distance_km

optionally followed by ``miss_x_km,miss_y_km,sigma_x_km,sigma_y_km,
combined_radius_km`` so a row's Pc can be recomputed. Epochs are ISO-8601;
a trailing ``Z`` or an explicit offset is honored and naive times are UTC.
Row numbers in error reports count the header as line 1.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Iterable, Optional

import numpy as np

from ..conjunction import CdmRecord, ConjunctionGeometry
from ..errors import DataError, DomainError
from ..orbital import MU_EARTH_KM3_S2

log = logging.getLogger(__name__)

EPHEMERIS_COLUMNS = (
    "sat_id", "epoch_iso8601",
    "x_km", "y_km", "z_km",
    "vx_km_s", "vy_km_s", "vz_km_s",
    "cxx", "cyy", "czz",
)
CDM_COLUMNS = ("object_a_id", "object_b_id", "tca_iso8601", "pc", "miss_distance_km")
CDM_GEOMETRY_COLUMNS = ("miss_x_km", "miss_y_km", "sigma_x_km", "sigma_y_km", "combined_radius_km")

POSITION_BAND_KM = (6578.0, 8378.0)
VELOCITY_BAND_KM_S = (6.0, 9.0)

_UNIX_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)
_MICROSECOND = timedelta(microseconds=1)


def parse_epoch(text: str) -> float:
    """ISO-8601 timestamp to UTC seconds since 1970, at microsecond resolution."""
    t = text.strip()
    if t.endswith(("Z", "z")):
        t = t[:-1] + "+00:00"
    dt = datetime.fromisoformat(t)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return ((dt - _UNIX_EPOCH) // _MICROSECOND) / 1e6


def format_epoch(epoch_s: float) -> str:
    us = round(epoch_s * 1e6)
    dt = _UNIX_EPOCH + timedelta(microseconds=us)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.%fZ")


@dataclass(frozen=True)
class EphemerisRecord:
    sat_id: str
    epoch_s: float
    position_km: np.ndarray
    velocity_km_s: np.ndarray
    covariance_diag_km2: Optional[np.ndarray] = None

    def __post_init__(self):
        r = np.asarray(self.position_km, dtype=float).reshape(3)
        v = np.asarray(self.velocity_km_s, dtype=float).reshape(3)
        object.__setattr__(self, "position_km", r)
        object.__setattr__(self, "velocity_km_s", v)
        if self.covariance_diag_km2 is not None:
            c = np.asarray(self.covariance_diag_km2, dtype=float).reshape(3)
            if np.any(c < 0):
                raise DataError("covariance diagonal must be non-negative")
            object.__setattr__(self, "covariance_diag_km2", c)
        problem = band_violation(r, v)
        if problem:
            raise DataError(problem)

    def __eq__(self, other):
        if not isinstance(other, EphemerisRecord):
            return NotImplemented
        cov_eq = (self.covariance_diag_km2 is None) == (other.covariance_diag_km2 is None)
        if cov_eq and self.covariance_diag_km2 is not None:
            cov_eq = bool(np.array_equal(self.covariance_diag_km2, other.covariance_diag_km2))
        return (
            self.sat_id == other.sat_id
            and self.epoch_s == other.epoch_s
            and bool(np.array_equal(self.position_km, other.position_km))
            and bool(np.array_equal(self.velocity_km_s, other.velocity_km_s))
            and cov_eq
        )

    __hash__ = None


def band_violation(r: np.ndarray, v: np.ndarray) -> str:
    """Empty string when the state is inside the LEO sanity band, else a reason."""
    rn = float(np.linalg.norm(r))
    vn = float(np.linalg.norm(v))
    lo, hi = POSITION_BAND_KM
    if not lo <= rn <= hi:
        return f"|position| = {rn:.6g} km outside [{lo:g}, {hi:g}] km"
    lo, hi = VELOCITY_BAND_KM_S
    if not lo <= vn <= hi:
        return f"|velocity| = {vn:.6g} km/s outside [{lo:g}, {hi:g}] km/s"
    return ""


def vis_viva_sma(position_km, velocity_km_s) -> float:
    """Semi-major axis ``1 / (2/r - v²/μ)`` in km from a raw state."""
    r = float(np.linalg.norm(position_km))
    v2 = float(np.dot(velocity_km_s, velocity_km_s))
    if r == 0.0:
        raise DomainError("position must be nonzero")
    if v2 == 0.0:
        log.warning("zero velocity; semi-major axis is r/2")
    inv = 2.0 / r - v2 / MU_EARTH_KM3_S2
    if inv <= 0.0:
        raise DomainError("state is not bound (v at or above escape speed)")
    return 1.0 / inv


def semi_major_axis(rec: EphemerisRecord) -> float:
    """Vis-viva semi-major axis of an ephemeris record, km."""
    return vis_viva_sma(rec.position_km, rec.velocity_km_s)


def _reader(text: str, required: Iterable[str]):
    reader = csv.DictReader(io.StringIO(text))
    fields = reader.fieldnames
    if fields is None:
        raise DataError("missing header row")
    fields = [f.strip() for f in fields]
    reader.fieldnames = fields
    missing = [c for c in required if c not in fields]
    if missing:
        raise DataError(f"missing columns: {', '.join(missing)}")
    return reader, fields


def _num(row: dict, key: str) -> float:
    text = (row.get(key) or "").strip()
    try:
        val = float(text)
    except ValueError:
        raise ValueError(f"column {key}: not a number: {text!r}") from None
    if not math.isfinite(val):
        raise ValueError(f"column {key}: non-finite value {text!r}")
    return val


def _raise_rows(kind: str, errors: list[tuple[int, str]]) -> None:
    if errors:
        detail = "; ".join(f"row {line}: {msg}" for line, msg in errors[:20])
        more = f" (+{len(errors) - 20} more)" if len(errors) > 20 else ""
        raise DataError(f"{len(errors)} invalid {kind} row(s): {detail}{more}", rows=[e[0] for e in errors])


def parse_ephemeris(text: str) -> list[EphemerisRecord]:
    """Parse an ephemeris CSV table; every invalid row is reported at once."""
    reader, _ = _reader(text, EPHEMERIS_COLUMNS[:8])
    out: list[EphemerisRecord] = []
    errors: list[tuple[int, str]] = []
    for line, row in enumerate(reader, start=2):
        try:
            sat = (row.get("sat_id") or "").strip()
            if not sat:
                raise ValueError("empty sat_id")
            epoch = parse_epoch(row.get("epoch_iso8601") or "")
            r = [_num(row, k) for k in ("x_km", "y_km", "z_km")]
            v = [_num(row, k) for k in ("vx_km_s", "vy_km_s", "vz_km_s")]
            cov_text = [(row.get(k) or "").strip() for k in ("cxx", "cyy", "czz")]
            if all(cov_text):
                cov = [_num(row, k) for k in ("cxx", "cyy", "czz")]
            elif any(cov_text):
                raise ValueError("covariance columns must be all present or all empty")
            else:
                cov = None
            out.append(EphemerisRecord(sat, epoch, r, v, cov))
        except (ValueError, DataError) as exc:
            errors.append((line, str(exc)))
    _raise_rows("ephemeris", errors)
    return out


def emit_ephemeris(records: Iterable[EphemerisRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EPHEMERIS_COLUMNS)
    for rec in records:
        cov = rec.covariance_diag_km2
        w.writerow(
            [rec.sat_id, format_epoch(rec.epoch_s)]
            + [repr(float(x)) for x in rec.position_km]
            + [repr(float(x)) for x in rec.velocity_km_s]
            + ([repr(float(x)) for x in cov] if cov is not None else ["", "", ""])
        )
    return buf.getvalue()


def _parse_cdm_rows(text: str):
    reader, fields = _reader(text, CDM_COLUMNS)
    has_geom = all(c in fields for c in CDM_GEOMETRY_COLUMNS)
    rows = []
    errors: list[tuple[int, str]] = []
    for line, row in enumerate(reader, start=2):
        try:
            a = (row.get("object_a_id") or "").strip()
            b = (row.get("object_b_id") or "").strip()
            if not a or not b:
                raise ValueError("empty object id")
            rec = CdmRecord(
                object_a_id=a,
                object_b_id=b,
                tca=parse_epoch(row.get("tca_iso8601") or ""),
                pc=_num(row, "pc"),
                miss_distance_km=_num(row, "miss_distance_km"),
            )
            geom = None
            if has_geom and all((row.get(c) or "").strip() for c in CDM_GEOMETRY_COLUMNS):
                vals = [_num(row, c) for c in CDM_GEOMETRY_COLUMNS]
                geom = ConjunctionGeometry(*vals)
            rows.append((line, rec, geom))
        except (ValueError, DataError, DomainError) as exc:
            errors.append((line, str(exc)))
    _raise_rows("conjunction-report", errors)
    return rows


def parse_cdm(text: str) -> list[CdmRecord]:
    """Parse a conjunction-report CSV table. Rows need not be in TCA order."""
    return [rec for _, rec, _ in _parse_cdm_rows(text)]


def parse_cdm_geometry(text: str) -> list[tuple[CdmRecord, Optional[ConjunctionGeometry]]]:
    """Like ``parse_cdm`` but also returns each row's conjunction-plane geometry, if given."""
    return [(rec, geom) for _, rec, geom in _parse_cdm_rows(text)]


def cdm_summary(records: list[CdmRecord]) -> dict:
    tcas = [r.tca for r in records]
    chronological = all(a <= b for a, b in zip(tcas, tcas[1:]))
    return {
        "count": len(records),
        "chronological": chronological,
        "max_pc": max((r.pc for r in records), default=0.0),
    }


def emit_cdm(
    records: Iterable[CdmRecord],
    geometries: Optional[Iterable[Optional[ConjunctionGeometry]]] = None,
) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    recs = list(records)
    geoms = list(geometries) if geometries is not None else None
    w.writerow(CDM_COLUMNS + (CDM_GEOMETRY_COLUMNS if geoms is not None else ()))
    for i, rec in enumerate(recs):
        row = [
            rec.object_a_id,
            rec.object_b_id,
            format_epoch(rec.tca),
            repr(float(rec.pc)),
            repr(float(rec.miss_distance_km)),
        ]
        if geoms is not None:
            g = geoms[i]
            row += (
                [repr(float(getattr(g, c))) for c in CDM_GEOMETRY_COLUMNS]
                if g is not None
                else [""] * len(CDM_GEOMETRY_COLUMNS)
            )
        w.writerow(row)
    return buf.getvalue()
