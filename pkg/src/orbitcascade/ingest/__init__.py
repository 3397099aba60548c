"""Orbital data parsers and the trace-analysis pipeline."""
from .pipeline import (
    CascadeChain,
    ChainHop,
    PolicyEstimate,
    RingTrace,
    build_ring_trace,
    detect_external_maneuvers,
    extract_cascade_chains,
    infer_policy,
)
from .records import (
    EphemerisRecord,
    cdm_summary,
    emit_cdm,
    emit_ephemeris,
    format_epoch,
    parse_cdm,
    parse_cdm_geometry,
    parse_ephemeris,
    parse_epoch,
    semi_major_axis,
    vis_viva_sma,
)
from .synthetic import circular_track, ring_ephemeris
from .tle import TleRecord, checksum, emit_tle, parse_tle, with_checksums

__all__ = [
    "CascadeChain", "ChainHop", "PolicyEstimate", "RingTrace", "build_ring_trace",
    "detect_external_maneuvers", "extract_cascade_chains", "infer_policy",
    "EphemerisRecord", "cdm_summary", "emit_cdm", "emit_ephemeris", "format_epoch", "parse_cdm",
    "parse_cdm_geometry", "parse_ephemeris", "parse_epoch", "semi_major_axis", "vis_viva_sma",
    "circular_track", "ring_ephemeris",
    "TleRecord", "checksum", "emit_tle", "parse_tle", "with_checksums",
]
