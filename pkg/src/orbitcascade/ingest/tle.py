"""Two-line element sets: fixed-column parse and emit with mod-10 checksums."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone

from ..errors import ChecksumError, TleError

LINE_LENGTH = 69


def checksum(line: str) -> int:
    """Sum of digits plus one per minus sign over the first 68 columns, mod 10."""
    total = 0
    for ch in line[:68]:
        if ch.isdigit():
            total += ord(ch) - 48
        elif ch == "-":
            total += 1
    return total % 10


@dataclass(frozen=True)
class TleRecord:
    norad_id: int
    epoch_year: int
    epoch_day: float
    inclination_deg: float
    raan_deg: float
    eccentricity: float
    arg_perigee_deg: float
    mean_anomaly_deg: float
    mean_motion_rev_day: float
    line1_checksum: int
    line2_checksum: int
    classification: str = "U"
    intl_designator: str = ""
    ndot: float = 0.0
    nddot: float = 0.0
    bstar: float = 0.0
    ephemeris_type: int = 0
    element_set_no: int = 0
    rev_number: int = 0

    @property
    def epoch(self) -> datetime:
        """Epoch as an aware UTC datetime (day 1.0 is January 1, 00:00)."""
        start = datetime(self.epoch_year, 1, 1, tzinfo=timezone.utc)
        return start + timedelta(days=self.epoch_day - 1.0)

    @property
    def epoch_s(self) -> float:
        return self.epoch.timestamp()


def _field(line: str, lo: int, hi: int, name: str, conv):
    text = line[lo:hi]
    try:
        return conv(text)
    except ValueError as exc:
        raise TleError(f"unparsable {name} field {text!r}") from exc


def _implied_exponent(text: str) -> float:
    """Decode the ``±MMMMM±E`` form, value ±0.MMMMM × 10^±E."""
    text = text.strip()
    if not text:
        return 0.0
    sign = ""
    if text[0] in "+-":
        sign, text = ("-" if text[0] == "-" else ""), text[1:]
    mant, exp = text[:-2], text[-2:]
    if not mant.isdigit() or exp[0] not in "+-" or not exp[1].isdigit():
        raise ValueError(text)
    return float(f"{sign}0.{mant}e{exp}")


def _encode_implied_exponent(value: float) -> str:
    if value == 0.0:
        return " 00000-0"
    if not math.isfinite(value):
        raise TleError(f"cannot encode {value} in implied-exponent form")
    sign = "-" if value < 0 else " "
    digits, exp = f"{abs(value):.4e}".split("e")
    exp_i = int(exp) + 1
    if not -9 <= exp_i <= 9:
        raise TleError(f"{value} out of range for implied-exponent form")
    mant = digits.replace(".", "")
    return f"{sign}{mant}{'-' if exp_i < 0 else '+'}{abs(exp_i)}"


def _decode_ndot(text: str) -> float:
    t = text.strip()
    return float(t) if t else 0.0


def _encode_ndot(value: float) -> str:
    k = round(abs(value) * 1e8)
    if k >= 10**8:
        raise TleError(f"first derivative of mean motion {value} out of range")
    return f"{'-' if value < 0 else ' '}.{k:08d}"


def _expand_year(two_digit: int) -> int:
    return 1900 + two_digit if two_digit >= 57 else 2000 + two_digit


def _check_line(line: str, line_no: int) -> None:
    if len(line) != LINE_LENGTH:
        raise TleError(f"TLE line {line_no} has {len(line)} characters, expected {LINE_LENGTH}")
    if line[0] != str(line_no):
        raise TleError(f"TLE line {line_no} must start with {line_no!r}, found {line[0]!r}")
    if not line[68].isdigit():
        raise TleError(f"TLE line {line_no} checksum column is not a digit")
    expected = checksum(line)
    found = int(line[68])
    if expected != found:
        raise ChecksumError(line_no, expected, found)


def parse_tle(two_lines: str) -> TleRecord:
    """Parse one element set given as two text lines (an optional name line is not accepted)."""
    lines = [ln.rstrip("\r") for ln in two_lines.strip("\n").split("\n")]
    if len(lines) != 2:
        raise TleError(f"expected 2 lines, got {len(lines)}")
    l1, l2 = lines
    _check_line(l1, 1)
    _check_line(l2, 2)

    norad1 = _field(l1, 2, 7, "catalog number", int)
    norad2 = _field(l2, 2, 7, "catalog number", int)
    if norad1 != norad2:
        raise TleError(f"catalog numbers differ between lines: {norad1} vs {norad2}")

    ecc_text = l2[26:33]
    if not ecc_text.strip().isdigit():
        raise TleError(f"unparsable eccentricity field {ecc_text!r}")

    return TleRecord(
        norad_id=norad1,
        classification=l1[7],
        intl_designator=l1[9:17].rstrip(),
        epoch_year=_expand_year(_field(l1, 18, 20, "epoch year", int)),
        epoch_day=_field(l1, 20, 32, "epoch day", float),
        ndot=_field(l1, 33, 43, "mean motion derivative", _decode_ndot),
        nddot=_field(l1, 44, 52, "mean motion second derivative", _implied_exponent),
        bstar=_field(l1, 53, 61, "drag term", _implied_exponent),
        ephemeris_type=_field(l1, 62, 63, "ephemeris type", lambda s: int(s) if s.strip() else 0),
        element_set_no=_field(l1, 64, 68, "element set number", int),
        inclination_deg=_field(l2, 8, 16, "inclination", float),
        raan_deg=_field(l2, 17, 25, "right ascension", float),
        eccentricity=int(ecc_text) / 1e7,
        arg_perigee_deg=_field(l2, 34, 42, "argument of perigee", float),
        mean_anomaly_deg=_field(l2, 43, 51, "mean anomaly", float),
        mean_motion_rev_day=_field(l2, 52, 63, "mean motion", float),
        rev_number=_field(l2, 63, 68, "revolution number", int),
        line1_checksum=int(l1[68]),
        line2_checksum=int(l2[68]),
    )


def _fixed(value: float, width: int, decimals: int, name: str) -> str:
    text = f"{value:{width}.{decimals}f}"
    if len(text) != width:
        raise TleError(f"{name} {value} does not fit {width} columns")
    return text


def emit_tle(rec: TleRecord) -> str:
    """Render ``rec`` as two 69-column lines with freshly computed checksums.

    The checksum fields stored on ``rec`` are ignored; use ``with_checksums``
    to obtain a record whose checksum fields match the emitted text.
    """
    if not 0 <= rec.norad_id <= 99999:
        raise TleError("catalog number must fit 5 digits")
    if not 1957 <= rec.epoch_year <= 2056:
        raise TleError("epoch year must lie in 1957..2056 for a two-digit year field")
    if not 0.0 <= rec.eccentricity < 1.0:
        raise TleError("eccentricity must lie in [0, 1)")
    ecc = round(rec.eccentricity * 1e7)
    if ecc >= 10**7:
        raise TleError("eccentricity rounds to 1")
    l1 = (
        f"1 {rec.norad_id:05d}{rec.classification[:1] or 'U'} "
        f"{rec.intl_designator[:8]:<8} "
        f"{rec.epoch_year % 100:02d}{_fixed(rec.epoch_day, 12, 8, 'epoch day').replace(' ', '0')} "
        f"{_encode_ndot(rec.ndot)} "
        f"{_encode_implied_exponent(rec.nddot)} "
        f"{_encode_implied_exponent(rec.bstar)} "
        f"{rec.ephemeris_type % 10:1d} "
        f"{rec.element_set_no % 10000:4d}"
    )
    l2 = (
        f"2 {rec.norad_id:05d} "
        f"{_fixed(rec.inclination_deg, 8, 4, 'inclination')} "
        f"{_fixed(rec.raan_deg, 8, 4, 'right ascension')} "
        f"{ecc:07d} "
        f"{_fixed(rec.arg_perigee_deg, 8, 4, 'argument of perigee')} "
        f"{_fixed(rec.mean_anomaly_deg, 8, 4, 'mean anomaly')} "
        f"{_fixed(rec.mean_motion_rev_day, 11, 8, 'mean motion')}"
        f"{rec.rev_number % 100000:5d}"
    )
    assert len(l1) == 68 and len(l2) == 68, (len(l1), len(l2))
    return f"{l1}{checksum(l1)}\n{l2}{checksum(l2)}"


def with_checksums(rec: TleRecord) -> TleRecord:
    """Copy of ``rec`` whose checksum fields match ``emit_tle(rec)``."""
    l1, l2 = emit_tle(rec).split("\n")
    return replace(rec, line1_checksum=int(l1[68]), line2_checksum=int(l2[68]))
