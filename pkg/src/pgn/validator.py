"""Exact axiom checking for piecewise-linear approximation systems.

A map qualifies as a system when (i) its components are ordered,
nonnegative and sum to q at every point, (ii) on every smooth segment a
single contiguous group of coinciding components moves with slope
1/(group size) while the rest stay constant, and (iii) at every kink the
components spanning the left-moving and right-moving groups take equal
values.  Every comparison is exact; violations are reported, not thrown.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import PiecewiseLinearMap, StructureError, format_rational

AXIOM_ORDER = "i-order"
AXIOM_SUM = "i-sum"
AXIOM_SLOPE = "ii-slope"
AXIOM_JUNCTION = "iii-junction"
AXIOM_CONTINUITY = "continuity"


@dataclass(frozen=True)
class AxiomViolation:
    axiom: str
    location: Fraction
    detail: str

    def to_json_dict(self) -> dict:
        return {"axiom": self.axiom,
                "q": format_rational(self.location),
                "detail": self.detail}


@dataclass(frozen=True)
class AxiomReport:
    violations: tuple[AxiomViolation, ...]

    @property
    def is_system(self) -> bool:
        return not self.violations

    def first(self) -> AxiomViolation | None:
        return self.violations[0] if self.violations else None


def _segment_pattern(m: PiecewiseLinearMap, i: int) -> tuple[int, int] | None:
    """(r1, r2), 1-based, when segment i is a well-formed moving block."""
    slopes = m.segment_slopes(i)
    moving = [d for d, s in enumerate(slopes) if s != 0]
    if not moving:
        return None
    r1, r2 = moving[0], moving[-1]
    if len(moving) != r2 - r1 + 1:
        return None
    size = r2 - r1 + 1
    want = Fraction(1, size)
    if any(slopes[d] != want for d in moving):
        return None
    left = m.values[i]
    right = m.values[i + 1]
    if any(left[d] != left[r1] or right[d] != right[r1] for d in moving):
        return None
    return (r1 + 1, r2 + 1)


def validate(m: PiecewiseLinearMap) -> AxiomReport:
    """Check the three system axioms exactly and report every violation."""
    violations: list[AxiomViolation] = []
    bps, rows = m.breakpoints, m.values
    width = m.n_components

    for q, row in zip(bps, rows):
        if row[0] < 0:
            violations.append(AxiomViolation(
                AXIOM_ORDER, q,
                f"P_1({format_rational(q)}) = {format_rational(row[0])} < 0"))
        for d in range(width - 1):
            if row[d] > row[d + 1]:
                violations.append(AxiomViolation(
                    AXIOM_ORDER, q,
                    f"P_{d + 1} > P_{d + 2} at q={format_rational(q)} "
                    f"({format_rational(row[d])} > {format_rational(row[d + 1])})"))
                break
        total = sum(row)
        if total != q:
            violations.append(AxiomViolation(
                AXIOM_SUM, q,
                f"component sum {format_rational(total)} != q = {format_rational(q)}"))

    patterns: list[tuple[int, int] | None] = []
    for i in range(len(bps) - 1):
        pattern = _segment_pattern(m, i)
        patterns.append(pattern)
        if pattern is None:
            slopes = m.segment_slopes(i)
            moving = [d + 1 for d, s in enumerate(slopes) if s != 0]
            slope_sum = sum(slopes)
            detail = (
                f"segment ({format_rational(bps[i])}, {format_rational(bps[i + 1])}): "
                f"moving components {moving or 'none'} with slopes "
                f"{[format_rational(slopes[d - 1]) for d in moving]}; "
                f"slope sum {format_rational(slope_sum)}"
            )
            if slope_sum != 1:
                detail += " (slopes do not sum to 1)"
            violations.append(AxiomViolation(AXIOM_SLOPE, bps[i], detail))

    for j in range(1, len(bps) - 1):
        left, right = patterns[j - 1], patterns[j]
        if left is None or right is None:
            continue
        if left == right:
            continue  # no kink for this pair; nothing to check
        r1 = left[0]
        s2 = right[1]
        if r1 <= s2:
            row = rows[j]
            vals = row[r1 - 1:s2]
            if any(v != vals[0] for v in vals):
                violations.append(AxiomViolation(
                    AXIOM_JUNCTION, bps[j],
                    f"P_{r1}..P_{s2} not all equal at q={format_rational(bps[j])}: "
                    f"{[format_rational(v) for v in vals]}"))

    violations.sort(key=lambda v: (v.location, v.axiom))
    return AxiomReport(tuple(violations))


def validate_raw(breakpoints, values) -> AxiomReport:
    """Validate raw row data, tolerating jump discontinuities.

    Adjacent duplicate breakpoints with differing rows encode a jump and
    yield a continuity violation; genuinely unsorted breakpoints are a
    structural error.
    """
    bps = [Fraction(b) for b in breakpoints]
    rows = [tuple(Fraction(v) for v in row) for row in values]
    if len(bps) != len(rows):
        raise StructureError("breakpoint/value row count mismatch")
    if any(b2 < b1 for b1, b2 in zip(bps, bps[1:])):
        raise StructureError("breakpoints are not sorted")
    width = len(rows[0]) if rows else 0
    if any(len(r) != width for r in rows):
        raise StructureError("value rows have inconsistent lengths")

    continuity: list[AxiomViolation] = []
    merged_bps: list[Fraction] = []
    merged_rows: list[tuple[Fraction, ...]] = []
    for b, row in zip(bps, rows):
        if merged_bps and b == merged_bps[-1]:
            if row != merged_rows[-1]:
                jump = max(abs(x - y) for x, y in zip(row, merged_rows[-1]))
                continuity.append(AxiomViolation(
                    AXIOM_CONTINUITY, b,
                    f"jump of max-norm {format_rational(jump)} at "
                    f"q={format_rational(b)}"))
            continue
        merged_bps.append(b)
        merged_rows.append(row)
    if len(merged_bps) < 2:
        raise StructureError("fewer than two distinct breakpoints")
    m = PiecewiseLinearMap(tuple(merged_bps), tuple(merged_rows))
    report = validate(m)
    merged = sorted(continuity + list(report.violations),
                    key=lambda v: (v.location, v.axiom))
    return AxiomReport(tuple(merged))
