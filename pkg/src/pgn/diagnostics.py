"""Improvability and Diophantine-type diagnostics for maps and profiles.

The three tail functionals of the first component decide membership
criteria at desk scale: the margin q/(n+1) - P_1(q) (improvability), the
margin q/(w+1) - P_1(q) (w-Diophantine behaviour) and the ratio P_1(q)/q,
whose limit inferior encodes the approximation exponent.  All verdicts
are explicitly range-limited: they certify behaviour on the tested tail,
never asymptotics.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import (GapFunction, PgnError, PiecewiseLinearMap,
                   format_rational)
from .minima import MinimaProfile, is_form_kernel

RANGE_NOTE = ("verdicts are range-limited: they certify the tested tail, "
              "not asymptotic membership")


@dataclass(frozen=True)
class DiagnosticsReport:
    tested_range: tuple[Fraction, Fraction]
    di_margin_min: Fraction
    di_margin_at: Fraction
    di_margin_max: Fraction
    di_margin_max_at: Fraction
    dw_margin_max: Fraction
    dw_margin_at: Fraction
    ratio_min: Fraction | None
    ratio_min_at: Fraction | None
    ratio_min_global: Fraction | None
    ratio_min_global_at: Fraction | None
    omega_estimate: Fraction | None
    omega_is_infinite: bool
    di_threshold: Fraction | None
    di_satisfied: bool | None
    dw_threshold: Fraction | None
    dw_satisfied: bool | None
    notes: tuple[str, ...]

    def to_json_dict(self) -> dict:
        def fr(v):
            return None if v is None else format_rational(v)

        return {
            "tested_range": [fr(self.tested_range[0]), fr(self.tested_range[1])],
            "di_margin_min": fr(self.di_margin_min),
            "di_margin_at": fr(self.di_margin_at),
            "di_margin_max": fr(self.di_margin_max),
            "di_margin_max_at": fr(self.di_margin_max_at),
            "dw_margin_max": fr(self.dw_margin_max),
            "dw_margin_at": fr(self.dw_margin_at),
            "ratio_min": fr(self.ratio_min),
            "ratio_min_at": fr(self.ratio_min_at),
            "ratio_min_global": fr(self.ratio_min_global),
            "ratio_min_global_at": fr(self.ratio_min_global_at),
            "omega_estimate": "inf" if self.omega_is_infinite else fr(self.omega_estimate),
            "omega_is_infinite": self.omega_is_infinite,
            "di_threshold": fr(self.di_threshold),
            "di_satisfied": self.di_satisfied,
            "dw_threshold": fr(self.dw_threshold),
            "dw_satisfied": self.dw_satisfied,
            "notes": list(self.notes),
        }


def _last_local_min(points: list[tuple[Fraction, Fraction]]
                    ) -> tuple[Fraction, Fraction] | None:
    """Last local minimum of a sampled sequence of (q, value) pairs.

    The right endpoint qualifies when the sequence descends into it; this
    tracks the limit-inferior structure of tails that end mid-descent
    while ignoring endpoints that sit on a rising run.
    """
    if len(points) < 2:
        return points[0] if points else None
    vals = [v for _, v in points]
    if vals[-1] < vals[-2]:
        return points[-1]
    for i in range(len(vals) - 2, 0, -1):
        if vals[i] < vals[i + 1] and vals[i] <= vals[i - 1]:
            return points[i]
    if vals[0] < vals[1]:
        return points[0]
    return points[0]


def analyze(subject: PiecewiseLinearMap, n: int, w, *,
            tail_start=None, epsilon=None, nu=None,
            gap: GapFunction | None = None,
            kernel_locked: bool = False,
            censored: bool = False) -> DiagnosticsReport:
    """Tail extrema of the first-component functionals, exactly.

    The functionals are piecewise linear (the ratio monotone per segment),
    so extrema over [tail_start, end] are attained at breakpoints or at
    tail_start itself; only those points are evaluated.
    """
    w = Fraction(w)
    gap = gap or GapFunction()
    lo, hi = subject.domain
    if tail_start is None:
        bps = subject.breakpoints
        tail_start = bps[2] if len(bps) >= 3 else bps[0]
    tail_start = Fraction(tail_start)
    if tail_start < lo or tail_start > hi:
        raise PgnError(
            f"tail start {tail_start} outside the domain [{lo}, {hi}]")
    if tail_start == hi:
        raise PgnError("empty tail: tail start equals the domain end")

    points = [tail_start] + [b for b in subject.breakpoints if b > tail_start]
    di: list[tuple[Fraction, Fraction]] = []
    dw: list[tuple[Fraction, Fraction]] = []
    ratio: list[tuple[Fraction, Fraction]] = []
    notes = [RANGE_NOTE]
    for q in points:
        p1 = subject.evaluate(q)[0]
        di.append((q, q / (n + 1) - p1))
        dw.append((q, q / (w + 1) - p1))
        if q > 0:
            ratio.append((q, p1 / q))
    if not ratio:
        notes.append("ratio undefined on the tail (no positive q)")

    di_min_q, di_min = min(di, key=lambda t: (t[1], t[0]))
    di_max_q, di_max = max(di, key=lambda t: (t[1], -t[0]))
    dw_max_q, dw_max = max(dw, key=lambda t: (t[1], -t[0]))

    ratio_points = [(v, q) for q, v in ratio]
    if ratio_points:
        r_glob, r_glob_q = min(ratio_points)
        last = _last_local_min([(q, v) for q, v in ratio])
        r_last_q, r_last = last
    else:
        r_glob = r_glob_q = r_last = r_last_q = None

    omega: Fraction | None = None
    infinite = bool(kernel_locked)
    if kernel_locked:
        notes.append("a first-minimum witness annihilates the form exactly; "
                     "the exponent is infinite for this rational target")
    elif r_last is not None:
        if r_last == 0:
            infinite = True
        elif r_last > 0:
            omega = 1 / r_last - 1
        else:
            notes.append("ratio minimum is negative; exponent estimate "
                         "withheld (scale too small)")
    if censored:
        notes.append("profile endpoints are censored: the tail beyond the "
                     "last grid point is unobserved")

    di_threshold = di_ok = dw_threshold = dw_ok = None
    if epsilon is not None:
        epsilon = Fraction(epsilon)
        if not (0 < epsilon < 1):
            raise PgnError("epsilon must lie in (0,1)")
        di_threshold = -gap.log(epsilon) / (n + 1)
        di_ok = di_min >= di_threshold
    if nu is not None:
        nu = Fraction(nu)
        if not (0 < nu < 1):
            raise PgnError("nu must lie in (0,1)")
        dw_threshold = -gap.log(nu) / (w + 1)
        dw_ok = dw_max <= dw_threshold

    return DiagnosticsReport(
        tested_range=(tail_start, hi),
        di_margin_min=di_min, di_margin_at=di_min_q,
        di_margin_max=di_max, di_margin_max_at=di_max_q,
        dw_margin_max=dw_max, dw_margin_at=dw_max_q,
        ratio_min=r_last, ratio_min_at=r_last_q,
        ratio_min_global=r_glob, ratio_min_global_at=r_glob_q,
        omega_estimate=omega, omega_is_infinite=infinite,
        di_threshold=di_threshold, di_satisfied=di_ok,
        dw_threshold=dw_threshold, dw_satisfied=dw_ok,
        notes=tuple(notes),
    )


def profile_interpolant(profile: MinimaProfile) -> PiecewiseLinearMap:
    """Linear interpolation of the log-minima columns between grid points."""
    bps, rows = [], []
    for i, q in profile.valid_points():
        bps.append(q)
        rows.append(profile.logs[i])
    if len(bps) < 2:
        raise PgnError("profile has fewer than two valid grid points")
    return PiecewiseLinearMap(tuple(bps), tuple(rows))


def profile_kernel_locked(profile: MinimaProfile) -> bool:
    """Whether any first-minimum witness annihilates the form exactly."""
    for i, _ in profile.valid_points():
        if is_form_kernel(profile.body, profile.witnesses[i][0]):
            return True
    return False


def analyze_profile(profile: MinimaProfile, w, *, tail_start=None,
                    epsilon=None, nu=None,
                    gap: GapFunction | None = None) -> DiagnosticsReport:
    subject = profile_interpolant(profile)
    return analyze(subject, profile.dim - 1, w, tail_start=tail_start,
                   epsilon=epsilon, nu=nu,
                   gap=gap or GapFunction(profile.gap_bits),
                   kernel_locked=profile_kernel_locked(profile),
                   censored=True)


@dataclass(frozen=True)
class ComparisonReport:
    sup_distance_on_grid: Fraction
    per_component_max: tuple[Fraction, ...]
    points: int
    overlap: tuple[Fraction, Fraction]
    rn: Fraction | None
    within_rn: bool | None

    def to_json_dict(self) -> dict:
        return {
            "sup_distance_on_grid": format_rational(self.sup_distance_on_grid),
            "per_component_max": [format_rational(v)
                                  for v in self.per_component_max],
            "points": self.points,
            "overlap": [format_rational(self.overlap[0]),
                        format_rational(self.overlap[1])],
            "rn": None if self.rn is None else format_rational(self.rn),
            "within_rn": self.within_rn,
        }


def compare_system_profile(system: PiecewiseLinearMap,
                           profile: MinimaProfile,
                           rn=None) -> ComparisonReport:
    """Max-norm distance between profile logs and system values on the grid.

    Informational: bounded distance to some realizing point is guaranteed
    per system, not for any particular profiled target.
    """
    if system.n_components != profile.dim:
        raise PgnError(
            f"system has {system.n_components} components, profile has "
            f"{profile.dim}")
    lo = max(system.domain[0], profile.grid[0])
    hi = min(system.domain[1], profile.grid[-1])
    if lo > hi:
        raise PgnError("system and profile ranges are disjoint")
    per_comp = [Fraction(0)] * profile.dim
    count = 0
    for i, q in profile.valid_points():
        if q < lo or q > hi:
            continue
        sys_row = system.evaluate(q)
        for d, (a, b) in enumerate(zip(profile.logs[i], sys_row)):
            diff = abs(a - b)
            if diff > per_comp[d]:
                per_comp[d] = diff
        count += 1
    if count == 0:
        raise PgnError("no profile grid points inside the overlap")
    sup = max(per_comp)
    rn = None if rn is None else Fraction(rn)
    return ComparisonReport(sup, tuple(per_comp), count, (lo, hi), rn,
                            None if rn is None else sup <= rn)
