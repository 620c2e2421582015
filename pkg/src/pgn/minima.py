"""Successive minima of parametrized convex bodies by exact enumeration.

Two gauge bodies are supported: the linear-form body (n box coordinates
plus one scaled form constraint) and the simultaneous-approximation body
(one stretched coordinate plus m scaled difference constraints).  The
scale e^q is replaced once by the GapFunction's dyadic surrogate E, after
which every gauge value is an exact rational.

Two enumeration strategies produce bit-identical results:

* plain box enumeration up to a caller bound B, with a completeness
  certificate that rejects bounds too small to be conclusive;
* self-certifying window enumeration, which enumerates exactly the set
  {v != 0 : gauge(v) <= T} for growing thresholds T and stops as soon as
  the lattice rank inside the window is full.  This is a provably lossless
  pruning of box enumeration, not an approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .core import (DEFAULT_GAP_BITS, GapFunction, PgnError, format_rational,
                   parse_rational)

LINEAR_FORM = "linear-form"
SIMULTANEOUS = "simultaneous"

_MAX_DOUBLINGS = 80
_MAX_WINDOW_POINTS = 40_000_000


class BoundTooSmallError(PgnError):
    """The enumeration box cannot certify the computed minima."""

    def __init__(self, message: str, suggested: int):
        super().__init__(message)
        self.suggested = suggested


@dataclass(frozen=True)
class GaugeBody:
    mode: str
    x: tuple[Fraction, ...]

    def __post_init__(self):
        if self.mode not in (LINEAR_FORM, SIMULTANEOUS):
            raise PgnError(f"unknown body mode {self.mode!r}")
        object.__setattr__(self, "x", tuple(Fraction(v) for v in self.x))
        if not self.x:
            raise PgnError("the body needs at least one target coordinate")

    @property
    def dim(self) -> int:
        return len(self.x) + 1


def gauge_at_scale(body: GaugeBody, scale: Fraction, vec) -> Fraction:
    """Minkowski functional of vec for the body at exact scale E ~ e^q."""
    vec = tuple(int(c) for c in vec)
    if not any(vec):
        raise PgnError("gauge of the zero vector is undefined")
    if len(vec) != body.dim:
        raise PgnError(f"vector has {len(vec)} coordinates, body needs {body.dim}")
    scale = Fraction(scale)
    if body.mode == LINEAR_FORM:
        box = max(abs(c) for c in vec[1:])
        form = abs(vec[0] + sum(x * c for x, c in zip(body.x, vec[1:])))
        return max(Fraction(box), scale * form)
    m = len(body.x)
    stretched = Fraction(abs(vec[0])) / scale ** m
    form = max(abs(vec[0] * x - c) for x, c in zip(body.x, vec[1:]))
    return max(stretched, scale * form)


def gauge(body: GaugeBody, q, vec, gap: GapFunction | None = None) -> Fraction:
    gap = gap or GapFunction()
    return gauge_at_scale(body, gap.exp(q), vec)


def is_form_kernel(body: GaugeBody, vec) -> bool:
    """True when the scaled constraints vanish exactly on vec, so its gauge
    never grows with the parameter (the hallmark of an exactly rational
    target at desk scale)."""
    vec = tuple(int(c) for c in vec)
    if body.mode == LINEAR_FORM:
        return vec[0] + sum(x * c for x, c in zip(body.x, vec[1:])) == 0
    return all(vec[0] * x - c == 0 for x, c in zip(body.x, vec[1:]))


def _canonical(vec) -> bool:
    for c in vec:
        if c:
            return c > 0
    return False


class _RankTracker:
    """Exact incremental rank over the rationals."""

    __slots__ = ("rows",)

    def __init__(self):
        self.rows: list[tuple[int, tuple[Fraction, ...]]] = []

    def try_add(self, vec) -> bool:
        v = [Fraction(c) for c in vec]
        for pivot, row in self.rows:
            c = v[pivot]
            if c:
                v = [a - c * b for a, b in zip(v, row)]
        for pivot, c in enumerate(v):
            if c:
                self.rows.append((pivot, tuple(a / c for a in v)))
                return True
        return False

    @property
    def rank(self) -> int:
        return len(self.rows)


class _FastGauge:
    """Integer-arithmetic gauge evaluator, exactly equal to gauge_at_scale.

    Targets are scaled to a common denominator D so the form part of a
    vector is a plain integer; the max with the box part is decided by an
    integer cross-comparison and only the winning side is materialized as
    a Fraction (equal rationals compare equal however constructed)."""

    __slots__ = ("mode", "den", "nums", "e_num", "e_den", "em_num", "em_den")

    def __init__(self, body: GaugeBody, scale: Fraction):
        self.mode = body.mode
        self.den = math.lcm(*(x.denominator for x in body.x))
        self.nums = tuple(x.numerator * (self.den // x.denominator)
                          for x in body.x)
        self.e_num, self.e_den = scale.numerator, scale.denominator
        if body.mode == SIMULTANEOUS:
            em = scale ** len(body.x)
            self.em_num, self.em_den = em.numerator, em.denominator

    def linear_form(self, v0: int, rest) -> Fraction:
        box = max(abs(c) for c in rest)
        form = abs(v0 * self.den + sum(x * c for x, c in zip(self.nums, rest)))
        if form * self.e_num <= box * self.e_den * self.den:
            return Fraction(box)
        return Fraction(form * self.e_num, self.e_den * self.den)

    def simultaneous(self, v0: int, rest) -> Fraction:
        form = max(abs(v0 * x - c * self.den)
                   for x, c in zip(self.nums, rest))
        # compare |v0|/E^m with E*form/D
        left = abs(v0) * self.em_den * self.e_den * self.den
        right = form * self.e_num * self.em_num
        if left >= right:
            return Fraction(abs(v0) * self.em_den, self.em_num)
        return Fraction(form * self.e_num, self.e_den * self.den)


def _enumerate_box(body: GaugeBody, scale: Fraction, bound: int):
    """All canonical nonzero integer vectors with max-norm <= bound."""
    fast = _FastGauge(body, scale)
    value = (fast.linear_form if body.mode == LINEAR_FORM
             else fast.simultaneous)
    out = []
    rng = range(-bound, bound + 1)
    for vec in product(rng, repeat=body.dim):
        if not _canonical(vec):
            continue
        out.append((value(vec[0], vec[1:]), vec))
    return out


def _enumerate_within(body: GaugeBody, scale: Fraction, threshold: Fraction):
    """Exactly the canonical vectors whose gauge is <= threshold."""
    fast = _FastGauge(body, scale)
    out = []
    if body.mode == LINEAR_FORM:
        n = len(body.x)
        bmax = math.floor(threshold)
        if (2 * bmax + 1) ** n > _MAX_WINDOW_POINTS:
            raise PgnError(
                f"desk-scale limit: certifying minima at this point needs a "
                f"window of {(2 * bmax + 1) ** n} box points")
        den = fast.den
        # v0 window: |v0*den + shift| * e_num <= threshold * e_den * den,
        # kept in integers: |v0*den + shift| * wd <= wn
        wn = threshold.numerator * fast.e_den * den
        wd = threshold.denominator * fast.e_num
        step = den * wd
        for b in product(range(-bmax, bmax + 1), repeat=n):
            shift = sum(x * c for x, c in zip(fast.nums, b))
            centered = shift * wd
            lo = -((centered + wn) // step)
            hi = (wn - centered) // step
            for v0 in range(lo, hi + 1):
                vec = (v0, *b)
                if not _canonical(vec):
                    continue
                out.append((fast.linear_form(v0, b), vec))
        return out
    m = len(body.x)
    v0max = math.floor(threshold * scale ** m)
    radius = threshold / scale
    per_axis = 2 * math.floor(radius) + 2
    if (v0max + 1) * per_axis ** m > _MAX_WINDOW_POINTS:
        raise PgnError(
            "desk-scale limit: certifying minima at this point needs "
            f"roughly {(v0max + 1) * per_axis ** m} window points")
    for v0 in range(0, v0max + 1):
        windows = []
        for x in body.x:
            center = v0 * x
            windows.append(range(math.ceil(center - radius),
                                 math.floor(center + radius) + 1))
        for rest in product(*windows):
            vec = (v0, *rest)
            if not _canonical(vec):
                continue
            out.append((fast.simultaneous(v0, rest), vec))
    return out


def _greedy_minima(candidates, dim: int):
    """Select the minima and witnesses from (gauge, vector) candidates.

    Candidates are ranked by gauge, ties broken by smallest coordinate
    magnitudes then lexicographically, and picked greedily subject to
    exact linear independence; matroid exchange makes the greedy choice
    optimal."""
    candidates.sort(key=lambda item: (
        item[0], tuple(abs(c) for c in item[1]), item[1]))
    tracker = _RankTracker()
    minima: list[Fraction] = []
    witnesses: list[tuple[int, ...]] = []
    for value, vec in candidates:
        if tracker.try_add(vec):
            minima.append(value)
            witnesses.append(vec)
            if len(minima) == dim:
                break
    return minima, witnesses


def _required_box(body: GaugeBody, scale: Fraction, lam: Fraction) -> Fraction:
    """Smallest box max-norm guaranteed to contain every vector of gauge
    <= lam; this is the completeness certificate."""
    if body.mode == LINEAR_FORM:
        return max(lam, lam / scale + lam * sum(abs(x) for x in body.x))
    m = len(body.x)
    v0 = lam * scale ** m
    xmax = max(abs(x) for x in body.x)
    return max(v0, lam / scale + xmax * v0)


@dataclass(frozen=True)
class MinimaResult:
    minima: tuple[Fraction, ...]
    witnesses: tuple[tuple[int, ...], ...]
    scale: Fraction
    bound: int
    certified: bool


def successive_minima(body: GaugeBody, q, bound: int, *,
                      gap: GapFunction | None = None,
                      scale: Fraction | None = None,
                      require_certificate: bool = True) -> MinimaResult:
    """Minima by plain box enumeration with max-norm <= bound.

    The body scale defaults to the dyadic surrogate of e^q; pass ``scale``
    to pin an exact rational scale instead.
    """
    if bound < 1:
        raise PgnError("enumeration bound must be at least 1")
    gap = gap or GapFunction()
    scale = gap.exp(q) if scale is None else Fraction(scale)
    candidates = _enumerate_box(body, scale, bound)
    minima, witnesses = _greedy_minima(candidates, body.dim)
    if len(minima) < body.dim:
        raise BoundTooSmallError(
            f"only {len(minima)} independent vectors in the box of size "
            f"{bound}", suggested=2 * bound)
    needed = _required_box(body, scale, minima[-1])
    certified = needed <= bound
    if require_certificate and not certified:
        raise BoundTooSmallError(
            f"bound {bound} cannot certify lambda_{body.dim} = "
            f"{format_rational(minima[-1])}; need {math.ceil(needed)}",
            suggested=math.ceil(needed))
    return MinimaResult(tuple(minima), tuple(witnesses), scale, bound,
                        certified)


def successive_minima_certified(body: GaugeBody, q, *,
                                gap: GapFunction | None = None,
                                scale: Fraction | None = None) -> MinimaResult:
    """Certified minima by window enumeration with a growing threshold.

    Each pass enumerates exactly {v != 0 : gauge(v) <= T}; once that set
    has full rank, every vector relevant to any lambda_d has been seen and
    the greedy selection is complete, bit-identical to what a sufficiently
    large box enumeration would return.
    """
    gap = gap or GapFunction()
    scale = gap.exp(q) if scale is None else Fraction(scale)
    den = math.lcm(*(x.denominator for x in body.x))
    min_nonkernel = scale / den  # any vector off the form kernel has
    #                              gauge at least scale/den
    threshold = Fraction(1)
    for _ in range(_MAX_DOUBLINGS):
        candidates = _enumerate_within(body, scale, threshold)
        minima, witnesses = _greedy_minima(candidates, body.dim)
        if len(minima) == body.dim:
            box = math.ceil(_required_box(body, scale, minima[-1]))
            return MinimaResult(tuple(minima), tuple(witnesses), scale,
                                box, True)
        threshold *= 2
        if (len(minima) == body.dim - 1
                and all(is_form_kernel(body, v) for v in witnesses)
                and min_nonkernel > threshold):
            # the witnesses span the whole form-kernel sublattice, so the
            # missing direction costs at least scale/den; jump there
            threshold = min_nonkernel
    raise PgnError("window enumeration failed to reach full rank")


@dataclass(frozen=True)
class MinimaProfile:
    body: GaugeBody
    gap_bits: int
    bound_mode: str
    grid: tuple[Fraction, ...]
    scales: tuple[Fraction, ...]
    minima: tuple[tuple[Fraction, ...] | None, ...]
    logs: tuple[tuple[Fraction, ...] | None, ...]
    witnesses: tuple[tuple[tuple[int, ...], ...] | None, ...]
    errors: tuple[str | None, ...]

    @property
    def dim(self) -> int:
        return self.body.dim

    def valid_points(self):
        for i, q in enumerate(self.grid):
            if self.minima[i] is not None:
                yield i, q


def proxy_horizon(body: GaugeBody) -> int:
    """Denominator scale of the rational target: profile values reflect the
    true (possibly irrational) target only while the scale stays well below
    this number."""
    return max(v.denominator for v in body.x)


def minima_profile(body: GaugeBody, grid, *, bound="auto",
                   gap: GapFunction | None = None) -> MinimaProfile:
    gap = gap or GapFunction()
    grid = tuple(Fraction(g) for g in grid)
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise PgnError("grid must be strictly increasing")
    scales, minima, logs, witnesses, errors = [], [], [], [], []
    for q in grid:
        try:
            if bound == "auto":
                res = successive_minima_certified(body, q, gap=gap)
            else:
                res = successive_minima(body, q, int(bound), gap=gap)
            scales.append(res.scale)
            minima.append(res.minima)
            logs.append(tuple(gap.log(v) for v in res.minima))
            witnesses.append(res.witnesses)
            errors.append(None)
        except PgnError as exc:
            scales.append(gap.exp(q))
            minima.append(None)
            logs.append(None)
            witnesses.append(None)
            errors.append(str(exc))
    return MinimaProfile(body, gap.bits, str(bound), grid, tuple(scales),
                         tuple(minima), tuple(logs), tuple(witnesses),
                         tuple(errors))


@dataclass(frozen=True)
class MinkowskiReport:
    ok: bool
    points: tuple[dict, ...]
    violations: tuple[str, ...]


def minkowski_check(profile: MinimaProfile) -> MinkowskiReport:
    """Second-theorem sanity oracle on the product of the minima.

    For the linear-form body the volume is 2^dim / E, so the theorem pins
    E/dim! <= product(lambda_d) <= E exactly; the simultaneous body has
    constant volume 2^dim, pinning 1/dim! <= product <= 1.  The exact
    product inequality is decided over the rationals; log-scale margins are
    reported for inspection.
    """
    gap = GapFunction(profile.gap_bits)
    d = profile.dim
    fact = math.factorial(d)
    log_fact = gap.log(fact)
    points, violations = [], []
    ok = True
    for i, q in profile.valid_points():
        prod = Fraction(1)
        for lam in profile.minima[i]:
            prod *= lam
        scale = profile.scales[i]
        if profile.body.mode == LINEAR_FORM:
            lower, upper = scale / fact, scale
            log_lo, log_hi = q - log_fact, q
        else:
            lower, upper = Fraction(1, fact), Fraction(1)
            log_lo, log_hi = -log_fact, Fraction(0)
        exact_ok = lower <= prod <= upper
        sum_logs = sum(profile.logs[i])
        points.append({
            "q": q,
            "sum_logs": sum_logs,
            "log_lower": log_lo,
            "log_upper": log_hi,
            "exact_ok": exact_ok,
        })
        if not exact_ok:
            ok = False
            violations.append(
                f"q={format_rational(q)}: product {format_rational(prod)} "
                f"outside [{format_rational(lower)}, {format_rational(upper)}]")
    return MinkowskiReport(ok, tuple(points), tuple(violations))


# ---------------------------------------------------------------------------
# profile serialization: '#'-prefixed metadata, then plain CSV


def profile_to_csv(profile: MinimaProfile) -> str:
    d = profile.dim
    lines = [
        "# pgn-profile v1",
        f"# mode={profile.body.mode}",
        "# x=" + ",".join(format_rational(v) for v in profile.body.x),
        f"# gap_bits={profile.gap_bits}",
        f"# bound={profile.bound_mode}",
        f"# proxy-horizon: values reflect the rational target exactly; they "
        f"track an irrational target only while e^q stays well below "
        f"{proxy_horizon(profile.body)}",
    ]
    header = (["q"] + [f"lambda_{i}" for i in range(1, d + 1)]
              + [f"L_{i}" for i in range(1, d + 1)]
              + [f"witness_{i}" for i in range(1, d + 1)] + ["error"])
    lines.append(",".join(header))
    for i, q in enumerate(profile.grid):
        row = [format_rational(q)]
        if profile.minima[i] is None:
            row += [""] * (3 * d) + [profile.errors[i] or "error"]
        else:
            row += [format_rational(v) for v in profile.minima[i]]
            row += [format_rational(v) for v in profile.logs[i]]
            row += [";".join(str(c) for c in w) for w in profile.witnesses[i]]
            row += [""]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def profile_from_csv(text: str) -> MinimaProfile:
    meta: dict[str, str] = {}
    rows: list[list[str]] = []
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body and not body.startswith("proxy-horizon"):
                key, _, value = body.partition("=")
                meta[key.strip()] = value.strip()
            continue
        rows.append(line.split(","))
    if not rows:
        raise PgnError("empty profile file")
    try:
        mode = meta["mode"]
        x = tuple(parse_rational(v) for v in meta["x"].split(","))
        gap_bits = int(meta.get("gap_bits", DEFAULT_GAP_BITS))
        bound_mode = meta.get("bound", "auto")
    except KeyError as exc:
        raise PgnError(f"profile file missing metadata {exc}") from exc
    body = GaugeBody(mode, x)
    d = body.dim
    header, data = rows[0], rows[1:]
    if header[0] != "q":
        raise PgnError("profile file missing the CSV header row")
    gap = GapFunction(gap_bits)
    grid, scales, minima, logs, witnesses, errors = [], [], [], [], [], []
    for row in data:
        q = parse_rational(row[0])
        grid.append(q)
        scales.append(gap.exp(q))
        err = row[1 + 3 * d].strip() if len(row) > 1 + 3 * d else ""
        if not row[1].strip():
            minima.append(None)
            logs.append(None)
            witnesses.append(None)
            errors.append(err or "error")
            continue
        minima.append(tuple(parse_rational(v) for v in row[1:1 + d]))
        logs.append(tuple(parse_rational(v) for v in row[1 + d:1 + 2 * d]))
        witnesses.append(tuple(
            tuple(int(c) for c in cell.split(";"))
            for cell in row[1 + 2 * d:1 + 3 * d]))
        errors.append(None)
    return MinimaProfile(body, gap_bits, bound_mode, tuple(grid),
                         tuple(scales), tuple(minima), tuple(logs),
                         tuple(witnesses), tuple(errors))
