"""Command line entry point: build, validate, minima, diagnose, compare, plot.

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 computation
error.  All file outputs are deterministic (byte-identical for identical
inputs) and written atomically.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from fractions import Fraction

from .core import (DEFAULT_GAP_BITS, GapFunction, PgnError,
                   PiecewiseLinearMap, format_rational, parse_rational)
from .diagnostics import analyze, analyze_profile, compare_system_profile
from .minima import (GaugeBody, LINEAR_FORM, SIMULTANEOUS, minima_profile,
                     profile_from_csv, profile_to_csv, proxy_horizon)
from .svg import PlotSpec, render_svg
from .template import (BETA_BOUNDED, BETA_LOG, TemplateParams, build_block,
                       build_system, default_rn, derive_alpha_beta,
                       params_from_meta)
from .validator import validate_raw

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_ERROR = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _gap_bits_default() -> int:
    env = os.environ.get("PGN_GAP_BITS")
    if env is None:
        return DEFAULT_GAP_BITS
    try:
        return int(env)
    except ValueError as exc:
        raise UsageError(f"PGN_GAP_BITS must be an integer, got {env!r}") from exc


def _write_output(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".pgn-tmp-")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r") as handle:
        return handle.read()


def _parse_grid(text: str) -> list[Fraction]:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be start:stop:step, got {text!r}")
    start, stop, step = (parse_rational(p) for p in parts)
    if step <= 0 or stop < start:
        raise UsageError("grid needs step > 0 and stop >= start")
    grid = []
    q = start
    while q <= stop:
        grid.append(q)
        q += step
    return grid


def _block_labels(index: int, bp) -> list[tuple[Fraction, str]]:
    k = index
    return [
        (bp.q_k, f"q_{k}"), (bp.r_k, f"r_{k}"), (bp.s_k_m, f"s_{k}^m"),
        (bp.s_k, f"s_{k}"), (bp.s_k_M, f"s_{k}^M"), (bp.t_k, f"t_{k}"),
        (bp.u_k, f"u_{k}"), (bp.p_k, f"p_{k}"), (bp.q_k1, f"q_{k + 1}"),
    ]


def _block_figure(params: TemplateParams, k: int, q_k, gap: GapFunction) -> str:
    """One block with its delta=0 and delta=1 siblings dotted, as in the
    generic-block figure."""
    block, bp = build_block(params, k, q_k, gap)
    overlays = []
    for endpoint in (Fraction(0), Fraction(1)):
        if endpoint == params.delta:
            continue
        variant = TemplateParams(
            n=params.n, w=params.w, alpha=params.alpha, delta=endpoint,
            q1=params.q1, blocks=params.blocks, beta=params.beta,
            beta_mode=params.beta_mode, gap_bits=params.gap_bits,
            paper_qk1=params.paper_qk1)
        overlays.append(build_block(variant, k, q_k, gap)[0])
    labels = [(q, lab) for q, lab in _block_labels(k, bp)
              if bp.q_k <= q <= bp.q_k1]
    # collapse labels at coinciding points (e.g. s_k = s_k^m at delta = 1)
    merged: dict[Fraction, str] = {}
    for q, lab in labels:
        merged[q] = f"{merged[q]}={lab}" if q in merged else lab
    spec = PlotSpec(
        subject=block, overlays=tuple(overlays),
        annotations=tuple(sorted(merged.items())),
        guide_n=params.n, guide_w=params.w,
        title=f"block {k}, delta={format_rational(params.delta)} "
              f"(dotted: delta=0 and delta=1)")
    return render_svg(spec)


def _breakpoints_csv(blocks) -> str:
    cols = ["k", "q_k", "r_k", "s_k^m", "s_k", "s_k^M", "t_k", "u_k", "p_k",
            "beta_k"]
    lines = [",".join(cols)]
    for bp in blocks:
        row = bp.as_row()
        lines.append(",".join(str(row[c]) for c in cols))
    return "\n".join(lines) + "\n"


def _cmd_build(args) -> int:
    gap_bits = args.gap_bits or _gap_bits_default()
    gap = GapFunction(gap_bits)
    n = args.n
    w = parse_rational(args.w)
    rn = parse_rational(args.rn) if args.rn else default_rn(n)
    alpha = beta = None
    if args.alpha:
        alpha = parse_rational(args.alpha)
    if args.beta:
        beta = parse_rational(args.beta)
    if args.epsilon or args.nu:
        eps = parse_rational(args.epsilon) if args.epsilon else Fraction(1, 2)
        nu = parse_rational(args.nu) if args.nu else Fraction(1, 2)
        d_alpha, d_beta = derive_alpha_beta(eps, nu, rn, n, w, gap)
        alpha = alpha if alpha is not None else d_alpha
        beta = beta if beta is not None else d_beta
    if alpha is None:
        raise UsageError("provide --alpha or --epsilon")
    beta_mode = args.beta_mode
    if beta_mode == BETA_BOUNDED and beta is None:
        raise UsageError("bounded beta mode needs --beta or --nu")
    params = TemplateParams(
        n=n, w=w, alpha=alpha, delta=parse_rational(args.delta),
        q1=parse_rational(args.q1), blocks=args.blocks,
        beta=beta if beta_mode == BETA_BOUNDED else None,
        beta_mode=beta_mode, gap_bits=gap_bits, paper_qk1=args.paper_qk1)
    built = build_system(params, gap)
    doc = json.dumps(built.to_json_dict(), indent=2, sort_keys=True) + "\n"
    _write_output(args.out, doc)
    if args.svg:
        _write_output(args.svg, _block_figure(params, 1, params.q1, gap))
    if args.breakpoints_csv:
        _write_output(args.breakpoints_csv, _breakpoints_csv(built.blocks))
    return EXIT_OK


def _cmd_validate(args) -> int:
    doc = json.loads(_read_input(args.system))
    breakpoints = [parse_rational(b) for b in doc["breakpoints"]]
    values = [[parse_rational(v) for v in row] for row in doc["values"]]
    report = validate_raw(breakpoints, values)
    for violation in report.violations:
        print(json.dumps(violation.to_json_dict(), sort_keys=True))
    print(json.dumps({"is_system": report.is_system,
                      "violations": len(report.violations)}, sort_keys=True))
    return EXIT_OK if report.is_system else EXIT_INVALID


def _cmd_minima(args) -> int:
    gap = GapFunction(args.gap_bits or _gap_bits_default())
    x = tuple(parse_rational(part) for part in args.x.split(","))
    mode = LINEAR_FORM if args.mode == "linear-form" else SIMULTANEOUS
    if args.m is not None and args.m != len(x):
        raise UsageError(f"--m {args.m} disagrees with {len(x)} target "
                         "coordinates in --x")
    body = GaugeBody(mode, x)
    grid = _parse_grid(args.grid)
    bound = "auto" if args.bound == "auto" else int(args.bound)
    profile = minima_profile(body, grid, bound=bound, gap=gap)
    text = profile_to_csv(profile)
    _write_output(args.out, text)
    print(f"proxy horizon: results reflect the rational target exactly; "
          f"they track an irrational target only while e^q stays well below "
          f"{proxy_horizon(body)}", file=sys.stderr)
    return EXIT_OK


def _load_subject(path: str):
    text = _read_input(path)
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(text)
        return PiecewiseLinearMap.from_json_dict(doc), doc.get("meta"), None
    profile = profile_from_csv(text)
    return None, None, profile


def _cmd_diagnose(args) -> int:
    gap = GapFunction(args.gap_bits or _gap_bits_default())
    system, meta, profile = _load_subject(args.input)
    tail = parse_rational(args.tail_from) if args.tail_from else None
    epsilon = parse_rational(args.epsilon) if args.epsilon else None
    nu = parse_rational(args.nu) if args.nu else None
    w = parse_rational(args.w) if args.w else None
    if profile is not None:
        if w is None:
            raise UsageError("--w is required to diagnose a profile")
        report = analyze_profile(profile, w, tail_start=tail,
                                 epsilon=epsilon, nu=nu, gap=gap)
    else:
        n = args.n
        if n is None and meta and "template" in meta:
            n = int(meta["template"]["n"])
        if w is None and meta and "template" in meta:
            w = parse_rational(meta["template"]["w"])
        if n is None or w is None:
            raise UsageError("--n and --w are required (no template metadata)")
        report = analyze(system, n, w, tail_start=tail, epsilon=epsilon,
                         nu=nu, gap=gap)
    print(json.dumps(report.to_json_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_compare(args) -> int:
    system, _, _ = _load_subject(args.system)
    if system is None:
        raise UsageError("--system must point to a system JSON document")
    _, _, profile = _load_subject(args.profile)
    if profile is None:
        raise UsageError("--profile must point to a profile CSV")
    rn = parse_rational(args.rn) if args.rn else None
    report = compare_system_profile(system, profile, rn=rn)
    print(json.dumps(report.to_json_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_plot(args) -> int:
    gap = GapFunction(args.gap_bits or _gap_bits_default())
    text = _read_input(args.input)
    doc = json.loads(text)
    subject = PiecewiseLinearMap.from_json_dict(doc)
    meta = doc.get("meta")
    if args.block is not None:
        if not meta or "template" not in meta:
            raise UsageError("--block needs template metadata in the file")
        params = params_from_meta(meta["template"])
        blocks = meta.get("blocks", [])
        if not (1 <= args.block <= len(blocks)):
            raise UsageError(f"--block out of range 1..{len(blocks)}")
        q_k = parse_rational(blocks[args.block - 1]["q_k"])
        _write_output(args.out, _block_figure(params, args.block, q_k, gap))
        return EXIT_OK
    annotations = []
    if meta and "blocks" in meta:
        for row in meta["blocks"]:
            annotations.append((parse_rational(row["q_k"]), f"q_{row['k']}"))
        annotations.append((parse_rational(meta["blocks"][-1]["q_k1"]),
                            f"q_{len(meta['blocks']) + 1}"))
    guide_n = guide_w = None
    if args.guides and meta and "template" in meta:
        guide_n = int(meta["template"]["n"])
        guide_w = parse_rational(meta["template"]["w"])
    spec = PlotSpec(subject=subject, annotations=tuple(annotations),
                    guide_n=guide_n, guide_w=guide_w,
                    width=args.width, height=args.height)
    _write_output(args.out, render_svg(spec))
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="pgn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="construct a template system")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--w", required=True)
    p.add_argument("--alpha")
    p.add_argument("--beta")
    p.add_argument("--beta-mode", choices=[BETA_BOUNDED, BETA_LOG],
                   default=BETA_BOUNDED)
    p.add_argument("--epsilon")
    p.add_argument("--nu")
    p.add_argument("--rn")
    p.add_argument("--delta", default="1/2")
    p.add_argument("--q1", required=True)
    p.add_argument("--blocks", type=int, default=10)
    p.add_argument("--gap-bits", type=int)
    p.add_argument("--paper-qk1", action="store_true",
                   help="use the alternative printed step for q_{k+1} "
                        "(produces a map the validator rejects)")
    p.add_argument("--out", default="-")
    p.add_argument("--svg")
    p.add_argument("--breakpoints-csv")
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("validate", help="check the system axioms")
    p.add_argument("system", help="system JSON path or - for stdin")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("minima", help="successive-minima profile")
    p.add_argument("--mode", choices=["linear-form", "simultaneous"],
                   default="linear-form")
    p.add_argument("--x", required=True,
                   help="comma-separated rational target coordinates")
    p.add_argument("--m", type=int,
                   help="expected target count (consistency check)")
    p.add_argument("--grid", required=True, help="start:stop:step")
    p.add_argument("--bound", default="auto")
    p.add_argument("--gap-bits", type=int)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_minima)

    p = sub.add_parser("diagnose", help="tail margins and exponent estimate")
    p.add_argument("--input", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--w")
    p.add_argument("--epsilon")
    p.add_argument("--nu")
    p.add_argument("--tail-from")
    p.add_argument("--gap-bits", type=int)
    p.set_defaults(func=_cmd_diagnose)

    p = sub.add_parser("compare", help="bounded-distance comparison")
    p.add_argument("--system", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--rn")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("plot", help="render a system as SVG")
    p.add_argument("--input", required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--block", type=int)
    p.add_argument("--guides", action=argparse.BooleanOptionalAction,
                   default=True)
    p.add_argument("--width", type=int, default=900)
    p.add_argument("--height", type=int, default=540)
    p.add_argument("--gap-bits", type=int)
    p.set_defaults(func=_cmd_plot)
    return parser


def run(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PgnError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
