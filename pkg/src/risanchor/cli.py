"""Command-line entry point: ``risanchor {crb-map,monte-carlo,demo-lines}``."""

from __future__ import annotations

import argparse
import io
import logging
import sys

from .errors import RisAnchorError
from .estimation import solve_lines
from .geometry import anchor_params, path_params, polar_from_params, position_line
from .harness.io import mc_csv, heatmap_csv, write_text, _fmt
from .harness.scenario import PRESETS, load_preset, load_scenario
from .harness.sweep import default_ue, run_monte_carlo, sweep_crb_map

log = logging.getLogger("risanchor")

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2


def _ris_list(text):
    try:
        idx = [int(tok) - 1 for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated 1-based indices, got {text!r}")
    if not idx or min(idx) < 0:
        raise argparse.ArgumentTypeError("indices are 1-based")
    return idx


def _grid(text):
    try:
        nx, ny = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NxM, got {text!r}")
    if nx < 1 or ny < 1:
        raise argparse.ArgumentTypeError("grid counts must be positive")
    return nx, ny


def _point(text):
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y, got {text!r}")
    return x, y


def _seed(text):
    val = int(text)
    if not 0 <= val < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return val


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", default="desk",
                        help=f"scenario JSON path or preset name ({', '.join(PRESETS)}); default: desk")
    common.add_argument("--out", default="-", help="output CSV path (default: stdout)")
    common.add_argument("--seed", type=_seed, help="master seed (overrides the scenario)")
    common.add_argument("--ris", type=_ris_list, help="comma list of 1-based RIS indices")
    common.add_argument("--profile", choices=("mirror", "random"), help="override every RIS profile")
    common.add_argument("--grid", type=_grid, help="UE grid as NxM (x count by y count)")
    common.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="risanchor", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("crb-map", parents=[common], help="CRB heatmap over the UE grid")
    mc = sub.add_parser("monte-carlo", parents=[common], help="estimator RMSE vs CRB at one UE")
    mc.add_argument("--trials", type=int, default=200)
    mc.add_argument("--ue", type=_point, help="UE position X,Y (default: first listed UE or grid centre)")
    demo = sub.add_parser("demo-lines", parents=[common], help="noise-free position lines and LS fix")
    demo.add_argument("--ue", type=_point)
    return parser


def _load(args):
    from dataclasses import replace

    sc = load_preset(args.scenario) if args.scenario in PRESETS else load_scenario(args.scenario)
    if args.seed is not None:
        sc = replace(sc, seed=args.seed)
    if args.grid is not None:
        sc = sc.with_grid(*args.grid)
    return sc


def _demo_lines(sc, args) -> str:
    subset = sc.check_positioning(args.ris)
    ue = args.ue or default_ue(sc)
    f_c = sc.pilots.grid().center_frequency
    buf = io.StringIO()
    buf.write("ris,slope,intercept_m,x_min_m,x_max_m,ue_offset_m\n")
    lines = []
    for r in subset:
        seg = sc.ris[r].segment
        obs = anchor_params(path_params(seg, ue, sc.motion, f_c))
        line = position_line(seg, polar_from_params(obs, sc.motion, f_c))
        lines.append(line)
        lo, hi = line.x_interval
        buf.write(f"{r + 1},{_fmt(line.slope)},{_fmt(line.intercept)},{_fmt(lo)},{_fmt(hi)},"
                  f"{_fmt(line.distance_to(ue))}\n")
    fix = solve_lines(lines)
    buf.write(f"# ue_x_m={_fmt(ue[0])}\n# ue_y_m={_fmt(ue[1])}\n")
    buf.write(f"# fix_x_m={_fmt(fix.estimate.x)}\n# fix_y_m={_fmt(fix.estimate.y)}\n")
    buf.write(f"# residual_norm_m={_fmt(fix.residual_norm)}\n")
    return buf.getvalue()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        sc = _load(args)
        if args.command == "crb-map":
            result = sweep_crb_map(sc, args.ris, args.profile, workers=args.workers)
            text = heatmap_csv(result)
        elif args.command == "monte-carlo":
            if args.trials < 1:
                raise RisAnchorError("--trials must be at least 1")
            result = run_monte_carlo(sc, args.trials, ue=args.ue, ris_subset=args.ris,
                                     profile_mode=args.profile, workers=args.workers)
            log.info("rmse=(%.3g, %.3g) m, sqrt(crb)=(%.3g, %.3g) m", result.rmse_x,
                     result.rmse_y, result.sqrt_crb_x, result.sqrt_crb_y)
            text = mc_csv(result)
        else:
            text = _demo_lines(sc, args)
        write_text(text, args.out)
    except OSError as exc:
        print(f"risanchor: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (RisAnchorError, ValueError) as exc:
        print(f"risanchor: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
