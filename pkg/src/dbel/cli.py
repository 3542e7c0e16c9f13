"""Command line front end.

Subcommands: ``test``, ``calibrate``, ``sequential``, ``power`` and
``resample``.  The exit status reports whether the command ran, never
the statistical decision, which is part of the report.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Any, Iterator, Sequence

import numpy as np

from . import __version__
from .calibration import (
    CalibrationTable,
    McConfig,
    calibrate_retrospective,
    calibration_dir,
    default_table_name,
    load_table,
    mc_p_value,
    save_table,
)
from .dbel import DEFAULT_DELTA, DbelParams
from .designs import DESIGN_IDS, get_design, load_law
from .errors import DbelError, SequentialError
from .power import DEFAULT_POWER_REPS, DEFAULT_RESAMPLING_REPS, power_study, power_table, resampling_power
from .samples import MultivariateSample, load_sample
from .sequential import SequentialPlan, calibrate_sequential, run_sequential
from .teststat import Mode, compute_ts

REPORT_SCHEMA_VERSION = 1
DEFAULT_CALIB_REPS = 20000


class CliError(DbelError):
    """Invalid combination of command line inputs."""


# --------------------------------------------------------------------------- parsing


def _alpha(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {text}")
    return value


def _alphas(text: str) -> tuple[float, ...]:
    try:
        return tuple(_alpha(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid alpha list {text!r}") from exc


def _delta(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 0.25:
        raise argparse.ArgumentTypeError(f"delta must lie in (0, 0.25), got {text}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--delta", type=_delta, default=DEFAULT_DELTA,
                     help="window exponent in (0, 0.25) (default 0.1)")
    sub.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.EXACT.value,
                     help="exact candidate enumeration or multistart search")
    sub.add_argument("--approx", dest="mode", action="store_const", const=Mode.APPROX.value,
                     help="shorthand for --mode approx")
    sub.add_argument("--threads", type=_positive, default=None,
                     help="worker threads (default: available cores; results do not depend on it)")
    sub.add_argument("--json", action="store_true", help="print a machine-readable report")
    sub.add_argument("--output", "-o", type=Path, default=None, help="also write the report here")
    sub.add_argument("--verbose", "-v", action="store_true")


def _calib_flags(sub: argparse.ArgumentParser, reps_flag: str = "--reps",
                 seed_flag: str = "--seed") -> None:
    sub.add_argument("--calib", type=Path, default=None, help="calibration table (JSON)")
    sub.add_argument(reps_flag, dest="calib_reps", type=int, default=DEFAULT_CALIB_REPS,
                     help="replicates for inline calibration when no table is found")
    sub.add_argument(seed_flag, dest="calib_seed", type=int, default=0,
                     help="seed for inline calibration")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dbel",
        description="Distribution-free multivariate two-sample DBEL test.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    cmds = parser.add_subparsers(dest="command", required=True)

    t = cmds.add_parser("test", help="retrospective two-sample test")
    t.add_argument("--x", type=Path, required=True)
    t.add_argument("--y", type=Path, required=True)
    t.add_argument("--alpha", type=_alpha, default=0.05)
    t.add_argument("--budget", type=_positive, default=None,
                   help="maximum exact candidate evaluations for p >= 3")
    _calib_flags(t)
    _common(t)

    c = cmds.add_parser("calibrate", help="simulate null critical values")
    c.add_argument("--n", type=_positive)
    c.add_argument("--m", type=_positive)
    c.add_argument("--k", dest="K", type=_positive, help="number of groups (sequential table)")
    c.add_argument("--m-per-group", type=_positive)
    c.add_argument("--p", type=int, default=2)
    c.add_argument("--alphas", type=_alphas, default=(0.1, 0.05, 0.01))
    c.add_argument("--reps", type=int, default=DEFAULT_CALIB_REPS)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", type=Path, default=None,
                   help="table path (default: calibration directory or current directory)")
    c.add_argument("--no-stats", action="store_true",
                   help="omit the raw null statistics (no Monte Carlo p-values)")
    _common(c)

    s = cmds.add_parser("sequential", help="group-sequential test")
    s.add_argument("--k", dest="K", type=_positive, required=True)
    s.add_argument("--m-per-group", type=_positive, required=True)
    s.add_argument("--alpha", type=_alpha, default=0.05)
    s.add_argument("--x-stages", type=Path, help="directory of x_1.csv .. x_K.csv")
    s.add_argument("--y-stages", type=Path, help="directory of y_1.csv .. y_K.csv")
    s.add_argument("--x", type=Path, help="single X file with a 'stage' column")
    s.add_argument("--y", type=Path, help="single Y file with a 'stage' column")
    _calib_flags(s)
    _common(s)

    pw = cmds.add_parser("power", help="power under a simulation design")
    pw.add_argument("--design", required=True, type=str.upper, choices=DESIGN_IDS)
    pw.add_argument("--n", type=_positive, required=True)
    pw.add_argument("--m", type=_positive, required=True)
    pw.add_argument("--alpha", type=_alpha, default=0.05)
    pw.add_argument("--reps", type=_positive, default=DEFAULT_POWER_REPS)
    pw.add_argument("--seed", type=int, default=0)
    pw.add_argument("--shift-scale", type=float, default=1.0,
                    help="multiplier on the location shift of D4, D6, S1, S3")
    pw.add_argument("--law", type=Path, default=None, help="law spec file for NULL_CUSTOM")
    pw.add_argument("--p", type=int, default=None, help="dimension for NULL_NORMAL")
    pw.add_argument("--table", action="store_true", help="also print an aligned power table")
    _calib_flags(pw, "--calib-reps", "--calib-seed")
    _common(pw)

    r = cmds.add_parser("resample", help="power by subsampling two populations")
    r.add_argument("--x-pop", type=Path, required=True)
    r.add_argument("--y-pop", type=Path, required=True)
    r.add_argument("--n", type=_positive, required=True)
    r.add_argument("--m", type=_positive, required=True)
    r.add_argument("--alpha", type=_alpha, default=0.05)
    r.add_argument("--reps", type=_positive, default=DEFAULT_RESAMPLING_REPS)
    r.add_argument("--seed", type=int, default=0)
    _calib_flags(r, "--calib-reps", "--calib-seed")
    _common(r)
    return parser


# --------------------------------------------------------------------------- helpers


def _log(args: argparse.Namespace, message: str) -> None:
    if getattr(args, "verbose", False):
        print(message, file=sys.stderr)


def _params(args: argparse.Namespace) -> DbelParams:
    return DbelParams(delta=args.delta)


def _mc_config(reps: int, seed: int, alphas: Sequence[float] = (0.1, 0.05, 0.01)) -> McConfig:
    return McConfig(reps=reps, seed=seed, alpha_grid=tuple(alphas))


def _with_alpha(alphas: Sequence[float], alpha: float) -> tuple[float, ...]:
    return tuple(sorted(set(alphas) | {alpha}, reverse=True))


def _retro_table(args: argparse.Namespace, n: int, m: int, p: int, alpha: float) -> CalibrationTable:
    """Explicit table, else one from the calibration directory, else simulate."""
    mode = Mode(args.mode)
    if args.calib is not None:
        table = load_table(args.calib)
    else:
        table = None
        cdir = calibration_dir()
        if cdir is not None:
            path = cdir / default_table_name(kind="retrospective", p=p, delta=args.delta,
                                             mode=mode.value, n=n, m=m)
            if path.exists():
                _log(args, f"using calibration table {path}")
                table = load_table(path)
        if table is None:
            _log(args, f"calibrating inline with {args.calib_reps} replicates")
            cfg = _mc_config(args.calib_reps, args.calib_seed, _with_alpha((0.1, 0.05, 0.01), alpha))
            table = calibrate_retrospective(n, m, p, _params(args), cfg, mode=mode,
                                            threads=args.threads)
    table.require_match(n=n, m=m, p=p, delta=args.delta, mode=mode.value)
    table.threshold(alpha)
    return table


def _seq_table(args: argparse.Namespace, p: int) -> CalibrationTable:
    mode = Mode(args.mode)
    if args.calib is not None:
        table = load_table(args.calib)
    else:
        table = None
        cdir = calibration_dir()
        if cdir is not None:
            path = cdir / default_table_name(kind="sequential", p=p, delta=args.delta,
                                             mode=mode.value, K=args.K,
                                             m_per_group=args.m_per_group)
            if path.exists():
                table = load_table(path)
        if table is None:
            _log(args, f"calibrating inline with {args.calib_reps} replicates")
            cfg = _mc_config(args.calib_reps, args.calib_seed,
                             _with_alpha((0.1, 0.05, 0.01), args.alpha))
            table = calibrate_sequential(args.K, args.m_per_group, p, _params(args), cfg,
                                         mode=mode, threads=args.threads)
    table.require_sequential(K=args.K, m_per_group=args.m_per_group, p=p, delta=args.delta,
                             mode=mode.value)
    return table


def _emit(args: argparse.Namespace, report: dict[str, Any], text: str) -> None:
    if args.json:
        out = json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"
    else:
        out = text.rstrip("\n") + "\n"
    sys.stdout.write(out)
    if args.output is not None:
        args.output.write_text(out, encoding="utf-8")


def _envelope(command: str, body: dict[str, Any]) -> dict[str, Any]:
    return {"schema_version": REPORT_SCHEMA_VERSION, "command": command,
            "software_version": __version__, **body}


def _fmt(value: float | None) -> str:
    return "NA" if value is None else f"{value:.6f}"


# --------------------------------------------------------------------------- commands


def cmd_test(args: argparse.Namespace) -> dict[str, Any]:
    x = load_sample(args.x)
    y = load_sample(args.y, expected_dim=x.dim)
    params = _params(args)
    table = _retro_table(args, x.rows, y.rows, x.dim, args.alpha)
    kwargs = {} if args.budget is None else {"budget": args.budget}
    result = compute_ts(x, y, params, args.mode, **kwargs)
    c = table.threshold(args.alpha)
    p_value = None if table.null_stats is None else mc_p_value(result.log_ts, table.null_stats)
    result = result.with_decision(c, table.provenance(), p_value)
    body = {
        "n": x.rows, "m": y.rows, "p": x.dim, "alpha": args.alpha, "delta": args.delta,
        "mode": Mode(args.mode).value, "log_ts": result.log_ts,
        "argmax_direction": list(result.argmax_direction.coords),
        "candidate_count": result.candidate_count, "exact": result.exact,
        "threshold": c, "decision": result.decision.value, "p_value": p_value,
        "calibration": dict(result.provenance),
    }
    text = "\n".join([
        f"n, m, p:          {x.rows}, {y.rows}, {x.dim}",
        f"log TS:           {result.log_ts:.6f}",
        f"argmax direction: {result.argmax_direction.coords}",
        f"candidates:       {result.candidate_count} ({'exact' if result.exact else 'approximate'})",
        f"threshold:        {c:.6f} (alpha={args.alpha:g}, {table.reps} replicates)",
        f"p-value (MC):     {_fmt(p_value)}",
        f"decision:         {result.decision.value}",
    ])
    return _envelope("test", body), text


def cmd_calibrate(args: argparse.Namespace):
    sequential = args.K is not None or args.m_per_group is not None
    if sequential and (args.K is None or args.m_per_group is None):
        raise CliError("a sequential table needs both --k and --m-per-group")
    if not sequential and (args.n is None or args.m is None):
        raise CliError("give --n and --m, or --k and --m-per-group")
    if sequential and (args.n is not None or args.m is not None):
        raise CliError("--n/--m cannot be combined with --k/--m-per-group")
    cfg = _mc_config(args.reps, args.seed, args.alphas)
    params, mode = _params(args), Mode(args.mode)
    keep = not args.no_stats
    if sequential:
        table = calibrate_sequential(args.K, args.m_per_group, args.p, params, cfg, mode=mode,
                                     threads=args.threads, keep_stats=keep)
    else:
        table = calibrate_retrospective(args.n, args.m, args.p, params, cfg, mode=mode,
                                        threads=args.threads, keep_stats=keep)
    out = args.out
    if out is None:
        name = default_table_name(kind=table.kind, p=table.p, delta=table.delta, mode=table.mode,
                                  n=table.n, m=table.m, K=table.K, m_per_group=table.m_per_group)
        out = (calibration_dir() or Path.cwd()) / name
    save_table(table, out)
    body = {"table": str(out), "kind": table.kind,
            "entries": [{"alpha": a, "c": c} for a, c in table.entries],
            "calibration": table.provenance()}
    return _envelope("calibrate", body), f"{table.row()}\nwritten to {out}"


def _stage_dir(directory: Path, prefix: str, K: int, dim: int | None) -> Iterator[MultivariateSample]:
    for k in range(1, K + 1):
        path = directory / f"{prefix}_{k}.csv"
        if not path.exists():
            raise SequentialError(f"missing stage file {path}")
        yield load_sample(path, expected_dim=dim)


def _stage_file(path: Path, K: int) -> list[MultivariateSample]:
    with path.open(newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), [])
    names = [h.strip().lower() for h in header]
    if "stage" not in names:
        raise CliError(f"{path}: expected a header with a 'stage' column")
    col = names.index("stage")
    values = load_sample(path).values
    stage = values[:, col]
    data = np.delete(values, col, axis=1)
    groups = []
    for k in range(1, K + 1):
        rows = data[stage == k]
        if rows.shape[0] == 0:
            break
        groups.append(MultivariateSample(rows))
    return groups


def cmd_sequential(args: argparse.Namespace):
    dirs = args.x_stages is not None or args.y_stages is not None
    files = args.x is not None or args.y is not None
    if dirs == files:
        raise CliError("give either --x-stages/--y-stages or --x/--y (stage-column files)")
    if dirs:
        if args.x_stages is None or args.y_stages is None:
            raise CliError("both --x-stages and --y-stages are required")
        first = load_sample(args.x_stages / "x_1.csv") if (args.x_stages / "x_1.csv").exists() else None
        p = first.dim if first is not None else 2
        xs: Any = _stage_dir(args.x_stages, "x", args.K, p)
        ys: Any = _stage_dir(args.y_stages, "y", args.K, p)
    else:
        if args.x is None or args.y is None:
            raise CliError("both --x and --y are required")
        xs, ys = _stage_file(args.x, args.K), _stage_file(args.y, args.K)
        if not xs or not ys:
            raise SequentialError("no rows for stage 1")
        p = xs[0].dim
    table = _seq_table(args, p)
    c = table.threshold(args.alpha)
    plan = SequentialPlan(args.K, args.m_per_group, c, _params(args), Mode(args.mode),
                          provenance=table.provenance())
    report = run_sequential(plan, xs, ys)
    body = {"K": args.K, "m_per_group": args.m_per_group, "p": p, "alpha": args.alpha,
            "delta": args.delta, "mode": plan.mode.value, **report.to_dict()}
    body["calibration"] = body.pop("provenance")
    lines = [f"threshold: {c:.6f} (alpha={args.alpha:g}, K={args.K}, m={args.m_per_group})"]
    lines += [f"stage {r.k}: log R = {r.log_r:.6f}{'  >= threshold' if r.crossed else ''}"
              for r in report.history]
    lines.append(f"decision: {report.decision.value} at stage {report.stopping_stage}")
    return _envelope("sequential", body), "\n".join(lines)


def _power_text(report, table_flag: bool) -> str:
    lo, hi = report.binomial_ci()
    lines = [
        f"design:     {report.design}",
        f"n, m:       {report.n}, {report.m}",
        f"threshold:  {report.threshold:.6f} (alpha={report.alpha:g})",
        f"rejections: {report.rejections} / {report.reps}",
        f"power:      {report.power:.4f}  (95% CI {lo:.4f} to {hi:.4f})",
    ]
    if report.mode == Mode.APPROX.value:
        lines.append("note:       approximate mode; candidate search is not exhaustive")
    if table_flag:
        lines += ["", power_table([report])]
    return "\n".join(lines)


def cmd_power(args: argparse.Namespace):
    law = load_law(args.law) if args.law is not None else None
    spec = get_design(args.design, shift_scale=args.shift_scale, law=law, p=args.p)
    table = _retro_table(args, args.n, args.m, spec.p, args.alpha)
    report = power_study(spec, args.n, args.m, args.alpha, table, args.reps, args.seed,
                         params=_params(args), mode=args.mode, threads=args.threads)
    _log(args, f"wall clock {report.wall_clock:.1f}s")
    return _envelope("power", report.to_dict()), _power_text(report, args.table)


def cmd_resample(args: argparse.Namespace):
    x_pop = load_sample(args.x_pop)
    y_pop = load_sample(args.y_pop, expected_dim=x_pop.dim)
    table = _retro_table(args, args.n, args.m, x_pop.dim, args.alpha)
    report = resampling_power(x_pop, y_pop, (args.n, args.m), args.alpha, table, args.reps,
                              args.seed, params=_params(args), mode=args.mode,
                              threads=args.threads)
    return _envelope("resample", report.to_dict()), _power_text(report, False)


COMMANDS = {
    "test": cmd_test,
    "calibrate": cmd_calibrate,
    "sequential": cmd_sequential,
    "power": cmd_power,
    "resample": cmd_resample,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, text = COMMANDS[args.command](args)
        _emit(args, report, text)
    except (DbelError, OSError) as exc:
        print(f"dbel {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
