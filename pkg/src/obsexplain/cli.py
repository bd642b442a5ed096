"""
Command-line front end.

    obsexplain simulate quadratic --n 1000 --length-scale "sqrt(7)" --epsilon 1e-3
    obsexplain explain data/possum_predictions.csv --target prediction \\
        --exclude case,totlngth --kernel exponential --length-scale cv --epsilon 1e-2
    obsexplain cv data.csv --target y --kernel exponential --grid logspace:-4:2:25
    obsexplain replay out/manifest.json

Exit codes: 0 success, 1 replay mismatch, 2 input error, 3 degenerate data.
"""

from __future__ import annotations

import argparse
import ast
import csv
import hashlib
import json
import logging
import math
import operator
import os
import sys
import time

import numpy as np

from . import __version__
from .data import SCENARIOS, Dataset, load_csv, standardize, write_tables
from .exceptions import DegenerateDataError, InputError
from .explain import build_report
from .hyper import CvConfig, cv_select, default_grid
from .kernels import KernelConfig, KernelFamily
from .omp import OmpConfig

logger = logging.getLogger("obsexplain")

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_DEGENERATE = 0, 1, 2, 3

SCENARIO_DEFAULTS = {
    "quadratic": ("gaussian", "sqrt(7)"),
    "ackley": ("matern32", "1.0"),
}

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {"sqrt": math.sqrt, "exp": math.exp, "log": math.log}
_CONSTS = {"pi": math.pi, "e": math.e}


def parse_number(text: str) -> float:
    """Evaluate a small arithmetic expression such as ``sqrt(7)`` or ``1e-3``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.Name) and node.id in _CONSTS:
            return _CONSTS[node.id]
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ValueError

    try:
        value = ev(ast.parse(str(text).strip(), mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError, OverflowError, TypeError):
        raise InputError(f"cannot parse number {text!r}") from None
    if not math.isfinite(value):
        raise InputError(f"{text!r} is not finite")
    return value


def parse_grid(text: str | None) -> tuple:
    """``logspace:a:b:k`` (exponents), ``linspace:a:b:k`` or a comma list."""
    if text is None or text == "default":
        return tuple(default_grid())
    text = text.strip()
    for kind, fn in (("logspace:", np.logspace), ("linspace:", np.linspace)):
        if text.startswith(kind):
            parts = text[len(kind):].split(":")
            if len(parts) != 3:
                raise InputError(f"grid {text!r}: expected {kind}start:stop:count")
            a, b = parse_number(parts[0]), parse_number(parts[1])
            try:
                k = int(parts[2])
            except ValueError:
                raise InputError(f"grid {text!r}: count must be an integer") from None
            if k < 1:
                raise InputError(f"grid {text!r}: count must be positive")
            return tuple(float(v) for v in fn(a, b, k))
    return tuple(parse_number(v) for v in text.split(",") if v.strip())


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def array_sha256(a) -> str:
    return hashlib.sha256(np.ascontiguousarray(a, dtype="<f8").tobytes()).hexdigest()


def _split_names(text):
    if not text:
        return None
    return [s.strip() for s in text.split(",") if s.strip()]


# --------------------------------------------------------------------------
# outputs


def write_report_csv(report, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "gamma", "abs_err", "norm_err", "selected"])
        mask = report.selected_mask
        for i in range(report.n):
            w.writerow([i, f"{report.gamma[i]:.17g}", f"{report.errors[i]:.17g}",
                        f"{report.normalized_errors[i]:.17g}", int(mask[i])])


def summary_text(report, title) -> str:
    pct = 100.0 * report.n_selected / report.n
    lines = [
        title,
        f"  kernel            {report.kernel_family} (length scale {report.length_scale:.6g})",
        f"  tolerance         {report.epsilon:.3g}",
        f"  selection rule    {report.selection_rule}, stop: {report.stop_reason}",
        f"  n                 {report.n}",
        f"  n*                {report.n_selected} ({pct:.1f}% of the data size)",
        f"  max residual      {report.achieved_tolerance:.3e}",
        f"  max abs error     {float(report.errors.max()):.3e}",
    ]
    if report.degenerate:
        lines.append("  explanations      degenerate: all coefficients are zero")
    else:
        top = report.top(10)
        lines.append("  top explanations  " + ", ".join(
            f"{int(i)} ({report.gamma[i]:.3f})" for i in top))
    return "\n".join(lines) + "\n"


def _finish_run(ds: Dataset, report, args, out_dir, name, manifest):
    os.makedirs(out_dir, exist_ok=True)
    full, expl = write_tables(report, ds, out_dir, name)
    report_path = os.path.join(out_dir, "report.csv")
    write_report_csv(report, report_path)
    text = summary_text(report, f"{manifest['command']}: {name}")
    with open(os.path.join(out_dir, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(text)
    sys.stdout.write(text)
    manifest.update(
        n=report.n,
        n_selected=report.n_selected,
        achieved_max_residual=report.achieved_tolerance,
        stop_reason=report.stop_reason,
        representation_gap=report.representation_gap,
        selection_rule=report.selection_rule,
        selected_indices=[int(i) for i in report.selected_indices],
        gamma_sha256=array_sha256(report.gamma),
        outputs=[os.path.basename(p) for p in (report_path, full, expl)] + ["summary.txt"],
    )
    return manifest


def _write_manifest(manifest, out_dir, started):
    manifest["wall_time_s"] = round(time.perf_counter() - started, 4)
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return path


# --------------------------------------------------------------------------
# commands


def run_simulate(args) -> dict:
    started = time.perf_counter()
    family_default, ls_default = SCENARIO_DEFAULTS[args.scenario]
    family = KernelFamily.parse(args.kernel or family_default)
    ls_text = args.length_scale or ls_default
    kernel = KernelConfig(family, parse_number(ls_text))
    omp_cfg = OmpConfig(args.epsilon, args.max_points)
    ds = SCENARIOS[args.scenario](args.n, args.seed)
    _, report = build_report(ds.points, ds.targets, kernel, omp_cfg)
    manifest = {
        "tool": "obsexplain",
        "version": __version__,
        "command": "simulate",
        "scenario": args.scenario,
        "n_requested": args.n,
        "seed": args.seed,
        "kernel": family.value,
        "length_scale": kernel.length_scale,
        "length_scale_expr": ls_text,
        "epsilon": omp_cfg.tolerance,
        "max_points": args.max_points,
        "inputs": {},
    }
    _finish_run(ds, report, args, args.out_dir, args.scenario, manifest)
    _write_manifest(manifest, args.out_dir, started)
    return manifest


def _load_explain_dataset(args):
    ds = load_csv(args.csv, args.target, features=_split_names(args.features),
                  exclude=_split_names(args.exclude) or ())
    return standardize(ds)


def run_explain(args) -> dict:
    started = time.perf_counter()
    family = KernelFamily.parse(args.kernel or "exponential")
    ds = _load_explain_dataset(args)
    omp_cfg = OmpConfig(args.epsilon, args.max_points)
    manifest = {
        "tool": "obsexplain",
        "version": __version__,
        "command": "explain",
        "csv": os.path.abspath(args.csv),
        "target": args.target,
        "features": list(ds.column_names),
        "exclude": _split_names(args.exclude),
        "seed": args.seed,
        "kernel": family.value,
        "epsilon": omp_cfg.tolerance,
        "max_points": args.max_points,
        "inputs": {os.path.basename(args.csv): file_sha256(args.csv)},
        "dropped_rows": ds.dropped_rows,
    }
    ls_text = args.length_scale or "cv"
    if ls_text.strip().lower() == "cv":
        cv_cfg = CvConfig(args.k_folds, parse_grid(args.grid), args.seed)
        res = cv_select(ds.points, ds.targets, family, cv_cfg, omp_cfg)
        length_scale = res.best_length_scale
        manifest.update(length_scale_source="cv", k_folds=cv_cfg.k_folds,
                        grid=list(cv_cfg.grid), cv_error=res.best_error)
        logger.info("cv selected length scale %.6g (cv error %.6g)", length_scale, res.best_error)
    else:
        length_scale = parse_number(ls_text)
        manifest.update(length_scale_source="fixed", length_scale_expr=ls_text)
    kernel = KernelConfig(family, length_scale)
    manifest["length_scale"] = kernel.length_scale
    _, report = build_report(ds.points, ds.targets, kernel, omp_cfg)
    name = os.path.splitext(os.path.basename(args.csv))[0]
    _finish_run(ds, report, args, args.out_dir, name, manifest)
    _write_manifest(manifest, args.out_dir, started)
    return manifest


def run_cv(args) -> dict:
    started = time.perf_counter()
    family = KernelFamily.parse(args.kernel or "exponential")
    ds = standardize(load_csv(args.csv, args.target, features=_split_names(args.features),
                              exclude=_split_names(args.exclude) or ()))
    cv_cfg = CvConfig(args.k_folds, parse_grid(args.grid), args.seed)
    omp_cfg = OmpConfig(args.epsilon, args.max_points)
    res = cv_select(ds.points, ds.targets, family, cv_cfg, omp_cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    curve = os.path.join(args.out_dir, "cv_curve.csv")
    with open(curve, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["length_scale", "cv_error"])
        for ls, err in zip(res.grid, res.cv_errors):
            w.writerow([f"{ls:.17g}", f"{err:.17g}"])
    print(f"{res.best_length_scale:.17g}")
    manifest = {
        "tool": "obsexplain",
        "version": __version__,
        "command": "cv",
        "csv": os.path.abspath(args.csv),
        "target": args.target,
        "features": list(ds.column_names),
        "seed": args.seed,
        "kernel": family.value,
        "epsilon": omp_cfg.tolerance,
        "max_points": args.max_points,
        "k_folds": cv_cfg.k_folds,
        "grid": list(cv_cfg.grid),
        "inputs": {os.path.basename(args.csv): file_sha256(args.csv)},
        "n": ds.n,
        "best_length_scale": res.best_length_scale,
        "best_cv_error": res.best_error,
        "outputs": ["cv_curve.csv"],
    }
    _write_manifest(manifest, args.out_dir, started)
    return manifest


def replay_args(manifest: dict, out_dir: str) -> list[str]:
    """Command line that re-runs the recorded ``simulate``/``explain`` run."""
    cmd = manifest["command"]
    common = ["--kernel", manifest["kernel"], "--epsilon", repr(manifest["epsilon"]),
              "--seed", str(manifest["seed"]), "--out-dir", out_dir,
              "--length-scale", repr(manifest["length_scale"])]
    if manifest.get("max_points") is not None:
        common += ["--max-points", str(manifest["max_points"])]
    if cmd == "simulate":
        return ["simulate", manifest["scenario"], "--n", str(manifest["n_requested"])] + common
    if cmd == "explain":
        return (["explain", manifest["csv"], "--target", manifest["target"],
                 "--features", ",".join(manifest["features"])] + common)
    raise InputError(f"cannot replay a {cmd!r} manifest")


def run_replay(args) -> int:
    with open(args.manifest, encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("command") == "explain":
        for name, digest in manifest.get("inputs", {}).items():
            if file_sha256(manifest["csv"]) != digest:
                raise InputError(f"input file {name} changed since the recorded run")
    out_dir = args.out_dir or os.path.join(os.path.dirname(os.path.abspath(args.manifest)), "replay")
    new = dispatch(build_parser().parse_args(replay_args(manifest, out_dir)))
    same = (new["selected_indices"] == manifest["selected_indices"]
            and new["gamma_sha256"] == manifest["gamma_sha256"])
    print("replay: " + ("identical selected indices and explanations" if same else "MISMATCH"))
    return EXIT_OK if same else EXIT_MISMATCH


# --------------------------------------------------------------------------
# parser


def _add_common(p, epsilon_default):
    p.add_argument("--kernel", type=str.lower, default=None,
                   help="gaussian | matern32 | exponential")
    p.add_argument("--length-scale", default=None,
                   help="number or expression such as sqrt(7)")
    p.add_argument("--epsilon", type=parse_number, default=epsilon_default,
                   help="stop when the max absolute residual is <= epsilon")
    p.add_argument("--max-points", type=int, default=None)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out-dir", default="out")


def _add_csv(p):
    p.add_argument("csv")
    p.add_argument("--target", required=True, help="column holding the black-box predictions")
    p.add_argument("--features", default=None, help="comma-separated feature columns")
    p.add_argument("--exclude", default=None, help="comma-separated columns to ignore")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="obsexplain",
        description="Observation-specific explanations via greedy kernel surrogates.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a synthetic scenario end to end")
    p.add_argument("scenario", choices=sorted(SCENARIOS))
    p.add_argument("--n", type=int, default=1000)
    _add_common(p, 1e-3)

    p = sub.add_parser("explain", help="explain predictions stored in a CSV file")
    _add_csv(p)
    _add_common(p, 1e-2)
    p.add_argument("--k-folds", type=int, default=5, help="used with --length-scale cv")
    p.add_argument("--grid", default=None, help="used with --length-scale cv")

    p = sub.add_parser("cv", help="cross-validate the kernel length scale")
    _add_csv(p)
    _add_common(p, 1e-2)
    p.add_argument("--k-folds", type=int, default=5)
    p.add_argument("--grid", default=None,
                   help="logspace:a:b:k, linspace:a:b:k or comma list (default logspace:-4:2:25)")

    p = sub.add_parser("replay", help="re-run a simulate/explain manifest and compare")
    p.add_argument("manifest")
    p.add_argument("--out-dir", default=None)
    return parser


def dispatch(args):
    if args.command == "simulate":
        return run_simulate(args)
    if args.command == "explain":
        return run_explain(args)
    if args.command == "cv":
        return run_cv(args)
    return run_replay(args)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    try:
        result = dispatch(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DegenerateDataError as exc:
        print(f"degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
