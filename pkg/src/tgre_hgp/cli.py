"""Command-line entry point ``tgre-hgp``.

Exit codes: 0 ok, 2 input/parse error, 3 failed validation, 4 I/O error,
5 no threshold crossing inside the grid.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from .bp import SCHEDULES, DecoderConfig
from .css import LogicalExtractionError, quantum_distance_bruteforce
from .gf2 import rank, read_matrix_text
from .hgp import build_tgre_hgp, weight_gate, weight_stats
from .io import (
    ContainerError,
    CurveWriter,
    RunManifest,
    code_to_dict,
    load_code,
    read_curve_csv,
    summary_dict,
    utc_now,
    write_summary,
)
from .montecarlo import DEFAULT_P_GRID, MISMATCH_POLICY, RunConfig, estimate_threshold, run_curve
from .tanner import (
    DEFAULT_DISTANCE_CAP,
    RuleError,
    build_tgre,
    default_rule,
    load_rule,
    validate_seed,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_VALIDATION = 3
EXIT_IO = 4
EXIT_ESTIMATION = 5

WORKERS_ENV = "TGRE_HGP_WORKERS"


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _err(msg: str) -> None:
    print(f"tgre-hgp: {msg}", file=sys.stderr)


def _json_default(obj):
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default)


def _load_rule(path: str | None):
    if path is None:
        return default_rule()
    try:
        return load_rule(path)
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"cannot read rule file {path}: {exc.strerror or exc}") from None
    except RuleError as exc:
        raise CliError(EXIT_INPUT, f"{path}: {exc}") from None


def _load_code(path: str):
    try:
        return load_code(path)
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"cannot read code file {path}: {exc.strerror or exc}") from None
    except ContainerError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None


def _fmt(x):
    return "inf" if x == math.inf else x


# build


def cmd_build(args) -> int:
    rule = _load_rule(args.rule)
    if args.level < 1:
        raise CliError(EXIT_INPUT, f"level must be >= 1, got {args.level}")
    if args.level > rule.max_level:
        raise CliError(EXIT_INPUT, f"rule {rule.name} covers levels up to {rule.max_level}, not {args.level}")
    failures = []
    for tag in ("Z", "X"):
        report = validate_seed(build_tgre(args.level, rule, tag), args.level)
        if not report.passed:
            failures.append(f"{tag}-TGRE seed: {_dump(report.to_dict())}")
    try:
        code = build_tgre_hgp(args.level, rule)
    except ValueError as exc:
        raise CliError(EXIT_VALIDATION, str(exc)) from None
    max_row, mean_row, max_col = weight_stats(code)
    if args.level >= 3:
        ok, ratio = weight_gate(code)
        if not ok:
            failures.append(f"max stabilizer weight / sqrt(N) = {ratio:.4f}, outside 10% of 3/sqrt(5)")
    print(
        f"N={code.N} k={code.k} rate={code.k / code.N:g} "
        f"max_row_weight={max_row} mean_row_weight={mean_row:g} max_col_weight={max_col}"
    )
    if failures:
        for f in failures:
            _err(f"validation gate failed: {f}")
        return EXIT_VALIDATION
    if args.out:
        try:
            Path(args.out).write_text(json.dumps(code_to_dict(code), indent=2) + "\n")
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot write {args.out}: {exc.strerror or exc}") from None
    return EXIT_OK


# validate


def _validate_code(args) -> int:
    code = _load_code(args.code)
    report: dict = {"N": code.N}
    css_ok = code.is_css()
    report["css_orthogonal"] = css_ok
    k = code.k
    report["rank_x"], report["rank_z"], report["k"] = code.rank_x, code.rank_z, k
    raw = json.loads(Path(args.code).read_text())
    report["k_audit"] = k >= 0 and raw.get("N") in (None, code.N) and raw.get("k") in (None, k)
    checks = {"css_orthogonal": css_ok, "k_audit": report["k_audit"]}
    if css_ok:
        try:
            verdict = code.logicals.verify(code)
        except LogicalExtractionError as exc:
            verdict = {"error": str(exc)}
        report["logicals"] = verdict
        checks["logicals"] = "error" not in verdict and all(verdict.values())
        dims = max(code.N - code.rank_x, code.N - code.rank_z)
        if dims > args.cap:
            report["distance"] = None
            report["distance_note"] = f"cap exceeded: nullspace dimension {dims} > cap {args.cap}, distance check skipped"
        else:
            report["distance"] = _fmt(quantum_distance_bruteforce(code, args.cap))
    else:
        report["logicals"] = None
        report["distance"] = None
        report["distance_note"] = "skipped: check matrices do not commute"
        checks["logicals"] = False
    report["checks"] = checks
    report["pass"] = all(checks.values())
    print(_dump(report))
    return EXIT_OK if report["pass"] else EXIT_VALIDATION


def _validate_seed(args) -> int:
    if args.matrix:
        try:
            H = read_matrix_text(Path(args.matrix).read_text())
        except OSError as exc:
            raise CliError(EXIT_INPUT, f"cannot read {args.matrix}: {exc.strerror or exc}") from None
        except ValueError as exc:
            raise CliError(EXIT_INPUT, f"{args.matrix}: {exc}") from None
        level = args.level if args.level is not None else max(1, H.cols.bit_length() - 1)
    else:
        rule = _load_rule(args.rule)
        level = args.level
        if level > rule.max_level:
            raise CliError(EXIT_INPUT, f"rule {rule.name} covers levels up to {rule.max_level}, not {level}")
        H = build_tgre(level, rule, args.pauli)
    try:
        report = validate_seed(H, level, cap=args.cap)
    except ValueError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None
    out = report.to_dict()
    out["full_rank"] = rank(H) == H.rows
    print(_dump(out))
    return EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_validate(args) -> int:
    if args.code:
        return _validate_code(args)
    if args.level is None and not args.matrix:
        raise CliError(EXIT_INPUT, "validate needs --code FILE, --level L or --matrix FILE")
    return _validate_seed(args)


# simulate


def _parse_grid(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.replace(",", " ").split())
    except ValueError:
        raise CliError(EXIT_INPUT, f"bad --p-grid {text!r}") from None


def _run_config(args) -> RunConfig:
    base: dict = {}
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise CliError(EXIT_INPUT, f"cannot read {args.config}: {exc.strerror or exc}") from None
        except json.JSONDecodeError as exc:
            raise CliError(EXIT_INPUT, f"{args.config}: invalid JSON ({exc})") from None
    dec = dict(base.get("decoder", {}))
    for flag, key in [
        ("max_iter", "max_iter"),
        ("schedule", "schedule"),
        ("damping", "damping"),
        ("llr_clip", "llr_clip"),
        ("y_reweight", "y_reweight"),
        ("decimation_rounds", "decimation_rounds"),
        ("decimation_iter", "decimation_iter"),
    ]:
        val = getattr(args, flag)
        if val is not None:
            dec[key] = val
    workers = args.workers if args.workers is not None else base.get("workers")
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        try:
            workers = int(env) if env else 1
        except ValueError:
            raise CliError(EXIT_INPUT, f"{WORKERS_ENV}={env!r} is not an integer") from None
    grid = _parse_grid(args.p_grid) if args.p_grid else tuple(base.get("p_grid", DEFAULT_P_GRID))
    try:
        return RunConfig(
            p_grid=grid,
            trials=args.trials if args.trials is not None else base.get("trials", 10_000),
            master_seed=args.seed if args.seed is not None else base.get("master_seed", 0),
            workers=workers,
            decoder=DecoderConfig(**dec),
        )
    except (TypeError, ValueError) as exc:
        raise CliError(EXIT_INPUT, f"bad run configuration: {exc}") from None


def cmd_simulate(args) -> int:
    code = _load_code(args.code)
    run = _run_config(args)
    if not code.is_css():
        raise CliError(EXIT_VALIDATION, "check matrices do not commute")
    logicals = code.logicals
    verdict = logicals.verify(code)
    if not all(verdict.values()):
        raise CliError(EXIT_VALIDATION, f"logical operators failed verification: {verdict}")
    manifest = RunManifest.for_run(code, run, MISMATCH_POLICY)
    manifest.started = utc_now()
    summary_path = args.summary or str(Path(args.out).with_suffix(".summary.json"))
    points = []
    try:
        fh = open(args.out, "w", newline="")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {args.out}: {exc.strerror or exc}") from None
    with fh:
        writer = CurveWriter(fh, code.k, manifest.deterministic())

        def on_point(pt):
            writer.write(pt)
            points.append(pt)
            if not args.quiet:
                _err(f"N={pt.N} p={pt.p:g} ler_block={pt.ler_block:.4g} ler_slq_mean={pt.ler_slq_mean:.4g}")

        try:
            run_curve(code, run, logicals, on_point)
        except OSError as exc:
            raise CliError(EXIT_IO, f"write failed: {exc.strerror or exc}") from None
    manifest.finished = utc_now()
    try:
        write_summary(summary_dict(manifest, points), summary_path)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {summary_path}: {exc.strerror or exc}") from None
    return EXIT_OK


# threshold


def merged_table(curves: dict[int, list], metric: str) -> tuple[list[str], list[list]]:
    sizes = sorted(curves)
    grid = sorted({pt.p for pts in curves.values() for pt in pts})
    by = {N: {pt.p: getattr(pt, metric) for pt in pts} for N, pts in curves.items()}
    header = ["p"] + [f"N={N}" for N in sizes]
    rows = [[p] + [by[N].get(p) for N in sizes] for p in grid]
    return header, rows


def cmd_threshold(args) -> int:
    if len(args.csv) < 2:
        raise CliError(EXIT_INPUT, "threshold needs at least two curve CSV files")
    curves: dict[int, list] = {}
    for path in args.csv:
        try:
            curve = read_curve_csv(path)
        except OSError as exc:
            raise CliError(EXIT_INPUT, f"cannot read {path}: {exc.strerror or exc}") from None
        except ContainerError as exc:
            raise CliError(EXIT_INPUT, str(exc)) from None
        if curve.N in curves:
            raise CliError(EXIT_INPUT, f"two curves for N={curve.N}")
        curves[curve.N] = curve.points
    try:
        slq = estimate_threshold(curves, "ler_slq_mean")
        block = estimate_threshold(curves, "ler_block")
    except ValueError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None
    header, rows = merged_table(curves, "ler_slq_mean")
    result = {
        "threshold": slq.to_dict(),
        "threshold_block": block.to_dict(),
        "table": {"metric": "ler_slq_mean", "columns": header, "rows": rows},
    }
    print(_dump(result))
    try:
        if args.table:
            with open(args.table, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                w.writerows([["" if v is None else repr(v) for v in row] for row in rows])
        if args.out:
            Path(args.out).write_text(_dump(result) + "\n")
    except OSError as exc:
        raise CliError(EXIT_IO, f"write failed: {exc.strerror or exc}") from None
    if slq.median_p is None:
        _err("no crossing of the ler_slq_mean curves inside the p grid")
        return EXIT_ESTIMATION
    return EXIT_OK


# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _err(message)
        sys.exit(EXIT_INPUT)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="tgre-hgp", description="TGRE hypergraph-product codes: build, validate, simulate.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("build", help="build the level-L product code")
    b.add_argument("--level", type=int, required=True)
    b.add_argument("--rule", help="expansion rule file (default: shipped rule)")
    b.add_argument("--out", help="code container JSON to write")
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("validate", help="validate a code container or a seed")
    v.add_argument("--code", help="code container JSON")
    v.add_argument("--level", type=int, help="seed level (with --rule or --matrix)")
    v.add_argument("--rule", help="expansion rule file (default: shipped rule)")
    v.add_argument("--matrix", help="seed matrix in fixture text format")
    v.add_argument("--pauli", choices=("X", "Z"), default="Z")
    v.add_argument("--cap", type=int, default=DEFAULT_DISTANCE_CAP, help="distance enumeration cap")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("simulate", help="Monte Carlo logical error rates")
    s.add_argument("--code", required=True)
    s.add_argument("--config", help="run configuration JSON; flags override it")
    s.add_argument("--p-grid", help="comma separated physical error rates")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--workers", type=int, help=f"worker processes (default ${WORKERS_ENV} or 1)")
    s.add_argument("--max-iter", type=int)
    s.add_argument("--schedule", choices=SCHEDULES)
    s.add_argument("--damping", type=float)
    s.add_argument("--llr-clip", type=float)
    s.add_argument("--y-reweight", action=argparse.BooleanOptionalAction, default=None)
    s.add_argument("--decimation-rounds", type=int)
    s.add_argument("--decimation-iter", type=int)
    s.add_argument("--out", required=True, help="curve CSV")
    s.add_argument("--summary", help="summary JSON (default: CSV path with suffix .summary.json)")
    s.add_argument("--quiet", action="store_true")
    s.set_defaults(func=cmd_simulate)

    t = sub.add_parser("threshold", help="crossing estimate from curve CSVs")
    t.add_argument("csv", nargs="+")
    t.add_argument("--table", help="write the merged (p, LER per N) table as CSV")
    t.add_argument("--out", help="write the result JSON")
    t.set_defaults(func=cmd_threshold)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        _err(str(exc))
        return exc.code
    except KeyboardInterrupt:
        _err("interrupted")
        return 130


if __name__ == "__main__":
    sys.exit(main())
