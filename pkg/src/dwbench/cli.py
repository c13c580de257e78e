"""Command-line entry point: ``generate``, ``run``, ``compare``, ``validate``.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 guard refusal.
Parameter flags mirror configuration keys lowercased with dashes
(``--avg-nb-dim``, ``--hhlevel-size``); values given on the command line
override the ``--config`` file, which overrides built-in defaults.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import __version__
from .config import ALL_KEYS, ConfigError, RunConfig, build_run_config, read_file
from .emit import DIALECTS, MANIFEST_FILE, WORKLOAD_FILE, emit_all, verify_manifest
from .harness import (
    BindingError,
    BindingKind,
    ExecutorBinding,
    LatencySchedule,
    compare,
    read_report_csv,
    run,
    write_report,
)
from .model import Warehouse, check_referential_integrity
from .schema import GuardError, SizeReport, expected_fact_rows, generate_warehouse, resolve_low_level
from .rng import SeededRng
from .workload import Workload, generate_workload

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_GUARD = 3


def _flag(key: str) -> str:
    return "--" + key.lower().replace("_", "-")


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="KEY = value configuration file (a manifest works too)")
    group = p.add_argument_group("parameters", "any configuration key; overrides the config file")
    for key in sorted(ALL_KEYS):
        if key == "SEED":
            continue
        group.add_argument(_flag(key), dest=f"param_{key}", metavar="VALUE")
    p.add_argument("--seed", dest="param_SEED", metavar="SEED", help="decimal or 0x-prefixed hex")


def load_config(args: argparse.Namespace) -> RunConfig:
    raw: dict[str, str] = {}
    if args.config is not None:
        if not args.config.exists():
            raise FileNotFoundError(f"config file not found: {args.config}")
        raw.update(read_file(args.config).values)
    for key in ALL_KEYS:
        value = getattr(args, f"param_{key}", None)
        if value is not None:
            raw[key] = value
    cfg = build_run_config(raw)
    if cfg.dialect not in DIALECTS:
        raise ConfigError(f"unknown dialect {cfg.dialect!r}; known: {', '.join(DIALECTS)}")
    return cfg


def generate_artifacts(cfg: RunConfig) -> tuple[Warehouse, SizeReport, Workload]:
    wh, size = generate_warehouse(cfg.params, cfg.seed, cfg.settings)
    workload = generate_workload(wh, cfg.workload, SeededRng(cfg.seed, "workload"), cfg.spread)
    return wh, size, workload


def _print_expected(cfg: RunConfig) -> None:
    low = resolve_low_level(cfg.params, cfg.seed, cfg.settings)
    for f, rows in enumerate(expected_fact_rows(low), start=1):
        print(f"FT{f}: expected {rows:,.0f} rows over dimensions {', '.join(map(str, low.FT_DIMS[f - 1]))}")


def cmd_generate(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    _print_expected(cfg)
    start = time.perf_counter()
    wh, size, workload = generate_artifacts(cfg)
    paths = emit_all(wh, workload, size, args.out, cfg)
    print(size.summary())
    print(f"{len(workload)} queries, {len(paths)} files written to {args.out} in {time.perf_counter() - start:.2f} s")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    if args.artifacts is not None and args.config is None:
        args.config = args.artifacts / MANIFEST_FILE
    cfg = load_config(args)
    _print_expected(cfg)
    print("configuration OK")
    if args.artifacts is None:
        return EXIT_OK
    out = args.artifacts
    if not (out / MANIFEST_FILE).exists():
        raise FileNotFoundError(f"no manifest in {out}")
    bad = verify_manifest(out)
    for rel in bad:
        print(f"checksum mismatch: {rel}", file=sys.stderr)
    return EXIT_VALIDATION if bad else EXIT_OK


def cmd_integrity(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    wh, _, _ = generate_artifacts(cfg)
    violations = check_referential_integrity(wh)
    for v in violations[:20]:
        print(v, file=sys.stderr)
    print(f"{len(violations)} referential integrity violations")
    return EXIT_VALIDATION if violations else EXIT_OK


def _binding(args: argparse.Namespace) -> ExecutorBinding:
    if args.binding == "dry-run":
        schedule = LatencySchedule(fixed_ms=args.latency_ms, jitter_ms=args.jitter_ms, seed=args.latency_seed)
        return ExecutorBinding(BindingKind.DRY_RUN, schedule=schedule)
    return ExecutorBinding(BindingKind.SUBPROCESS, command_template=args.command, timeout_s=args.timeout)


def cmd_run(args: argparse.Namespace) -> int:
    workload_file = args.workload or args.out / WORKLOAD_FILE
    if not workload_file.exists():
        raise FileNotFoundError(f"workload file not found: {workload_file}")
    binding = _binding(args)
    note = args.environment or f"binding={args.binding}"
    report = run(workload_file, binding, args.replications, args.warmup, args.threshold, note)
    report_dir = args.report_dir or args.out
    write_report(report, report_dir)
    print(report.render(), end="")
    print(f"report written to {report_dir}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    summaries = [read_report_csv(p) for p in args.reports]
    labels = args.labels.split(",") if args.labels else [str(p.parent) if p.name == "report.csv" else p.stem for p in args.reports]
    tables = compare(summaries, labels)
    for t in tables:
        print(t.render(), end="")
    if args.csv is not None:
        args.csv.parent.mkdir(parents=True, exist_ok=True)
        args.csv.write_text("".join(t.to_csv() for t in tables), encoding="utf-8", newline="\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dwbench", description="Data warehouse benchmark generator and runner.")
    parser.add_argument("--version", action="version", version=f"dwbench {__version__}")
    sub = parser.add_subparsers(dest="command_name", required=True)

    g = sub.add_parser("generate", help="generate warehouse, workload and manifest")
    _add_param_flags(g)
    g.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: out)")
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("validate", help="check a configuration, optionally verify emitted artifacts")
    _add_param_flags(v)
    v.add_argument("--artifacts", type=Path, help="output directory whose manifest checksums to verify")
    v.set_defaults(func=cmd_validate)

    i = sub.add_parser("integrity", help="generate in memory and check referential integrity")
    _add_param_flags(i)
    i.set_defaults(func=cmd_integrity)

    r = sub.add_parser("run", help="execute workload.sql and write report files")
    r.add_argument("--out", type=Path, default=Path("out"), help="artifact directory holding workload.sql")
    r.add_argument("--workload", type=Path, help="explicit workload file (default: OUT/workload.sql)")
    r.add_argument("--report-dir", type=Path, help="where to write report files (default: OUT)")
    r.add_argument("--binding", choices=[b.value for b in BindingKind], default="dry-run")
    r.add_argument("--command", help="client command template with {file} or {statement}")
    r.add_argument("--timeout", type=float, help="per-statement timeout in seconds")
    r.add_argument("--replications", type=int, default=10)
    r.add_argument("--warmup", type=int, default=0)
    r.add_argument("--threshold", type=float, default=0.1, help="stddev/mean above which a query is UNSTABLE")
    r.add_argument("--latency-ms", type=float, default=1.0, help="dry-run latency per query")
    r.add_argument("--jitter-ms", type=float, default=0.0, help="dry-run uniform jitter half-width")
    r.add_argument("--latency-seed", type=int, default=0)
    r.add_argument("--environment", help="free-text note stored in the report")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compare", help="percentage gains of later reports over the first")
    c.add_argument("reports", nargs="+", type=Path, help="report.csv files")
    c.add_argument("--labels", help="comma-separated labels, one per report")
    c.add_argument("--csv", type=Path, help="also write the comparison as CSV")
    c.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GuardError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, BindingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
