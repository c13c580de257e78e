"""Replicated workload execution and response-time reporting.

A run executes the whole workload ``warmup`` times unmeasured, then
``replications`` times measured, sequentially. Per-query and per-workload
statistics use the population standard deviation.
"""

from __future__ import annotations

import csv
import enum
import io
import os
import statistics
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

from .emit import read_workload_sql
from .query import parse_check
from .rng import SeededRng

DEFAULT_REPLICATIONS = 10
DEFAULT_VARIABILITY_THRESHOLD = 0.1


class BindingError(ValueError):
    pass


class Status(enum.Enum):
    OK = "OK"
    UNSTABLE = "UNSTABLE"
    FAILED = "FAILED"
    TIMEOUT = "TIMEOUT"


@dataclass
class Execution:
    elapsed_ms: float
    status: Status = Status.OK
    message: str = ""


class Executor(Protocol):
    def execute(self, index: int, statement: str) -> Execution: ...


class BindingKind(enum.Enum):
    DRY_RUN = "dry-run"
    SUBPROCESS = "subprocess"


@dataclass
class LatencySchedule:
    """Synthetic latencies: ``fixed_ms`` per query, optionally with seeded jitter.

    With ``jitter_ms > 0`` each sample is ``fixed_ms + U(-jitter_ms, jitter_ms)``
    drawn from a stream keyed by ``seed``.
    """

    fixed_ms: float = 0.0
    jitter_ms: float = 0.0
    seed: int = 0
    per_query_ms: dict[int, float] = field(default_factory=dict)


@dataclass
class ExecutorBinding:
    kind: BindingKind
    command_template: str | None = None
    timeout_s: float | None = None
    schedule: LatencySchedule | None = None

    def validate(self) -> None:
        if self.kind is BindingKind.DRY_RUN and self.schedule is None:
            raise BindingError("dry-run binding requires a latency schedule")
        if self.kind is BindingKind.SUBPROCESS:
            if not self.command_template:
                raise BindingError("subprocess binding requires a command template")
            if "{file}" not in self.command_template and "{statement}" not in self.command_template:
                raise BindingError("command template must contain {file} or {statement}")


class DryRunExecutor:
    """Reports scheduled latencies without touching any engine."""

    def __init__(self, schedule: LatencySchedule):
        self.schedule = schedule
        self._rng = SeededRng(schedule.seed, "dry-run-latency")

    def execute(self, index: int, statement: str) -> Execution:
        base = self.schedule.per_query_ms.get(index, self.schedule.fixed_ms)
        if self.schedule.jitter_ms:
            base += (2.0 * self._rng.random() - 1.0) * self.schedule.jitter_ms
        return Execution(max(0.0, base))


class SubprocessExecutor:
    """Runs a client command per statement and times the whole invocation.

    ``{statement}`` is replaced by the shell-quoted statement text; ``{file}``
    by the path of a temporary file holding the ``;``-terminated statement.
    The template runs through the shell, so redirections are allowed.
    """

    def __init__(self, template: str, timeout_s: float | None = None):
        self.template = template
        self.timeout_s = timeout_s

    def execute(self, index: int, statement: str) -> Execution:
        import shlex

        tmp = None
        try:
            command = self.template
            if "{file}" in command:
                fd, tmp = tempfile.mkstemp(suffix=".sql", prefix="dwbench_")
                with os.fdopen(fd, "w", encoding="utf-8") as fh:
                    fh.write(statement + ";\n")
                command = command.replace("{file}", shlex.quote(tmp))
            command = command.replace("{statement}", shlex.quote(statement + ";"))
            start = time.perf_counter()
            try:
                proc = subprocess.run(command, shell=True, capture_output=True, text=True, timeout=self.timeout_s)
            except subprocess.TimeoutExpired:
                return Execution((time.perf_counter() - start) * 1000.0, Status.TIMEOUT, f"timed out after {self.timeout_s}s")
            elapsed = (time.perf_counter() - start) * 1000.0
            if proc.returncode != 0:
                return Execution(elapsed, Status.FAILED, (proc.stderr or proc.stdout).strip())
            return Execution(elapsed)
        finally:
            if tmp is not None:
                os.unlink(tmp)


class CallableExecutor:
    """Times an in-process callable, e.g. a DB-API cursor execute."""

    def __init__(self, fn: Callable[[str], object]):
        self.fn = fn

    def execute(self, index: int, statement: str) -> Execution:
        start = time.perf_counter()
        try:
            self.fn(statement)
        except Exception as exc:  # engine errors are data here
            return Execution((time.perf_counter() - start) * 1000.0, Status.FAILED, str(exc))
        return Execution((time.perf_counter() - start) * 1000.0)


def make_executor(binding: ExecutorBinding) -> Executor:
    binding.validate()
    if binding.kind is BindingKind.DRY_RUN:
        return DryRunExecutor(binding.schedule)
    return SubprocessExecutor(binding.command_template, binding.timeout_s)


@dataclass
class QueryStats:
    index: int
    class_tag: str
    samples_ms: list[float]
    mean_ms: float
    stddev_ms: float
    status: Status
    message: str = ""


@dataclass
class RunReport:
    per_query: list[QueryStats]
    totals_ms: list[float]
    total_mean_ms: float
    total_stddev_ms: float
    replications: int
    environment: str = ""

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["query_index", "class_tag", "mean_ms", "stddev_ms", "status"])
        for q in self.per_query:
            w.writerow([q.index, q.class_tag, repr(q.mean_ms), repr(q.stddev_ms), q.status.value])
        return buf.getvalue()

    def samples_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["query_index", "class_tag", "replication", "elapsed_ms"])
        for q in self.per_query:
            for r, s in enumerate(q.samples_ms, start=1):
                w.writerow([q.index, q.class_tag, r, repr(s)])
        return buf.getvalue()

    def render(self) -> str:
        lines = [
            f"replications: {self.replications}",
            f"workload total: mean {self.total_mean_ms:.3f} ms, stddev {self.total_stddev_ms:.3f} ms",
        ]
        if self.environment:
            lines.append(f"environment: {self.environment}")
        lines.append(f"{'query':>6}  {'class':<12}  {'mean_ms':>12}  {'stddev_ms':>12}  status")
        for q in self.per_query:
            line = f"{q.index:>6}  {q.class_tag:<12}  {q.mean_ms:>12.3f}  {q.stddev_ms:>12.3f}  {q.status.value}"
            if q.message:
                line += f"  {q.message.splitlines()[0][:80]}"
            lines.append(line)
        return "\n".join(lines) + "\n"


def aggregate(
    samples: list[list[float]],
    tags: list[str],
    indices: list[int] | None = None,
    statuses: list[tuple[Status, str]] | None = None,
    variability_threshold: float = DEFAULT_VARIABILITY_THRESHOLD,
    environment: str = "",
) -> RunReport:
    """Build a report from raw samples: ``samples[q][r]`` is query q in replication r."""
    if not samples:
        raise ValueError("no queries")
    replications = len(samples[0])
    if replications < 1 or any(len(s) != replications for s in samples):
        raise ValueError("every query needs the same, positive number of samples")
    indices = indices or list(range(1, len(samples) + 1))
    statuses = statuses or [(Status.OK, "")] * len(samples)
    per_query = []
    for idx, tag, s, (status, message) in zip(indices, tags, samples, statuses):
        mean = statistics.fmean(s)
        std = statistics.pstdev(s, mu=mean)
        if status is Status.OK and mean > 0 and std / mean > variability_threshold:
            status = Status.UNSTABLE
        per_query.append(QueryStats(idx, tag, list(s), mean, std, status, message))
    totals = [sum(samples[q][r] for q in range(len(samples))) for r in range(replications)]
    total_mean = statistics.fmean(totals)
    return RunReport(per_query, totals, total_mean, statistics.pstdev(totals, mu=total_mean), replications, environment)


def load_workload(path: str | Path) -> list[tuple[int, str, str]]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"workload file not found: {path}")
    entries = read_workload_sql(path)
    for n, _, sql in entries:
        try:
            parse_check(sql)
        except ValueError as exc:
            raise ValueError(f"{path}: Q{n} does not parse: {exc}") from exc
    return [(n, tag.value, sql) for n, tag, sql in entries]


def run_statements(
    statements: list[tuple[int, str, str]],
    executor: Executor,
    replications: int = DEFAULT_REPLICATIONS,
    warmup: int = 0,
    variability_threshold: float = DEFAULT_VARIABILITY_THRESHOLD,
    environment: str = "",
) -> RunReport:
    if replications < 1:
        raise ValueError("replications must be >= 1")
    if warmup < 0:
        raise ValueError("warmup must be >= 0")
    for _ in range(warmup):
        for n, _, sql in statements:
            executor.execute(n, sql)
    samples = [[0.0] * replications for _ in statements]
    statuses: list[tuple[Status, str]] = [(Status.OK, "")] * len(statements)
    for r in range(replications):
        for q, (n, _, sql) in enumerate(statements):
            result = executor.execute(n, sql)
            samples[q][r] = result.elapsed_ms
            if result.status is not Status.OK and statuses[q][0] is Status.OK:
                statuses[q] = (result.status, result.message)
    return aggregate(
        samples,
        [tag for _, tag, _ in statements],
        [n for n, _, _ in statements],
        statuses,
        variability_threshold,
        environment,
    )


def run(
    workload_file: str | Path,
    binding: ExecutorBinding,
    replications: int = DEFAULT_REPLICATIONS,
    warmup: int = 0,
    variability_threshold: float = DEFAULT_VARIABILITY_THRESHOLD,
    environment: str = "",
) -> RunReport:
    executor = make_executor(binding)
    return run_statements(load_workload(workload_file), executor, replications, warmup, variability_threshold, environment)


def write_report(report: RunReport, out: str | Path) -> dict[str, Path]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"report.csv": out / "report.csv", "report.txt": out / "report.txt", "samples.csv": out / "samples.csv"}
    paths["report.csv"].write_text(report.to_csv(), encoding="utf-8", newline="\n")
    paths["report.txt"].write_text(report.render(), encoding="utf-8", newline="\n")
    paths["samples.csv"].write_text(report.samples_csv(), encoding="utf-8", newline="\n")
    return paths


@dataclass
class ReportSummary:
    """What a comparison needs: per-query means and the workload total."""

    indices: list[int]
    tags: list[str]
    means_ms: list[float]

    @property
    def total_ms(self) -> float:
        return sum(self.means_ms)

    @classmethod
    def from_report(cls, report: RunReport) -> "ReportSummary":
        return cls(
            [q.index for q in report.per_query],
            [q.class_tag for q in report.per_query],
            [q.mean_ms for q in report.per_query],
        )


def read_report_csv(path: str | Path) -> ReportSummary:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"report not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return ReportSummary(
        [int(r["query_index"]) for r in rows], [r["class_tag"] for r in rows], [float(r["mean_ms"]) for r in rows]
    )


def percent_gain(baseline: float, other: float) -> float:
    """(baseline - other) / baseline, in percent; 0 when the baseline is 0."""
    if baseline == 0:
        return 0.0
    return (baseline - other) / baseline * 100.0


@dataclass
class ComparisonRow:
    query: str
    baseline_ms: float
    other_ms: float
    delta_ms: float
    gain_pct: float


@dataclass
class ComparisonTable:
    baseline_label: str
    other_label: str
    rows: list[ComparisonRow]

    @property
    def total(self) -> ComparisonRow:
        return self.rows[-1]

    def render(self) -> str:
        head = f"{'query':>8}  {self.baseline_label[:14]:>14}  {self.other_label[:14]:>14}  {'delta_ms':>12}  {'gain_%':>8}"
        lines = [head]
        for r in self.rows:
            lines.append(f"{r.query:>8}  {r.baseline_ms:>14.3f}  {r.other_ms:>14.3f}  {r.delta_ms:>12.3f}  {r.gain_pct:>8.1f}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["query", "baseline_label", "other_label", "baseline_ms", "other_ms", "delta_ms", "gain_pct"])
        for r in self.rows:
            w.writerow([r.query, self.baseline_label, self.other_label, repr(r.baseline_ms), repr(r.other_ms), repr(r.delta_ms), repr(r.gain_pct)])
        return buf.getvalue()


def compare(reports: list[RunReport | ReportSummary], labels: list[str] | None = None) -> list[ComparisonTable]:
    """Compare every report against the first one, per query and in total."""
    if len(reports) < 2:
        raise ValueError("need at least two reports to compare")
    summaries = [r if isinstance(r, ReportSummary) else ReportSummary.from_report(r) for r in reports]
    labels = labels or [f"run{i}" for i in range(1, len(reports) + 1)]
    if len(labels) != len(reports):
        raise ValueError("one label per report")
    base = summaries[0]
    tables = []
    for label, other in zip(labels[1:], summaries[1:]):
        if len(other.means_ms) != len(base.means_ms):
            raise ValueError(
                f"reports cover different workloads: {len(base.means_ms)} vs {len(other.means_ms)} queries"
            )
        rows = [
            ComparisonRow(f"Q{i}", a, b, a - b, percent_gain(a, b))
            for i, a, b in zip(base.indices, base.means_ms, other.means_ms)
        ]
        a, b = base.total_ms, other.total_ms
        rows.append(ComparisonRow("TOTAL", a, b, a - b, percent_gain(a, b)))
        tables.append(ComparisonTable(labels[0], label, rows))
    return tables


def harness_overhead_ms(queries: int = 1000, replications: int = 10) -> float:
    """Wall-clock bookkeeping cost per query execution with a zero-latency dry run."""
    statements = [(n, "EXTRACTION", "SELECT T.A FROM T") for n in range(1, queries + 1)]
    executor = DryRunExecutor(LatencySchedule(0.0))
    start = time.perf_counter()
    run_statements(statements, executor, replications)
    return (time.perf_counter() - start) * 1000.0 / (queries * replications)
