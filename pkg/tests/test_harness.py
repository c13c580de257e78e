import statistics
import sys

import pytest

from dwbench.harness import (
    BindingError,
    BindingKind,
    CallableExecutor,
    ExecutorBinding,
    LatencySchedule,
    ReportSummary,
    Status,
    aggregate,
    compare,
    harness_overhead_ms,
    read_report_csv,
    run,
    run_statements,
    write_report,
)

STATEMENTS = [(n, "EXTRACTION", "SELECT T.A FROM T") for n in range(1, 51)]


def dry(fixed=5.0, jitter=0.0, seed=0, per_query=None):
    return ExecutorBinding(BindingKind.DRY_RUN, schedule=LatencySchedule(fixed, jitter, seed, per_query or {}))


@pytest.fixture
def workload_file(tmp_path):
    p = tmp_path / "workload.sql"
    p.write_text("".join(f"-- Q{n} [{tag}]\n{sql};\n" for n, tag, sql in STATEMENTS))
    return p


def test_constant_latency(workload_file):
    report = run(workload_file, dry(5.0))
    assert report.replications == 10
    assert all(q.mean_ms == 5.0 and q.stddev_ms == 0.0 and len(q.samples_ms) == 10 for q in report.per_query)
    assert report.total_mean_ms == pytest.approx(250.0)
    assert report.total_stddev_ms == 0.0


def test_warmup_is_not_measured():
    calls = []
    executor = CallableExecutor(calls.append)
    report = run_statements(STATEMENTS[:3], executor, replications=2, warmup=3)
    assert len(calls) == 15
    assert all(len(q.samples_ms) == 2 for q in report.per_query)


def test_population_stddev():
    report = aggregate([[1.0, 3.0]], ["EXTRACTION"])
    assert report.per_query[0].stddev_ms == 1.0
    assert report.per_query[0].status is Status.UNSTABLE


def test_reaggregation_is_pure(workload_file):
    report = run(workload_file, dry(4.0, 1.0, seed=3), replications=6)
    again = aggregate([q.samples_ms for q in report.per_query], [q.class_tag for q in report.per_query])
    assert [(q.mean_ms, q.stddev_ms) for q in again.per_query] == [(q.mean_ms, q.stddev_ms) for q in report.per_query]


def test_variability_flag(workload_file):
    stable = run(workload_file, dry(10.0, 0.5, seed=1))
    assert all(q.status is Status.OK for q in stable.per_query)
    shaky = run(workload_file, dry(10.0, 9.0, seed=1), variability_threshold=0.05)
    assert any(q.status is Status.UNSTABLE for q in shaky.per_query)


def test_binding_misconfiguration():
    with pytest.raises(BindingError):
        run_binding = ExecutorBinding(BindingKind.DRY_RUN)
        run_binding.validate()
    with pytest.raises(BindingError):
        ExecutorBinding(BindingKind.SUBPROCESS, command_template="sqlite3 db").validate()


def test_bad_arguments(workload_file):
    with pytest.raises(ValueError):
        run(workload_file, dry(), replications=0)
    with pytest.raises(FileNotFoundError, match="nowhere.sql"):
        run(workload_file.parent / "nowhere.sql", dry())


def test_subprocess_binding(workload_file):
    ok = ExecutorBinding(BindingKind.SUBPROCESS, command_template=f"{sys.executable} -c pass {{statement}}")
    report = run(workload_file, ok, replications=1)
    assert all(q.status is Status.OK and q.mean_ms > 0 for q in report.per_query)


def test_subprocess_failure_and_timeout(tmp_path):
    p = tmp_path / "w.sql"
    p.write_text("-- Q1 [EXTRACTION]\nSELECT T.A FROM T;\n")
    failing = ExecutorBinding(BindingKind.SUBPROCESS,
                              command_template=f"{sys.executable} -c \"import sys; sys.exit('boom')\" {{file}}")
    report = run(p, failing, replications=2)
    assert report.per_query[0].status is Status.FAILED and "boom" in report.per_query[0].message
    slow = ExecutorBinding(BindingKind.SUBPROCESS, timeout_s=0.2,
                           command_template=f"{sys.executable} -c \"import time; time.sleep(5)\" {{file}}")
    assert run(p, slow, replications=1).per_query[0].status is Status.TIMEOUT


def test_report_files(tmp_path, workload_file):
    report = run(workload_file, dry(2.0), replications=3)
    paths = write_report(report, tmp_path / "r")
    header = paths["report.csv"].read_text().splitlines()[0]
    assert header == "query_index,class_tag,mean_ms,stddev_ms,status"
    assert len(paths["samples.csv"].read_text().splitlines()) == 1 + 50 * 3
    summary = read_report_csv(paths["report.csv"])
    assert summary.means_ms == [2.0] * 50 and summary.total_ms == 100.0


def test_compare_gain():
    a = ReportSummary([1, 2], ["X", "X"], [60.0, 40.0])
    b = ReportSummary([1, 2], ["X", "X"], [51.0, 34.0])
    table = compare([a, b], ["index-free", "indexed"])[0]
    assert table.total.gain_pct == pytest.approx(15.0)
    assert [r.delta_ms for r in table.rows] == [9.0, 6.0, 15.0]
    assert "TOTAL" in table.render() and table.to_csv().startswith("query,")


def test_compare_identical_and_mismatched():
    a = ReportSummary([1, 2], ["X", "X"], [3.0, 4.0])
    assert all(r.gain_pct == 0 for r in compare([a, a])[0].rows)
    with pytest.raises(ValueError, match="different workloads"):
        compare([a, ReportSummary([1], ["X"], [3.0])])


def test_harness_overhead_below_one_ms():
    assert harness_overhead_ms(500, 4) < 1.0
