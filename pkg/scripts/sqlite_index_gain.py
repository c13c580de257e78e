"""Time the extraction queries of a workload in SQLite with and without
foreign-key indexes, then print the percentage gain table.

Restrictions are switched off: random referential literals rarely match a
stored descriptor, so restricted queries finish in microseconds.

    python3 scripts/sqlite_index_gain.py [--replications 10]
"""

import argparse
import sqlite3
import tempfile
from pathlib import Path

from dwbench.emit import emit_ddl, emit_insert_sql, render_workload_sql
from dwbench.harness import CallableExecutor, compare, run_statements
from dwbench.params import LowLevelParams, WorkloadParams
from dwbench.rng import SeededRng
from dwbench.schema import generate_warehouse
from dwbench.workload import QueryClass, generate_workload


def load(wh, inserts: Path, indexed: bool) -> sqlite3.Connection:
    con = sqlite3.connect(":memory:")
    con.executescript(emit_ddl(wh, "sqlite"))
    con.executescript(inserts.read_text())
    if indexed:
        for ft in wh.fact_tables:
            for fk in ft.foreign_keys:
                con.execute(f"CREATE INDEX IX_{ft.table_name}_{fk.name} ON {ft.table_name} ({fk.name})")
    con.execute("ANALYZE")
    return con


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--replications", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    low = LowLevelParams(NB_FT=1, NB_DIM=(3,), TOT_NB_DIM=3, NB_MEAS=(2,), DENSITY=(0.2,),
                         NB_LEVELS=(2, 2, 2), NB_ATT=((2, 2),) * 3, HHLEVEL_SIZE=(10,) * 3, DIM_SFACTOR=(5,) * 3)
    wh, _ = generate_warehouse(low, args.seed)
    wl = generate_workload(wh, WorkloadParams(NB_Q=30, PROB_OLAP=0.0, AVG_NB_RESTR=0), SeededRng(args.seed, "workload"))
    statements = [s for s in render_workload_sql(wl).split(";\n") if s.strip()]
    entries = [(n, t.value, s.split("\n", 1)[1]) for n, (s, t) in enumerate(zip(statements, wl.class_tags), 1)
               if t is QueryClass.EXTRACTION]

    with tempfile.TemporaryDirectory() as tmp:
        inserts = emit_insert_sql(wh, Path(tmp) / "inserts.sql")
        reports = []
        for indexed in (False, True):
            con = load(wh, inserts, indexed)
            executor = CallableExecutor(lambda sql: con.execute(sql).fetchall())
            reports.append(run_statements(entries, executor, args.replications, warmup=1,
                                          environment=f"sqlite {sqlite3.sqlite_version}"))
    print(compare(reports, ["no index", "fk index"])[0].render(), end="")


if __name__ == "__main__":
    main()
