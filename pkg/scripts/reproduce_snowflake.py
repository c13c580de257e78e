"""Generate the small snowflake warehouse and print its shape.

    python3 scripts/reproduce_snowflake.py [--out out/snowflake]
"""

import argparse
import statistics
import time
from pathlib import Path

from dwbench.cli import generate_artifacts
from dwbench.config import build_run_config, read_file
from dwbench.emit import emit_all

CONF = Path(__file__).resolve().parents[1] / "configs" / "small_snowflake.conf"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", type=Path, default=CONF)
    ap.add_argument("--out", type=Path, default=Path("out/snowflake"))
    args = ap.parse_args()

    cfg = build_run_config(read_file(args.config).values)
    start = time.perf_counter()
    wh, size, workload = generate_artifacts(cfg)
    emit_all(wh, workload, size, args.out, cfg)
    elapsed = time.perf_counter() - start

    sizes = [lv.cardinality for lv in wh.levels()]
    print(f"fact tables: {len(wh.fact_tables)}, rows: {[ft.cardinality for ft in wh.fact_tables]}")
    print(f"dimensions: {len(wh.dimensions)}, levels per dimension: {[d.nb_levels for d in wh.dimensions]}")
    print(f"level sizes: {sizes} (mean {statistics.fmean(sizes):.2f})")
    print(f"estimated size: {size.warehouse_megabytes:.3f} MB")
    csv_bytes = sum(p.stat().st_size for p in (args.out / "data").glob("*.csv"))
    print(f"CSV size: {csv_bytes / 2**20:.3f} MB")
    print(f"queries: {len(workload)}, elapsed {elapsed:.2f} s, artifacts in {args.out}")


if __name__ == "__main__":
    main()
