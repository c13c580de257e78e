"""Compare the generation-time size estimate with emitted CSV bytes over random configs.

Errors are grouped by CSV size so the effect of header lines and short
key text on tiny warehouses is visible.
"""

import argparse
import random
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from conftest import random_small_low  # noqa: E402
from dwbench.emit import emit_data_csv  # noqa: E402
from dwbench.schema import generate_warehouse  # noqa: E402

BUCKETS = [(0, 2_000), (2_000, 20_000), (20_000, 200_000), (200_000, float("inf"))]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--configs", type=int, default=200)
    args = ap.parse_args()

    rows = []
    with tempfile.TemporaryDirectory() as tmp:
        for i in range(args.configs):
            wh, size = generate_warehouse(random_small_low(random.Random(i)), i)
            paths = emit_data_csv(wh, Path(tmp) / str(i))
            actual = sum(p.stat().st_size for p in paths)
            rows.append((actual, (size.total_bytes - actual) / actual))
    outside = sum(abs(e) > 0.2 for _, e in rows)
    print(f"{args.configs} configs, {outside} outside 20% ({outside / args.configs:.1%})")
    print(f"{'CSV bytes':>20}  {'configs':>7}  {'mean error':>10}  {'worst':>8}  {'>20%':>5}")
    for lo, hi in BUCKETS:
        errs = [e for a, e in rows if lo <= a < hi]
        if errs:
            label = f"[{lo:,}, {hi:,})" if hi != float("inf") else f">= {lo:,}"
            worst = max(errs, key=abs)
            print(f"{label:>20}  {len(errs):7d}  {sum(errs) / len(errs):+10.3f}  {worst:+8.3f}  "
                  f"{sum(abs(e) > 0.2 for e in errs):5d}")


if __name__ == "__main__":
    main()
