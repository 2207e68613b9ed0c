#!/usr/bin/env python
"""Print a comparison table from the JSON artifacts in a results directory.

Accepts directories produced by either `gmfilter bench-tricyclist`
(*_summary.json) or `gmfilter sim-radio` / `gmfilter replay` (*_report.json).
"""

import json
import sys
from pathlib import Path

COLUMNS = ("terminate_rmse", "armse", "avg_iteration_time", "avg_num_mixtures")


def load_rows(result_dir: Path):
    rows = []
    for path in sorted(result_dir.glob("*_summary.json")):
        data = json.loads(path.read_text(encoding="utf-8"))
        agg = data["aggregates"]
        rows.append((data["filter"],
                     {c: agg[c]["median"] for c in COLUMNS},
                     f"{data['num_failed']}/{data['num_runs']} failed"))
    for path in sorted(result_dir.glob("*_report.json")):
        data = json.loads(path.read_text(encoding="utf-8"))
        rep = data["report"]
        rows.append((data["filter"], {c: rep[c] for c in COLUMNS}, ""))
    return rows


def main() -> int:
    if len(sys.argv) != 2:
        print(f"usage: {sys.argv[0]} RESULTS_DIR", file=sys.stderr)
        return 2
    result_dir = Path(sys.argv[1])
    rows = load_rows(result_dir)
    if not rows:
        print(f"no *_summary.json or *_report.json under {result_dir}", file=sys.stderr)
        return 1
    header = f"{'filter':<8}" + "".join(f"{c:>20}" for c in COLUMNS) + "  notes"
    print(header)
    print("-" * len(header))
    for name, metrics, note in rows:
        cells = "".join(f"{metrics[c]:>20.4g}" for c in COLUMNS)
        print(f"{name:<8}{cells}  {note}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
