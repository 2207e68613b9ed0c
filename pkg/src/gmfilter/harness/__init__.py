from gmfilter.harness.metrics import McSummary, RunReport, compute_metrics
from gmfilter.harness.mc import run_mc, run_tricyclist_once
from gmfilter.harness.radiolog import (
    MeasurementRecord,
    generate_radio_log,
    read_radio_log,
    write_radio_log,
)
from gmfilter.harness.replay import replay

__all__ = [
    "McSummary",
    "RunReport",
    "compute_metrics",
    "run_mc",
    "run_tricyclist_once",
    "MeasurementRecord",
    "generate_radio_log",
    "read_radio_log",
    "write_radio_log",
    "replay",
]
