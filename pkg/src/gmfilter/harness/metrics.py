"""Run metrics and their serialization.

A RunReport carries the per-step traces plus the scalar metrics derived
from them (final-step position error, time-averaged position error,
mean iteration wall time, mean mixture count); an McSummary aggregates
RunReports over Monte Carlo runs. Aggregates are always recomputable
from the per-run entries they summarize.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from gmfilter.errors import ShapeMismatchError

__all__ = ["RunReport", "McSummary", "compute_metrics"]

METRIC_FIELDS = ("terminate_rmse", "armse", "avg_iteration_time",
                 "median_iteration_time", "avg_num_mixtures")


@dataclass
class RunReport:
    terminate_rmse: float
    armse: float
    avg_iteration_time: float
    median_iteration_time: float
    avg_num_mixtures: float
    errors: np.ndarray
    iteration_times: np.ndarray
    num_mixtures: np.ndarray
    times: np.ndarray
    seed: int = 0
    meas_fingerprint: str = ""
    diagnostics: dict = field(default_factory=dict)
    failed: bool = False
    error_message: str = ""

    def to_dict(self, include_traces: bool = False) -> dict:
        out = {name: getattr(self, name) for name in METRIC_FIELDS}
        out.update({
            "seed": int(self.seed),
            "meas_fingerprint": self.meas_fingerprint,
            "num_steps": int(len(self.errors)),
            "diagnostics": self.diagnostics,
            "failed": self.failed,
            "error_message": self.error_message,
        })
        if include_traces:
            out["errors"] = [float(e) for e in self.errors]
            out["iteration_times"] = [float(t) for t in self.iteration_times]
            out["num_mixtures"] = [float(c) for c in self.num_mixtures]
        return out

    def trace_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["step", "t", "err", "iter_time", "num_mixtures"])
        for k in range(len(self.errors)):
            writer.writerow([
                k + 1,
                repr(float(self.times[k])),
                repr(float(self.errors[k])),
                repr(float(self.iteration_times[k])),
                repr(float(self.num_mixtures[k])),
            ])
        return buf.getvalue()

    @staticmethod
    def failure(seed: int, message: str) -> "RunReport":
        nan = float("nan")
        empty = np.array([])
        return RunReport(nan, nan, nan, nan, nan, empty, empty, empty, empty,
                         seed=seed, failed=True, error_message=message)


def compute_metrics(truth_positions, estimate_positions, iteration_times,
                    num_mixtures, times=None, seed: int = 0,
                    meas_fingerprint: str = "", diagnostics: dict | None = None) -> RunReport:
    """Build a RunReport from per-step traces.

    Position errors are Euclidean norms of the per-step difference;
    mixture counts may carry NaN on steps where no mixture existed and
    are averaged over the steps that have one.
    """
    truth_positions = np.asarray(truth_positions, dtype=float)
    estimate_positions = np.asarray(estimate_positions, dtype=float)
    iteration_times = np.asarray(iteration_times, dtype=float)
    num_mixtures = np.asarray(num_mixtures, dtype=float)
    if truth_positions.shape != estimate_positions.shape:
        raise ShapeMismatchError(
            f"truth {truth_positions.shape} vs estimates {estimate_positions.shape}")
    steps = len(truth_positions)
    if steps < 1:
        raise ShapeMismatchError("traces must have at least one step")
    if len(iteration_times) != steps or len(num_mixtures) != steps:
        raise ShapeMismatchError("timing/mixture traces must match the step count")
    errors = np.linalg.norm(truth_positions - estimate_positions, axis=1)
    if times is None:
        times = np.arange(1, steps + 1, dtype=float)
    with np.errstate(invalid="ignore"):
        avg_mix = float(np.nanmean(num_mixtures)) if np.any(np.isfinite(num_mixtures)) else float("nan")
    return RunReport(
        terminate_rmse=float(errors[-1]),
        armse=float(errors.mean()),
        avg_iteration_time=float(iteration_times.mean()),
        median_iteration_time=float(np.median(iteration_times)),
        avg_num_mixtures=avg_mix,
        errors=errors,
        iteration_times=iteration_times,
        num_mixtures=num_mixtures,
        times=np.asarray(times, dtype=float),
        seed=seed,
        meas_fingerprint=meas_fingerprint,
        diagnostics=diagnostics or {},
    )


@dataclass
class McSummary:
    filter_name: str
    scenario: str
    base_seed: int
    reports: list

    @property
    def seeds(self):
        return [r.seed for r in self.reports]

    def successful(self):
        return [r for r in self.reports if not r.failed]

    def aggregate(self) -> dict:
        ok = self.successful()
        agg = {}
        for name in METRIC_FIELDS:
            values = np.array([getattr(r, name) for r in ok], dtype=float)
            if values.size and np.any(np.isfinite(values)):
                agg[name] = {
                    "mean": float(np.nanmean(values)),
                    "median": float(np.nanmedian(values)),
                    "std": float(np.nanstd(values)),
                }
            else:
                agg[name] = {"mean": math.nan, "median": math.nan, "std": math.nan}
        return agg

    def to_dict(self) -> dict:
        return {
            "filter": self.filter_name,
            "scenario": self.scenario,
            "base_seed": int(self.base_seed),
            "num_runs": len(self.reports),
            "num_failed": sum(r.failed for r in self.reports),
            "seed_manifest": [int(s) for s in self.seeds],
            "aggregates": self.aggregate(),
            "runs": [r.to_dict() for r in self.reports],
        }

    def write_json(self, path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=True) + "\n",
            encoding="utf-8")
