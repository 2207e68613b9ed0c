"""Synthetic SNR measurement logs and their CSV format.

A log row is `t,robot_x,robot_y,snr` (UTF-8, '.' decimal, header
included, timestamps strictly increasing). The generator walks a robot
along a waypoint polyline at constant speed, decides line of sight
against an occupancy grid at a fixed sample rate, and draws the SNR
from the matching log-linear mode plus Gaussian sensor noise.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from gmfilter.errors import IngestError
from gmfilter.scenarios.grid import OccupancyGrid, grid_los
from gmfilter.scenarios.radio import D_FLOOR

__all__ = [
    "MeasurementRecord",
    "generate_radio_log",
    "waypoint_positions",
    "write_radio_log",
    "read_radio_log",
]

HEADER = ["t", "robot_x", "robot_y", "snr"]


@dataclass(frozen=True)
class MeasurementRecord:
    t: float
    robot_x: float
    robot_y: float
    snr: float

    def __post_init__(self):
        for name in ("t", "robot_x", "robot_y", "snr"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)}")


def waypoint_positions(waypoints, speed: float, rate_hz: float):
    """Times and positions sampled along the polyline at `rate_hz`.

    The robot moves at constant `speed` from the first waypoint and the
    sampling stops once the path is exhausted (the endpoint itself is
    included).
    """
    pts = np.asarray(waypoints, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] != 2:
        raise ValueError(f"waypoints must be (k, 2) with k >= 1, got {pts.shape}")
    if speed <= 0 or rate_hz <= 0:
        raise ValueError("speed and rate_hz must be > 0")
    seg_lengths = np.linalg.norm(np.diff(pts, axis=0), axis=1) if len(pts) > 1 else np.array([])
    total = float(seg_lengths.sum())
    duration = total / speed
    num = int(math.floor(duration * rate_hz)) + 1
    times = np.arange(num) / rate_hz
    arc = times * speed
    cum = np.concatenate([[0.0], np.cumsum(seg_lengths)])
    positions = np.empty((num, 2))
    for i, s in enumerate(arc):
        s = min(s, total)
        j = int(np.searchsorted(cum, s, side="right") - 1)
        j = min(j, max(len(seg_lengths) - 1, 0))
        if len(seg_lengths) == 0 or seg_lengths[j] == 0:
            positions[i] = pts[j]
        else:
            frac = (s - cum[j]) / seg_lengths[j]
            positions[i] = pts[j] + frac * (pts[j + 1] - pts[j])
    return times, positions


def generate_radio_log(grid: OccupancyGrid, source, waypoints, los_params,
                       nlos_params, rng, speed: float = 2.0, rate_hz: float = 1.0,
                       snr_noise_var: float = 8.0) -> list:
    """Records along the path; each SNR comes from the grid-decided mode."""
    source = np.asarray(source, dtype=float)
    if not grid.contains(source):
        raise ValueError(f"source {tuple(source)} outside grid extent {grid.extent}")
    times, positions = waypoint_positions(waypoints, speed, rate_hz)
    for pos in positions:
        if not grid.contains(pos):
            raise ValueError(f"path point {tuple(pos)} outside grid extent {grid.extent}")
    noise = math.sqrt(snr_noise_var) * rng.standard_normal(len(times))
    records = []
    for i, (t, pos) in enumerate(zip(times, positions)):
        p1, p2 = los_params if grid_los(grid, pos, source) else nlos_params
        d = max(float(np.hypot(*(source - pos))), D_FLOOR)
        snr = p1 * math.log10(d) + p2 + noise[i]
        records.append(MeasurementRecord(float(t), float(pos[0]), float(pos[1]), float(snr)))
    return records


def write_radio_log(records, path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for rec in records:
        writer.writerow([repr(float(v)) for v in (rec.t, rec.robot_x, rec.robot_y, rec.snr)])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_radio_log(path) -> list:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise IngestError(f"{path}: empty log")
    header = [h.strip() for h in lines[0].split(",")]
    if header != HEADER:
        raise IngestError(f"{path}: line 1: expected header {','.join(HEADER)}, "
                          f"got {lines[0]!r}")
    records = []
    last_t = None
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise IngestError(f"{path}: line {lineno}: expected 4 fields, got {len(parts)}")
        try:
            t, rx, ry, snr = (float(p) for p in parts)
        except ValueError as exc:
            raise IngestError(f"{path}: line {lineno}: {exc}") from exc
        if last_t is not None and t <= last_t:
            raise IngestError(
                f"{path}: line {lineno}: timestamps must be strictly increasing "
                f"({t} after {last_t})")
        last_t = t
        try:
            records.append(MeasurementRecord(t, rx, ry, snr))
        except ValueError as exc:
            raise IngestError(f"{path}: line {lineno}: {exc}") from exc
    if not records:
        raise IngestError(f"{path}: log has no records")
    return records
