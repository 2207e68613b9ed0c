"""Monte Carlo driver for the park-navigation benchmark.

Each run derives its seed as base_seed XOR run-index, simulates one
truth trajectory plus measurement sequence from the scenario substream,
and drives one filter from an independent filter substream, so the
measurement sequence presented to every filter kind is identical for a
given run seed. Runs execute independently (optionally in parallel);
a failed run is recorded and never aborts the batch.
"""

from __future__ import annotations

import hashlib
import time

import numpy as np

from gmfilter.filters.base import make_filter
from gmfilter.filters.unscented import UtParams
from gmfilter.harness.metrics import McSummary, RunReport, compute_metrics
from gmfilter.rng import RngStream
from gmfilter.scenarios.tricyclist import TricyclistConfig, TricyclistModel

__all__ = ["derive_run_seed", "build_filter", "run_tricyclist_once", "run_mc"]

_MASK64 = (1 << 64) - 1


def derive_run_seed(base_seed: int, run_index: int) -> int:
    return (int(base_seed) ^ int(run_index)) & _MASK64


def build_filter(kind: str, model, initial_mean, initial_cov, options):
    """Map shared FilterOptions onto the kind-specific filter config."""
    common = dict(num_samples=options.num_samples,
                  initial_mean=tuple(np.asarray(initial_mean, dtype=float)),
                  initial_cov=tuple(np.asarray(initial_cov, dtype=float)))
    if kind == "gmf":
        return make_filter("gmf", model, bandwidth_exponent=options.bandwidth_exponent,
                           mi_bounding=options.mi_bounding,
                           joseph_update=options.joseph_update,
                           ess_resample_fraction=options.gmf_ess_fraction, **common)
    if kind == "pf":
        return make_filter("pf", model, ess_resample_fraction=options.pf_ess_fraction,
                           **common)
    if kind in ("pgm-ds", "pgm-du"):
        ut = UtParams(options.ut_alpha, options.ut_beta, options.ut_kappa)
        return make_filter(kind, model, eps=options.eps, min_pts=options.min_pts,
                           ut=ut, covariance_update=options.covariance_update,
                           **common)
    raise ValueError(f"unknown filter kind {kind!r}")


def measurement_fingerprint(measurements) -> str:
    digest = hashlib.sha256()
    for z in measurements:
        if z is None:
            digest.update(b"-")
        else:
            digest.update(b"+")
            digest.update(np.ascontiguousarray(np.asarray(z, dtype=float)).tobytes())
    return digest.hexdigest()


def run_tricyclist_once(scenario_config: TricyclistConfig, filter_kind: str,
                        options, run_seed: int) -> RunReport:
    model = TricyclistModel(scenario_config)
    root = RngStream(run_seed)
    truth, contexts, measurements = model.simulate(root.substream("scenario"))
    filt = build_filter(filter_kind, model, scenario_config.initial_mean,
                        scenario_config.initial_cov_diag, options)
    filt_rng = root.substream("filter")
    filt.initialize(filt_rng)

    estimates = []
    timings = []
    counts = []
    diagnostics = {"weight_collapse_steps": 0, "fallback_steps": 0}
    dt = scenario_config.dt
    for ctx, z in zip(contexts, measurements):
        start = time.perf_counter()
        diag = filt.step(dt, z, ctx, filt_rng)
        timings.append(time.perf_counter() - start)
        if diag.get("weight_collapse"):
            diagnostics["weight_collapse_steps"] += 1
        if diag.get("fallback"):
            diagnostics["fallback_steps"] += 1
        mean, _ = filt.estimate()
        estimates.append(mean[:2])
        counts.append(filt.num_components())
    times = dt * np.arange(1, len(contexts) + 1)
    return compute_metrics(truth[1:, :2], np.asarray(estimates), timings, counts,
                           times=times, seed=run_seed,
                           meas_fingerprint=measurement_fingerprint(measurements),
                           diagnostics=diagnostics)


def _safe_run(scenario_config, filter_kind, options, run_seed) -> RunReport:
    try:
        return run_tricyclist_once(scenario_config, filter_kind, options, run_seed)
    except Exception as exc:
        return RunReport.failure(run_seed, f"{type(exc).__name__}: {exc}")


def run_mc(scenario_config: TricyclistConfig, filter_kind: str, options,
           num_runs: int, base_seed: int, jobs: int = 1) -> McSummary:
    """num_runs independent runs; aggregates live in the returned McSummary."""
    if num_runs < 1:
        raise ValueError(f"num_runs must be >= 1, got {num_runs}")
    seeds = [derive_run_seed(base_seed, i) for i in range(num_runs)]
    if jobs == 1 or num_runs == 1:
        reports = [_safe_run(scenario_config, filter_kind, options, s) for s in seeds]
    else:
        from joblib import Parallel, delayed
        n_jobs = jobs if jobs and jobs > 0 else -1
        reports = Parallel(n_jobs=n_jobs)(
            delayed(_safe_run)(scenario_config, filter_kind, options, s) for s in seeds)
    return McSummary(filter_name=filter_kind, scenario="tricyclist",
                     base_seed=base_seed, reports=reports)
