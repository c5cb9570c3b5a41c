"""Parameter sweeps with replications and decorrelated seeds.

A sweep runs one scenario across a list of values for a single key, with N
replications per point.  Replication seeds derive from (base seed, point
index, replication index) through a seed-splitting sequence, so no two runs
share a random stream and results are independent of execution order or
worker count.  Per-point samples are merged across replications in
replication order; a failing point is recorded and the sweep continues.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import stats
from .engine import run, summarize
from .scenario import Scenario, replication_seed, scenario_to_text


@dataclass
class SweepPoint:
    index: int
    key: str
    value: object
    samples: np.ndarray
    summaries: list
    error: str | None = None


@dataclass
class SweepResult:
    base: Scenario
    key: str
    points: list = field(default_factory=list)


def _run_one(args) -> tuple[int, int, object]:
    scenario, point_index, rep = args
    result = run(scenario)
    return point_index, rep, (result.samples(), summarize(result))


def _point_scenario(base: Scenario, key: str, value, point_index: int, rep: int) -> Scenario:
    seed = replication_seed(base.seed, point_index, rep)
    return replace(base, **{key: value, "seed": seed})


def sweep(base: Scenario, key: str, values, replications: int = 1,
          workers: int = 1) -> SweepResult:
    """Run ``base`` for each value of ``key`` with seeded replications."""
    values = list(values)
    if not values:
        raise ValueError("sweep axis must hold at least one value")
    if replications < 1:
        raise ValueError("replications must be >= 1")

    tasks = []
    for p, value in enumerate(values):
        for rep in range(replications):
            tasks.append((_point_scenario(base, key, value, p, rep), p, rep))

    outcomes: dict[tuple[int, int], object] = {}
    errors: dict[int, str] = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [(t[1], t[2], pool.submit(_run_one, t)) for t in tasks]
            for p, rep, fut in futures:
                try:
                    outcomes[(p, rep)] = fut.result()[2]
                except Exception as exc:
                    errors[p] = f"replication {rep}: {exc}"
    else:
        for t in tasks:
            p, rep = t[1], t[2]
            try:
                outcomes[(p, rep)] = _run_one(t)[2]
            except Exception as exc:
                errors[p] = f"replication {rep}: {exc}"

    result = SweepResult(base=base, key=key)
    for p, value in enumerate(values):
        if p in errors:
            result.points.append(SweepPoint(index=p, key=key, value=value,
                                            samples=np.empty(0), summaries=[],
                                            error=errors[p]))
            continue
        merged = []
        summaries = []
        for rep in range(replications):
            samples, summary = outcomes[(p, rep)]
            merged.append(samples)
            summaries.append(summary)
        result.points.append(SweepPoint(index=p, key=key, value=value,
                                        samples=np.concatenate(merged), summaries=summaries))
    return result


def write_sweep_result(result: SweepResult, outdir) -> None:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "scenario.resolved").write_text(scenario_to_text(result.base))
    collection = {"axis": result.key, "points": []}
    for point in result.points:
        entry = {"index": point.index, "value": point.value, "error": point.error,
                 "n_samples": int(point.samples.size)}
        if point.error is None and point.samples.size:
            for q in result.base.quantile_targets:
                import warnings
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    est = stats.outage_latency(point.samples, q)
                entry[f"outage_{q:g}_ms"] = est.value_ms
                entry[f"outage_{q:g}_ci_ms"] = [est.ci_low_ms, est.ci_high_ms]
            xs, exceed = stats.ccdf_table(point.samples)
            with open(out / f"point_{point.index:02d}_ccdf.csv", "w") as f:
                f.write("latency_ms,exceedance\n")
                for x, e in zip(xs, exceed):
                    f.write(f"{x!r},{e!r}\n")
        collection["points"].append(entry)
    (out / "sweep_summary.json").write_text(json.dumps(collection, indent=2, sort_keys=True))
