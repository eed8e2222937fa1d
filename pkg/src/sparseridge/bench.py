"""Benchmark driver over a (n, p, k) x methods grid with repetitions.

Every record is regenerable bit-exactly: the dataset seed for (cell index,
rep) is derived as ``SeedSequence([seed, cell_index, rep])`` and stored on
the record.  All methods within one (cell, rep) consume the identical
dataset.  Wall clock is measured around the solver call only, with a
monotonic clock; a record whose time exceeds the (soft) per-cell budget is
marked timed out, never crashed.  Cells run in a thread pool sized by the
``workers`` argument or the SPARSERIDGE_WORKERS environment variable
(default 1, i.e. serial, which is also the right setting for clean
timings).
"""

from __future__ import annotations

import csv
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import ProblemSpec
from .errors import SparseRidgeError
from .methods import fit
from .synthetic import SyntheticConfig, false_alarm_rate, generate_synthetic

WORKERS_ENV = "SPARSERIDGE_WORKERS"

_CSV_FIELDS = [
    "method", "n", "p", "k", "rep", "seed",
    "objective", "seconds", "false_alarm", "timed_out", "workers", "error",
]


@dataclass(frozen=True)
class BenchRecord:
    method: str
    n: int
    p: int
    k: int
    rep: int
    seed: int
    objective: float
    seconds: float
    false_alarm: float
    timed_out: bool
    workers: int = 1  # co-running cells can inflate wall clock
    error: str | None = None


@dataclass
class BenchReport:
    records: list[BenchRecord] = field(default_factory=list)

    def aggregates(self) -> list[dict]:
        """Mean objective / seconds / false alarm per (method, n, p, k)."""
        groups: dict[tuple, list[BenchRecord]] = {}
        for r in self.records:
            if r.error is not None:
                continue
            groups.setdefault((r.method, r.n, r.p, r.k), []).append(r)
        out = []
        for (method, n, p, k), rs in sorted(groups.items()):
            out.append({
                "method": method, "n": n, "p": p, "k": k, "reps": len(rs),
                "mean_objective": float(np.mean([r.objective for r in rs])),
                "mean_seconds": float(np.mean([r.seconds for r in rs])),
                "mean_false_alarm": float(np.mean([r.false_alarm for r in rs])),
            })
        return out

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=_CSV_FIELDS)
            writer.writeheader()
            for r in self.records:
                writer.writerow({f: getattr(r, f) for f in _CSV_FIELDS})


def dataset_seed(base_seed: int, cell_index: int, rep: int) -> int:
    """The documented derivation of each record's dataset seed."""
    return int(np.random.SeedSequence([base_seed, cell_index, rep]).generate_state(1)[0])


def run_benchmark(
    cells,
    methods,
    reps: int = 10,
    seed: int = 0,
    rho: float = 0.5,
    snr: float = 9.0,
    lam: float = 0.08,
    time_budget: float | None = None,
    workers: int | None = None,
    method_options: dict | None = None,
) -> BenchReport:
    """Run every method on ``reps`` fresh datasets per (n, p, k) cell.

    ``cells`` is an iterable of {"n": ..., "p": ..., "k": ...} mappings.
    ``k`` doubles as the generator's true support size.
    """
    cells = [dict(c) for c in cells]
    methods = list(methods)
    options = method_options or {}
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    workers = max(1, int(workers))

    def run_unit(cell_index: int, rep: int) -> list[BenchRecord]:
        cell = cells[cell_index]
        n, p, k = int(cell["n"]), int(cell["p"]), int(cell["k"])
        ds_seed = dataset_seed(seed, cell_index, rep)
        config = SyntheticConfig(
            n=n, p=p, k_true=k, rho=rho, snr=snr, seed=ds_seed
        )
        data, _, truth, _ = generate_synthetic(config)
        spec = ProblemSpec(data=data, lam=lam, k=k)
        recs = []
        for method in methods:
            t0 = time.perf_counter()
            try:
                est = fit(spec, method, **options.get(method, {}))
                seconds = time.perf_counter() - t0
                recs.append(BenchRecord(
                    method=method, n=n, p=p, k=k, rep=rep, seed=ds_seed,
                    objective=est.objective, seconds=seconds,
                    false_alarm=false_alarm_rate(est.support, truth, k),
                    timed_out=time_budget is not None and seconds > time_budget,
                    workers=workers,
                ))
            except SparseRidgeError as exc:
                seconds = time.perf_counter() - t0
                recs.append(BenchRecord(
                    method=method, n=n, p=p, k=k, rep=rep, seed=ds_seed,
                    objective=float("nan"), seconds=seconds,
                    false_alarm=float("nan"), timed_out=False,
                    workers=workers, error=str(exc),
                ))
        return recs

    units = [(ci, rep) for ci in range(len(cells)) for rep in range(reps)]
    report = BenchReport()
    if workers <= 1:
        results = [run_unit(ci, rep) for ci, rep in units]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda u: run_unit(*u), units))
    for recs in results:  # deterministic (cell, rep) order regardless of pool
        report.records.extend(recs)
    return report
