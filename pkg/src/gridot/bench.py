"""DOTmark-style benchmark protocol.

Every two distinct datasets of a category are paired, each pair solved a
fixed number of times, and per-run CPU time recorded; one datapoint per
pair is the mean over repetitions, and a per-category/dimension summary
row carries the mean of those means. Costs must be identical across
repetitions (the solver is deterministic); timing is the only
non-reproducible column.

Layout expected under the dataset directory: one subdirectory per
category, each holding CSV images whose file names contain the grid
extent followed by an underscore (DOTmark convention, e.g.
`data32_1001.csv`).
"""

from __future__ import annotations

import csv
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import DiscreteMeasure, GridShape, ProblemInstance, balance, increment_all
from .io import load_csv_measure
from .solver import solve_multiscale

INCREMENT_ALL = "increment-all"
ALLOW_ZEROS = "allow-zeros"

SUMMARY_MARK = "__mean__"


@dataclass
class BenchConfig:
    dataset_dir: Path
    dims: list[int]
    categories: list[str] | None = None
    repetitions: int = 10
    increment_mode: str = ALLOW_ZEROS
    output_path: Path | None = None
    workers: int | None = None

    def __post_init__(self) -> None:
        self.dataset_dir = Path(self.dataset_dir)
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.increment_mode not in (INCREMENT_ALL, ALLOW_ZEROS):
            raise ValueError(f"unknown increment mode {self.increment_mode!r}")
        if not self.dims:
            raise ValueError("at least one grid dimension required")


@dataclass
class BenchRecord:
    category: str
    dim: int
    a: str
    b: str
    rep_cpu_ms: list[float] = field(default_factory=list)
    rep_wall_ms: list[float] = field(default_factory=list)
    cost: int | None = None
    final_nbhd: int | None = None
    pivots: int | None = None
    error: str | None = None

    @property
    def mean_cpu_ms(self) -> float | None:
        if not self.rep_cpu_ms:
            return None
        return sum(self.rep_cpu_ms) / len(self.rep_cpu_ms)

    @property
    def mean_wall_ms(self) -> float | None:
        if not self.rep_wall_ms:
            return None
        return sum(self.rep_wall_ms) / len(self.rep_wall_ms)


def enumerate_pairs(files: list) -> list[tuple]:
    """All unordered pairs of distinct entries, lexicographic order."""
    if len(files) < 2:
        raise ValueError(f"need at least 2 datasets, got {len(files)}")
    files = sorted(files)
    return [(a, b) for i, a in enumerate(files) for b in files[i + 1 :]]


def category_files(cfg: BenchConfig, category: str, dim: int) -> list[Path]:
    pattern = f"*{dim}_*.csv"
    files = sorted((cfg.dataset_dir / category).glob(pattern))
    if len(files) < 2:
        raise FileNotFoundError(
            f"category {category!r} has {len(files)} files matching {pattern}"
        )
    return files


def resolve_workers(requested: int | None) -> int:
    if requested is not None:
        return max(1, requested)
    env = os.environ.get("GRIDOT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _warm_worker() -> None:
    # force JIT dispatch before anything is timed in this process
    m = DiscreteMeasure(GridShape((2, 2)), np.array([1, 2, 3, 4]))
    solve_multiscale(ProblemInstance(m, m))


def _run_pair(task) -> BenchRecord:
    category, dim, path_a, path_b, reps, increment = task
    rec = BenchRecord(category=category, dim=dim, a=Path(path_a).stem, b=Path(path_b).stem)
    try:
        mu = load_csv_measure(path_a)
        nu = load_csv_measure(path_b)
        if increment:
            mu = increment_all(mu)
            nu = increment_all(nu)
        inst = balance(mu, nu)
        costs = []
        for _rep in range(reps):
            w0 = time.perf_counter()
            c0 = time.process_time()
            sol = solve_multiscale(inst)
            c1 = time.process_time()
            w1 = time.perf_counter()
            rec.rep_cpu_ms.append((c1 - c0) * 1000.0)
            rec.rep_wall_ms.append((w1 - w0) * 1000.0)
            costs.append(sol.cost)
            rec.cost = sol.cost
            rec.final_nbhd = sol.final_neighborhood_size
            rec.pivots = sol.stats.pivots
        if len(set(costs)) != 1:
            raise AssertionError(f"cost varied across repetitions: {sorted(set(costs))}")
    except Exception as exc:  # noqa: BLE001 - failures become records
        rec.rep_cpu_ms = []
        rec.rep_wall_ms = []
        rec.cost = rec.final_nbhd = rec.pivots = None
        rec.error = f"{type(exc).__name__}: {exc}"
    return rec


def run_bench(cfg: BenchConfig) -> list[BenchRecord]:
    """Execute the sweep; returns records and writes the CSV when asked.

    Pairs run on a process pool (GRIDOT_THREADS caps it); repetitions of
    one pair stay on one worker, sequentially. Output order follows the
    deterministic pair enumeration, never completion order.
    """
    if cfg.categories is not None:
        categories = list(cfg.categories)
        for c in categories:
            if not (cfg.dataset_dir / c).is_dir():
                raise FileNotFoundError(f"no category directory {c!r} under {cfg.dataset_dir}")
    else:
        categories = sorted(
            p.name for p in cfg.dataset_dir.iterdir() if p.is_dir()
        )
        if not categories:
            raise FileNotFoundError(f"no category directories under {cfg.dataset_dir}")

    tasks = []
    increment = cfg.increment_mode == INCREMENT_ALL
    for category in categories:
        for dim in cfg.dims:
            for fa, fb in enumerate_pairs(category_files(cfg, category, dim)):
                tasks.append((category, dim, str(fa), str(fb), cfg.repetitions, increment))

    workers = resolve_workers(cfg.workers)
    if workers == 1 or len(tasks) <= 1:
        _warm_worker()
        records = [_run_pair(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_warm_worker) as pool:
            records = list(pool.map(_run_pair, tasks, chunksize=1))

    if cfg.output_path is not None:
        write_bench_csv(cfg.output_path, records, cfg.repetitions)
    return records


def write_bench_csv(path, records: list[BenchRecord], repetitions: int) -> None:
    """Fixed-schema CSV plus one summary row per category/dimension group."""
    header = (
        ["category", "dim", "a", "b"]
        + [f"rep_ms_{i}" for i in range(1, repetitions + 1)]
        + ["mean_ms", "cost", "final_nbhd", "pivots", "mean_wall_ms", "status"]
    )

    def fmt(x: float) -> str:
        return f"{x:.3f}"

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        i = 0
        while i < len(records):
            j = i
            group = []
            while (
                j < len(records)
                and records[j].category == records[i].category
                and records[j].dim == records[i].dim
            ):
                group.append(records[j])
                j += 1
            for r in group:
                reps = [fmt(x) for x in r.rep_cpu_ms]
                reps += [""] * (repetitions - len(reps))
                if r.error is None:
                    tail = [
                        fmt(r.mean_cpu_ms),
                        str(r.cost),
                        str(r.final_nbhd),
                        str(r.pivots),
                        fmt(r.mean_wall_ms),
                        "ok",
                    ]
                else:
                    tail = ["", "", "", "", "", f"error:{r.error}"]
                w.writerow([r.category, str(r.dim), r.a, r.b] + reps + tail)
            means = [r.mean_cpu_ms for r in group if r.error is None]
            wmeans = [r.mean_wall_ms for r in group if r.error is None]
            summary = (
                [group[0].category, str(group[0].dim), SUMMARY_MARK, SUMMARY_MARK]
                + [""] * repetitions
                + [
                    fmt(sum(means) / len(means)) if means else "",
                    "",
                    "",
                    "",
                    fmt(sum(wmeans) / len(wmeans)) if wmeans else "",
                    "summary",
                ]
            )
            w.writerow(summary)
            i = j
