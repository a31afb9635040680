"""Configured batch sweeps with an on-disk report cache.

Reports are cached under a name that encodes every input, so a cached file
is the report :func:`run_batch` would return. Wall time lives in a sidecar
file to keep the report itself deterministic.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .code_model import TannerCode
from .experiment import BatchReport, export_report, import_report, run_batch

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BatchConfig:
    k0: int
    trials: int
    master_seed: int
    formulation: str = "full"

    def stem(self, fingerprint: str) -> str:
        return f"k{self.k0}_t{self.trials}_s{self.master_seed}_{self.formulation}_{fingerprint}"


@dataclass(frozen=True)
class SweepConfig:
    """k0 = 20 and 22 at full size, every other k0 in the range at ``other_trials``."""

    master_seed: int = 2024
    k0_range: tuple[int, int] = (16, 30)
    main: tuple[tuple[int, int], ...] = ((20, 5000), (22, 2000))
    other_trials: int = 250
    formulation: str = "full"
    batches: tuple[BatchConfig, ...] = field(init=False)

    def __post_init__(self) -> None:
        main = dict(self.main)
        lo, hi = self.k0_range
        ks = sorted(main) + [k for k in range(lo, hi + 1) if k not in main]
        cfgs = tuple(BatchConfig(k, main.get(k, self.other_trials), self.master_seed, self.formulation) for k in ks)
        object.__setattr__(self, "batches", cfgs)

    @property
    def total_trials(self) -> int:
        return sum(b.trials for b in self.batches)


ACCEPTANCE_SWEEP = SweepConfig()


def cached_batch(code: TannerCode, cfg: BatchConfig, cache_dir: str | Path, workers: int = 1,
                 d_frac: Fraction | None = None, compute: bool = True) -> tuple[BatchReport, float] | None:
    """Load the report for ``cfg`` from ``cache_dir`` or run and store it.

    Returns (report, wall seconds of the run that produced it), or None when
    the report is missing and ``compute`` is false.
    """
    cache = Path(cache_dir)
    stem = cfg.stem(code.fingerprint())
    path, meta_path = cache / f"{stem}.json", cache / f"{stem}.meta.json"
    if path.exists() and meta_path.exists():
        return import_report(path), json.loads(meta_path.read_text())["wall_seconds"]
    if not compute:
        return None
    log.info("running batch %s", stem)
    t0 = time.perf_counter()
    report = run_batch(code, cfg.k0, cfg.trials, cfg.master_seed, workers=workers,
                       formulation=cfg.formulation, d_frac=d_frac)
    wall = time.perf_counter() - t0
    export_report(report, path)
    export_report(report, cache / f"{stem}.csv")
    meta = {"wall_seconds": round(wall, 1), "workers": workers, "d_frac": None if d_frac is None else str(d_frac)}
    meta_path.write_text(json.dumps(meta, indent=1) + "\n")
    return report, wall
