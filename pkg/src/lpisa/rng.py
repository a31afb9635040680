"""Keyed random streams: one independent Philox generator per (seed, trial, step).

Streams never depend on the order in which trials run, so batches give the
same answers under any worker count.
"""

from __future__ import annotations

import numpy as np


def stream(master_seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(master_seed, spawn_key=key)))


class TrialRng:
    """Per-trial source. Step 0 draws the initiation; step l >= 1 serves ISA step l."""

    def __init__(self, master_seed: int, trial: int = 0) -> None:
        self.master_seed = int(master_seed)
        self.trial = int(trial)

    def step(self, index: int) -> np.random.Generator:
        return stream(self.master_seed, self.trial, index)

    def __repr__(self) -> str:
        return f"TrialRng(master_seed={self.master_seed}, trial={self.trial})"
