# eprlab/phase_space/rng.py
"""
Stream di numeri casuali counter-based, indicizzati da (seed, path).

Ogni consumatore possiede il proprio stream: il risultato di una
traiettoria non dipende dall'ordine di esecuzione ne' dal numero di thread.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RngStream:
    seed: int
    path: tuple[int, ...] = ()

    def child(self, index: int) -> "RngStream":
        return RngStream(seed=self.seed, path=self.path + (int(index),))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(seq))
