# eprlab/simulation/bands.py
"""
Classificazione in bande delle traiettorie amplificate.

Ogni traiettoria e' assegnata al centro piu' vicino al tempo t_m; al tempo
finale T i centri sono riscalati di e^{g(T − t_m)}. Il difetto di
predeterminazione e' la frazione di traiettorie che cambiano banda tra t_m e T.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from eprlab.errors import DomainError
from eprlab.simulation.fbsde import RESOLUTION_SIGMAS, TrajectoryEnsemble

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BandReport:
    band_assignments: np.ndarray
    band_centers: tuple[float, ...]
    fractions: tuple[float, ...]
    residual_spread: tuple[float, ...]
    predetermination_defect: float
    unresolved: bool = False

    def __post_init__(self) -> None:
        if abs(sum(self.fractions) - 1.0) > 1e-12:
            raise DomainError(f"[bands] frazioni non normalizzate: {self.fractions}")

    def as_dict(self) -> dict:
        return {
            "band_centers": list(self.band_centers),
            "fractions": list(self.fractions),
            "residual_spread": list(self.residual_spread),
            "predetermination_defect": self.predetermination_defect,
            "unresolved": self.unresolved,
        }


def _nearest(values: np.ndarray, centers: np.ndarray) -> np.ndarray:
    return np.argmin(np.abs(values[:, None] - centers[None, :]), axis=1)


def _default_variable(e: TrajectoryEnsemble) -> str:
    for name in ("x", "x_A", "p_A"):
        if name in e.paths and e.direction_tags[name] == "backward":
            return name
    raise DomainError(f"[bands] nessuna variabile amplificata tra {e.variables}")


def classify_bands(
    e: TrajectoryEnsemble,
    t_m: float,
    centers: Sequence[float],
    variable: str | None = None,
) -> BandReport:
    if e.n_traj == 0:
        raise DomainError("[bands] ensemble vuoto")
    c = np.asarray(centers, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise DomainError("[bands] serve almeno un centro")
    if np.unique(c).size != c.size:
        raise DomainError(f"[bands] centri non distinti: {list(centers)}")

    name = variable or _default_variable(e)
    k = e.time_index(t_m)
    values = e.paths[name][k]
    labels = _nearest(values, c)

    counts = np.bincount(labels, minlength=c.size)
    fractions = tuple(float(x) for x in counts / labels.size)
    spread = tuple(
        float(np.std(values[labels == j])) if counts[j] > 1 else 0.0 for j in range(c.size)
    )

    defect = 0.0
    t_end = e.times[-1]
    if t_end > e.times[k]:
        scale = math.exp(e.config.g * (t_end - e.times[k]))
        labels_end = _nearest(e.paths[name][-1], c * scale)
        defect = float(np.mean(labels_end != labels))

    unresolved = bool(e.metadata.get("unresolved", False))
    if c.size > 1:
        gap = float(np.min(np.diff(np.sort(c))))
        if gap < RESOLUTION_SIGMAS * max(spread):
            unresolved = True
    if unresolved:
        logger.warning("[bands] bande non risolte a t_m=%.4g (centri %s)", t_m, list(centers))

    return BandReport(
        band_assignments=labels,
        band_centers=tuple(float(x) for x in c),
        fractions=fractions,
        residual_spread=spread,
        predetermination_defect=defect,
        unresolved=unresolved,
    )
