# eprlab/phase_space/q_function.py
"""
Rappresentazioni Q (Husimi) e Wigner del TMSS.

Forma canonica della Q nelle variabili (x, p), con η = tanh r:

    Q = (1 − η²)/(4π²) · exp(−¼(x_A−x_B)²(1+η) − ¼(p_A+p_B)²(1+η)
                             −¼(x_A+x_B)²(1−η) − ¼(p_A−p_B)²(1−η))

Nelle variabili complesse α = (x_A + i p_A)/√2, β = (x_B + i p_B)/√2 il
prefattore e' 1/π²: il fattore 1/4 e' lo jacobiano d²α d²β = dx_A dp_A dx_B dp_B / 4.

La Q fattorizza in settore x × settore p. Ogni varianza Q supera quella
simmetrica (Wigner) di 1/2: il livello di vuoto nascosto.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Literal

import numpy as np

from eprlab.core.gaussian import Gaussian2D, SqueezeParams
from eprlab.errors import DomainError
from eprlab.phase_space.rng import RngStream

Sector = Literal["x", "p"]

# eccesso di varianza Q rispetto all'ordinamento simmetrico, per quadratura
Q_EXCESS = 0.5


@dataclass(frozen=True)
class PhasePoint:
    x_A: float
    p_A: float
    x_B: float
    p_B: float

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value):
                raise DomainError(f"[phase_space] {f.name} non finito: {value}")


@dataclass(frozen=True)
class SectorGaussian:
    variance_sum: float
    variance_diff: float
    sector: Sector

    def __post_init__(self) -> None:
        if not (self.variance_sum > 0 and self.variance_diff > 0):
            raise DomainError(
                f"[phase_space] varianze di settore non positive: "
                f"sum={self.variance_sum}, diff={self.variance_diff}"
            )
        if self.sector not in ("x", "p"):
            raise DomainError(f"[phase_space] settore sconosciuto: {self.sector}")


# ---------------------------------------------------------------------------
# Q function
# ---------------------------------------------------------------------------

def _q_factor(u_minus: np.ndarray, u_plus: np.ndarray, eta: float) -> np.ndarray:
    # u_minus e' la combinazione squeezed del settore, u_plus quella antisqueezed
    norm = math.sqrt(1.0 - eta * eta) / (2.0 * math.pi)
    return norm * np.exp(-0.25 * u_minus**2 * (1.0 + eta) - 0.25 * u_plus**2 * (1.0 - eta))


def q_density_x(x_A, x_B, p: SqueezeParams):
    """Fattore del settore x, normalizzato su (x_A, x_B)."""
    x_A, x_B = np.asarray(x_A, dtype=float), np.asarray(x_B, dtype=float)
    return _q_factor(x_A - x_B, x_A + x_B, p.eta)


def q_density_p(p_A, p_B, p: SqueezeParams):
    """Fattore del settore p, normalizzato su (p_A, p_B)."""
    p_A, p_B = np.asarray(p_A, dtype=float), np.asarray(p_B, dtype=float)
    return _q_factor(p_A + p_B, p_A - p_B, p.eta)


def q_density_arrays(x_A, p_A, x_B, p_B, p: SqueezeParams) -> np.ndarray:
    return q_density_x(x_A, x_B, p) * q_density_p(p_A, p_B, p)


def q_density(pt: PhasePoint, p: SqueezeParams) -> float:
    return float(q_density_arrays(pt.x_A, pt.p_A, pt.x_B, pt.p_B, p))


def q_sector_variances(p: SqueezeParams, gT: float, sector: Sector = "x") -> SectorGaussian:
    """
    Varianze Q di u_A ± u_B al tempo T con entrambe le quadrature del settore
    amplificate di e^{gT}. Settore x: diff squeezed, sum antisqueezed;
    settore p: ruoli scambiati.
    """
    if gT < 0:
        raise DomainError(f"[phase_space] gT deve essere >= 0, ricevuto {gT}")
    amp = math.exp(2.0 * gT)
    squeezed = 1.0 + amp * math.exp(-2.0 * p.r)
    antisqueezed = 1.0 + amp * math.exp(2.0 * p.r)
    if sector == "x":
        return SectorGaussian(variance_sum=antisqueezed, variance_diff=squeezed, sector="x")
    if sector == "p":
        return SectorGaussian(variance_sum=squeezed, variance_diff=antisqueezed, sector="p")
    raise DomainError(f"[phase_space] settore sconosciuto: {sector}")


def sample_q(p: SqueezeParams, gT: float, sector: Sector, n: int, stream: RngStream) -> np.ndarray:
    """n estrazioni iid di (u_+, u_−) dalla gaussiana di settore; colonne [u_+, u_−]."""
    if n < 1:
        raise DomainError(f"[phase_space] n deve essere >= 1, ricevuto {n}")
    sg = q_sector_variances(p, gT, sector)
    z = stream.generator().standard_normal((n, 2))
    z[:, 0] *= math.sqrt(sg.variance_sum)
    z[:, 1] *= math.sqrt(sg.variance_diff)
    return z


def q_single_quadrature_variance(p: SqueezeParams) -> float:
    return p.sigma_sq + Q_EXCESS


# ---------------------------------------------------------------------------
# Wigner function
# ---------------------------------------------------------------------------

def wigner_density_arrays(x_A, p_A, x_B, p_B, p: SqueezeParams) -> np.ndarray:
    x_A, p_A, x_B, p_B = (np.asarray(v, dtype=float) for v in (x_A, p_A, x_B, p_B))
    e2r = math.exp(2.0 * p.r)
    squeezed = (x_A - x_B) ** 2 + (p_A + p_B) ** 2
    antisqueezed = (x_A + x_B) ** 2 + (p_A - p_B) ** 2
    return np.exp(-0.5 * e2r * squeezed - 0.5 / e2r * antisqueezed) / math.pi**2


def wigner_density(pt: PhasePoint, p: SqueezeParams) -> float:
    return float(wigner_density_arrays(pt.x_A, pt.p_A, pt.x_B, pt.p_B, p))


def wigner_marginal_xA_pB(p: SqueezeParams) -> Gaussian2D:
    """P(x_A, p_B): prodotto di due gaussiane indipendenti N(0, cosh2r/2)."""
    v = p.sigma_sq
    return Gaussian2D(means=(0.0, 0.0), cov=((v, 0.0), (0.0, v)))


def wigner_marginal_density(x_A, p_B, p: SqueezeParams):
    c = p.cosh2r
    x_A, p_B = np.asarray(x_A, dtype=float), np.asarray(p_B, dtype=float)
    return np.exp(-(x_A**2 + p_B**2) / c) / (math.pi * c)
