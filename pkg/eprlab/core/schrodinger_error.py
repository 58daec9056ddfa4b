# eprlab/core/schrodinger_error.py
"""
Errore nell'inferire P_A² da P_B² (obiezione di Schrödinger sugli interi dispari).

Se X_A e P_A avessero valori simultanei, X_A² + P_A² dovrebbe valere
2n + 1 per qualche intero n. L'errore assoluto ξ sulla stima di P_A²
resta pero' di ordine 1 anche per r grande, quindi il vincolo non e'
verificabile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from eprlab.core.gaussian import Gaussian1D, SqueezeParams, inference_variance_optimal
from eprlab.errors import DomainError


# Momenti del vuoto (ordinamento simmetrico): ⟨P²⟩ = 1/2 e, per Isserlis,
# ⟨P⁴⟩ = 3⟨P²⟩² = 3/4, quindi Var(P²) = 3/4 − 1/4 = 1/2.
VACUUM_VARIANCE = 0.5
VACUUM_P2_VARIANCE = 3.0 * VACUUM_VARIANCE**2 - VACUUM_VARIANCE**2


@dataclass(frozen=True)
class ErrorBudget:
    relative_error_e: float
    absolute_error_xi: float
    p_B_outcome: float


@dataclass(frozen=True)
class HomodyneCheck:
    lhs: float
    rhs: float
    gap: float
    relative_gap: float


# ---------------------------------------------------------------------------
# Errori relativo e assoluto
# ---------------------------------------------------------------------------

def relative_error(p: SqueezeParams, p_B: float) -> float:
    """e = Δ_inf p_A / |p_est|, con p_est = g0·p_B."""
    if p_B == 0:
        raise DomainError("[schrodinger] p_B = 0: la stima p_est e' nulla, errore relativo indefinito")
    p_est = p.g0 * p_B
    if p_est == 0:
        raise DomainError(f"[schrodinger] g0 = 0 (r={p.r}): stima nulla, errore relativo indefinito")
    return math.sqrt(inference_variance_optimal(p)) / abs(p_est)


def absolute_error_xi(p: SqueezeParams, p_B: float | np.ndarray) -> float | np.ndarray:
    """ξ = (√2/√cosh2r)·tanh2r·|p_B|."""
    return math.sqrt(2.0 / p.cosh2r) * p.g0 * np.abs(p_B)


def xi_curve(p: SqueezeParams, p_B_grid: np.ndarray) -> np.ndarray:
    return absolute_error_xi(p, np.asarray(p_B_grid, dtype=float))


def error_budget(p: SqueezeParams, p_B: float) -> ErrorBudget:
    return ErrorBudget(
        relative_error_e=relative_error(p, p_B),
        absolute_error_xi=float(absolute_error_xi(p, p_B)),
        p_B_outcome=p_B,
    )


def halfgauss_mean_abs(sigma: float) -> float:
    """Media di |p| per p ~ N(0, σ²): σ·√(2/π)."""
    if not sigma > 0:
        raise DomainError(f"[schrodinger] sigma deve essere > 0, ricevuto {sigma}")
    return sigma * math.sqrt(2.0 / math.pi)


def large_r_error_limit() -> float:
    """Limite di ξ al valor medio di |p_B| per r → ∞: √(2/π) ≈ 0.8."""
    return math.sqrt(2.0 / math.pi)


def p_distribution(p: SqueezeParams) -> Gaussian1D:
    """Distribuzione misurata di p_B: N(0, cosh2r/2)."""
    return Gaussian1D(mean=0.0, variance=p.sigma_sq)


# ---------------------------------------------------------------------------
# Verifica omodina e residuo su P²
# ---------------------------------------------------------------------------

def homodyne_sum_check(p: SqueezeParams, E: float) -> HomodyneCheck:
    """
    Confronta ⟨X_A² + g0² P_B²⟩ misurato (lhs) con E²(1 + 2n̄) (rhs).
    Il gap E²/(2 cosh 2r) si annulla in senso relativo per r grande.
    """
    if not E > 0:
        raise DomainError(f"[schrodinger] E deve essere > 0, ricevuto {E}")
    c = p.cosh2r
    lhs = E * E * (c - 1.0 / (2.0 * c))
    rhs = E * E * c
    gap = rhs - lhs
    return HomodyneCheck(lhs=lhs, rhs=rhs, gap=gap, relative_gap=gap / rhs)


def p_squared_residual_moments(p: SqueezeParams, g: float) -> Gaussian1D:
    """
    Media e varianza di c1·P_A(0)² − c2·P_B(0)² su vuoti indipendenti.

    c1 = cosh²r − g² sinh²r, c2 = sinh²r − g² cosh²r.
    Media (c1 − c2)/2 = (1 + g²)/2; varianza (c1² + c2²)·Var(P²).
    """
    ch2 = math.cosh(p.r) ** 2
    sh2 = math.sinh(p.r) ** 2
    c1 = ch2 - g * g * sh2
    c2 = sh2 - g * g * ch2
    mean = VACUUM_VARIANCE * (c1 - c2)
    variance = (c1 * c1 + c2 * c2) * VACUUM_P2_VARIANCE
    return Gaussian1D(mean=mean, variance=variance)
