# eprlab/criterion/wmr.py
"""
Criterio di incompletezza sotto weak macroscopic realism (wMR).

σ_real limita la predeterminazione della quadratura misurata direttamente,
σ_inf l'errore di inferenza sulla quadratura coniugata. Il criterio e'
soddisfatto se σ_real · σ_inf < 1/2 (disuguaglianza stretta).

Contiene:
- probabilita' delle regioni −/0/+ e momenti troncati (forme chiuse con erf)
- bound misurabile U_B sulla varianza di ciascuno stato wMR
- stime di σ_real e σ_inf per il modello ad amplificazione con bin
- stimatore Monte Carlo condizionato di σ_inf
- fattibilita' dei casi I/II e lemma di Cauchy–Schwarz sulle miscele
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import erf, erfc

from eprlab.core.gaussian import SqueezeParams, inference_variance_optimal
from eprlab.errors import DomainError, EstimationError, PreconditionError, UnboundedBoundError

logger = logging.getLogger(__name__)

INCOMPLETENESS_BOUND = 0.5
HALF_GAUSSIAN_FACTOR = 1.0 - 2.0 / math.pi
# fattore arrotondato (0.36σ²) usato per il confronto rapido col limite della semi-gaussiana
ROUNDED_HALF_GAUSSIAN_FACTOR = 0.36
# sotto questa soglia P+ e' trattata come nulla e U_B come illimitato
TAIL_UNDERFLOW = 1e-15

MethodTag = Literal["two_region", "binned_amplified", "conditional_mc"]


# ---------------------------------------------------------------------------
# Tipi
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BinningScheme:
    bin_width_Delta: float
    overlap_delta: float
    threshold_x1: float
    gain_G: float
    bin_width_p: float = 0.0

    def __post_init__(self) -> None:
        if not self.bin_width_Delta > 0:
            raise DomainError(f"[wmr] Δ deve essere > 0, ricevuto {self.bin_width_Delta}")
        if not 0 <= self.overlap_delta < self.bin_width_Delta:
            raise DomainError(
                f"[wmr] serve 0 <= δ < Δ, ricevuto δ={self.overlap_delta}, Δ={self.bin_width_Delta}"
            )
        if self.threshold_x1 < 0:
            raise DomainError(f"[wmr] x1 deve essere >= 0, ricevuto {self.threshold_x1}")
        if self.gain_G < 1:
            raise DomainError(f"[wmr] G deve essere >= 1, ricevuto {self.gain_G}")
        if self.bin_width_p < 0:
            raise DomainError(f"[wmr] Δ_p deve essere >= 0, ricevuto {self.bin_width_p}")

    @property
    def distinctness_level(self) -> float:
        return 2.0 * self.overlap_delta


class CriterionReport(BaseModel):
    """Esito del criterio; serializzato come oggetto JSON piatto."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    sigma_real: float = Field(ge=0)
    sigma_inf: float = Field(ge=0)
    product: float
    satisfied: bool
    distinctness_level: float = Field(ge=0)
    method_tag: MethodTag

    @model_validator(mode="after")
    def _check_consistency(self) -> "CriterionReport":
        expected = self.sigma_real * self.sigma_inf
        if not math.isclose(self.product, expected, rel_tol=1e-12, abs_tol=1e-300):
            raise ValueError(f"product={self.product} diverso da sigma_real*sigma_inf={expected}")
        if self.satisfied != (self.product < INCOMPLETENESS_BOUND):
            raise ValueError(f"satisfied={self.satisfied} incoerente con product={self.product}")
        return self


@dataclass(frozen=True)
class RegionProbabilities:
    p_minus: float
    p_zero: float
    p_plus: float

    def __post_init__(self) -> None:
        for name in ("p_minus", "p_zero", "p_plus"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"[wmr] {name}={v} fuori da [0, 1]")
        total = self.p_minus + self.p_zero + self.p_plus
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"[wmr] probabilita' delle regioni non normalizzate: somma={total}")


@dataclass(frozen=True)
class FeasibilityReport:
    lhs: float
    rhs: float
    feasible: bool
    case_one_bound: float
    case_one_feasible: bool


# ---------------------------------------------------------------------------
# Regioni e momenti troncati
# ---------------------------------------------------------------------------

def _check_x1(x1: float) -> None:
    if not x1 >= 0:
        raise DomainError(f"[wmr] x1 deve essere >= 0, ricevuto {x1}")


def region_probabilities(p: SqueezeParams, x1: float) -> RegionProbabilities:
    _check_x1(x1)
    z = x1 / (math.sqrt(2.0) * math.sqrt(p.sigma_sq))
    p_plus = 0.5 * float(erfc(z))
    p_zero = float(erf(z))
    return RegionProbabilities(p_minus=p_plus, p_zero=p_zero, p_plus=p_plus)


def truncated_moments(p: SqueezeParams, x1: float) -> tuple[float, float]:
    """(S1, S2) = (∫_{x1}^∞ x P(x) dx, ∫_{x1}^∞ x² P(x) dx) per P = N(0, σ_X²)."""
    _check_x1(x1)
    sigma = math.sqrt(p.sigma_sq)
    gauss = math.exp(-x1 * x1 / (2.0 * p.sigma_sq))
    root2pi = math.sqrt(2.0 * math.pi)
    s1 = sigma * gauss / root2pi
    s2 = sigma / (2.0 * root2pi) * (
        2.0 * x1 * gauss + root2pi * sigma * float(erfc(x1 / (math.sqrt(2.0) * sigma)))
    )
    return s1, s2


def half_gaussian_variance(sigma: float) -> float:
    if not sigma > 0:
        raise DomainError(f"[wmr] sigma deve essere > 0, ricevuto {sigma}")
    return sigma * sigma * HALF_GAUSSIAN_FACTOR


def rounded_half_gaussian_variance(sigma: float) -> float:
    if not sigma > 0:
        raise DomainError(f"[wmr] sigma deve essere > 0, ricevuto {sigma}")
    return ROUNDED_HALF_GAUSSIAN_FACTOR * sigma * sigma


# ---------------------------------------------------------------------------
# Bound U_B
# ---------------------------------------------------------------------------

def upper_bound_from_moments(p_tail: float, p_zero: float, s1: float, s2: float, x1: float) -> float:
    """
    Bound sulla varianza di uno stato che vive su X >= −x1 e coincide con
    P(X)/p_tail oltre x1, con massa p_zero nella regione centrale.
    """
    if p_tail < TAIL_UNDERFLOW:
        raise UnboundedBoundError(
            f"[wmr] probabilita' di coda {p_tail:.3e} numericamente nulla (x1={x1}): bound illimitato"
        )
    m1 = s1 / p_tail
    return s2 / p_tail - m1 * m1 + x1 * x1 * p_zero + 2.0 * x1 * p_zero * m1


def upper_bound_UB(p: SqueezeParams, x1: float) -> float:
    """Bound misurabile U_B, identico per I=1 e I=2 sulla gaussiana simmetrica."""
    regions = region_probabilities(p, x1)
    s1, s2 = truncated_moments(p, x1)
    return upper_bound_from_moments(regions.p_plus, regions.p_zero, s1, s2, x1)


def upper_bound_empirical(samples: Sequence[float] | np.ndarray, x1: float) -> float:
    """
    U_B valutato dalla distribuzione misurata: coda + per I=2, coda − per I=1
    (riflessa), restituisce il maggiore dei due.
    """
    _check_x1(x1)
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise EstimationError("[wmr] nessun campione per stimare U_B")
    n = float(x.size)
    p_zero = float(np.count_nonzero(np.abs(x) <= x1)) / n
    bounds = []
    for tail in (x[x > x1], -x[x < -x1]):
        p_tail = tail.size / n
        s1 = float(tail.sum()) / n
        s2 = float(np.square(tail).sum()) / n
        bounds.append(upper_bound_from_moments(p_tail, p_zero, s1, s2, x1))
    return max(bounds)


# ---------------------------------------------------------------------------
# σ_real e σ_inf
# ---------------------------------------------------------------------------

def sigma_real_two_region(p: SqueezeParams, x1: float) -> float:
    # ΣP_I·U_B = U_B perche' il bound e' simmetrico
    return math.sqrt(upper_bound_UB(p, x1))


def sigma_real_binned(b: BinningScheme) -> float:
    """(Δ + 2δ)/(2G): radice del bound sulla varianza entro un bin allargato."""
    return (b.bin_width_Delta + 2.0 * b.overlap_delta) / (2.0 * b.gain_G)


def sigma_inf_amplified_exact(p: SqueezeParams, Delta_p: float, G: float) -> float:
    return math.sqrt(inference_variance_optimal(p)) + 2.0 * Delta_p / G


def sigma_inf_amplified(p: SqueezeParams, Delta_p: float, G: float, ideal: bool = False) -> float:
    """
    ideal: 1/√(2 cosh 2r). Altrimenti il bound e^{−r} + 2Δ_p/G, valido per e^r ≫ e^{−r}.
    """
    if G < 1:
        raise DomainError(f"[wmr] G deve essere >= 1, ricevuto {G}")
    if Delta_p < 0:
        raise DomainError(f"[wmr] Δ_p deve essere >= 0, ricevuto {Delta_p}")
    if ideal:
        return math.sqrt(inference_variance_optimal(p))
    bounded = math.exp(-p.r) + 2.0 * Delta_p / G
    if p.r < 1:
        logger.warning(
            "[wmr] r=%.3f < 1: il bound e^{-r}+2Δp/G e' fuori dal regime e^r >> e^{-r}; "
            "alternativa esatta 1/sqrt(2cosh2r)+2Δp/G = %.6g",
            p.r,
            sigma_inf_amplified_exact(p, Delta_p, G),
        )
    return bounded


def sigma_inf_conditional(
    samples: np.ndarray,
    bin_width: float,
    min_count: int = 3,
    max_dropped_fraction: float = 1e-3,
) -> float:
    """
    √(Σ_J P_J σ²_{p_A|J}) dai campioni (p_A, p_B), con bin J su p_B.

    σ²_{p_A|J} e' la varianza residua di p_A dopo aver tolto la dipendenza
    lineare da p_B dentro il bin (ddof=2), cosi' la larghezza del bin non
    entra nella stima; se p_B e' costante nel bin si usa la varianza semplice.

    I bin con meno di `min_count` campioni vengono scartati solo se la loro
    massa totale non supera `max_dropped_fraction`; altrimenti EstimationError.
    """
    if not bin_width > 0:
        raise DomainError(f"[wmr] bin_width deve essere > 0, ricevuto {bin_width}")
    if min_count < 3:
        raise DomainError(f"[wmr] min_count deve essere >= 3 per la retta nel bin, ricevuto {min_count}")
    data = np.asarray(samples, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise DomainError(f"[wmr] attesi campioni (p_A, p_B) di forma (n, 2), ricevuto {data.shape}")
    n = data.shape[0]
    if n < min_count:
        raise EstimationError(
            f"[wmr] servono almeno {min_count} campioni, ricevuti {n}",
            {"n_samples": n},
        )

    p_A, p_B = data[:, 0], data[:, 1]
    labels = np.floor(p_B / bin_width).astype(np.int64)
    order = np.argsort(labels, kind="stable")
    labels, p_A, p_B = labels[order], p_A[order], p_B[order]
    bins, starts, counts = np.unique(labels, return_index=True, return_counts=True)

    sparse = counts < min_count
    dropped = int(counts[sparse].sum())
    dropped_fraction = dropped / n
    if dropped_fraction > max_dropped_fraction:
        raise EstimationError(
            f"[wmr] troppi campioni in bin sparsi: {dropped}/{n} "
            f"(> {max_dropped_fraction:.1e}); aumentare i campioni o bin_width",
            {
                "n_samples": n,
                "n_bins": int(bins.size),
                "sparse_bins": bins[sparse].tolist(),
                "dropped_fraction": dropped_fraction,
            },
        )
    if dropped:
        logger.info("[wmr] scartati %d campioni in %d bin sparsi", dropped, int(sparse.sum()))

    kept = n - dropped
    total = 0.0
    for start, count in zip(starts[~sparse], counts[~sparse]):
        total += (count / kept) * _within_bin_variance(p_A[start : start + count], p_B[start : start + count])
    return math.sqrt(total)


def _within_bin_variance(p_A: np.ndarray, p_B: np.ndarray) -> float:
    """Varianza residua di p_A dopo la retta ai minimi quadrati su p_B nel bin."""
    if np.ptp(p_B) == 0.0:
        return float(np.var(p_A, ddof=1))
    x = p_B - p_B.mean()
    y = p_A - p_A.mean()
    residual = y - (float(x @ y) / float(x @ x)) * x
    return float(residual @ residual) / (p_A.size - 2)


# ---------------------------------------------------------------------------
# Criterio, fattibilita', lemma
# ---------------------------------------------------------------------------

def incompleteness_check(
    sigma_real: float,
    sigma_inf: float,
    distinctness: float,
    method_tag: MethodTag = "two_region",
) -> CriterionReport:
    product = sigma_real * sigma_inf
    return CriterionReport(
        sigma_real=sigma_real,
        sigma_inf=sigma_inf,
        product=product,
        satisfied=product < INCOMPLETENESS_BOUND,
        distinctness_level=distinctness,
        method_tag=method_tag,
    )


def feasibility_case(
    p: SqueezeParams,
    G: float,
    Delta: float,
    Delta_p: float,
    delta: float,
) -> FeasibilityReport:
    """lhs = (Δ+2δ)(e^{−r} + 2Δ_p/G) < G; riporta anche Δ+2δ < G·e^r."""
    for name, value in (("G", G), ("Delta", Delta), ("Delta_p", Delta_p), ("delta", delta)):
        if value < 0:
            raise DomainError(f"[wmr] {name} deve essere >= 0, ricevuto {value}")
    if not G > 0:
        raise DomainError(f"[wmr] G deve essere > 0, ricevuto {G}")
    width = Delta + 2.0 * delta
    lhs = width * (math.exp(-p.r) + 2.0 * Delta_p / G)
    case_one_bound = G * math.exp(p.r)
    return FeasibilityReport(
        lhs=lhs,
        rhs=G,
        feasible=lhs < G,
        case_one_bound=case_one_bound,
        case_one_feasible=width < case_one_bound,
    )


def _validate_mixture(mixture: Sequence[tuple[float, float, float]]) -> np.ndarray:
    arr = np.asarray(mixture, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] == 0:
        raise PreconditionError("[wmr] la miscela deve essere una lista non vuota di (peso, σx, σp)")
    w, sx, sp = arr[:, 0], arr[:, 1], arr[:, 2]
    if np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-9:
        raise PreconditionError(f"[wmr] pesi non validi (>= 0, somma 1): somma={float(w.sum())}")
    if np.any(sx < 0) or np.any(sp < 0):
        raise PreconditionError("[wmr] deviazioni standard negative nella miscela")
    bad = np.flatnonzero(sx * sp < 0.5 * (1.0 - 1e-12))
    if bad.size:
        k = int(bad[0])
        raise PreconditionError(
            f"[wmr] componente {k} viola σx·σp >= 1/2: {float(sx[k] * sp[k])}"
        )
    return arr


def mixture_variance_product(mixture: Sequence[tuple[float, float, float]]) -> float:
    """(Σ P_K σ²_x,K)(Σ P_K σ²_p,K)."""
    arr = _validate_mixture(mixture)
    w, sx, sp = arr[:, 0], arr[:, 1], arr[:, 2]
    return float(np.dot(w, sx * sx) * np.dot(w, sp * sp))


def mixture_product_lemma_check(mixture: Sequence[tuple[float, float, float]]) -> bool:
    """Deve valere sempre (Cauchy–Schwarz): il prodotto delle varianze medie e' >= 1/4."""
    return mixture_variance_product(mixture) >= 0.25 * (1.0 - 1e-12)
