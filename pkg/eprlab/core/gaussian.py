# eprlab/core/gaussian.py
"""
Analitica chiusa dello stato two-mode squeezed (TMSS).

Convenzione delle quadrature: X = (a + a†)/√2, P = (a − a†)/(i√2),
quindi la varianza del vuoto e' 1/2. I nomi canonici sono minuscoli
(x_A, p_A, x_B, p_B); X_A, P_A, ... sono alias con lo stesso significato.

Quantita' principali, con c = cosh 2r e s = sinh 2r:
- varianza di ogni quadratura: c/2
- guadagno di inferenza ottimale: g0 = tanh 2r
- varianza di inferenza ottimale: 1/(2c)
- Var(x_A ∓ x_B) = e^{∓2r}
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from config.settings import settings
from eprlab.errors import DomainError, RangeError

Matrix2 = tuple[tuple[float, float], tuple[float, float]]

# Soglia dell'EPR criterion: Δ_inf X · Δ_inf P < 1/2 (stretta)
EPR_BOUND = 0.5


# ---------------------------------------------------------------------------
# Tipi
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SqueezeParams:
    r: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.r) or self.r < 0:
            raise DomainError(f"[gaussian] r deve essere finito e >= 0, ricevuto r={self.r}")
        if self.r > settings.max_squeeze:
            raise RangeError(
                f"[gaussian] r={self.r} oltre il limite r <= {settings.max_squeeze}"
            )

    @property
    def eta(self) -> float:
        return math.tanh(self.r)

    @property
    def g0(self) -> float:
        return math.tanh(2.0 * self.r)

    @property
    def cosh2r(self) -> float:
        return math.cosh(2.0 * self.r)

    @property
    def sinh2r(self) -> float:
        return math.sinh(2.0 * self.r)

    @property
    def sigma_sq(self) -> float:
        return self.cosh2r / 2.0


@dataclass(frozen=True)
class Gaussian1D:
    mean: float
    variance: float

    def __post_init__(self) -> None:
        if not (self.variance > 0) or not math.isfinite(self.variance):
            raise DomainError(f"[gaussian] varianza non positiva: {self.variance}")

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def pdf(self, x: float | np.ndarray) -> float | np.ndarray:
        return stats.norm.pdf(x, loc=self.mean, scale=self.std)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.mean + self.std * rng.standard_normal(n)


@dataclass(frozen=True)
class Gaussian2D:
    """
    Gaussiana bivariata. Se `sum_diff` = (Var(u_0 + u_1), Var(u_0 − u_1)) e'
    presente, le due combinazioni sono indipendenti (varianze marginali uguali)
    e condizionamento, varianze lineari, densita' e campionamento passano per
    questa base: con r grande c² − s² perde tutte le cifre significative.
    """

    means: tuple[float, float]
    cov: Matrix2
    sum_diff: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        m = self.matrix
        if not np.allclose(m, m.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(m).max()))):
            raise DomainError(f"[gaussian] covarianza non simmetrica: {self.cov}")
        if self.sum_diff is not None:
            self._check_sum_difference(m)
            return
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if not (m[0, 0] > 0 and det > 0):
            raise DomainError(f"[gaussian] covarianza non definita positiva: {self.cov}")

    def _check_sum_difference(self, m: np.ndarray) -> None:
        vs, vd = self.sum_diff
        if not all(math.isfinite(v) and v > 0 for v in (vs, vd)):
            raise DomainError(f"[gaussian] varianze somma/differenza non positive: {self.sum_diff}")
        expected = np.array([[vs + vd, vs - vd], [vs - vd, vs + vd]]) / 4.0
        if not np.allclose(m, expected, rtol=1e-9, atol=1e-15 * float(np.abs(expected).max())):
            raise DomainError(
                f"[gaussian] covarianza {self.cov} incoerente con somma/differenza {self.sum_diff}"
            )

    @classmethod
    def from_sum_difference(
        cls, var_sum: float, var_diff: float, means: tuple[float, float] = (0.0, 0.0)
    ) -> Gaussian2D:
        """Costruisce la gaussiana da Var(u_0 + u_1) e Var(u_0 − u_1) indipendenti."""
        c, s = (var_sum + var_diff) / 4.0, (var_sum - var_diff) / 4.0
        return cls(means=means, cov=((c, s), (s, c)), sum_diff=(var_sum, var_diff))

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.cov, dtype=float)

    def marginal(self, index: int) -> Gaussian1D:
        return Gaussian1D(mean=self.means[index], variance=self.cov[index][index])

    def conditional(self, given: int, value: float) -> Gaussian1D:
        """Distribuzione dell'altra variabile condizionata a `given` = value (complemento di Schur)."""
        other = 1 - given
        if self.sum_diff is not None:
            vs, vd = self.sum_diff
            gain = (vs - vd) / (vs + vd)
            variance = vs * vd / (vs + vd)
        else:
            c_og, c_gg = self.cov[other][given], self.cov[given][given]
            gain = c_og / c_gg
            variance = self.cov[other][other] - c_og * c_og / c_gg
        mean = self.means[other] + gain * (value - self.means[given])
        return Gaussian1D(mean=mean, variance=variance)

    def linear_variance(self, a: float, b: float) -> float:
        """Var(a·u_0 + b·u_1)."""
        if self.sum_diff is not None:
            vs, vd = self.sum_diff
            return 0.25 * ((a + b) ** 2 * vs + (a - b) ** 2 * vd)
        return a * a * self.cov[0][0] + 2.0 * a * b * self.cov[0][1] + b * b * self.cov[1][1]

    def pdf(self, u0: float | np.ndarray, u1: float | np.ndarray) -> float | np.ndarray:
        if self.sum_diff is not None:
            vs, vd = self.sum_diff
            m0, m1 = self.means
            u0, u1 = np.broadcast_arrays(u0, u1)
            # jacobiano della trasformazione (u_0, u_1) -> (somma, differenza): 2
            return 2.0 * stats.norm.pdf(u0 + u1, loc=m0 + m1, scale=math.sqrt(vs)) * stats.norm.pdf(
                u0 - u1, loc=m0 - m1, scale=math.sqrt(vd)
            )
        pts = np.stack(np.broadcast_arrays(u0, u1), axis=-1)
        return stats.multivariate_normal(mean=self.means, cov=self.matrix).pdf(pts)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        z = rng.standard_normal((n, 2))
        if self.sum_diff is not None:
            vs, vd = self.sum_diff
            total = math.sqrt(vs) * z[:, 0]
            diff = math.sqrt(vd) * z[:, 1]
            return np.asarray(self.means) + 0.5 * np.column_stack([total + diff, total - diff])
        chol = np.linalg.cholesky(self.matrix)
        return np.asarray(self.means) + z @ chol.T


@dataclass(frozen=True)
class CriterionVerdict:
    product: float
    satisfied: bool


# ---------------------------------------------------------------------------
# Varianze e inferenza
# ---------------------------------------------------------------------------

def quadrature_variance(p: SqueezeParams) -> float:
    """Varianza di X_A, P_A, X_B, P_B (identiche): cosh(2r)/2."""
    return p.sigma_sq


def optimal_inference_gain(p: SqueezeParams) -> float:
    return p.g0


def inference_variance_optimal(p: SqueezeParams) -> float:
    """Varianza minima di inferenza 1/(2 cosh 2r), uguale per x e p."""
    return 1.0 / (2.0 * p.cosh2r)


def inference_variance_general(p: SqueezeParams, g: float) -> tuple[float, float]:
    """(Var(X_A − g X_B), Var(P_A + g P_B)) per un guadagno g arbitrario."""
    if not math.isfinite(g):
        raise DomainError(f"[gaussian] guadagno non finito: g={g}")
    v = 0.5 * (p.cosh2r * (1.0 + g * g) - 2.0 * g * p.sinh2r)
    return v, v


def sum_difference_variances(p: SqueezeParams) -> tuple[float, float]:
    """(Var(x_A − x_B), Var(x_A + x_B)) = (e^{−2r}, e^{2r})."""
    return math.exp(-2.0 * p.r), math.exp(2.0 * p.r)


def amplified_variance(p: SqueezeParams, gain: float) -> float:
    """Varianza di una quadratura amplificata di G: G²·cosh(2r)/2."""
    if gain < 1:
        raise DomainError(f"[gaussian] guadagno di amplificazione < 1: G={gain}")
    return gain * gain * p.sigma_sq


# ---------------------------------------------------------------------------
# Distribuzioni
# ---------------------------------------------------------------------------

def joint_distribution_x(p: SqueezeParams) -> Gaussian2D:
    c, s = p.cosh2r / 2.0, p.sinh2r / 2.0
    var_diff, var_sum = sum_difference_variances(p)
    return Gaussian2D(means=(0.0, 0.0), cov=((c, s), (s, c)), sum_diff=(var_sum, var_diff))


def joint_distribution_p(p: SqueezeParams) -> Gaussian2D:
    # settore p anticorrelato: p_A + p_B e' la combinazione compressa
    c, s = p.cosh2r / 2.0, p.sinh2r / 2.0
    var_sum, var_diff = sum_difference_variances(p)
    return Gaussian2D(means=(0.0, 0.0), cov=((c, -s), (-s, c)), sum_diff=(var_sum, var_diff))


def conditional_distribution_x(p: SqueezeParams, x_B: float) -> Gaussian1D:
    return Gaussian1D(mean=p.g0 * x_B, variance=inference_variance_optimal(p))


def conditional_distribution_p(p: SqueezeParams, p_B: float) -> Gaussian1D:
    return Gaussian1D(mean=-p.g0 * p_B, variance=inference_variance_optimal(p))


# ---------------------------------------------------------------------------
# Criterio EPR e numero di fotoni
# ---------------------------------------------------------------------------

def epr_criterion(dinf_x: float, dinf_p: float) -> CriterionVerdict:
    if dinf_x < 0 or dinf_p < 0:
        raise DomainError(
            f"[gaussian] deviazioni di inferenza negative: dinf_x={dinf_x}, dinf_p={dinf_p}"
        )
    product = dinf_x * dinf_p
    return CriterionVerdict(product=product, satisfied=product < EPR_BOUND)


def mean_photon_number(p: SqueezeParams) -> float:
    return math.sinh(p.r) ** 2


def sum_of_squares_mean(p: SqueezeParams) -> float:
    """⟨X_A² + P_A²⟩ = 1 + 2n̄ = cosh 2r."""
    return 1.0 + 2.0 * mean_photon_number(p)
