# eprlab/simulation/fbsde.py
"""
Misura come amplificazione: traiettorie forward-backward di Ornstein-Uhlenbeck
con condizioni al contorno dalla Q function.

Le variabili amplificate sono risolte all'indietro nel tempo a partire da
un'estrazione terminale (t = T) dalla Q amplificata; quelle che decadono
sono risolte in avanti dalla Q iniziale. Tutti i cammini sono riportati
sull'asse fisico t ∈ [0, T].

Rumore: ⟨ξ ξ'⟩ = 2g·floor·δ, con floor = 1/2 per una singola quadratura
(intensita' g) e floor = 1 per le variabili somma/differenza (intensita' 2g).

Riproducibilita': i numeri casuali sono indicizzati da (seed, variabile,
blocco di CHUNK traiettorie); la traiettoria i usa sempre la stessa colonna
dello stesso blocco, qualunque sia n_traj o il numero di thread.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Literal, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from eprlab.core.gaussian import Gaussian1D, SqueezeParams
from eprlab.errors import ConfigError, DomainError, StabilityError
from eprlab.phase_space.q_function import Q_EXCESS, q_sector_variances
from eprlab.phase_space.rng import RngStream

logger = logging.getLogger(__name__)

Direction = Literal["forward", "backward"]
Setting = Literal["XX", "PP", "XP", "single_mode"]
Scheme = Literal["exact", "euler"]

SETTINGS: tuple[str, ...] = ("XX", "PP", "XP", "single_mode")
SCHEMES: tuple[str, ...] = ("exact", "euler")

CHUNK = 1024
MAX_G_DT = 0.1
SINGLE_FLOOR = 0.5
PAIR_FLOOR = 1.0
# separazione minima tra bande, in deviazioni standard di componente
RESOLUTION_SIGMAS = 4.0

# ruoli degli stream per le simulazioni a due modi (il ruolo, non il nome della
# variabile, fissa lo stream: XX e PP condividono cosi' gli stessi numeri)
ROLE_AMPLIFIED_SQUEEZED = 1
ROLE_AMPLIFIED_ANTISQUEEZED = 2
ROLE_DECAYING_SQUEEZED = 3
ROLE_DECAYING_ANTISQUEEZED = 4

CSV_NAMES = {"x_A": "xA", "p_A": "pA", "x_B": "xB", "p_B": "pB", "x": "x", "p": "p"}


# ---------------------------------------------------------------------------
# Tipi
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussianMixture1D:
    weights: tuple[float, ...]
    means: tuple[float, ...]
    variances: tuple[float, ...]

    def __post_init__(self) -> None:
        k = len(self.weights)
        if k == 0 or len(self.means) != k or len(self.variances) != k:
            raise DomainError("[fbsde] miscela con componenti incoerenti")
        if any(w < 0 for w in self.weights) or abs(sum(self.weights) - 1.0) > 1e-12:
            raise DomainError(f"[fbsde] pesi della miscela non validi: {self.weights}")
        if any(not v > 0 for v in self.variances):
            raise DomainError(f"[fbsde] varianze della miscela non positive: {self.variances}")

    @property
    def mean(self) -> float:
        return float(np.dot(self.weights, self.means))

    @property
    def variance(self) -> float:
        w, m, v = (np.asarray(a, dtype=float) for a in (self.weights, self.means, self.variances))
        return float(np.dot(w, v + m * m) - np.dot(w, m) ** 2)


Boundary = Union[Gaussian1D, GaussianMixture1D]


def _draw_boundary(boundary: Boundary, u: np.ndarray, z: np.ndarray) -> np.ndarray:
    if isinstance(boundary, Gaussian1D):
        return boundary.mean + boundary.std * z
    cum = np.cumsum(boundary.weights)
    comp = np.minimum(np.searchsorted(cum, u, side="right"), len(cum) - 1)
    means = np.asarray(boundary.means)[comp]
    stds = np.sqrt(np.asarray(boundary.variances))[comp]
    return means + stds * z


def _n_steps(T: float, dt: float) -> int:
    n = int(round(T / dt))
    if n < 1 or abs(n * dt - T) > 1e-9 * T:
        raise ConfigError(f"[fbsde] T/dt deve essere un intero >= 1: T={T}, dt={dt}")
    return n


def default_dt(g: float, T: float) -> float:
    """min(0.01/g, T/200), arrotondato in basso a un sottomultiplo di T."""
    target = T / 200.0 if g == 0 else min(0.01 / g, T / 200.0)
    return T / math.ceil(T / target - 1e-9)


@dataclass(frozen=True)
class SimConfig:
    squeeze: SqueezeParams
    g: float
    T: float
    n_traj: int
    seed: int
    setting: Setting = "XX"
    dt: float | None = None
    scheme: Scheme = "exact"
    threads: int = 1

    def __post_init__(self) -> None:
        if not (math.isfinite(self.g) and self.g > 0):
            raise DomainError(f"[fbsde] g deve essere > 0, ricevuto {self.g}")
        if not (math.isfinite(self.T) and self.T > 0):
            raise DomainError(f"[fbsde] T deve essere > 0, ricevuto {self.T}")
        if self.n_traj < 1:
            raise DomainError(f"[fbsde] n_traj deve essere >= 1, ricevuto {self.n_traj}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"[fbsde] seed fuori da [0, 2^64): {self.seed}")
        if self.setting not in SETTINGS:
            raise ConfigError(f"[fbsde] setting sconosciuto: {self.setting} (validi: {SETTINGS})")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"[fbsde] schema sconosciuto: {self.scheme} (validi: {SCHEMES})")
        if self.threads < 1:
            raise ConfigError(f"[fbsde] threads deve essere >= 1, ricevuto {self.threads}")
        if self.dt is None:
            object.__setattr__(self, "dt", default_dt(self.g, self.T))
        if not self.dt > 0:
            raise DomainError(f"[fbsde] dt deve essere > 0, ricevuto {self.dt}")
        _n_steps(self.T, self.dt)

    @classmethod
    def from_signed_rates(
        cls,
        squeeze: SqueezeParams,
        g_A: float,
        g_B: float,
        T: float,
        n_traj: int,
        seed: int,
        **kwargs: Any,
    ) -> "SimConfig":
        """Il setting segue i segni: + amplifica X, − amplifica P."""
        if g_A > 0 and g_B == 0:
            return cls(squeeze=squeeze, g=g_A, T=T, n_traj=n_traj, seed=seed, setting="single_mode", **kwargs)
        if g_A == 0 or g_B == 0 or abs(g_A) != abs(g_B):
            raise ConfigError(f"[fbsde] rate non supportati: g_A={g_A}, g_B={g_B} (serve |g_A| = |g_B| > 0)")
        if g_A > 0 and g_B > 0:
            setting = "XX"
        elif g_A < 0 and g_B < 0:
            setting = "PP"
        elif g_A > 0 > g_B:
            setting = "XP"
        else:
            raise ConfigError("[fbsde] g_A < 0 < g_B (P_A, X_B) non supportato: scambiare le etichette A/B")
        return cls(squeeze=squeeze, g=abs(g_A), T=T, n_traj=n_traj, seed=seed, setting=setting, **kwargs)

    @property
    def n_steps(self) -> int:
        return _n_steps(self.T, self.dt)

    @property
    def gT(self) -> float:
        return self.g * self.T

    @property
    def gain(self) -> float:
        return math.exp(self.gT)

    @property
    def g_A(self) -> float:
        return -self.g if self.setting == "PP" else self.g

    @property
    def g_B(self) -> float:
        return {"XX": self.g, "PP": -self.g, "XP": -self.g, "single_mode": 0.0}[self.setting]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt


@dataclass
class TrajectoryEnsemble:
    times: np.ndarray
    paths: dict[str, np.ndarray]
    direction_tags: dict[str, Direction]
    config: SimConfig
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        shapes = {v.shape for v in self.paths.values()}
        if len(shapes) != 1:
            raise DomainError(f"[fbsde] cammini con griglie diverse: {shapes}")
        (shape,) = shapes
        if shape[0] != self.times.size:
            raise DomainError(f"[fbsde] griglia di {self.times.size} tempi, cammini con {shape[0]}")
        if set(self.paths) != set(self.direction_tags):
            raise DomainError("[fbsde] direction_tags non coprono tutte le variabili")

    @property
    def variables(self) -> list[str]:
        return list(self.paths)

    @property
    def n_traj(self) -> int:
        return next(iter(self.paths.values())).shape[1]

    def time_index(self, t: float) -> int:
        k = int(round(t / self.config.dt))
        if k < 0 or k >= self.times.size or abs(self.times[k] - t) > 1e-9 * max(1.0, self.config.T):
            raise DomainError(f"[fbsde] t={t} non e' sulla griglia (dt={self.config.dt})")
        return k

    def at(self, t: float) -> dict[str, np.ndarray]:
        k = self.time_index(t)
        return {name: values[k] for name, values in self.paths.items()}

    def to_frame(self) -> pd.DataFrame:
        """Una riga per (t, run); colonne valori e poi direzioni."""
        n_times, n_traj = self.times.size, self.n_traj
        data: dict[str, Any] = {
            "t": np.repeat(self.times, n_traj),
            "run": np.tile(np.arange(n_traj), n_times),
        }
        for name in self.paths:
            data[CSV_NAMES[name]] = self.paths[name].ravel()
        for name in self.paths:
            data[f"dir_{CSV_NAMES[name]}"] = self.direction_tags[name]
        return pd.DataFrame(data)


# ---------------------------------------------------------------------------
# Integratori OU
# ---------------------------------------------------------------------------

def _integrate_ou(
    boundary: Boundary,
    g: float,
    T: float,
    dt: float,
    n: int,
    stream: RngStream,
    floor: float,
    scheme: Scheme,
    threads: int,
    direction: Direction,
) -> np.ndarray:
    if g < 0:
        raise DomainError(f"[fbsde] rate negativo: g={g} (usare il modulo e il setting)")
    if n < 1:
        raise DomainError(f"[fbsde] n deve essere >= 1, ricevuto {n}")
    if not dt > 0:
        raise DomainError(f"[fbsde] dt deve essere > 0, ricevuto {dt}")
    if g * dt > MAX_G_DT:
        raise StabilityError(f"[fbsde] g·dt = {g * dt:.4g} > {MAX_G_DT}: ridurre dt")
    if scheme not in SCHEMES:
        raise ConfigError(f"[fbsde] schema sconosciuto: {scheme}")
    n_steps = _n_steps(T, dt)

    if scheme == "exact":
        decay = math.exp(-g * dt)
        noise = math.sqrt((1.0 - decay * decay) * floor)
    else:
        decay = 1.0 - g * dt
        noise = math.sqrt(2.0 * floor * g * dt)

    paths = np.empty((n_steps + 1, n))
    n_chunks = math.ceil(n / CHUNK)

    def run_chunk(ci: int) -> None:
        lo, hi = ci * CHUNK, min(n, (ci + 1) * CHUNK)
        m = hi - lo
        gen = stream.child(ci).generator()
        z = gen.standard_normal((n_steps + 1, CHUNK))[:, :m]
        u = gen.random(CHUNK)[:m]
        block = paths[:, lo:hi]
        if direction == "backward":
            block[n_steps] = _draw_boundary(boundary, u, z[0])
            for j in range(1, n_steps + 1):
                k = n_steps - j
                block[k] = decay * block[k + 1] + noise * z[j]
        else:
            block[0] = _draw_boundary(boundary, u, z[0])
            for k in range(1, n_steps + 1):
                block[k] = decay * block[k - 1] + noise * z[k]

    with ThreadPoolExecutor(max_workers=threads) as pool:
        for _ in tqdm(
            pool.map(run_chunk, range(n_chunks)),
            total=n_chunks,
            desc=f"ou-{direction}",
            leave=False,
            disable=None,
        ):
            pass
    return paths


def integrate_backward_ou(
    boundary: Boundary,
    g: float,
    T: float,
    dt: float,
    n: int,
    stream: RngStream,
    floor: float = SINGLE_FLOOR,
    scheme: Scheme = "exact",
    threads: int = 1,
) -> np.ndarray:
    """
    dx/dt_− = −g x + ξ nel tempo all'indietro t_− = T − t, da un'estrazione
    terminale in t = T. Ritorna un array (n_steps+1, n) sull'asse fisico.
    """
    return _integrate_ou(boundary, g, T, dt, n, stream, floor, scheme, threads, "backward")


def integrate_forward_ou(
    initial: Boundary,
    g: float,
    T: float,
    dt: float,
    n: int,
    stream: RngStream,
    floor: float = SINGLE_FLOOR,
    scheme: Scheme = "exact",
    threads: int = 1,
) -> np.ndarray:
    """Stesso schema in avanti da t = 0: le variabili decadono verso il floor."""
    return _integrate_ou(initial, g, T, dt, n, stream, floor, scheme, threads, "forward")


# ---------------------------------------------------------------------------
# Simulazioni
# ---------------------------------------------------------------------------

def _ou_kwargs(config: SimConfig) -> dict[str, Any]:
    return {
        "g": config.g,
        "T": config.T,
        "dt": config.dt,
        "n": config.n_traj,
        "scheme": config.scheme,
        "threads": config.threads,
    }


def simulate_epr(config: SimConfig) -> TrajectoryEnsemble:
    """
    XX: settore x amplificato (all'indietro), settore p in decadimento (in avanti).
    PP: identico con p_± al posto di x_∓.
    """
    if config.setting == "XP":
        logger.info("[fbsde] setting misto XP: instrado su simulate_schrodinger")
        return simulate_schrodinger(config)
    if config.setting not in ("XX", "PP"):
        raise ConfigError(f"[fbsde] simulate_epr richiede XX o PP, ricevuto {config.setting}")

    sq = config.squeeze
    amplified, decaying = ("x", "p") if config.setting == "XX" else ("p", "x")
    end = q_sector_variances(sq, config.gT, amplified)
    start = q_sector_variances(sq, 0.0, decaying)
    # nel settore x la combinazione squeezed e' la differenza, nel settore p la somma
    end_sq, end_anti = (end.variance_diff, end.variance_sum) if amplified == "x" else (end.variance_sum, end.variance_diff)
    start_sq, start_anti = (start.variance_diff, start.variance_sum) if decaying == "x" else (start.variance_sum, start.variance_diff)

    root = RngStream(config.seed)
    kw = _ou_kwargs(config)
    amp_sq = integrate_backward_ou(Gaussian1D(0.0, end_sq), stream=root.child(ROLE_AMPLIFIED_SQUEEZED), floor=PAIR_FLOOR, **kw)
    amp_anti = integrate_backward_ou(Gaussian1D(0.0, end_anti), stream=root.child(ROLE_AMPLIFIED_ANTISQUEEZED), floor=PAIR_FLOOR, **kw)
    dec_sq = integrate_forward_ou(Gaussian1D(0.0, start_sq), stream=root.child(ROLE_DECAYING_SQUEEZED), floor=PAIR_FLOOR, **kw)
    dec_anti = integrate_forward_ou(Gaussian1D(0.0, start_anti), stream=root.child(ROLE_DECAYING_ANTISQUEEZED), floor=PAIR_FLOOR, **kw)

    if config.setting == "XX":
        x_plus, x_minus, p_plus, p_minus = amp_anti, amp_sq, dec_sq, dec_anti
        tags: dict[str, Direction] = {"x_A": "backward", "p_A": "forward", "x_B": "backward", "p_B": "forward"}
    else:
        x_plus, x_minus, p_plus, p_minus = dec_anti, dec_sq, amp_sq, amp_anti
        tags = {"x_A": "forward", "p_A": "backward", "x_B": "forward", "p_B": "backward"}

    paths = {
        "x_A": (x_plus + x_minus) / 2.0,
        "p_A": (p_plus + p_minus) / 2.0,
        "x_B": (x_plus - x_minus) / 2.0,
        "p_B": (p_plus - p_minus) / 2.0,
    }
    return TrajectoryEnsemble(
        times=config.times,
        paths=paths,
        direction_tags=tags,
        config=config,
        metadata={
            "amplified_sector": amplified,
            "terminal_variance_squeezed": end_sq,
            "terminal_variance_antisqueezed": end_anti,
            "gain": config.gain,
        },
    )


def simulate_schrodinger(config: SimConfig) -> TrajectoryEnsemble:
    """
    Setting misto: X_A e P_B amplificati (all'indietro, indipendenti perche'
    la marginale (x_A, p_B) fattorizza); p_A, x_B in avanti per diagnostica.
    L'esito inferito per P_A e' −p_B/G.
    """
    if config.setting != "XP" or not (config.g_A > 0 > config.g_B):
        raise ConfigError(f"[fbsde] simulate_schrodinger richiede g_A > 0 > g_B (XP), ricevuto {config.setting}")

    half_c = config.squeeze.sigma_sq
    end = Gaussian1D(0.0, config.gain**2 * half_c + Q_EXCESS)
    start = Gaussian1D(0.0, half_c + Q_EXCESS)

    root = RngStream(config.seed)
    kw = _ou_kwargs(config)
    paths = {
        "x_A": integrate_backward_ou(end, stream=root.child(ROLE_AMPLIFIED_SQUEEZED), **kw),
        "p_A": integrate_forward_ou(start, stream=root.child(ROLE_DECAYING_SQUEEZED), **kw),
        "x_B": integrate_forward_ou(start, stream=root.child(ROLE_DECAYING_ANTISQUEEZED), **kw),
        "p_B": integrate_backward_ou(end, stream=root.child(ROLE_AMPLIFIED_ANTISQUEEZED), **kw),
    }
    return TrajectoryEnsemble(
        times=config.times,
        paths=paths,
        direction_tags={"x_A": "backward", "p_A": "forward", "x_B": "forward", "p_B": "backward"},
        config=config,
        metadata={"terminal_variance": end.variance, "gain": config.gain},
    )


def simulate_superposition(
    x1: float,
    x2: float,
    g: float,
    T: float,
    dt: float | None,
    n: int,
    stream: RngStream,
    v_e: float | None = None,
    scheme: Scheme = "exact",
    threads: int = 1,
) -> TrajectoryEnsemble:
    """
    Modo singolo in sovrapposizione di due autostati di x, modellati come stati
    fortemente squeezed (varianza simmetrica v_e). Le interferenze nella
    marginale x della Q sono trascurate (soppresse esponenzialmente).
    """
    if x1 == x2:
        raise DomainError(f"[fbsde] x1 e x2 devono essere distinti, ricevuto {x1}")
    config = SimConfig(
        squeeze=SqueezeParams(0.0),
        g=g,
        T=T,
        dt=dt,
        n_traj=n,
        seed=stream.seed,
        setting="single_mode",
        scheme=scheme,
        threads=threads,
    )
    if v_e is None:
        v_e = (0.05 * abs(x1 - x2)) ** 2
    if not v_e > 0:
        raise DomainError(f"[fbsde] v_e deve essere > 0, ricevuto {v_e}")

    amp = config.gain
    component_variance = Q_EXCESS + amp * amp * v_e
    boundary = GaussianMixture1D(
        weights=(0.5, 0.5),
        means=(amp * x1, amp * x2),
        variances=(component_variance, component_variance),
    )
    separation = amp * abs(x1 - x2)
    unresolved = separation < RESOLUTION_SIGMAS * math.sqrt(component_variance)
    if unresolved:
        logger.warning(
            "[fbsde] bande non risolte dopo l'amplificazione: separazione %.4g < %g·σ = %.4g",
            separation,
            RESOLUTION_SIGMAS,
            RESOLUTION_SIGMAS * math.sqrt(component_variance),
        )

    kw = _ou_kwargs(config)
    paths = {
        "x": integrate_backward_ou(boundary, stream=stream.child(1), **kw),
        "p": integrate_forward_ou(Gaussian1D(0.0, 1.0 / (4.0 * v_e) + Q_EXCESS), stream=stream.child(2), **kw),
    }
    return TrajectoryEnsemble(
        times=config.times,
        paths=paths,
        direction_tags={"x": "backward", "p": "forward"},
        config=config,
        metadata={
            "centers": [x1, x2],
            "v_e": v_e,
            "component_variance_T": component_variance,
            "unresolved": unresolved,
            "stream_path": list(stream.path),
        },
    )


def simulate(config: SimConfig) -> TrajectoryEnsemble:
    if config.setting in ("XX", "PP"):
        return simulate_epr(config)
    if config.setting == "XP":
        return simulate_schrodinger(config)
    raise ConfigError("[fbsde] il modo singolo si simula con simulate_superposition(x1, x2, ...)")


def inferred_outcomes(ensemble: TrajectoryEnsemble, t: float) -> dict[str, np.ndarray]:
    """Variabili amplificate divise per G(t) = e^{g t}; in XP anche P_A inferito = −p_B/G."""
    k = ensemble.time_index(t)
    gain = math.exp(ensemble.config.g * ensemble.times[k])
    out = {
        name: values[k] / gain
        for name, values in ensemble.paths.items()
        if ensemble.direction_tags[name] == "backward"
    }
    if ensemble.config.setting == "XP":
        out["P_A_inferred"] = -out["p_B"]
    return out


def summarize(ensemble: TrajectoryEnsemble, t: float | None = None) -> dict[str, dict[str, float]]:
    """Media e varianza campionarie per variabile al tempo t (default T)."""
    values = ensemble.at(ensemble.config.T if t is None else t)
    return {
        name: {"mean": float(np.mean(v)), "variance": float(np.var(v, ddof=1)) if v.size > 1 else 0.0}
        for name, v in values.items()
    }
