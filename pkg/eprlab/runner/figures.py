# eprlab/runner/figures.py
"""
Dati sottostanti alle figure: un CSV + un sidecar JSON per figura.

Nessun rendering: solo numeri, con i valori analitici di riferimento
nel sidecar. I parametri di default arrivano da figures_map.json.
"""

from __future__ import annotations

import logging
import math
import os
from typing import Any, Callable

import numpy as np
import pandas as pd

from eprlab.core.gaussian import SqueezeParams
from eprlab.core.schrodinger_error import (
    absolute_error_xi,
    halfgauss_mean_abs,
    large_r_error_limit,
    p_distribution,
    relative_error,
)
from eprlab.criterion.wmr import (
    half_gaussian_variance,
    region_probabilities,
    rounded_half_gaussian_variance,
    upper_bound_UB,
)
from eprlab.errors import ConfigError
from eprlab.phase_space.rng import RngStream
from eprlab.runner.config import ExperimentConfig, load_figures_map
from eprlab.runner.io import FigureSidecar, write_csv, write_json
from eprlab.simulation.bands import classify_bands
from eprlab.simulation.fbsde import SimConfig, simulate, simulate_superposition

logger = logging.getLogger(__name__)

FigureResult = tuple[pd.DataFrame, dict[str, Any], dict[str, Any]]


def _r_values(cfg: ExperimentConfig, preset: dict) -> list[float]:
    return list(cfg.r) if cfg.r is not None else [float(r) for r in preset["r"]]


# ---------------------------------------------------------------------------
# Figure analitiche
# ---------------------------------------------------------------------------

def _p_distribution(cfg: ExperimentConfig, preset: dict) -> FigureResult:
    rs = _r_values(cfg, preset)
    sigma_max = max(math.sqrt(SqueezeParams(r).sigma_sq) for r in rs)
    half_width = preset["grid_sigmas"] * sigma_max
    grid = np.linspace(-half_width, half_width, int(preset["grid_points"]))

    frames, refs = [], []
    for r in rs:
        dist = p_distribution(SqueezeParams(r))
        frames.append(pd.DataFrame({"r": r, "p_B": grid, "density": dist.pdf(grid)}))
        refs.append({"r": r, "mean": dist.mean, "variance": dist.variance})
    return pd.concat(frames, ignore_index=True), {"r": rs}, {"distributions": refs}


def _error_xi(cfg: ExperimentConfig, preset: dict) -> FigureResult:
    rs = _r_values(cfg, preset)
    points = int(preset["grid_points"])
    p_max = float(preset["p_B_max"])
    # p_B = 0 escluso: l'errore relativo li' non e' definito
    grid = np.linspace(p_max / points, p_max, points)

    frames, refs = [], []
    for r in rs:
        sq = SqueezeParams(r)
        frames.append(
            pd.DataFrame(
                {
                    "r": r,
                    "p_B": grid,
                    "xi": absolute_error_xi(sq, grid),
                    "relative_error": [relative_error(sq, float(pb)) for pb in grid],
                }
            )
        )
        mean_abs = halfgauss_mean_abs(math.sqrt(sq.sigma_sq))
        refs.append(
            {
                "r": r,
                "mean_abs_p_B": mean_abs,
                "xi_at_mean_abs_p_B": float(absolute_error_xi(sq, mean_abs)),
                "relative_error_at_mean_abs_p_B": relative_error(sq, mean_abs),
            }
        )
    references = {"curves": refs, "large_r_limit": large_r_error_limit()}
    return pd.concat(frames, ignore_index=True), {"r": rs}, references


def _diagram_bins(cfg: ExperimentConfig, preset: dict) -> FigureResult:
    r = _r_values(cfg, preset)[0]
    sq = SqueezeParams(r)
    sigma = math.sqrt(sq.sigma_sq)
    x1 = cfg.x1 if cfg.x1 is not None else preset["x1_over_sigma"] * sigma
    half_width = preset["grid_sigmas"] * sigma
    grid = np.linspace(-half_width, half_width, int(preset["grid_points"]))
    region = np.where(grid > x1, "+", np.where(grid < -x1, "-", "0"))

    df = pd.DataFrame({"x": grid, "density": p_distribution(sq).pdf(grid), "region": region})
    probs = region_probabilities(sq, x1)
    references = {
        "p_minus": probs.p_minus,
        "p_zero": probs.p_zero,
        "p_plus": probs.p_plus,
        "U_B": upper_bound_UB(sq, x1),
        "half_gaussian_variance": half_gaussian_variance(sigma),
    }
    return df, {"r": r, "x1": x1, "sigma_X": sigma}, references


def _bounds(cfg: ExperimentConfig, preset: dict) -> FigureResult:
    rs = _r_values(cfg, preset)
    ratios = np.linspace(preset["x1_over_sigma_min"], preset["x1_over_sigma_max"], int(preset["grid_points"]))

    frames, refs = [], []
    for r in rs:
        sq = SqueezeParams(r)
        sigma = math.sqrt(sq.sigma_sq)
        x1 = ratios * sigma
        frames.append(
            pd.DataFrame(
                {
                    "r": r,
                    "x1_over_sigma": ratios,
                    "x1": x1,
                    "U_B": [upper_bound_UB(sq, float(v)) for v in x1],
                    "sigma_sq_reference": sq.sigma_sq,
                }
            )
        )
        refs.append(
            {
                "r": r,
                "sigma_sq": sq.sigma_sq,
                "half_gaussian_variance": half_gaussian_variance(sigma),
                "rounded_half_gaussian_variance": rounded_half_gaussian_variance(sigma),
                "U_B_small_x1": upper_bound_UB(sq, float(x1[0])),
            }
        )
    # soglia del rumore quantistico su x1
    references = {"curves": refs, "x1_marker": 1.0 / math.sqrt(2.0)}
    return pd.concat(frames, ignore_index=True), {"r": rs}, references


# ---------------------------------------------------------------------------
# Figure da simulazione
# ---------------------------------------------------------------------------

def _sup_dynamics(cfg: ExperimentConfig, preset: dict) -> FigureResult:
    g = float(preset["g"])
    root = RngStream(cfg.seed)
    frames, refs, params = [], [], []
    for i, run in enumerate(preset["runs"]):
        T = run["gT"] / g
        ens = simulate_superposition(
            run["x1"], run["x2"], g, T, cfg.dt, cfg.n, root.child(i), scheme=cfg.scheme, threads=cfg.threads
        )
        k = int(round(run["t_m_g"] / g / ens.config.dt))
        t_m = float(ens.times[k])
        centers = [math.exp(g * t_m) * run["x1"], math.exp(g * t_m) * run["x2"]]
        report = classify_bands(ens, t_m, centers)

        df = ens.to_frame()
        df.insert(0, "panel", i)
        frames.append(df)
        params.append({"panel": i, "g": g, "T": T, "t_m": t_m, **run})
        refs.append(
            {
                "panel": i,
                "component_variance_T": ens.metadata["component_variance_T"],
                "band_centers_T": [ens.config.gain * run["x1"], ens.config.gain * run["x2"]],
                **report.as_dict(),
            }
        )
    return pd.concat(frames, ignore_index=True), {"panels": params, "n": cfg.n, "seed": cfg.seed}, {"panels": refs}


def _epr_pairs(cfg: ExperimentConfig, preset: dict) -> FigureResult:
    rs = _r_values(cfg, preset)
    g = float(preset["g"])
    T = preset["gT"] / g
    setting = preset["setting"]

    frames, refs = [], []
    for r in rs:
        config = SimConfig(
            squeeze=SqueezeParams(r),
            g=g,
            T=T,
            dt=cfg.dt,
            n_traj=cfg.n,
            seed=cfg.seed,
            setting=setting,
            scheme=cfg.scheme,
            threads=cfg.threads,
        )
        ens = simulate(config)
        df = ens.to_frame()
        df.insert(0, "r", r)
        frames.append(df)

        sq, gain2 = config.squeeze, config.gain**2
        if setting == "XX":
            diff = (ens.paths["x_A"][-1] - ens.paths["x_B"][-1]) / config.gain
            refs.append(
                {
                    "r": r,
                    "target_var_diff_over_G": math.exp(-2.0 * r) + 1.0 / gain2,
                    "measured_target_var_diff": math.exp(-2.0 * r),
                    "sample_var_diff_over_G": float(np.var(diff, ddof=1)) if diff.size > 1 else 0.0,
                }
            )
        else:
            x_A = ens.paths["x_A"][-1] / config.gain
            refs.append(
                {
                    "r": r,
                    "target_var_xA_over_G": sq.sigma_sq + 0.5 / gain2,
                    "sample_var_xA_over_G": float(np.var(x_A, ddof=1)) if x_A.size > 1 else 0.0,
                }
            )
    params = {"r": rs, "g": g, "T": T, "setting": setting, "n": cfg.n, "seed": cfg.seed}
    return pd.concat(frames, ignore_index=True), params, {"runs": refs}


FIGURES: dict[str, Callable[[ExperimentConfig, dict], FigureResult]] = {
    "p-distribution": _p_distribution,
    "error-xi": _error_xi,
    "diagram-bins": _diagram_bins,
    "bounds": _bounds,
    "sup-dynamics": _sup_dynamics,
    "epr1": _epr_pairs,
    "epr2": _epr_pairs,
}


def reproduce_figure(figure_id: str, cfg: ExperimentConfig, fmap: dict | None = None) -> list[str]:
    """Scrive <id>.csv e <id>.json in cfg.out; ritorna i path scritti."""
    if figure_id not in FIGURES:
        raise ConfigError(f"[figures] figura sconosciuta: {figure_id!r}; id validi: {', '.join(FIGURES)}")
    fmap = fmap or load_figures_map()
    preset = fmap.get("figures", {}).get(figure_id)
    if preset is None:
        raise ConfigError(f"[figures] preset mancante per {figure_id} nella mappa delle figure")

    logger.info("[figures] genero %s", figure_id)
    df, parameters, references = FIGURES[figure_id](cfg, preset)

    csv_path = write_csv(df, os.path.join(cfg.out, f"{figure_id}.csv"))
    sidecar = FigureSidecar(
        artifact=figure_id,
        data_file=os.path.basename(csv_path),
        columns=list(df.columns),
        parameters=parameters,
        references=references,
        config=cfg.model_dump(mode="json") if cfg.print_config else None,
    )
    json_path = write_json(sidecar, os.path.join(cfg.out, f"{figure_id}.json"))
    return [csv_path, json_path]
