#!/usr/bin/env python3
# eprlab/runner/cli.py
"""
Front end da riga di comando del laboratorio.

Esempi:
    python -m eprlab.runner.cli analytics --r 0,1,2,3
    python -m eprlab.runner.cli reproduce --figure error-xi --r 1,2,3
    python -m eprlab.runner.cli criterion --r 2 --case I
    python -m eprlab.runner.cli simulate --setting XP --r 2 --gT 2 --n 40 --seed 7

Exit code: 0 ok, 2 errore di configurazione/validazione, 3 errore numerico.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import asdict

import pandas as pd
from pydantic import ValidationError

from config.settings import settings
from eprlab.core.gaussian import (
    SqueezeParams,
    epr_criterion,
    inference_variance_optimal,
    mean_photon_number,
    quadrature_variance,
    sum_difference_variances,
    sum_of_squares_mean,
)
from eprlab.core.schrodinger_error import (
    absolute_error_xi,
    halfgauss_mean_abs,
    homodyne_sum_check,
    p_squared_residual_moments,
    relative_error,
)
from eprlab.criterion.wmr import (
    BinningScheme,
    feasibility_case,
    incompleteness_check,
    sigma_inf_amplified,
    sigma_real_binned,
    sigma_real_two_region,
)
from eprlab.errors import ConfigError, DomainError, EstimationError, StabilityError
from eprlab.phase_space.q_function import q_single_quadrature_variance
from eprlab.phase_space.rng import RngStream
from eprlab.runner.config import MODES, ExperimentConfig, build_config, case_preset, load_config_file
from eprlab.runner.figures import FIGURES, reproduce_figure
from eprlab.runner.io import FigureSidecar, ensure_outdir, write_csv, write_json, write_schemas
from eprlab.simulation.fbsde import SimConfig, simulate, simulate_superposition, summarize

LOG_FORMAT = "[%(asctime)s] %(levelname)s - %(message)s"

# soglia x1 di default per il criterio a due regioni: livello del rumore quantistico
DEFAULT_X1 = 1.0 / math.sqrt(2.0)
DEFAULT_SUPERPOSITION_X1 = 5.0

Written = list[tuple[str, str]]


def _tag(r: float) -> str:
    return f"r{r:g}"


def _sidecar(cfg: ExperimentConfig, artifact: str, data_file: str, columns: list[str], parameters: dict, references: dict) -> FigureSidecar:
    return FigureSidecar(
        artifact=artifact,
        data_file=data_file,
        columns=columns,
        parameters=parameters,
        references=references,
        config=cfg.model_dump(mode="json") if cfg.print_config else None,
    )


def _write_table(cfg: ExperimentConfig, name: str, df: pd.DataFrame, parameters: dict, references: dict) -> Written:
    csv_path = write_csv(df, os.path.join(cfg.out, f"{name}.csv"))
    side = _sidecar(cfg, name, os.path.basename(csv_path), list(df.columns), parameters, references)
    json_path = write_json(side, os.path.join(cfg.out, f"{name}.json"))
    return [(csv_path, f"{len(df)} righe"), (json_path, "sidecar")]


# ---------------------------------------------------------------------------
# Modalita'
# ---------------------------------------------------------------------------

def run_analytics(cfg: ExperimentConfig) -> Written:
    rows = []
    for r in cfg.r_values:
        sq = SqueezeParams(r)
        dinf = math.sqrt(inference_variance_optimal(sq))
        verdict = epr_criterion(dinf, dinf)
        var_diff, var_sum = sum_difference_variances(sq)
        rows.append(
            {
                "r": r,
                "eta": sq.eta,
                "g0": sq.g0,
                "sigma_sq": quadrature_variance(sq),
                "inference_variance": inference_variance_optimal(sq),
                "epr_product": verdict.product,
                "epr_satisfied": verdict.satisfied,
                "mean_photon_number": mean_photon_number(sq),
                "sum_of_squares_mean": sum_of_squares_mean(sq),
                "var_x_diff": var_diff,
                "var_x_sum": var_sum,
                "q_single_quadrature_variance": q_single_quadrature_variance(sq),
            }
        )
    return _write_table(cfg, "analytics", pd.DataFrame(rows), {"r": cfg.r_values}, {"epr_bound": 0.5})


def run_error(cfg: ExperimentConfig) -> Written:
    rows = []
    for r in cfg.r_values:
        sq = SqueezeParams(r)
        mean_abs = halfgauss_mean_abs(math.sqrt(sq.sigma_sq))
        check = homodyne_sum_check(sq, cfg.E)
        residual = p_squared_residual_moments(sq, sq.g0)
        rows.append(
            {
                "r": r,
                "mean_abs_p_B": mean_abs,
                "xi_at_mean": float(absolute_error_xi(sq, mean_abs)),
                # a r = 0 la stima e' nulla e l'errore relativo non e' definito
                "relative_error_at_mean": relative_error(sq, mean_abs) if r > 0 else float("nan"),
                "homodyne_lhs": check.lhs,
                "homodyne_rhs": check.rhs,
                "homodyne_relative_gap": check.relative_gap,
                "residual_mean": residual.mean,
                "residual_variance": residual.variance,
            }
        )
    return _write_table(
        cfg,
        "error",
        pd.DataFrame(rows),
        {"r": cfg.r_values, "E": cfg.E},
        {"large_r_limit": math.sqrt(2.0 / math.pi)},
    )


def run_criterion(cfg: ExperimentConfig) -> Written:
    written: Written = []
    binned = cfg.case is not None or (cfg.Delta is not None and cfg.G is not None)
    values: dict[str, float] = {}
    rs = cfg.r_values
    if cfg.case is not None:
        preset = case_preset(cfg.case)
        if cfg.r is None:
            rs = [preset["r"]]
        for key in ("G", "Delta", "delta", "Delta_p"):
            override = getattr(cfg, key)
            values[key] = override if override is not None else preset[key]
    elif binned:
        values = {"G": cfg.G, "Delta": cfg.Delta, "delta": cfg.delta or 0.0, "Delta_p": cfg.Delta_p or 0.0}

    for r in rs:
        sq = SqueezeParams(r)
        references: dict = {}
        if binned:
            scheme = BinningScheme(
                bin_width_Delta=values["Delta"],
                overlap_delta=values["delta"],
                threshold_x1=cfg.x1 or 0.0,
                gain_G=values["G"],
                bin_width_p=values["Delta_p"],
            )
            report = incompleteness_check(
                sigma_real_binned(scheme),
                sigma_inf_amplified(sq, scheme.bin_width_p, scheme.gain_G),
                scheme.distinctness_level,
                method_tag="binned_amplified",
            )
            feasibility = feasibility_case(sq, values["G"], values["Delta"], values["Delta_p"], values["delta"])
            references["feasibility"] = asdict(feasibility)
            parameters = {"r": r, "case": cfg.case, **values}
        else:
            x1 = cfg.x1 if cfg.x1 is not None else DEFAULT_X1
            report = incompleteness_check(
                sigma_real_two_region(sq, x1),
                math.sqrt(inference_variance_optimal(sq)),
                2.0 * x1,
                method_tag="two_region",
            )
            parameters = {"r": r, "x1": x1}

        name = f"criterion_{_tag(r)}"
        report_path = write_json(report, os.path.join(cfg.out, f"{name}.json"))
        side = _sidecar(cfg, "criterion", os.path.basename(report_path), [], parameters, references)
        side_path = write_json(side, os.path.join(cfg.out, f"{name}.sidecar.json"))
        verdict = "soddisfatto" if report.satisfied else "non soddisfatto"
        written += [(report_path, f"prodotto={report.product:.6g}, {verdict}"), (side_path, "sidecar")]
    return written


def run_simulate(cfg: ExperimentConfig) -> Written:
    r = cfg.r_values[0]
    if cfg.setting == "single_mode":
        x1 = cfg.x1 if cfg.x1 is not None else DEFAULT_SUPERPOSITION_X1
        ens = simulate_superposition(
            x1, -x1, cfg.g, cfg.T, cfg.dt, cfg.n, RngStream(cfg.seed), scheme=cfg.scheme, threads=cfg.threads
        )
        references = {"component_variance_T": ens.metadata["component_variance_T"], "unresolved": ens.metadata["unresolved"]}
        name = f"trajectories_single_mode_x{x1:g}"
    else:
        config = SimConfig(
            squeeze=SqueezeParams(r),
            g=cfg.g,
            T=cfg.T,
            dt=cfg.dt,
            n_traj=cfg.n,
            seed=cfg.seed,
            setting=cfg.setting,
            scheme=cfg.scheme,
            threads=cfg.threads,
        )
        ens = simulate(config)
        references = {k: v for k, v in ens.metadata.items() if isinstance(v, (int, float, str, bool))}
        name = f"trajectories_{cfg.setting}_{_tag(r)}"

    references["summary_T"] = summarize(ens)
    parameters = {
        "r": r,
        "g": cfg.g,
        "T": cfg.T,
        "dt": ens.config.dt,
        "n": cfg.n,
        "seed": cfg.seed,
        "setting": cfg.setting,
        "scheme": cfg.scheme,
    }
    return _write_table(cfg, name, ens.to_frame(), parameters, references)


def run_reproduce(cfg: ExperimentConfig) -> Written:
    if cfg.figure is None:
        raise ConfigError(f"[cli] reproduce richiede --figure; id validi: {', '.join(FIGURES)}")
    return [(path, cfg.figure) for path in reproduce_figure(cfg.figure, cfg)]


RUNNERS = {
    "analytics": run_analytics,
    "error": run_error,
    "criterion": run_criterion,
    "simulate": run_simulate,
    "reproduce": run_reproduce,
}


def run(cfg: ExperimentConfig) -> Written:
    ensure_outdir(cfg.out)
    return RUNNERS[cfg.mode](cfg)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="eprlab", allow_abbrev=False)
    ap.add_argument("mode", nargs="?", help=f"modalita': {', '.join(MODES)}")
    ap.add_argument("--mode", dest="mode_flag", help="alternativa al posizionale")
    ap.add_argument("--config", help="JSON piatto; i flag da CLI hanno la precedenza")
    ap.add_argument("--r", help="squeezing, anche lista separata da virgole (es. 1,2,3)")
    ap.add_argument("--g", type=float, help="rate di amplificazione (modulo)")
    ap.add_argument("--T", type=float, help="tempo totale")
    ap.add_argument("--gT", type=float, help="alternativa a --T: T = gT/g")
    ap.add_argument("--dt", type=float, help="passo temporale")
    ap.add_argument("--n", type=int, help="numero di traiettorie")
    ap.add_argument("--seed", type=int, help="seed (default documentato in config/settings.py)")
    ap.add_argument("--setting", help="XX, PP, XP o single_mode")
    ap.add_argument("--scheme", help="exact o euler")
    ap.add_argument("--delta", type=float, help="semi-ampiezza di sovrapposizione δ")
    ap.add_argument("--Delta", type=float, help="larghezza dei bin Δ")
    ap.add_argument("--x1", type=float, help="soglia x1")
    ap.add_argument("--G", type=float, help="guadagno di amplificazione")
    ap.add_argument("--Delta-p", dest="Delta_p", type=float, help="larghezza dei bin su p")
    ap.add_argument("--case", help="preset I o II")
    ap.add_argument("--E", type=float, help="scala E della verifica omodina")
    ap.add_argument("--figure", help=f"id figura: {', '.join(FIGURES)}")
    ap.add_argument("--out", help="directory di output (default: EPRWMR_OUT)")
    ap.add_argument("--threads", type=int, help="thread per i blocchi di traiettorie")
    ap.add_argument("--print-config", dest="print_config", action="store_true", default=None)
    ap.add_argument("--write-schemas", action="store_true", help="scrive anche gli schema JSON degli artefatti")
    ap.add_argument("--log-level", default=None)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    try:
        level = (args.log_level or settings.log_level).upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ConfigError(f"[cli] livello di log sconosciuto: {level!r}")
        logging.basicConfig(level=level, format=LOG_FORMAT)
        file_values = load_config_file(args.config) if args.config else {}
        mode = args.mode_flag or args.mode or file_values.get("mode")
        if mode not in MODES:
            print(f"[ERRORE] modalita' sconosciuta: {mode!r}; valide: {', '.join(MODES)}", file=sys.stderr)
            return 2
        overrides = {
            key: getattr(args, key)
            for key in (
                "r", "g", "T", "gT", "dt", "n", "seed", "setting", "scheme", "delta", "Delta",
                "x1", "G", "Delta_p", "case", "E", "figure", "out", "threads", "print_config",
            )
        }
        overrides["mode"] = mode
        cfg = build_config(file_values, overrides)
        if cfg.print_config:
            print(json.dumps(cfg.model_dump(mode="json"), sort_keys=True))
        written = run(cfg)
        if args.write_schemas:
            written += [(path, "schema") for path in write_schemas(cfg.out)]
    except ValidationError as e:
        print(f"[ERRORE] configurazione non valida:\n{e}", file=sys.stderr)
        return 2
    except ConfigError as e:
        print(f"[ERRORE] {e}", file=sys.stderr)
        return 2
    except (DomainError, EstimationError, StabilityError) as e:
        print(f"[ERRORE] dominio numerico: {e}", file=sys.stderr)
        return 3

    for path, summary in written:
        print(f"[OK] Wrote: {path} ({summary})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
