# eprlab/runner/io.py
"""
Scrittura e rilettura degli artefatti (CSV + JSON).

- CSV via pandas, float con 9 cifre significative, senza indice
- JSON con chiavi ordinate e senza timestamp: stessa config -> stessi byte
- schema JSON pubblicato dai modelli pydantic
"""

from __future__ import annotations

import json
import os
from typing import Any

import pandas as pd
from pydantic import BaseModel, ConfigDict

from eprlab.criterion.wmr import CriterionReport
from eprlab.errors import ConfigError

FLOAT_FORMAT = "%.9g"


class FigureSidecar(BaseModel):
    """Parametri e valori analitici di riferimento accanto a un CSV."""

    model_config = ConfigDict(extra="forbid")

    artifact: str
    data_file: str
    columns: list[str]
    parameters: dict[str, Any]
    references: dict[str, Any]
    config: dict[str, Any] | None = None


SCHEMAS: dict[str, type[BaseModel]] = {
    "criterion_report": CriterionReport,
    "figure_sidecar": FigureSidecar,
}


def ensure_outdir(path: str) -> None:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"[io] impossibile creare la directory di output {path}: {e}") from e
    if not os.access(path, os.W_OK):
        raise ConfigError(f"[io] directory di output non scrivibile: {path}")


def write_csv(df: pd.DataFrame, path: str) -> str:
    try:
        df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        raise ConfigError(f"[io] scrittura fallita {path}: {e}") from e
    return path


def read_csv(path: str) -> pd.DataFrame:
    return pd.read_csv(path)


def _dump(payload: Any) -> str:
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_json(payload: Any, path: str) -> str:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(_dump(payload))
    except OSError as e:
        raise ConfigError(f"[io] scrittura fallita {path}: {e}") from e
    return path


def read_criterion_report(path: str) -> CriterionReport:
    with open(path, "r", encoding="utf-8") as f:
        return CriterionReport.model_validate_json(f.read())


def read_sidecar(path: str) -> FigureSidecar:
    with open(path, "r", encoding="utf-8") as f:
        return FigureSidecar.model_validate_json(f.read())


def write_schemas(outdir: str) -> list[str]:
    written = []
    for name, model in SCHEMAS.items():
        written.append(write_json(model.model_json_schema(), os.path.join(outdir, f"{name}.schema.json")))
    return written
