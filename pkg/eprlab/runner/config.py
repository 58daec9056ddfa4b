# eprlab/runner/config.py
"""
Configurazione di un esperimento: JSON piatto (un solo livello) + override da CLI.

I preset di figure e dei casi I/II stanno in una mappa JSON esterna
(eprlab/runner/config/figures_map.json), caricata a runtime.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config.settings import settings
from eprlab.errors import ConfigError

Mode = Literal["analytics", "error", "criterion", "simulate", "reproduce"]
MODES: tuple[str, ...] = ("analytics", "error", "criterion", "simulate", "reproduce")

# gT usato quando ne' T ne' gT sono indicati
DEFAULT_GT = 2.0
DEFAULT_R = 2.0

FIGURES_MAP_PATH = Path(__file__).resolve().parent / "config" / "figures_map.json"


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mode: Mode

    # Squeezing (lista: le modalita' tabellari iterano su r)
    r: list[float] | None = None

    # Simulazione
    g: float = Field(default=1.0, gt=0)
    T: float | None = Field(default=None, gt=0)
    gT: float | None = Field(default=None, gt=0)
    dt: float | None = Field(default=None, gt=0)
    n: int = Field(default=40, ge=1)
    seed: int = Field(default_factory=lambda: settings.seed, ge=0, lt=2**64)
    setting: Literal["XX", "PP", "XP", "single_mode"] = "XX"
    scheme: Literal["exact", "euler"] = "exact"

    # Binning / criterio
    Delta: float | None = Field(default=None, gt=0)
    delta: float | None = Field(default=None, ge=0)
    x1: float | None = Field(default=None, ge=0)
    G: float | None = Field(default=None, ge=1)
    Delta_p: float | None = Field(default=None, ge=0)
    case: Literal["I", "II"] | None = None
    E: float = Field(default=1.0, gt=0)

    # Output
    figure: str | None = None
    out: str = Field(default_factory=lambda: settings.out)
    threads: int = Field(default_factory=lambda: settings.threads, ge=1)
    print_config: bool = False

    @field_validator("r", mode="before")
    @classmethod
    def _split_r(cls, value: Any) -> Any:
        if isinstance(value, str):
            parts = [x.strip() for x in value.split(",") if x.strip()]
            if not parts:
                raise ValueError("lista di r vuota")
            return [float(x) for x in parts]
        if isinstance(value, (int, float)):
            return [float(value)]
        return value

    @field_validator("r")
    @classmethod
    def _check_r(cls, value: list[float] | None) -> list[float] | None:
        if value is None:
            return value
        if not value:
            raise ValueError("lista di r vuota")
        for r in value:
            if not (math.isfinite(r) and 0 <= r <= settings.max_squeeze):
                raise ValueError(f"r={r} fuori da [0, {settings.max_squeeze}]")
        return value

    @model_validator(mode="after")
    def _resolve_time(self) -> "ExperimentConfig":
        if self.T is not None and self.gT is not None:
            if not math.isclose(self.g * self.T, self.gT, rel_tol=1e-9):
                raise ValueError(f"T={self.T} e gT={self.gT} incoerenti con g={self.g}")
        elif self.gT is not None:
            self.T = self.gT / self.g
        elif self.T is None:
            self.T = DEFAULT_GT / self.g
        self.gT = self.g * self.T
        return self

    @property
    def r_values(self) -> list[float]:
        return self.r if self.r is not None else [DEFAULT_R]


# ---------------------------------------------------------------------------
# Caricamento
# ---------------------------------------------------------------------------

def load_config_file(path: str) -> dict[str, Any]:
    """Legge un JSON piatto; oggetti annidati o liste non scalari sono rifiutati."""
    if not os.path.exists(path):
        raise ConfigError(f"[config] file di configurazione non trovato: {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"[config] JSON non valido in {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"[config] {path}: attesa un oggetto JSON al primo livello")
    for key, value in data.items():
        if isinstance(value, dict):
            raise ConfigError(f"[config] {path}: chiave '{key}' annidata, la configurazione deve essere piatta")
        if isinstance(value, list) and any(isinstance(v, (dict, list)) for v in value):
            raise ConfigError(f"[config] {path}: la lista '{key}' deve contenere solo scalari")
    return data


def build_config(file_values: dict[str, Any], overrides: dict[str, Any]) -> ExperimentConfig:
    """I flag da CLI (non None) vincono sui valori del file."""
    given = {k: v for k, v in overrides.items() if v is not None}
    merged = dict(file_values)
    # T e gT sono alternativi: quello passato da CLI sostituisce l'altro del file
    for key, other in (("T", "gT"), ("gT", "T")):
        if key in given and other not in given:
            merged.pop(other, None)
    merged.update(given)
    return ExperimentConfig.model_validate(merged)


def load_figures_map(path: str | Path = FIGURES_MAP_PATH) -> dict:
    if not os.path.exists(path):
        raise ConfigError(f"[config] mappa delle figure non trovata: {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"[config] mappa delle figure non valida ({path}): {e}") from e


def case_preset(name: str, fmap: dict | None = None) -> dict[str, float]:
    cases = (fmap or load_figures_map()).get("cases", {})
    if name not in cases:
        raise ConfigError(f"[config] caso sconosciuto: {name} (validi: {sorted(cases)})")
    return dict(cases[name])
