# eprlab/errors.py
"""
Gerarchia delle eccezioni del laboratorio.

Il runner CLI mappa queste classi sugli exit code:
- ConfigError (e ValidationError di pydantic) -> 2
- DomainError, EstimationError, StabilityError -> 3
"""

from __future__ import annotations

from typing import Any


class LabError(Exception):
    """Base di tutte le eccezioni del pacchetto."""


class DomainError(LabError, ValueError):
    """Precondizione numerica violata (input fuori dominio)."""


class RangeError(DomainError):
    """Parametro di squeezing oltre il limite consentito."""


class PreconditionError(DomainError):
    """Input di un lemma che non ne rispetta le ipotesi."""


class UnboundedBoundError(DomainError):
    """Il bound U_B diverge: P+ e' numericamente nulla."""


class EstimationError(LabError):
    """Campioni insufficienti per una stima; porta con se' la diagnostica dei bin."""

    def __init__(self, message: str, diagnostics: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class StabilityError(LabError):
    """Passo temporale troppo grande rispetto al rate (g·dt > 0.1)."""


class ConfigError(LabError):
    """Configurazione non valida, modalita'/figura sconosciuta o path non scrivibile."""
