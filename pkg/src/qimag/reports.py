"""Residual-budget containers shared by the two dynamics modules."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict

import numpy as np


@dataclass(frozen=True)
class ContinuityReport:
    """Pointwise budget of a continuity identity.

    Each named term is evaluated separately; `residual` is the signed
    pointwise sum that vanishes in the continuum, and `max_residual` its
    max norm.  A report passes when the total stays within the caller's
    truncation-aware tolerance.
    """

    terms: Dict[str, np.ndarray]
    residual: np.ndarray
    max_residual: float

    def passes(self, tolerance: float) -> bool:
        return self.max_residual <= tolerance

    def term_max(self, name: str) -> float:
        return float(np.max(np.abs(self.terms[name])))


def budget(terms: Dict[str, np.ndarray], signs: Dict[str, float]) -> ContinuityReport:
    """Assemble a report from named terms and their budget signs."""
    residual = None
    for name, sign in signs.items():
        piece = sign * np.asarray(terms[name])
        residual = piece if residual is None else residual + piece
    return ContinuityReport(terms=terms, residual=residual,
                            max_residual=float(np.max(np.abs(residual))))
