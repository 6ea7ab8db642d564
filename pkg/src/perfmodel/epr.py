"""Energy-precision scoring and ranking of candidate architectures.

The score M = error^alpha * energy-per-item trades classification accuracy
against energy cost; lower is better, and larger alpha weighs accuracy more
heavily.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .arch import NetworkSpec
from .netpredict import PredictionReport


@dataclass(frozen=True)
class CandidateArch:
    name: str
    error: float    # classification error in [0, 1], e.g. Top-5
    epi_mj: float   # energy per data item, millijoules

    def __post_init__(self):
        if not (0.0 <= self.error <= 1.0):
            raise ValueError(f"error must be in [0, 1], got {self.error}")
        if not (math.isfinite(self.epi_mj) and self.epi_mj > 0):
            raise ValueError(f"epi_mj must be positive, got {self.epi_mj}")


def _check_alpha(alpha) -> int:
    if isinstance(alpha, bool) or not isinstance(alpha, int) or alpha < 1:
        raise ValueError(f"alpha must be a positive integer, got {alpha!r}")
    return alpha


def epr_score(candidate: CandidateArch, alpha: int) -> float:
    """M = error^alpha * epi_mj; lower means a better trade-off."""
    _check_alpha(alpha)
    return candidate.error ** alpha * candidate.epi_mj


def rank(candidates: Sequence[CandidateArch], alpha: int) -> list[CandidateArch]:
    """Candidates in ascending M order; ties break on lower error, then name."""
    if not candidates:
        raise ValueError("no candidates to rank")
    _check_alpha(alpha)
    return sorted(candidates, key=lambda c: (epr_score(c, alpha), c.error, c.name))


def energy_per_item_mj(report: PredictionReport, net: NetworkSpec) -> float:
    """Predicted energy per classified item: total J * 1000 / batch size.

    The batch size is taken from the network's first layer.
    """
    batch = net.layers[0].batch
    return report.total_energy_j * 1000.0 / batch
