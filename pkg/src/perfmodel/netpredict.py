"""Network-level composition of layer predictions and evaluation aggregates.

Total runtime is the sum of per-layer runtimes; average power is the
runtime-weighted mean of per-layer powers; total energy is their product,
identically the scalar product of the runtime and power vectors (in joules,
with the ms * W / 1000 conversion).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .arch import NetworkSpec
from .layermodel import ModelSet, predict_layer


@dataclass(frozen=True)
class LayerPrediction:
    index: int  # 1-based position in the network
    layer_kind: str
    runtime_ms: float
    power_w: float
    energy_j: float
    runtime_clamped: bool
    power_clamped: bool


@dataclass(frozen=True)
class PredictionReport:
    network_name: str
    per_layer: tuple[LayerPrediction, ...]
    total_runtime_ms: float
    avg_power_w: float
    total_energy_j: float

    @property
    def has_clamped(self) -> bool:
        return any(p.runtime_clamped or p.power_clamped for p in self.per_layer)

    def ranking_by_runtime(self) -> tuple[int, ...]:
        """Layer indices, most runtime-hungry first."""
        return tuple(p.index for p in sorted(
            self.per_layer, key=lambda p: (-p.runtime_ms, p.index)))

    def ranking_by_energy(self) -> tuple[int, ...]:
        """Layer indices, most energy-hungry first."""
        return tuple(p.index for p in sorted(
            self.per_layer, key=lambda p: (-p.energy_j, p.index)))


@dataclass(frozen=True)
class ActualAggregates:
    sum_runtime_ms: float
    weighted_power_w: float
    sum_energy_j: float


@dataclass(frozen=True)
class ErrorSummary:
    """Signed relative errors (pred - actual) / actual; positive = overestimate."""

    runtime: float
    power: float
    energy: float


def _aggregate(pairs: Sequence[tuple[float, float]]) -> tuple[float, float, float]:
    total_t = sum(t for t, _ in pairs)
    total_pt = sum(p * t for t, p in pairs)
    return total_t, total_pt / total_t, total_pt / 1000.0


def predict_network(models: ModelSet, net: NetworkSpec) -> PredictionReport:
    """Per-layer predictions plus network totals for a serial network."""
    per_layer = []
    for i, layer in enumerate(net.layers, start=1):
        runtime_model = models.get(layer.kind, "runtime")
        power_model = models.get(layer.kind, "power")
        if runtime_model is None or power_model is None:
            raise ValueError(f"no trained model for layer kind {layer.kind!r} "
                             f"(layer {i} of {net.name!r})")
        t = predict_layer(runtime_model, layer)
        p = predict_layer(power_model, layer)
        per_layer.append(LayerPrediction(
            index=i,
            layer_kind=layer.kind,
            runtime_ms=t.value,
            power_w=p.value,
            energy_j=t.value * p.value / 1000.0,
            runtime_clamped=t.clamped,
            power_clamped=p.clamped,
        ))
    total_t, avg_p, total_e = _aggregate([(p.runtime_ms, p.power_w) for p in per_layer])
    return PredictionReport(
        network_name=net.name,
        per_layer=tuple(per_layer),
        total_runtime_ms=total_t,
        avg_power_w=avg_p,
        total_energy_j=total_e,
    )


def actual_aggregates(measured: Sequence[tuple[float, float]]) -> ActualAggregates:
    """Aggregate measured per-layer (runtime_ms, power_w) pairs."""
    if not measured:
        raise ValueError("no measured layers")
    if any(t <= 0 or p <= 0 for t, p in measured):
        raise ValueError("measured runtime/power values must be positive")
    total_t, avg_p, total_e = _aggregate(measured)
    return ActualAggregates(sum_runtime_ms=total_t, weighted_power_w=avg_p,
                            sum_energy_j=total_e)


def evaluate_network(report: PredictionReport, actual: ActualAggregates) -> ErrorSummary:
    """Signed relative prediction errors against measured aggregates."""
    if actual.sum_runtime_ms == 0 or actual.weighted_power_w == 0 or actual.sum_energy_j == 0:
        raise ValueError("actual aggregates must be non-zero")
    return ErrorSummary(
        runtime=(report.total_runtime_ms - actual.sum_runtime_ms) / actual.sum_runtime_ms,
        power=(report.avg_power_w - actual.weighted_power_w) / actual.weighted_power_w,
        energy=(report.total_energy_j - actual.sum_energy_j) / actual.sum_energy_j,
    )


def suite_rmspe(summaries: Sequence[ErrorSummary]) -> ErrorSummary:
    """Per-quantity RMSPE (in %) over a suite of evaluated networks."""
    if not summaries:
        raise ValueError("no networks evaluated")
    n = len(summaries)

    def _rms(values):
        return (sum(v * v for v in values) / n) ** 0.5 * 100.0

    return ErrorSummary(
        runtime=_rms([s.runtime for s in summaries]),
        power=_rms([s.power for s in summaries]),
        energy=_rms([s.energy for s in summaries]),
    )
