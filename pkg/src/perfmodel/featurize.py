"""Feature vectors, special cost terms, and the monomial expansion basis.

Runtime features are the raw layer hyper-parameters (with derived output
sizes); power features append log1p of every runtime feature, doubling the
dimension. Special terms are the physically motivated regressors (memory
element counts and FLOPs) appended to the design matrix as raw columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .arch import Conv, FullyConnected, LayerSpec, Pool, conv_output_side, derive_quantities

RUNTIME_DIM = {"conv": 10, "fc": 3, "pool": 7}

SPECIAL_NAMES = {
    "conv": ("mem_in", "mem_out", "mem_kernel", "flops"),
    "fc": ("mem_in", "mem_out", "mem_kernel", "flops"),
    "pool": ("mem_in", "mem_out", "flops"),
}

TARGETS = ("runtime", "power")


def feature_dim(layer_kind: str, target: str) -> int:
    """Fixed feature-vector length for a (layer kind, target) pair."""
    d = RUNTIME_DIM[layer_kind]
    return d if target == "runtime" else 2 * d


@dataclass(frozen=True)
class FeatureVector:
    layer_kind: str
    target: str
    values: tuple[float, ...]
    names: tuple[str, ...]

    def __post_init__(self):
        expected = feature_dim(self.layer_kind, self.target)
        if len(self.values) != expected or len(self.names) != expected:
            raise ValueError(
                f"{self.layer_kind}/{self.target} feature vector must have "
                f"length {expected}, got {len(self.values)}"
            )
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("feature values must be finite")


@dataclass(frozen=True)
class SpecialTerms:
    values: tuple[float, ...]
    names: tuple[str, ...]

    def __post_init__(self):
        if len(self.values) != len(self.names):
            raise ValueError("special term values/names length mismatch")
        if any(v < 0 for v in self.values):
            raise ValueError("special terms must be non-negative")


def runtime_features(layer: LayerSpec) -> FeatureVector:
    """Raw hyper-parameter feature vector used by the runtime models."""
    if isinstance(layer, Conv):
        out_h = conv_output_side(layer.in_h, layer.kernel, layer.stride, layer.padding)
        out_w = conv_output_side(layer.in_w, layer.kernel, layer.stride, layer.padding)
        names = ("batch", "in_channels", "in_h", "in_w", "kernel", "stride",
                 "padding", "out_channels", "out_h", "out_w")
        values = (layer.batch, layer.in_channels, layer.in_h, layer.in_w,
                  layer.kernel, layer.stride, layer.padding,
                  layer.out_channels, out_h, out_w)
    elif isinstance(layer, FullyConnected):
        names = ("batch", "in_size", "out_size")
        values = (layer.batch, layer.in_size, layer.out_size)
    elif isinstance(layer, Pool):
        # out side computed along the height axis; pool padding stays out of
        # the feature vector (it still affects the derived quantities)
        out_side = conv_output_side(layer.in_h, layer.kernel, layer.stride, layer.padding)
        names = ("batch", "channels", "in_h", "in_w", "kernel", "stride", "out_side")
        values = (layer.batch, layer.channels, layer.in_h, layer.in_w,
                  layer.kernel, layer.stride, out_side)
    else:
        raise TypeError(f"unknown layer type: {type(layer).__name__}")
    return FeatureVector(layer.kind, "runtime", tuple(float(v) for v in values), names)


def power_features(layer: LayerSpec) -> FeatureVector:
    """Runtime features followed by log1p of each, in the same order."""
    base = runtime_features(layer)
    values = base.values + tuple(math.log1p(v) for v in base.values)
    names = base.names + tuple(f"log1p_{n}" for n in base.names)
    return FeatureVector(layer.kind, "power", values, names)


def features_for(layer: LayerSpec, target: str) -> FeatureVector:
    if target == "runtime":
        return runtime_features(layer)
    if target == "power":
        return power_features(layer)
    raise ValueError(f"unknown target {target!r}")


def special_terms(layer: LayerSpec) -> SpecialTerms:
    """Memory element counts and FLOPs in the fixed per-kind order."""
    q = derive_quantities(layer)
    if isinstance(layer, Pool):
        values = (q.mem_in, q.mem_out, q.flops)
    else:
        values = (q.mem_in, q.mem_out, q.mem_kernel, q.flops)
    return SpecialTerms(tuple(float(v) for v in values), SPECIAL_NAMES[layer.kind])


@dataclass(frozen=True)
class MonomialBasis:
    """Every exponent tuple with total degree <= degree, in graded-lex order."""

    dimension: int
    degree: int
    exponents: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.exponents)


def _compositions(total: int, dim: int):
    # all dim-tuples of non-negative ints summing to total, ascending lex
    if dim == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, dim - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def build_basis(dimension: int, degree: int) -> MonomialBasis:
    """Monomial basis of the given dimension and maximum total degree.

    The first entry is always the all-zero tuple (the constant term); the
    order is graded lexicographic and stable across runs and platforms.
    """
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    if degree < 0:
        raise ValueError("degree must be >= 0")
    exps = []
    for total in range(degree + 1):
        exps.extend(_compositions(total, dimension))
    return MonomialBasis(dimension, degree, tuple(exps))


def monomial_name(exponents: Sequence[int], feature_names: Sequence[str]) -> str:
    parts = []
    for q, name in zip(exponents, feature_names):
        if q == 1:
            parts.append(name)
        elif q > 1:
            parts.append(f"{name}^{q}")
    return "*".join(parts) if parts else "1"


def expand(basis: MonomialBasis, x: Sequence[float]) -> list[float]:
    """Evaluate every basis monomial at x; entry 0 is the constant 1."""
    if len(x) != basis.dimension:
        raise ValueError(f"expected {basis.dimension} features, got {len(x)}")
    out = []
    for exps in basis.exponents:
        term = 1.0
        for xi, q in zip(x, exps):
            if q:
                term *= float(xi) ** q
        out.append(term)
    return out


def expand_rows(basis: MonomialBasis, X: np.ndarray) -> np.ndarray:
    """Row-wise monomial expansion: (n, dimension) -> (n, len(basis))."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != basis.dimension:
        raise ValueError(f"expected (n, {basis.dimension}) feature matrix, got {X.shape}")
    n = X.shape[0]
    out = np.empty((n, len(basis)), dtype=np.float64)
    for j, exps in enumerate(basis.exponents):
        col = np.ones(n, dtype=np.float64)
        for i, q in enumerate(exps):
            if q == 1:
                col = col * X[:, i]
            elif q > 1:
                col = col * X[:, i] ** q
        out[:, j] = col
    return out
