"""Synthetic measurement generator with a hidden ground-truth model set.

Samples layer hyper-parameters from configured ranges, evaluates hidden
sparse polynomial models (positive over the whole sampling envelope by
construction: non-negative term coefficients plus a positive intercept),
adds multiplicative Gaussian noise, and returns both the noisy samples and
the hidden truth as a loadable model set. Everything is driven by one seeded
generator in a fixed draw order, so equal configs give identical output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import featurize
from .arch import Conv, FullyConnected, LayerSpec, Pool
from .layermodel import (MeasurementSample, ModelSet, PolynomialModel,
                         evaluate_polynomial)

DEFAULT_COUNTS = {"conv": 858, "fc": 116, "pool": 216}

DEFAULT_RANGES = {
    "conv": {"batch": (1, 32), "in_channels": (3, 128), "in_h": (7, 56), "in_w": (7, 56),
             "out_channels": (8, 256), "kernel": (1, 7), "stride": (1, 4), "padding": (0, 3)},
    "fc": {"batch": (1, 64), "in_size": (64, 4096), "out_size": (10, 4096)},
    "pool": {"batch": (1, 32), "channels": (8, 256), "in_h": (7, 56), "in_w": (7, 56),
             "kernel": (2, 4), "stride": (1, 3), "padding": (0, 0)},
}

# degrees of the hidden models in "random" mode
DEFAULT_HIDDEN_DEGREES = {
    ("conv", "runtime"): 3, ("fc", "runtime"): 2, ("pool", "runtime"): 3,
    ("conv", "power"): 2, ("fc", "power"): 2, ("pool", "power"): 2,
}

RUNTIME_TERM_MS = 2.0        # mean contribution of one hidden runtime term
POWER_TERM_W = 25.0          # mean contribution of one hidden power term
POWER_TERM_CAP_W = 195.0     # hidden power terms are rescaled to this max
POWER_INTERCEPT_W = 25.0


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    counts: dict = field(default_factory=lambda: dict(DEFAULT_COUNTS))
    noise_pct: float = 3.0
    hidden: object = "random"   # "random" or explicit per "kind.target" spec
    term_budget: int = 5
    ranges: dict = field(default_factory=lambda: {k: dict(v) for k, v in DEFAULT_RANGES.items()})

    def __post_init__(self):
        if any(c < 0 for c in self.counts.values()):
            raise ValueError("sample counts must be >= 0")
        if self.noise_pct < 0:
            raise ValueError("noise_pct must be >= 0")
        if self.term_budget < 1:
            raise ValueError("term_budget must be >= 1")

    @classmethod
    def from_dict(cls, doc: dict) -> "SynthConfig":
        counts = dict(DEFAULT_COUNTS)
        counts.update(doc.get("counts", {}))
        ranges = {k: dict(v) for k, v in DEFAULT_RANGES.items()}
        for kind, fields_ in doc.get("ranges", {}).items():
            if kind not in ranges:
                raise ValueError(f"unknown layer kind in ranges: {kind!r}")
            for name, pair in fields_.items():
                if name not in ranges[kind]:
                    raise ValueError(f"unknown range field {kind}.{name}")
                lo, hi = int(pair[0]), int(pair[1])
                if lo > hi:
                    raise ValueError(f"empty range for {kind}.{name}: [{lo}, {hi}]")
                ranges[kind][name] = (lo, hi)
        return cls(
            seed=int(doc.get("seed", 0)),
            counts=counts,
            noise_pct=float(doc.get("noise_pct", 3.0)),
            hidden=doc.get("hidden", "random"),
            term_budget=int(doc.get("term_budget", 5)),
            ranges=ranges,
        )


def _sample_layers(kind: str, count: int, ranges: dict, rng: np.random.Generator) -> list[LayerSpec]:
    draws = {}
    for name, (lo, hi) in ranges.items():
        draws[name] = rng.integers(lo, hi + 1, size=count)
    layers = []
    for i in range(count):
        vals = {name: int(col[i]) for name, col in draws.items()}
        if kind in ("conv", "pool"):
            # keep the window inside the padded input, whatever the ranges say
            limit = min(vals["in_h"], vals["in_w"]) + 2 * vals["padding"]
            vals["kernel"] = max(1, min(vals["kernel"], limit))
        if kind == "conv":
            layers.append(Conv(**vals))
        elif kind == "fc":
            layers.append(FullyConnected(**vals))
        else:
            layers.append(Pool(**vals))
    return layers


def _monomial_column(F: np.ndarray, exponents: Sequence[int]) -> np.ndarray:
    col = np.ones(F.shape[0])
    for i, q in enumerate(exponents):
        if q:
            col = col * F[:, i] ** q
    return col


def _random_hidden_model(kind: str, target: str, degree: int, layers: Sequence[LayerSpec],
                         term_budget: int, rng: np.random.Generator) -> PolynomialModel:
    """Draw a sparse positive polynomial whose terms matter at the sampled scale.

    One term is forced to be a pure interaction of `degree` distinct features
    (with triple weight) so the hidden degree is identifiable from data; each
    coefficient is scaled by the inverse mean of its column so every term
    contributes at the target magnitude.
    """
    dim = featurize.feature_dim(kind, target)
    basis = featurize.build_basis(dim, degree)
    F = np.array([featurize.features_for(lay, target).values for lay in layers])
    S = np.array([featurize.special_terms(lay).values for lay in layers])

    interaction = [j for j, e in enumerate(basis.exponents)
                   if sum(e) == degree and max(e) == 1]
    forced = int(rng.choice(interaction))
    pool = [j for j in range(1, len(basis)) if j != forced]
    n_extra = min(term_budget - 1, len(pool))
    extra = [int(j) for j in rng.choice(pool, size=n_extra, replace=False)]

    term_scale = RUNTIME_TERM_MS if target == "runtime" else POWER_TERM_W
    coefs: dict[int, float] = {}
    for j, weight in [(forced, 3.0)] + [(j, 1.0) for j in extra]:
        col = _monomial_column(F, basis.exponents[j])
        u = float(rng.uniform(0.5, 1.5))
        coefs[j] = weight * u * term_scale / float(col.mean())
    flops_idx = S.shape[1] - 1  # flops is the last special column
    u = float(rng.uniform(0.5, 1.5))
    coefs[len(basis) + flops_idx] = u * term_scale / float(S[:, flops_idx].mean())

    if target == "runtime":
        intercept = float(rng.uniform(0.2, 1.0))
    else:
        intercept = POWER_INTERCEPT_W
        total = np.zeros(len(layers))
        for j, c in coefs.items():
            col = (_monomial_column(F, basis.exponents[j]) if j < len(basis)
                   else S[:, j - len(basis)])
            total += c * col
        peak = float(total.max()) if len(layers) else 0.0
        if peak > POWER_TERM_CAP_W:
            scale = POWER_TERM_CAP_W / peak
            coefs = {j: c * scale for j, c in coefs.items()}
    coefs[0] = intercept
    return PolynomialModel(layer_kind=kind, target=target, degree=degree,
                           basis=basis, scaler=None, coefficients=coefs, lam=0.0)


def _explicit_hidden_model(kind: str, target: str, spec: dict) -> PolynomialModel:
    degree = int(spec["degree"])
    dim = featurize.feature_dim(kind, target)
    basis = featurize.build_basis(dim, degree)
    special_names = featurize.SPECIAL_NAMES[kind]
    coefs = {0: float(spec.get("intercept", 0.0))}
    for term in spec.get("terms", ()):
        coef = float(term["coef"])
        if "special" in term:
            idx = len(basis) + special_names.index(term["special"])
        else:
            exps = tuple(int(q) for q in term["exponents"])
            idx = basis.exponents.index(exps)
        coefs[idx] = coef
    return PolynomialModel(layer_kind=kind, target=target, degree=degree,
                           basis=basis, scaler=None, coefficients=coefs, lam=0.0)


def generate(config: SynthConfig) -> tuple[list[MeasurementSample], ModelSet]:
    """Produce noisy measurement samples and the hidden truth model set."""
    rng = np.random.default_rng(config.seed)
    layers_by_kind = {kind: _sample_layers(kind, config.counts.get(kind, 0),
                                           config.ranges[kind], rng)
                      for kind in ("conv", "fc", "pool")}

    models = {}
    for kind in ("conv", "fc", "pool"):
        for target in ("runtime", "power"):
            if config.hidden == "random":
                degree = DEFAULT_HIDDEN_DEGREES[(kind, target)]
                models[(kind, target)] = _random_hidden_model(
                    kind, target, degree, layers_by_kind[kind], config.term_budget, rng)
            else:
                models[(kind, target)] = _explicit_hidden_model(
                    kind, target, config.hidden[f"{kind}.{target}"])
    truth = ModelSet(models=models, platform_tag="synthetic",
                     created_at="")

    sigma = config.noise_pct / 100.0
    samples = []
    for kind in ("conv", "fc", "pool"):
        layers = layers_by_kind[kind]
        if not layers:
            continue
        runtime = np.array([evaluate_polynomial(models[(kind, "runtime")], lay)
                            for lay in layers])
        power = np.array([evaluate_polynomial(models[(kind, "power")], lay)
                          for lay in layers])
        noise_t = rng.normal(0.0, sigma, size=len(layers)) if sigma > 0 else np.zeros(len(layers))
        noise_p = rng.normal(0.0, sigma, size=len(layers)) if sigma > 0 else np.zeros(len(layers))
        runtime_noisy = np.maximum(runtime * (1.0 + noise_t), runtime * 1e-3)
        power_noisy = np.maximum(power * (1.0 + noise_p), power * 1e-3)
        samples.extend(
            MeasurementSample(lay, float(t), float(p))
            for lay, t, p in zip(layers, runtime_noisy, power_noisy)
        )
    return samples, truth
