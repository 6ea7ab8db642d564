"""Per-layer-kind predictive models: training, prediction, persistence.

A full model set holds six sparse polynomial models ({conv, fc, pool} x
{runtime, power}). Training runs cross-validated model selection over
(degree, lambda) and refits on all data at the winner; prediction evaluates
the sparse polynomial on the layer's features and floors non-positive values
(flagged) so network aggregation stays total.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import featurize, regress
from .arch import LayerSpec

TARGETS = ("runtime", "power")

POWER_CAP_W = 250.0     # platform max board power; measurements above it warn
POWER_FLOOR_W = 15.0    # idle power, used as the clamp floor for predictions
RUNTIME_FLOOR_MS = 0.001

MIN_TRAIN_SAMPLES = 20

MODEL_FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """A model file is missing, malformed, or of an unknown version."""


@dataclass(frozen=True)
class MeasurementSample:
    """One profiled observation of a layer: runtime (ms) and average power (W)."""

    layer: LayerSpec
    runtime_ms: float
    power_w: float

    def __post_init__(self):
        if not (math.isfinite(self.runtime_ms) and self.runtime_ms > 0):
            raise ValueError(f"runtime_ms must be positive, got {self.runtime_ms}")
        if not (math.isfinite(self.power_w) and self.power_w > 0):
            raise ValueError(f"power_w must be positive, got {self.power_w}")
        if self.power_w > POWER_CAP_W:
            warnings.warn(
                f"measured power {self.power_w} W exceeds the platform cap {POWER_CAP_W} W",
                stacklevel=2,
            )


@dataclass(frozen=True)
class PolynomialModel:
    """A trained sparse polynomial for one (layer kind, target) pair.

    `coefficients` maps design-matrix column index to its original-scale
    weight: indices below the basis size are monomial terms (index 0 is the
    intercept/constant monomial), the rest are the special cost terms.
    Exact zeros are omitted.
    """

    layer_kind: str
    target: str
    degree: int
    basis: featurize.MonomialBasis
    scaler: regress.Scaler | None
    coefficients: Mapping[int, float]
    lam: float
    train_rmspe: float | None = None
    cv_report: regress.CvReport | None = None

    def __post_init__(self):
        expected = featurize.feature_dim(self.layer_kind, self.target)
        if self.basis.dimension != expected:
            raise ValueError(
                f"{self.layer_kind}/{self.target} basis dimension must be "
                f"{expected}, got {self.basis.dimension}"
            )
        n_special = len(featurize.SPECIAL_NAMES[self.layer_kind])
        width = len(self.basis) + n_special
        for idx, c in self.coefficients.items():
            if not (0 <= idx < width):
                raise ValueError(f"coefficient index {idx} outside design width {width}")
            if not math.isfinite(c):
                raise ValueError(f"coefficient {idx} is not finite")
        object.__setattr__(self, "coefficients", dict(self.coefficients))


@dataclass(frozen=True)
class Prediction:
    value: float
    clamped: bool


@dataclass(frozen=True)
class ModelSet:
    """A set of per-(kind, target) models; a complete set holds all six."""

    models: Mapping[tuple[str, str], PolynomialModel]
    platform_tag: str = ""
    created_at: str = ""

    def __post_init__(self):
        for (kind, target), model in self.models.items():
            if model.layer_kind != kind or model.target != target:
                raise ValueError(f"model filed under {(kind, target)} is for "
                                 f"{(model.layer_kind, model.target)}")
        object.__setattr__(self, "models", dict(self.models))

    def get(self, kind: str, target: str) -> PolynomialModel | None:
        return self.models.get((kind, target))

    @property
    def complete(self) -> bool:
        return all((k, t) in self.models for k in ("conv", "fc", "pool") for t in TARGETS)


def build_training_data(samples: Sequence[MeasurementSample], target: str) -> regress.TrainingData:
    """Feature matrix, special-term matrix, and targets for one layer kind."""
    if not samples:
        raise ValueError("no samples")
    kind = samples[0].layer.kind
    if any(s.layer.kind != kind for s in samples):
        raise ValueError("samples mix layer kinds")
    if target not in TARGETS:
        raise ValueError(f"unknown target {target!r}")
    feats = [featurize.features_for(s.layer, target) for s in samples]
    specials = [featurize.special_terms(s.layer) for s in samples]
    y = [s.runtime_ms if target == "runtime" else s.power_w for s in samples]
    return regress.TrainingData(
        raw=np.array([f.values for f in feats]),
        specials=np.array([sp.values for sp in specials]),
        y=np.array(y),
        feature_names=feats[0].names,
        special_names=specials[0].names,
    )


def train_layer_model(samples: Sequence[MeasurementSample], target: str,
                      degrees: Sequence[int] = (1, 2, 3), *,
                      folds: int = 10, lambda_count: int = 30, seed: int = 0,
                      tol: float = 1e-7, max_iter: int = 10_000,
                      kkt_tol: float = 1e-6) -> PolynomialModel:
    """Select (degree, lambda) by cross-validation and refit on all samples."""
    if len(samples) < MIN_TRAIN_SAMPLES:
        raise ValueError(
            f"need at least {MIN_TRAIN_SAMPLES} samples to train, got {len(samples)}"
        )
    data = build_training_data(samples, target)
    report = regress.cross_validate(data, degrees, lambda_count, folds, seed,
                                    tol=tol, max_iter=max_iter, kkt_tol=kkt_tol)
    X = regress.design_matrix(data, report.best_degree)
    _, scaler = regress.standardize(X)
    fit = regress.fit_lasso(X, data.y, report.best_lambda,
                            tol=tol, max_iter=max_iter, kkt_tol=kkt_tol)
    train_rmspe = regress.rmspe(X.values @ fit.coefficients, data.y)
    kind = samples[0].layer.kind
    return PolynomialModel(
        layer_kind=kind,
        target=target,
        degree=report.best_degree,
        basis=featurize.build_basis(featurize.feature_dim(kind, target), report.best_degree),
        scaler=scaler,
        coefficients={int(j): float(c) for j, c in enumerate(fit.coefficients) if c != 0.0},
        lam=fit.lam,
        train_rmspe=train_rmspe,
        cv_report=report,
    )


def evaluate_polynomial(model: PolynomialModel, layer: LayerSpec) -> float:
    """Raw (unclamped) value of the sparse polynomial at one layer."""
    if layer.kind != model.layer_kind:
        raise ValueError(
            f"model is for {model.layer_kind!r} layers, got {layer.kind!r}"
        )
    x = featurize.features_for(layer, model.target).values
    specials = featurize.special_terms(layer).values
    nbasis = len(model.basis)
    total = 0.0
    for idx in sorted(model.coefficients):
        c = model.coefficients[idx]
        if idx < nbasis:
            term = 1.0
            for xi, q in zip(x, model.basis.exponents[idx]):
                if q:
                    term *= xi ** q
            total += c * term
        else:
            total += c * specials[idx - nbasis]
    return total


def predict_layer(model: PolynomialModel, layer: LayerSpec) -> Prediction:
    """Evaluate the model; non-positive raw values are floored and flagged."""
    raw = evaluate_polynomial(model, layer)
    floor = RUNTIME_FLOOR_MS if model.target == "runtime" else POWER_FLOOR_W
    if raw <= 0.0:
        return Prediction(value=floor, clamped=True)
    return Prediction(value=raw, clamped=False)


# --- persistence ------------------------------------------------------------

def _model_to_json(model: PolynomialModel) -> dict:
    return {
        "layer_kind": model.layer_kind,
        "target": model.target,
        "degree": model.degree,
        "basis": {
            "dimension": model.basis.dimension,
            "degree": model.basis.degree,
            "exponents": [list(e) for e in model.basis.exponents],
        },
        "scaler": None if model.scaler is None else {
            "means": list(model.scaler.means),
            "stds": list(model.scaler.stds),
            "constant": list(model.scaler.constant),
        },
        "coefficients": {str(j): repr(c) for j, c in sorted(model.coefficients.items())},
        "lambda": model.lam,
        "train_rmspe": model.train_rmspe,
        "cv": None if model.cv_report is None else {
            "fold_seed": model.cv_report.fold_seed,
            "rng": model.cv_report.rng,
            "best_degree": model.cv_report.best_degree,
            "best_lambda": model.cv_report.best_lambda,
            "grid": [[g.degree, g.lam, g.cv_rmse, g.cv_rmspe] for g in model.cv_report.grid],
        },
    }


def _require(doc: dict, key: str, path: str):
    if key not in doc:
        raise ModelFormatError(f"missing {path}.{key}")
    return doc[key]


def _model_from_json(doc: dict, path: str) -> PolynomialModel:
    try:
        basis_doc = _require(doc, "basis", path)
        basis = featurize.MonomialBasis(
            dimension=int(_require(basis_doc, "dimension", f"{path}.basis")),
            degree=int(_require(basis_doc, "degree", f"{path}.basis")),
            exponents=tuple(tuple(int(q) for q in e)
                            for e in _require(basis_doc, "exponents", f"{path}.basis")),
        )
        scaler_doc = _require(doc, "scaler", path)
        scaler = None if scaler_doc is None else regress.Scaler(
            means=tuple(float(v) for v in scaler_doc["means"]),
            stds=tuple(float(v) for v in scaler_doc["stds"]),
            constant=tuple(bool(v) for v in scaler_doc["constant"]),
        )
        cv_doc = _require(doc, "cv", path)
        cv = None if cv_doc is None else regress.CvReport(
            grid=tuple(regress.GridPoint(int(d), float(l), float(e), float(p))
                       for d, l, e, p in cv_doc["grid"]),
            best_degree=int(cv_doc["best_degree"]),
            best_lambda=float(cv_doc["best_lambda"]),
            fold_seed=int(cv_doc["fold_seed"]),
            rng=str(cv_doc["rng"]),
        )
        train_rmspe = _require(doc, "train_rmspe", path)
        return PolynomialModel(
            layer_kind=str(_require(doc, "layer_kind", path)),
            target=str(_require(doc, "target", path)),
            degree=int(_require(doc, "degree", path)),
            basis=basis,
            scaler=scaler,
            coefficients={int(j): float(c)
                          for j, c in _require(doc, "coefficients", path).items()},
            lam=float(_require(doc, "lambda", path)),
            train_rmspe=None if train_rmspe is None else float(train_rmspe),
            cv_report=cv,
        )
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"bad model entry at {path}: {exc}") from exc


def save_model_set(model_set: ModelSet, path) -> None:
    """Write a complete six-model set as versioned JSON (full float precision)."""
    if not model_set.complete:
        raise ValueError("model set must contain all six (kind, target) models")
    doc = {
        "format": MODEL_FORMAT_VERSION,
        "platform_tag": model_set.platform_tag,
        "created_at": model_set.created_at,
        "models": {f"{kind}.{target}": _model_to_json(model)
                   for (kind, target), model in model_set.models.items()},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_model_set(path) -> ModelSet:
    """Load and validate a model file; raises ModelFormatError on any defect."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict) or "format" not in doc:
        raise ModelFormatError("not a model file: missing format field")
    if doc["format"] != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format version {doc['format']!r} "
            f"(expected {MODEL_FORMAT_VERSION})"
        )
    models_doc = _require(doc, "models", "$")
    models = {}
    for key, entry in models_doc.items():
        kind, _, target = key.partition(".")
        model = _model_from_json(entry, f"models.{key}")
        if (model.layer_kind, model.target) != (kind, target):
            raise ModelFormatError(f"model under key {key} declares "
                                   f"{model.layer_kind}.{model.target}")
        models[(kind, target)] = model
    model_set = ModelSet(
        models=models,
        platform_tag=str(doc.get("platform_tag", "")),
        created_at=str(doc.get("created_at", "")),
    )
    if not model_set.complete:
        missing = [f"{k}.{t}" for k in ("conv", "fc", "pool") for t in TARGETS
                   if (k, t) not in models]
        raise ModelFormatError(f"model file missing entries: {missing}")
    return model_set
