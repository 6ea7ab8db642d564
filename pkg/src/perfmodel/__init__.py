"""Layer-wise runtime/power/energy prediction for serial CNNs.

Learns per-layer-kind sparse polynomial models of runtime and power from
profiled measurements, composes them into whole-network predictions with
per-layer breakdowns, and ranks candidate architectures by their
energy-precision trade-off.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .arch import (Conv, DerivedQuantities, FullyConnected, LayerSpec, NetworkSpec,
                   Pool, TensorShape, conv_output_side, derive_quantities, parse_network)
from .epr import CandidateArch, energy_per_item_mj, epr_score, rank
from .featurize import (FeatureVector, MonomialBasis, SpecialTerms, build_basis,
                        expand, power_features, runtime_features, special_terms)
from .layermodel import (MeasurementSample, ModelSet, PolynomialModel, Prediction,
                         load_model_set, predict_layer, save_model_set,
                         train_layer_model)
from .netpredict import (ActualAggregates, ErrorSummary, PredictionReport,
                         actual_aggregates, evaluate_network, predict_network,
                         suite_rmspe)
from .regress import (CvReport, DesignMatrix, LassoFit, Scaler, TrainingData,
                      cross_validate, fit_lasso, kkt_violation, lambda_max,
                      lambda_path, rmse, rmspe, standardize)
from .synth import SynthConfig, generate

__version__ = "0.1.0"
