"""Robust covariate-specific ROC curve estimation.

Test outcomes in each disease group are modeled with an additive cubic
B-spline location-scale regression fit by Huber M-estimation; the residual
distributions, estimated by truncated-weight empirical CDFs, induce the
covariate-specific ROC curve, its AUC (closed form and Simpson), the Youden
index, robust-AIC knot selection, and a weighted residual bootstrap for
confidence statements.
"""

__version__ = "0.1.0"

from .bootstrap import (BootstrapConfig, BootstrapResult, BootstrapTarget,
                        percentile_interval, residual_bootstrap,
                        unconditional_auc_bootstrap)
from .data import GroupSample
from .errors import DataError, NumericalError, UsageError
from .huber import (FitConfig, RobustFit, huber_psi, huber_rho, huber_weight,
                    irls_fit, mad_scale, ols_as_robust_fit, ols_fit)
from .io import Dataset, RunConfig, load_config, read_csv
from .model_select import (RaicCandidate, RaicReport, default_candidates,
                           knot_grid, raic, raic_penalty, select_knots)
from .roc import (GroupFit, PopulationPair, RocResult, adjusted_values,
                  auc_closed_form, auc_simpson, composite_simpson, fit_group,
                  fit_pair, predict_mean, robust_unconditional_auc, roc_curve,
                  roc_values, unconditional_auc, youden_index)
from .simulate import (ESTIMATORS, McEstimatorSummary, McReport, Scenario,
                       comparator_fit, generate, run_study, scenario,
                       true_auc)
from .splines import (KnotSpec, LinearDesign, SplineSpec, bspline_row,
                      build_design, full_basis_row, knot_sequence)
from .wecdf import WeightedEcdf

__all__ = [
    "__version__",
    "BootstrapConfig", "BootstrapResult", "BootstrapTarget",
    "percentile_interval", "residual_bootstrap", "unconditional_auc_bootstrap",
    "GroupSample", "DataError", "NumericalError", "UsageError",
    "FitConfig", "RobustFit", "huber_psi", "huber_rho", "huber_weight",
    "irls_fit", "mad_scale", "ols_as_robust_fit", "ols_fit",
    "Dataset", "RunConfig", "load_config", "read_csv",
    "RaicCandidate", "RaicReport", "default_candidates", "knot_grid",
    "raic", "raic_penalty", "select_knots",
    "GroupFit", "PopulationPair", "RocResult", "adjusted_values",
    "auc_closed_form", "auc_simpson", "composite_simpson", "fit_group",
    "fit_pair", "predict_mean", "robust_unconditional_auc", "roc_curve",
    "roc_values", "unconditional_auc", "youden_index",
    "ESTIMATORS", "McEstimatorSummary", "McReport", "Scenario",
    "comparator_fit", "generate", "run_study", "scenario", "true_auc",
    "KnotSpec", "LinearDesign", "SplineSpec", "bspline_row", "build_design",
    "full_basis_row", "knot_sequence",
    "WeightedEcdf",
]
