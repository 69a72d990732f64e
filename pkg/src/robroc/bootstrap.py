"""Weighted residual bootstrap for ROC, AUC, and Youden index uncertainty.

Each replicate resamples standardized residuals within each group with
probabilities proportional to the truncated weights, rebuilds outcomes on
the original covariate rows as

    y*_gi = mu_hat_g(x_gi) + sigma_hat_g * eps*_gi,

refits both groups with the knot layout frozen at the observed-data choice,
and re-evaluates the requested summaries.  Confidence intervals are
percentile intervals with nearest-rank order statistics: with B successful
replicates the q-quantile is the ceil(q * B)-th sorted value.

Replicate b draws from an RNG stream derived deterministically from
(seed, b), so results do not depend on execution order and are reproducible
for a fixed configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import GroupSample
from .errors import NumericalError
from .huber import FitConfig, irls_fit
from .roc import (GroupFit, PopulationPair, auc_closed_form, roc_values,
                  unconditional_auc, youden_index)
from .wecdf import WeightedEcdf

FAILURE_WARNING_FRACTION = 0.05


@dataclass
class BootstrapConfig:
    n_replicates: int = 1000
    alpha: float = 0.05
    seed: int = 0
    keep_replicates: bool = False

    def __post_init__(self):
        if self.n_replicates < 1:
            raise ValueError("need at least one bootstrap replicate")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")


@dataclass
class BootstrapTarget:
    """One covariate point to evaluate, with optional ROC grid and Youden."""

    x: np.ndarray
    t_grid: np.ndarray | None = None
    youden: bool = False


@dataclass
class TargetResult:
    x: np.ndarray
    auc: float
    auc_lower: float
    auc_upper: float
    roc: np.ndarray | None = None
    roc_lower: np.ndarray | None = None
    roc_upper: np.ndarray | None = None
    youden: tuple[float, float] | None = None
    youden_lower: float | None = None
    youden_upper: float | None = None
    auc_replicates: np.ndarray | None = field(default=None, repr=False)


@dataclass
class BootstrapResult:
    targets: list[TargetResult]
    n_replicates: int
    n_failed: int
    n_nonconverged: int
    unreliable: bool


def percentile_interval(values, alpha: float) -> tuple[float, float]:
    """Nearest-rank percentile interval over replicate values."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        raise ValueError("no replicate values")
    lo = _nearest_rank(v, alpha / 2.0)
    hi = _nearest_rank(v, 1.0 - alpha / 2.0)
    return lo, hi


def _nearest_rank(sorted_values: np.ndarray, q: float) -> float:
    rank = max(1, math.ceil(q * sorted_values.size))
    return float(sorted_values[rank - 1])


def _resample_indices(rng: np.random.Generator, weights: np.ndarray) -> np.ndarray:
    p = weights / weights.sum()
    return rng.choice(weights.size, size=weights.size, replace=True, p=p)


def _group_ingredients(group: GroupFit, sample: GroupSample):
    Z = group.design.matrix(sample.covariates)
    mu_rows = Z @ group.fit.beta
    return Z, mu_rows


def residual_bootstrap(pair: PopulationPair, nondiseased: GroupSample,
                       diseased: GroupSample, targets,
                       config: BootstrapConfig | None = None,
                       fit_config: FitConfig | None = None) -> BootstrapResult:
    """Bootstrap confidence intervals for AUC(x), and optionally ROC(t | x)
    bands and the Youden index, at each requested target.

    Replicates that fail numerically are skipped and counted; if more than
    5% fail, the result is flagged unreliable.  Non-converged refits are
    used but counted separately.
    """
    cfg = config or BootstrapConfig()
    fcfg = fit_config or FitConfig(tuning=pair.nondiseased.fit.tuning,
                                   truncation=pair.nondiseased.fit.truncation)
    targets = [t if isinstance(t, BootstrapTarget) else BootstrapTarget(x=np.atleast_1d(np.asarray(t, dtype=float)))
               for t in targets]
    if not targets:
        raise ValueError("no bootstrap targets")

    Z_nd, mu_nd = _group_ingredients(pair.nondiseased, nondiseased)
    Z_d, mu_d = _group_ingredients(pair.diseased, diseased)
    eps_nd = pair.nondiseased.fit.std_residuals
    eps_d = pair.diseased.fit.std_residuals
    w_nd = pair.nondiseased.fit.truncated_weights
    w_d = pair.diseased.fit.truncated_weights
    sig_nd = pair.nondiseased.fit.sigma
    sig_d = pair.diseased.fit.sigma

    auc_reps = [[] for _ in targets]
    roc_reps: list[list[np.ndarray]] = [[] for _ in targets]
    yi_reps = [[] for _ in targets]
    n_failed = 0
    n_nonconverged = 0
    for b in range(cfg.n_replicates):
        rng = np.random.default_rng((cfg.seed, b))
        idx_nd = _resample_indices(rng, w_nd)
        idx_d = _resample_indices(rng, w_d)
        y_nd = mu_nd + sig_nd * eps_nd[idx_nd]
        y_d = mu_d + sig_d * eps_d[idx_d]
        try:
            fit_nd = irls_fit(Z_nd, y_nd, fcfg, beta_init=pair.nondiseased.fit.beta)
            fit_d = irls_fit(Z_d, y_d, fcfg, beta_init=pair.diseased.fit.beta)
            rep_pair = PopulationPair(
                nondiseased=GroupFit(
                    fit=fit_nd, design=pair.nondiseased.design,
                    ecdf=WeightedEcdf.from_residuals(fit_nd.std_residuals,
                                                     fit_nd.truncated_weights),
                    label=pair.nondiseased.label),
                diseased=GroupFit(
                    fit=fit_d, design=pair.diseased.design,
                    ecdf=WeightedEcdf.from_residuals(fit_d.std_residuals,
                                                     fit_d.truncated_weights),
                    label=pair.diseased.label),
            )
            evals = []
            for tgt in targets:
                a = auc_closed_form(rep_pair, tgt.x)
                r = roc_values(rep_pair, tgt.x, tgt.t_grid) if tgt.t_grid is not None else None
                yi = youden_index(rep_pair, tgt.x)[0] if tgt.youden else None
                evals.append((a, r, yi))
        except NumericalError:
            n_failed += 1
            continue
        if not (fit_nd.converged and fit_d.converged):
            n_nonconverged += 1
        for k, (a, r, yi) in enumerate(evals):
            auc_reps[k].append(a)
            if r is not None:
                roc_reps[k].append(r)
            if yi is not None:
                yi_reps[k].append(yi)

    if n_failed == cfg.n_replicates:
        raise NumericalError("every bootstrap replicate failed")

    results = []
    for k, tgt in enumerate(targets):
        auc_hat = auc_closed_form(pair, tgt.x)
        a_lo, a_hi = percentile_interval(auc_reps[k], cfg.alpha)
        res = TargetResult(x=tgt.x, auc=auc_hat, auc_lower=a_lo, auc_upper=a_hi)
        if tgt.t_grid is not None:
            reps = np.vstack(roc_reps[k])
            res.roc = roc_values(pair, tgt.x, tgt.t_grid)
            lo = np.empty(reps.shape[1])
            hi = np.empty(reps.shape[1])
            for j in range(reps.shape[1]):
                lo[j], hi[j] = percentile_interval(reps[:, j], cfg.alpha)
            res.roc_lower, res.roc_upper = lo, hi
        if tgt.youden:
            res.youden = youden_index(pair, tgt.x)
            res.youden_lower, res.youden_upper = percentile_interval(yi_reps[k], cfg.alpha)
        if cfg.keep_replicates:
            res.auc_replicates = np.asarray(auc_reps[k])
        results.append(res)

    return BootstrapResult(
        targets=results,
        n_replicates=cfg.n_replicates,
        n_failed=n_failed,
        n_nonconverged=n_nonconverged,
        unreliable=n_failed > FAILURE_WARNING_FRACTION * cfg.n_replicates,
    )


def unconditional_auc_bootstrap(y_nondiseased, y_diseased,
                                config: BootstrapConfig | None = None,
                                fit_config: FitConfig | None = None
                                ) -> tuple[float, float, float, BootstrapResult]:
    """Percentile interval for the unconditional AUC via the same residual
    scheme applied to intercept-only fits of each group."""
    from .roc import robust_unconditional_auc

    cfg = config or BootstrapConfig()
    y_nd = np.asarray(y_nondiseased, dtype=float).ravel()
    y_d = np.asarray(y_diseased, dtype=float).ravel()
    auc_hat, fit_nd, fit_d = robust_unconditional_auc(y_nd, y_d, fit_config)
    reps = []
    n_failed = 0
    n_nonconverged = 0
    ones_nd = np.ones((y_nd.size, 1))
    ones_d = np.ones((y_d.size, 1))
    for b in range(cfg.n_replicates):
        rng = np.random.default_rng((cfg.seed, b))
        idx_nd = _resample_indices(rng, fit_nd.truncated_weights)
        idx_d = _resample_indices(rng, fit_d.truncated_weights)
        y_nd_b = fit_nd.beta[0] + fit_nd.sigma * fit_nd.std_residuals[idx_nd]
        y_d_b = fit_d.beta[0] + fit_d.sigma * fit_d.std_residuals[idx_d]
        try:
            f_nd = irls_fit(ones_nd, y_nd_b, fit_config, beta_init=fit_nd.beta)
            f_d = irls_fit(ones_d, y_d_b, fit_config, beta_init=fit_d.beta)
        except NumericalError:
            n_failed += 1
            continue
        if not (f_nd.converged and f_d.converged):
            n_nonconverged += 1
        reps.append(unconditional_auc(y_nd_b, y_d_b,
                                      f_nd.truncated_weights, f_d.truncated_weights))
    if not reps:
        raise NumericalError("every bootstrap replicate failed")
    lo, hi = percentile_interval(reps, cfg.alpha)
    summary = BootstrapResult(
        targets=[], n_replicates=cfg.n_replicates, n_failed=n_failed,
        n_nonconverged=n_nonconverged,
        unreliable=n_failed > FAILURE_WARNING_FRACTION * cfg.n_replicates,
    )
    return auc_hat, lo, hi, summary
