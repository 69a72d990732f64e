"""Huber M-estimation of linear location-scale models by IRLS.

The Huber loss with tuning constant b is

    rho(u) = u^2 / 2            if |u| <= b
             b |u| - b^2 / 2    otherwise,

with influence function psi(u) = max(-b, min(u, b)) and weight function
omega(u) = psi(u) / u = min(1, b / |u|).  The default b = 1.345 gives 95%
efficiency relative to least squares under normal errors.

The residual scale is the (uncentered) median absolute deviation

    sigma_hat = 1.4826 * median(|y - Z beta_hat|),

recomputed from scratch at every iteration.  Iteration starts from the
ordinary least squares fit and solves a weighted least squares problem per
step through an orthogonal decomposition of the row-scaled design; normal
equations are never formed.

After convergence, weights for downstream distribution estimates are
truncated: observations with standardized residual at most v (default 3)
get weight one, the rest keep their Huber weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NumericalError

DEFAULT_TUNING = 1.345
DEFAULT_TRUNCATION = 3.0
MAD_FACTOR = 1.4826


def huber_rho(u, b: float = DEFAULT_TUNING):
    """Huber loss, quadratic inside [-b, b] and linear outside."""
    u = np.asarray(u, dtype=float)
    au = np.abs(u)
    out = np.where(au <= b, 0.5 * u * u, b * au - 0.5 * b * b)
    return float(out) if out.ndim == 0 else out


def huber_psi(u, b: float = DEFAULT_TUNING):
    """Derivative of the Huber loss (the influence function)."""
    u = np.asarray(u, dtype=float)
    out = np.clip(u, -b, b)
    return float(out) if out.ndim == 0 else out


def huber_weight(u, b: float = DEFAULT_TUNING):
    """IRLS weight psi(u)/u = min(1, b/|u|), equal to 1 at u = 0."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.minimum(1.0, b / np.abs(u))
    return float(out) if out.ndim == 0 else out


def mad_scale(residuals) -> float:
    """1.4826 * median(|residuals|), the uncentered MAD scale estimate.

    The factor makes the estimate Fisher-consistent for the standard
    deviation under normal errors.
    """
    r = np.asarray(residuals, dtype=float).ravel()
    if r.size == 0:
        raise ValueError("no residuals")
    return MAD_FACTOR * float(np.median(np.abs(r)))


@dataclass
class FitConfig:
    """Tuning constants and iteration controls for the robust fit."""

    tuning: float = DEFAULT_TUNING
    truncation: float = DEFAULT_TRUNCATION
    max_iterations: int = 50
    tol: float = 1e-8


@dataclass
class RobustFit:
    """Converged (or max-iteration) state of one IRLS fit.

    std_residuals are (y - Z beta) / sigma; huber_weights are omega at those
    residuals; truncated_weights replace omega by 1 wherever
    |std residual| <= truncation.
    """

    beta: np.ndarray
    sigma: float
    std_residuals: np.ndarray
    huber_weights: np.ndarray
    truncated_weights: np.ndarray
    iterations: int
    converged: bool
    tuning: float = DEFAULT_TUNING
    truncation: float = DEFAULT_TRUNCATION

    @property
    def n_parameters(self) -> int:
        return self.beta.size


def _scaled_lstsq(Z: np.ndarray, y: np.ndarray, w: np.ndarray | None) -> np.ndarray:
    """Least squares on the row-scaled system via pivoted QR.

    Rank deficiency is detected from the triangular factor's diagonal with a
    1e-10 relative threshold.
    """
    if w is not None:
        sw = np.sqrt(w)
        Zs, ys = Z * sw[:, None], y * sw
    else:
        Zs, ys = Z, y
    Q, R, piv = scipy.linalg.qr(Zs, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag.min() <= 1e-10 * diag.max():
        raise NumericalError("singular design matrix")
    beta = np.empty(Z.shape[1])
    beta[piv] = scipy.linalg.solve_triangular(R, Q.T @ ys)
    return beta


def ols_fit(Z, y) -> tuple[np.ndarray, float]:
    """Ordinary least squares coefficients and the usual residual scale
    sqrt(SSR / (n - Q))."""
    Z = np.asarray(Z, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n, q = Z.shape
    if y.size != n:
        raise ValueError(f"{n} design rows but {y.size} outcomes")
    if n <= q:
        raise NumericalError(f"underdetermined fit: n={n} rows for {q} parameters")
    beta = _scaled_lstsq(Z, y, None)
    resid = y - Z @ beta
    sigma = float(np.sqrt(resid @ resid / (n - q)))
    return beta, sigma


def irls_fit(Z, y, config: FitConfig | None = None,
             beta_init: np.ndarray | None = None) -> RobustFit:
    """Fit y = Z beta + sigma * eps by Huber IRLS with MAD scale updates.

    Starts from the least squares solution unless beta_init is supplied
    (e.g. a warm start during bootstrap refits; the fixed point does not
    depend on the start).  Convergence is max|beta_new - beta| < tol.
    Hitting max_iterations is not an error: the result is returned with
    converged=False.

    Raises
    ------
    NumericalError
        If the design is singular, the fit is underdetermined, or the MAD
        scale collapses to zero (more than half the residuals exactly zero).
    """
    cfg = config or FitConfig()
    Z = np.asarray(Z, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n, q = Z.shape
    if y.size != n:
        raise ValueError(f"{n} design rows but {y.size} outcomes")
    if n <= q:
        raise NumericalError(f"underdetermined fit: n={n} rows for {q} parameters")

    if beta_init is None:
        beta, _ = ols_fit(Z, y)
    else:
        beta = np.asarray(beta_init, dtype=float).copy()
        if beta.size != q:
            raise ValueError(f"beta_init has {beta.size} entries for {q} parameters")
    resid = y - Z @ beta
    # relative floor: interpolation leaves only rounding-level residue, and a
    # scale that far below the outcome scale is a collapse, not a spread
    floor = 1e-12 * max(float(np.sqrt(y @ y / n)), 1.0)

    converged = False
    iterations = 0
    for _ in range(cfg.max_iterations):
        sigma = mad_scale(resid)
        if sigma <= floor:
            raise NumericalError("degenerate scale: MAD of residuals is zero")
        w = huber_weight(resid / sigma, cfg.tuning)
        beta_new = _scaled_lstsq(Z, y, w)
        delta = float(np.max(np.abs(beta_new - beta)))
        beta = beta_new
        resid = y - Z @ beta
        iterations += 1
        if delta < cfg.tol:
            converged = True
            break

    sigma = mad_scale(resid)
    if sigma <= floor:
        raise NumericalError("degenerate scale: MAD of residuals is zero")
    eps = resid / sigma
    omega = huber_weight(eps, cfg.tuning)
    omega_star = np.where(np.abs(eps) <= cfg.truncation, 1.0, omega)
    return RobustFit(
        beta=beta,
        sigma=sigma,
        std_residuals=eps,
        huber_weights=omega,
        truncated_weights=omega_star,
        iterations=iterations,
        converged=converged,
        tuning=cfg.tuning,
        truncation=cfg.truncation,
    )


def ols_as_robust_fit(Z, y) -> RobustFit:
    """Package an OLS fit in the RobustFit shape with unit weights.

    Used by the non-robust comparators: sigma is sqrt(SSR / (n - Q)) and
    every observation keeps weight one.
    """
    Z = np.asarray(Z, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    beta, sigma = ols_fit(Z, y)
    # relative floor: exact interpolation leaves only rounding-level residue
    rms = float(np.sqrt(y @ y / y.size))
    if sigma <= 1e-12 * max(rms, 1.0):
        raise NumericalError("degenerate scale: zero residual variance")
    eps = (y - Z @ beta) / sigma
    ones = np.ones(y.size)
    return RobustFit(
        beta=beta,
        sigma=sigma,
        std_residuals=eps,
        huber_weights=ones,
        truncated_weights=ones.copy(),
        iterations=0,
        converged=True,
        tuning=float("inf"),
        truncation=float("inf"),
    )
