"""Intercept-bearing GLM fits reporting deviance and parameter counts.

Logistic models are fitted with iteratively reweighted least squares (IRLS);
Gaussian models with ordinary least squares and a profile-likelihood
deviance ``n * log(RSS / n)``. ``fit_many`` fits several same-sized variable
sets in one batched IRLS loop, which is what the selection sweeps use.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import Dataset

MAX_ITER = 100
TOL = 1e-8
ETA_CAP = 30.0
RIDGE = 1e-10
RSS_FLOOR = 1e-12
MAX_HALVINGS = 30


class SingularDesignError(ArithmeticError):
    """The (weighted) normal equations could not be solved."""


@dataclass(frozen=True)
class FitResult:
    deviance: float
    n_params: int
    converged: bool
    coefficients: np.ndarray  # intercept first


def design(d: Dataset, vars: Sequence[int]) -> np.ndarray:
    """Return the design matrix ``[1, X[:, vars]]``."""
    vars = list(vars)
    out = np.empty((d.n, len(vars) + 1))
    out[:, 0] = 1.0
    if vars:
        out[:, 1:] = d.X[:, vars]
    return out


def _check_vars(d: Dataset, vars: Sequence[int]) -> None:
    if len(set(vars)) != len(vars):
        raise ValueError(f"duplicate variable indices in {list(vars)}")
    for v in vars:
        if not 0 <= v < d.p:
            raise IndexError(f"variable index {v} out of range for p={d.p}")


def _logistic_deviance(eta: np.ndarray, y: np.ndarray) -> np.ndarray:
    # -2 * sum(y*log(mu) + (1-y)*log(1-mu)) written in terms of eta
    return 2.0 * np.sum(np.logaddexp(0.0, eta) - y * eta, axis=-1)


def _eta(X: np.ndarray, beta: np.ndarray) -> np.ndarray:
    return np.clip((X @ beta[:, :, None])[:, :, 0], -ETA_CAP, ETA_CAP)


def _solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        x = np.linalg.solve(A, b[..., None])[..., 0]
        if np.all(np.isfinite(x)):
            return x
    except np.linalg.LinAlgError:
        pass
    out = np.empty_like(b)
    eye = np.eye(A.shape[-1])
    for i in range(A.shape[0]):
        try:
            out[i] = np.linalg.solve(A[i], b[i])
            if np.all(np.isfinite(out[i])):
                continue
        except np.linalg.LinAlgError:
            pass
        try:
            out[i] = np.linalg.solve(A[i] + RIDGE * eye, b[i])
        except np.linalg.LinAlgError:
            raise SingularDesignError("singular weighted normal equations") from None
        if not np.all(np.isfinite(out[i])):
            raise SingularDesignError("singular weighted normal equations")
    return out


def _irls(Xs: np.ndarray, y: np.ndarray, beta: np.ndarray):
    """Batched IRLS. ``Xs`` has shape (m, n, k), ``beta`` (m, k).

    Each problem stops independently once its relative deviance change drops
    below TOL, so batch composition does not affect the individual results.
    Steps that increase the deviance are halved.
    """
    beta = beta.copy()
    eta = _eta(Xs, beta)
    dev = _logistic_deviance(eta, y)
    converged = np.zeros(len(beta), dtype=bool)
    active = np.arange(len(beta))
    for _ in range(MAX_ITER):
        full = active.size == len(beta)
        X = Xs if full else Xs[active]
        e = eta if full else eta[active]
        mu = 1.0 / (1.0 + np.exp(-e))
        w = mu * (1.0 - mu)
        Xt = X.transpose(0, 2, 1)
        A = (Xt * w[:, None, :]) @ X
        # X'Wz with z = eta + (y - mu) / w, expanded to avoid dividing by tiny w
        rhs = (Xt @ (w * e + (y - mu))[:, :, None])[:, :, 0]
        old_beta = beta[active]
        old_dev = dev[active]
        new_beta = _solve(A, rhs)
        new_eta = _eta(X, new_beta)
        new_dev = _logistic_deviance(new_eta, y)
        # step-halving while the deviance goes up
        for _ in range(MAX_HALVINGS):
            bad = ~(new_dev <= old_dev + 1e-12 * (np.abs(old_dev) + 0.1))
            if not bad.any():
                break
            new_beta[bad] = 0.5 * (new_beta[bad] + old_beta[bad])
            new_eta[bad] = _eta(X[bad], new_beta[bad])
            new_dev[bad] = _logistic_deviance(new_eta[bad], y)
        else:
            bad = ~(new_dev <= old_dev)
            new_beta[bad] = old_beta[bad]
            new_eta[bad] = e[bad]
            new_dev[bad] = old_dev[bad]
        done = np.abs(new_dev - old_dev) / (np.abs(new_dev) + 0.1) < TOL
        beta[active] = new_beta
        eta[active] = new_eta
        dev[active] = new_dev
        converged[active[done]] = True
        active = active[~done]
        if active.size == 0:
            break
    return beta, dev, converged


def _start(d: Dataset, k: int) -> np.ndarray:
    b = np.zeros(k)
    ybar = d.y.mean()
    b[0] = np.log(ybar / (1.0 - ybar))
    return b


def fit_logistic(d: Dataset, vars: Sequence[int]) -> FitResult:
    """Maximum-likelihood logistic regression of the binary target on ``vars``."""
    return fit_many(d, [vars])[0]


def fit_gaussian(d: Dataset, vars: Sequence[int]) -> FitResult:
    """Least-squares fit; deviance is ``n log(RSS/n)`` and variance counts as a parameter."""
    if d.target_kind != "continuous":
        raise ValueError("fit_gaussian needs a continuous target")
    vars = list(vars)
    _check_vars(d, vars)
    X = design(d, vars)
    coef, _, rank, _ = np.linalg.lstsq(X, d.y, rcond=None)
    if rank < X.shape[1]:
        raise SingularDesignError(f"rank-deficient design for variables {vars}")
    resid = d.y - X @ coef
    rss = max(float(resid @ resid), RSS_FLOOR * d.n)
    return FitResult(
        deviance=d.n * float(np.log(rss / d.n)),
        n_params=len(vars) + 2,
        converged=True,
        coefficients=coef,
    )


def fit(d: Dataset, vars: Sequence[int]) -> FitResult:
    """Fit the GLM family matching ``d.target_kind``."""
    if d.target_kind == "binary":
        return fit_logistic(d, vars)
    return fit_gaussian(d, vars)


def fit_many(d: Dataset, var_sets: Sequence[Sequence[int]],
             start: np.ndarray | None = None) -> list[FitResult]:
    """Fit one model per variable set; all sets must have the same size.

    ``start`` optionally gives initial logistic coefficients, shape (m, k+1).
    Gaussian fits ignore it.
    """
    var_sets = [list(s) for s in var_sets]
    if not var_sets:
        return []
    for s in var_sets:
        _check_vars(d, s)
    if d.target_kind != "binary":
        return [fit_gaussian(d, s) for s in var_sets]
    k = len(var_sets[0]) + 1
    if any(len(s) + 1 != k for s in var_sets):
        raise ValueError("fit_many needs equally sized variable sets")
    Xs = np.empty((len(var_sets), d.n, k))
    Xs[:, :, 0] = 1.0
    for i, s in enumerate(var_sets):
        if s:
            Xs[i, :, 1:] = d.X[:, s]
    if start is None:
        start = np.tile(_start(d, k), (len(var_sets), 1))
    beta, dev, conv = _irls(Xs, d.y, np.asarray(start, dtype=float))
    return [
        FitResult(deviance=float(dev[i]), n_params=k, converged=bool(conv[i]),
                  coefficients=beta[i])
        for i in range(len(var_sets))
    ]
