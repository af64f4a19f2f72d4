"""Selection criteria: likelihood-ratio tests and information criteria.

A criterion answers two questions for the stepwise searches: should ``v`` be
added to ``S`` (forward), and may ``v`` be removed from ``S`` (backward).
Each answer comes with a score used to rank competing candidates.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

from .dataset import Dataset
from .regression import FitResult, fit, fit_many

_EPS = 1e-16
_TINY = 1e-300
_MAX_TERMS = 10_000


def _gamma_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by its power series (x < a + 1)."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_TERMS):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by modified Lentz continued fraction (x >= a + 1)."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammaincc(a: float, x: float) -> float:
    """Regularized upper incomplete gamma function Q(a, x)."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x <= 0:
        return 1.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gamma_series(a, x))
    return min(1.0, _gamma_cf(a, x))


def chi2_sf(x: float, k: int) -> float:
    """Upper tail P(chi2_k > x)."""
    if k < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if x <= 0:
        return 1.0
    return gammaincc(0.5 * k, 0.5 * x)


class TestResult(NamedTuple):
    __test__ = False  # keep pytest from collecting this class

    stat: float
    df: int
    p_value: float


def lr_test(dev_null: float, dev_alt: float, df: int) -> TestResult:
    """Likelihood-ratio test of a nested model pair from their deviances."""
    if df < 1:
        raise ValueError("df must be >= 1")
    stat = max(0.0, dev_null - dev_alt)
    return TestResult(stat, df, chi2_sf(stat, df))


def log_binomial(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def aic_score(deviance: float, n_params: int) -> float:
    return deviance + 2.0 * n_params


def bic_score(deviance: float, n_params: int, n: int) -> float:
    return deviance + math.log(n) * n_params


def ebic_score(deviance: float, n_params: int, n: int, p_total: int,
               k_selected: int, gamma: float) -> float:
    """BIC plus ``2 * gamma * log C(p_total, k_selected)``."""
    if not 0 <= k_selected <= p_total:
        raise ValueError("need 0 <= k_selected <= p_total")
    return bic_score(deviance, n_params, n) + 2.0 * gamma * log_binomial(p_total, k_selected)


def default_gamma(n: int, p_total: int) -> float:
    """``1 - 0.5 log(n) / log(p)``, clamped to [0, 1]."""
    if n < 2 or p_total < 2:
        raise ValueError("need n >= 2 and p_total >= 2")
    g = 1.0 - 0.5 * math.log(n) / math.log(p_total)
    return min(1.0, max(0.0, g))


def implied_alpha(n: int, df: int) -> float:
    """Significance level at which an LR test agrees with BIC on nested models."""
    return chi2_sf(math.log(n) * df, df)


class Decision(NamedTuple):
    accept: bool
    score: float


class Criterion:
    """Base class for selection criteria.

    Forward scores rank lower-is-better. Backward scores rank by
    ``removal_prefers_high``. Subclasses implement the sweep methods; the
    single-candidate methods are thin wrappers.
    """

    removal_prefers_high = False
    name = "criterion"

    def forward(self, d: Dataset | None, S: Sequence[int], v: int) -> Decision:
        if v in S:
            raise ValueError(f"variable {v} already selected")
        return self.forward_sweep(d, S, [v])[0]

    def backward(self, d: Dataset | None, S: Sequence[int], v: int) -> Decision:
        if v not in S:
            raise ValueError(f"variable {v} is not selected")
        return self.backward_sweep(d, S, [v])[0]

    def forward_sweep(self, d, S, candidates) -> list[Decision]:
        raise NotImplementedError

    def backward_sweep(self, d, S, candidates=None) -> list[Decision]:
        raise NotImplementedError

    def n_variables(self, d: Dataset | None) -> int:
        if d is None:
            raise ValueError(f"{self.name} criterion needs a dataset")
        return d.p

    def describe(self) -> dict:
        return {"criterion": self.name}


class _LikelihoodCriterion(Criterion):
    """Shared fitting logic: one null fit per sweep, candidates fitted in a batch."""

    def _forward_fits(self, d: Dataset, S, candidates) -> tuple[FitResult, list[FitResult]]:
        S = list(S)
        null = fit(d, S)
        start = np.zeros((len(candidates), len(S) + 2))
        start[:, : len(S) + 1] = null.coefficients
        alts = fit_many(d, [S + [v] for v in candidates], start=start)
        return null, alts

    def _backward_fits(self, d: Dataset, S, candidates) -> tuple[FitResult, list[FitResult]]:
        S = list(S)
        full = fit(d, S)
        subsets, starts = [], []
        for v in candidates:
            i = S.index(v)
            subsets.append(S[:i] + S[i + 1:])
            starts.append(np.delete(full.coefficients, i + 1))
        return full, fit_many(d, subsets, start=np.array(starts))


class LRTest(_LikelihoodCriterion):
    """Nested likelihood-ratio test at significance level ``alpha``."""

    removal_prefers_high = True
    name = "it"

    def __init__(self, alpha: float):
        if not 0 < alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        self.alpha = alpha

    def forward_sweep(self, d, S, candidates):
        if not candidates:
            return []
        null, alts = self._forward_fits(d, S, candidates)
        out = []
        for alt in alts:
            p = lr_test(null.deviance, alt.deviance, alt.n_params - null.n_params).p_value
            out.append(Decision(p < self.alpha, p))
        return out

    def backward_sweep(self, d, S, candidates=None):
        candidates = list(S) if candidates is None else list(candidates)
        if not candidates:
            return []
        full, nulls = self._backward_fits(d, S, candidates)
        out = []
        for null in nulls:
            p = lr_test(null.deviance, full.deviance, full.n_params - null.n_params).p_value
            out.append(Decision(p >= self.alpha, p))
        return out

    def describe(self):
        return {"criterion": self.name, "alpha": self.alpha}


class InformationCriterion(_LikelihoodCriterion):
    """Lower-is-better penalized deviance; subclasses define ``score``."""

    def score(self, d: Dataset, f: FitResult, k_selected: int) -> float:
        raise NotImplementedError

    def forward_sweep(self, d, S, candidates):
        if not candidates:
            return []
        null, alts = self._forward_fits(d, S, candidates)
        base = self.score(d, null, len(S))
        out = []
        for alt in alts:
            s = self.score(d, alt, len(S) + 1)
            out.append(Decision(s < base, s))
        return out

    def backward_sweep(self, d, S, candidates=None):
        candidates = list(S) if candidates is None else list(candidates)
        if not candidates:
            return []
        full, nulls = self._backward_fits(d, S, candidates)
        base = self.score(d, full, len(S))
        out = []
        for null in nulls:
            s = self.score(d, null, len(S) - 1)
            out.append(Decision(s <= base, s))
        return out


class AIC(InformationCriterion):
    name = "aic"

    def score(self, d, f, k_selected):
        return aic_score(f.deviance, f.n_params)


class BIC(InformationCriterion):
    name = "bic"

    def score(self, d, f, k_selected):
        return bic_score(f.deviance, f.n_params, d.n)


class EBIC(InformationCriterion):
    """Extended BIC; ``p_total`` is fixed when the criterion is built."""

    name = "ebic"

    def __init__(self, gamma: float, p_total: int):
        if not 0 <= gamma <= 1:
            raise ValueError("gamma must lie in [0, 1]")
        self.gamma = gamma
        self.p_total = p_total

    @classmethod
    def for_dataset(cls, d: Dataset, gamma: float | None = None) -> "EBIC":
        """EBIC over ``d``'s predictors; ``gamma=None`` picks the default value."""
        if gamma is None:
            gamma = default_gamma(d.n, d.p)
        return cls(gamma, d.p)

    def score(self, d, f, k_selected):
        return ebic_score(f.deviance, f.n_params, d.n, self.p_total, k_selected, self.gamma)

    def describe(self):
        return {"criterion": self.name, "gamma": self.gamma, "p_total": self.p_total}


def forward_decision(c: Criterion, d: Dataset | None, S: Sequence[int], v: int) -> Decision:
    return c.forward(d, S, v)


def backward_decision(c: Criterion, d: Dataset | None, S: Sequence[int], v: int) -> Decision:
    return c.backward(d, S, v)
