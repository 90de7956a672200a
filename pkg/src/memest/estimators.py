"""Point estimators of the population mean of y from a realized sample.

Every estimator reads observed values only. Two equivalent surfaces are
offered: plain functions over a :class:`Sample`, and scikit-learn style
estimator objects whose ``fit`` stores the estimate in ``estimate_``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted, check_X_y, column_or_1d


class EstimatorDomainError(ArithmeticError):
    """Raised when an estimator is undefined for the realized sample."""


@dataclass(frozen=True, eq=False)
class Sample:
    """Observed pairs (y_obs, x_obs), optionally with the true values behind them."""

    y_obs: np.ndarray
    x_obs: np.ndarray
    y_true: Optional[np.ndarray] = None
    x_true: Optional[np.ndarray] = None

    def __post_init__(self):
        y = np.asarray(self.y_obs, dtype=float).ravel()
        x = np.asarray(self.x_obs, dtype=float).ravel()
        if y.shape != x.shape:
            raise ValueError(f"y_obs and x_obs differ in length ({y.size} vs {x.size})")
        if y.size < 1:
            raise ValueError("sample is empty")
        object.__setattr__(self, "y_obs", y)
        object.__setattr__(self, "x_obs", x)
        if (self.y_true is None) != (self.x_true is None):
            raise ValueError("true values must be given for both variables or neither")
        if self.y_true is not None:
            yt = np.asarray(self.y_true, dtype=float).ravel()
            xt = np.asarray(self.x_true, dtype=float).ravel()
            if yt.shape != y.shape or xt.shape != y.shape:
                raise ValueError("true-value arrays must match the observed length")
            object.__setattr__(self, "y_true", yt)
            object.__setattr__(self, "x_true", xt)

    @classmethod
    def from_pairs(cls, pairs) -> "Sample":
        arr = np.asarray(list(pairs), dtype=float)
        return cls(arr[:, 0], arr[:, 1])

    def __len__(self) -> int:
        return self.y_obs.size

    @property
    def has_true_values(self) -> bool:
        return self.y_true is not None

    @property
    def ybar(self) -> float:
        return float(np.mean(self.y_obs))

    @property
    def xbar(self) -> float:
        return float(np.mean(self.x_obs))


# ---------------------------------------------------------------------------
# scalar kernels on (ybar, xbar); shared by the Sample functions and the simulator

def _ratio(ybar, xbar, mu_x):
    return ybar * mu_x / xbar


def _exp_ratio(ybar, xbar, mu_x):
    return ybar * np.exp((mu_x - xbar) / (mu_x + xbar))


def _regression(ybar, xbar, mu_x, w1, w2):
    return w1 * ybar + w2 * (mu_x - xbar)


def _exp_product(ybar, xbar, mu_x):
    return ybar * np.exp((xbar - mu_x) / (xbar + mu_x))


def _ratio_product(ybar, xbar, mu_x, alpha):
    return ybar * (alpha * mu_x / xbar + (1.0 - alpha) * xbar / mu_x)


def _family(ybar, xbar, mu_x, q, m1):
    # exp(.)^m2 is read as exp(m2 * .)
    m2 = 1.0 - m1
    ratio_arm = ybar * (mu_x / xbar) ** m1 * np.exp(m2 * (mu_x - xbar) / (mu_x + xbar))
    product_arm = ybar * (xbar / mu_x) ** m1 * np.exp(m2 * (xbar - mu_x) / (xbar + mu_x))
    return q * ratio_arm + (1.0 - q) * product_arm


def _is_integer(value: float) -> bool:
    return float(value).is_integer()


# ---------------------------------------------------------------------------
# functional API

def est_mean(s: Sample) -> float:
    return s.ybar


def est_t1(s: Sample, mu_x: float) -> float:
    """Classical ratio estimator ``ybar * mu_x / xbar``."""
    xbar = s.xbar
    if xbar == 0:
        raise EstimatorDomainError("ratio estimator undefined: sample mean of x is zero")
    return float(_ratio(s.ybar, xbar, mu_x))


def est_t2(s: Sample, mu_x: float) -> float:
    xbar = s.xbar
    if mu_x + xbar == 0:
        raise EstimatorDomainError("exponential ratio estimator undefined: mu_x + xbar = 0")
    return float(_exp_ratio(s.ybar, xbar, mu_x))


def est_t3(s: Sample, mu_x: float, w1: float, w2: float) -> float:
    return float(_regression(s.ybar, s.xbar, mu_x, w1, w2))


def est_t4(s: Sample, mu_x: float) -> float:
    xbar = s.xbar
    if mu_x + xbar == 0:
        raise EstimatorDomainError("exponential product estimator undefined: mu_x + xbar = 0")
    return float(_exp_product(s.ybar, xbar, mu_x))


def est_t5(s: Sample, mu_x: float, alpha: float) -> float:
    """Ratio-product mixture ``ybar * [alpha*mu_x/xbar + (1-alpha)*xbar/mu_x]``."""
    xbar = s.xbar
    if xbar == 0 or mu_x == 0:
        raise EstimatorDomainError("ratio-product estimator undefined: zero mean of x")
    return float(_ratio_product(s.ybar, xbar, mu_x, alpha))


def est_tp(s: Sample, mu_x: float, q: float, m1: float) -> float:
    """Proposed family mixing a ratio-exponential and a product-exponential arm.

    ``q`` weights the ratio arm; ``m1`` is the power on the ratio and
    ``1 - m1`` the weight inside the exponential.
    """
    xbar = s.xbar
    if mu_x + xbar == 0:
        raise EstimatorDomainError("family estimator undefined: mu_x + xbar = 0")
    if _is_integer(m1):
        if m1 != 0 and xbar == 0:
            raise EstimatorDomainError("family estimator undefined: xbar = 0")
    elif xbar <= 0 or mu_x <= 0:
        raise EstimatorDomainError(
            f"non-integer power m1={m1} requires positive xbar and mu_x (xbar={xbar}, mu_x={mu_x})"
        )
    return float(_family(s.ybar, xbar, mu_x, q, m1))


# ---------------------------------------------------------------------------
# estimator identifiers

KINDS = ("MEAN", "T1", "T2", "T3", "T4", "T5", "TP")


@dataclass(frozen=True)
class EstimatorId:
    """An estimator kind together with its constants.

    ``w1, w2`` are used by T3, ``alpha`` by T5, ``q, m1`` by TP; ``m2`` is
    always ``1 - m1``.
    """

    kind: str
    w1: float = 1.0
    w2: float = 0.0
    alpha: float = 1.0
    q: float = 1.0
    m1: float = 1.0

    def __post_init__(self):
        kind = self.kind.upper()
        if kind not in KINDS:
            raise ValueError(f"unknown estimator {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)

    @property
    def m2(self) -> float:
        return 1.0 - self.m1

    @property
    def label(self) -> str:
        if self.kind == "T3":
            return f"t3(w1={self.w1:g},w2={self.w2:g})"
        if self.kind == "T5":
            return f"t5(alpha={self.alpha:g})"
        if self.kind == "TP":
            return f"tp(q={self.q:g},m1={self.m1:g})"
        return self.kind.lower()

    def with_constant(self, value: float) -> "EstimatorId":
        """Copy with the estimator's free scalar constant replaced.

        The free constant is ``alpha`` for T5, ``q`` for TP and ``w2`` for T3.
        """
        name = {"T3": "w2", "T5": "alpha", "TP": "q"}.get(self.kind)
        if name is None:
            raise ValueError(f"estimator {self.kind} has no free constant")
        return replace(self, **{name: value})

    def estimate(self, s: Sample, mu_x: float) -> float:
        if self.kind == "MEAN":
            return est_mean(s)
        if self.kind == "T1":
            return est_t1(s, mu_x)
        if self.kind == "T2":
            return est_t2(s, mu_x)
        if self.kind == "T3":
            return est_t3(s, mu_x, self.w1, self.w2)
        if self.kind == "T4":
            return est_t4(s, mu_x)
        if self.kind == "T5":
            return est_t5(s, mu_x, self.alpha)
        return est_tp(s, mu_x, self.q, self.m1)

    def estimate_from_means(self, ybar: np.ndarray, xbar: np.ndarray, mu_x: float):
        """Vectorized evaluation over arrays of sample means.

        Returns ``(estimates, valid)``; invalid entries violate the
        estimator's domain and hold NaN.
        """
        ybar = np.asarray(ybar, dtype=float)
        xbar = np.asarray(xbar, dtype=float)
        kind = self.kind
        if kind in ("MEAN", "T3"):
            valid = np.ones(xbar.shape, dtype=bool)
        elif kind in ("T1", "T5"):
            valid = xbar != 0
        elif kind in ("T2", "T4"):
            valid = (mu_x + xbar) != 0
        else:
            valid = (mu_x + xbar) != 0
            if not _is_integer(self.m1):
                valid &= (xbar > 0) & (mu_x > 0)
            elif self.m1 != 0:
                valid &= xbar != 0

        xs = np.where(valid, xbar, mu_x)
        with np.errstate(all="ignore"):
            if kind == "MEAN":
                out = ybar.copy()
            elif kind == "T1":
                out = _ratio(ybar, xs, mu_x)
            elif kind == "T2":
                out = _exp_ratio(ybar, xs, mu_x)
            elif kind == "T3":
                out = _regression(ybar, xs, mu_x, self.w1, self.w2)
            elif kind == "T4":
                out = _exp_product(ybar, xs, mu_x)
            elif kind == "T5":
                out = _ratio_product(ybar, xs, mu_x, self.alpha)
            else:
                out = _family(ybar, xs, mu_x, self.q, self.m1)
        out = np.where(valid, out, np.nan)
        return out, valid


# ---------------------------------------------------------------------------
# scikit-learn style wrappers

class _MeanEstimatorBase(BaseEstimator):
    """Shared ``fit`` for population-mean estimators.

    ``X`` holds the observed auxiliary variable (shape ``(n,)`` or ``(n, 1)``),
    ``y`` the observed study variable. After fitting, ``estimate_`` holds the
    estimated population mean of y.
    """

    def _estimator_id(self) -> EstimatorId:
        raise NotImplementedError

    def fit(self, X, y):
        X, y = check_X_y(np.asarray(X, dtype=float).reshape(len(X), -1), y, y_numeric=True)
        if X.shape[1] != 1:
            raise ValueError(f"expected a single auxiliary column, got {X.shape[1]}")
        if X.shape[0] < 2:
            raise ValueError("need at least 2 observations")
        sample = Sample(y, column_or_1d(X))
        self.n_samples_ = len(sample)
        self.estimate_ = self._estimator_id().estimate(sample, getattr(self, "mu_x", 0.0))
        return self

    def predict(self, X=None):
        """Return the fitted estimate, broadcast to ``len(X)`` rows when given."""
        check_is_fitted(self, "estimate_")
        if X is None:
            return self.estimate_
        return np.full(len(X), self.estimate_)


class SampleMean(_MeanEstimatorBase):
    def _estimator_id(self):
        return EstimatorId("MEAN")


class RatioEstimator(_MeanEstimatorBase):
    def __init__(self, mu_x=1.0):
        self.mu_x = mu_x

    def _estimator_id(self):
        return EstimatorId("T1")


class ExpRatioEstimator(_MeanEstimatorBase):
    def __init__(self, mu_x=1.0):
        self.mu_x = mu_x

    def _estimator_id(self):
        return EstimatorId("T2")


class RegressionTypeEstimator(_MeanEstimatorBase):
    def __init__(self, mu_x=1.0, w1=1.0, w2=0.0):
        self.mu_x = mu_x
        self.w1 = w1
        self.w2 = w2

    def _estimator_id(self):
        return EstimatorId("T3", w1=self.w1, w2=self.w2)


class ExpProductEstimator(_MeanEstimatorBase):
    def __init__(self, mu_x=1.0):
        self.mu_x = mu_x

    def _estimator_id(self):
        return EstimatorId("T4")


class RatioProductEstimator(_MeanEstimatorBase):
    def __init__(self, mu_x=1.0, alpha=1.0):
        self.mu_x = mu_x
        self.alpha = alpha

    def _estimator_id(self):
        return EstimatorId("T5", alpha=self.alpha)


class FamilyEstimator(_MeanEstimatorBase):
    """The ratio/product exponential family; ``m2 = 1 - m1`` is implied."""

    def __init__(self, mu_x=1.0, q=1.0, m1=1.0):
        self.mu_x = mu_x
        self.q = q
        self.m1 = m1

    def _estimator_id(self):
        return EstimatorId("TP", q=self.q, m1=self.m1)


def make_estimator(est: EstimatorId, mu_x: float) -> _MeanEstimatorBase:
    """Build the scikit-learn style object matching an :class:`EstimatorId`."""
    if est.kind == "MEAN":
        return SampleMean()
    if est.kind == "T1":
        return RatioEstimator(mu_x)
    if est.kind == "T2":
        return ExpRatioEstimator(mu_x)
    if est.kind == "T3":
        return RegressionTypeEstimator(mu_x, est.w1, est.w2)
    if est.kind == "T4":
        return ExpProductEstimator(mu_x)
    if est.kind == "T5":
        return RatioProductEstimator(mu_x, est.alpha)
    return FamilyEstimator(mu_x, est.q, est.m1)
