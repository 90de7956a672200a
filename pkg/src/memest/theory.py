"""First-order bias and MSE of every estimator, split into sampling and
measurement-error parts, plus optimum constants and relative efficiency.

Notation: ybar = mu_y (1 + e0), xbar = mu_x (1 + e1) with
E[e0^2] = V_ym / mu_y^2, E[e1^2] = V_xm / mu_x^2, E[e0 e1] = V_yxm / (mu_y mu_x).
An estimator whose linearization is mu_y (1 + e0 + s e1) has first-order MSE
V_ym + s^2 R^2 V_xm + 2 s R V_yxm, where R = mu_y / mu_x; the measurement
share of that is (sigma2_u + s^2 R^2 sigma2_v) / n.

Where a published closed form disagrees with the first-order expansion, the
first-order value is primary and the published one is kept alongside in
``MseBreakdown.published_total``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

from .moments import DerivedMoments, PopulationParams, as_moments
from .numsearch import SearchSpec, golden_minimize

ParamsLike = Union[PopulationParams, DerivedMoments]

DIVERGENCE_RTOL = 1e-6

ALPHA_BOX = (-1.0, 2.0)
Q_BOX = (-2.0, 3.0)
W_BOX = ((-1.0, 2.0), (-2.0, 2.0))


class DegenerateMomentsError(ArithmeticError):
    """Raised when an optimum is undefined for the given moments."""


@dataclass(frozen=True)
class MseBreakdown:
    sampling: float
    measurement: float
    total: float
    pre: float
    published_total: Optional[float] = None

    @property
    def divergent(self) -> bool:
        """True when a published closed form disagrees with ``total``."""
        if self.published_total is None:
            return False
        scale = max(abs(self.total), abs(self.published_total), 1e-300)
        return abs(self.total - self.published_total) / scale > DIVERGENCE_RTOL


@dataclass(frozen=True)
class OptimumConstants:
    min_mse: float
    w1_star: Optional[float] = None
    w2_star: Optional[float] = None
    alpha_star: Optional[float] = None
    q_star: Optional[float] = None
    m1: Optional[float] = None
    # published closed-form q for the family; None when its denominator vanishes
    q_closed_form: Optional[float] = None
    converged: bool = True


@dataclass(frozen=True)
class FlaggedBias:
    """Published family bias evaluated as printed, next to a re-derived value.

    The printed expression is typographically garbled, so ``value`` is low
    confidence; ``first_order`` comes from a second-order Taylor expansion.
    """

    value: float
    first_order: float
    note: str = "low-confidence: garbled source"


def pre_of(reference_mse: float, mse: float) -> float:
    """Percent relative efficiency ``100 * reference_mse / mse``."""
    if not mse > 0:
        raise ValueError(f"PRE needs a positive MSE, got {mse}")
    return 100.0 * reference_mse / mse


def _breakdown(m: DerivedMoments, sampling: float, measurement: float,
               published_total: Optional[float] = None) -> MseBreakdown:
    total = sampling + measurement
    pre = 100.0 * m.v_ym / total if total > 0 else math.nan
    return MseBreakdown(sampling, measurement, total, pre, published_total)


def first_order_mse(p: ParamsLike, slope: float) -> MseBreakdown:
    """MSE of an estimator linearizing to ``mu_y (1 + e0 + slope * e1)``."""
    m = as_moments(p)
    pp = m.params
    n = pp.n
    r = m.r_m
    sampling = pp.sigma2_y / n + slope**2 * r**2 * pp.sigma2_x / n + 2.0 * slope * r * m.v_yxm
    measurement = (pp.sigma2_u + slope**2 * r**2 * pp.sigma2_v) / n
    return _breakdown(m, sampling, measurement)


def family_slope(q: float, m1: float) -> float:
    """Linear coefficient on e1 of the family estimator."""
    return (1.0 - 2.0 * q) * (1.0 + m1) / 2.0


# ---------------------------------------------------------------------------
# sample mean

def mse_mean(p: ParamsLike) -> MseBreakdown:
    m = as_moments(p)
    return _breakdown(m, m.params.sigma2_y / m.params.n, m.params.sigma2_u / m.params.n)


# ---------------------------------------------------------------------------
# t1: ratio

def bias_t1(p: ParamsLike) -> float:
    m = as_moments(p)
    return (m.r_m * m.v_xm - m.v_yxm) / m.params.mu_x


def mse_t1(p: ParamsLike) -> MseBreakdown:
    m = as_moments(p)
    pp = m.params
    n, r = pp.n, m.r_m
    sampling = pp.sigma2_y / n + r**2 * pp.sigma2_x / n - 2.0 * r * pp.rho * pp.sigma_y * pp.sigma_x / n
    measurement = ((pp.mu_y**2 / pp.mu_x**2) * pp.sigma2_v + pp.sigma2_u) / n
    return _breakdown(m, sampling, measurement)


# ---------------------------------------------------------------------------
# t2: exponential ratio

def bias_t2(p: ParamsLike) -> float:
    m = as_moments(p)
    return (0.375 * m.r_m * m.v_xm - 0.5 * m.v_yxm) / m.params.mu_x


def mse_t2(p: ParamsLike) -> MseBreakdown:
    m = as_moments(p)
    pp = m.params
    k = m.c_x / m.c_y
    sampling = pp.sigma2_y / pp.n * (1.0 - k * (pp.rho - m.c_x / (4.0 * m.c_y)))
    measurement = (pp.mu_y**2 / (4.0 * pp.mu_x**2) * pp.sigma2_v + pp.sigma2_u) / pp.n
    return _breakdown(m, sampling, measurement)


# ---------------------------------------------------------------------------
# t3: regression type

def mse_t3(p: ParamsLike, w1: float, w2: float) -> MseBreakdown:
    m = as_moments(p)
    pp = m.params
    total = ((w1 - 1.0) ** 2 * pp.mu_y**2 + w1**2 * m.v_ym + w2**2 * m.v_xm
             - 2.0 * w1 * w2 * m.v_yxm)
    measurement = (w1**2 * pp.sigma2_u + w2**2 * pp.sigma2_v) / pp.n
    return _breakdown(m, total - measurement, measurement)


def optimum_t3(p: ParamsLike) -> OptimumConstants:
    m = as_moments(p)
    mu_y2 = m.params.mu_y**2
    b1 = mu_y2 + m.v_ym
    b2 = -m.v_yxm
    b3 = m.v_xm
    b4 = mu_y2
    det = b1 * b3 - b2**2
    if not det > 0:
        raise DegenerateMomentsError(f"moment matrix is singular (b1*b3 - b2^2 = {det})")
    w1 = b3 * b4 / det
    w2 = -b2 * b4 / det
    min_mse = mu_y2 - b3 * b4**2 / det
    if min_mse < 0:
        raise ValueError(f"negative minimum MSE {min_mse}; inconsistent inputs")
    return OptimumConstants(min_mse=min_mse, w1_star=w1, w2_star=w2)


# ---------------------------------------------------------------------------
# t4: exponential product

def bias_t4(p: ParamsLike) -> float:
    """Second-order bias of the exponential product estimator.

    The published coefficient on R V_xm is +1/8; expanding
    exp(e1 / (2 + e1)) = 1 + e1/2 - e1^2/8 + ... gives -1/8.
    """
    m = as_moments(p)
    return (-0.125 * m.r_m * m.v_xm + 0.5 * m.v_yxm) / m.params.mu_x


def bias_t4_published(p: ParamsLike) -> float:
    m = as_moments(p)
    return (0.125 * m.r_m * m.v_xm + 0.5 * m.v_yxm) / m.params.mu_x


def mse_t4_published(p: ParamsLike, error_sign: float = 1.0) -> MseBreakdown:
    """The exponential product MSE exactly as published.

    The published bracket for the sampling part carries ``rho - C_x/(4 C_y)``.
    ``error_sign`` selects the sign of sigma2_u in the measurement part: the
    displayed formula has -1, the accompanying text +1.
    """
    m = as_moments(p)
    pp = m.params
    k = m.c_x / m.c_y
    sampling = pp.sigma2_y / pp.n * (1.0 + k * (pp.rho - m.c_x / (4.0 * m.c_y)))
    measurement = (pp.mu_y**2 / (4.0 * pp.mu_x**2) * pp.sigma2_v + error_sign * pp.sigma2_u) / pp.n
    return _breakdown(m, sampling, measurement)


def mse_t4(p: ParamsLike) -> MseBreakdown:
    """First-order MSE of the exponential product estimator.

    Its linearization is mu_y (1 + e0 + e1/2), so the sampling part is
    (sigma2_y/n)[1 + (C_x/C_y)(rho + C_x/(4 C_y))]. The published version,
    with ``rho - C_x/(4 C_y)``, is attached as ``published_total``.
    """
    m = as_moments(p)
    first = first_order_mse(m, 0.5)
    return MseBreakdown(first.sampling, first.measurement, first.total, first.pre,
                        published_total=mse_t4_published(m).total)


# ---------------------------------------------------------------------------
# t5: ratio-product mixture

def bias_t5(p: ParamsLike, alpha: float) -> float:
    m = as_moments(p)
    return (alpha * m.r_m * m.v_xm + m.v_yxm - 2.0 * alpha * m.v_yxm) / m.params.mu_x


def mse_t5(p: ParamsLike, alpha: float) -> MseBreakdown:
    m = as_moments(p)
    pp = m.params
    r = m.r_m
    quad = 1.0 + 4.0 * alpha**2 - 4.0 * alpha
    total = m.v_ym + m.v_xm * r**2 * quad + 2.0 * m.v_yxm * r * (1.0 - 2.0 * alpha)
    measurement = (pp.sigma2_u + pp.sigma2_v * r**2 * quad) / pp.n
    return _breakdown(m, total - measurement, measurement)


def optimum_t5(p: ParamsLike) -> OptimumConstants:
    m = as_moments(p)
    denom = 2.0 * m.r_m * m.v_xm
    if denom == 0:
        raise DegenerateMomentsError("optimum alpha undefined: R_m * V_xm = 0")
    alpha = (m.r_m * m.v_xm + m.v_yxm) / denom
    min_mse = mse_t5(m, alpha).total
    if min_mse < 0:
        raise ValueError(f"negative minimum MSE {min_mse}; inconsistent inputs")
    return OptimumConstants(min_mse=min_mse, alpha_star=alpha)


# ---------------------------------------------------------------------------
# tp: the proposed family

def bias_tp(p: ParamsLike, q: float, m1: float) -> FlaggedBias:
    m = as_moments(p)
    mu_x, r = m.params.mu_x, m.r_m
    published = (
        m.v_xm * (m1 * (m1 + 1.0) * r / (2.0 * mu_x) + m1 * r / (2.0 * mu_x)
                  + r / (8.0 * mu_x) * (1.0 - m1) * r / (4.0 * mu_x))
        + m.v_yxm * (m1 * r / (2.0 * mu_x) + 1.0 / (2.0 * mu_x) - 2.0 * m1 * q / mu_x
                     - q * (1.0 - m1) * r / (4.0 * mu_x))
    )
    # second-order coefficients of the two arms in e1
    m2 = 1.0 - m1
    k = m1 + m2 / 2.0
    curv = m1 / 2.0 + m2 / 4.0
    ratio_arm = (curv + k**2 / 2.0) * r * m.v_xm - k * m.v_yxm
    product_arm = (k**2 / 2.0 - curv) * r * m.v_xm + k * m.v_yxm
    first_order = (q * ratio_arm + (1.0 - q) * product_arm) / mu_x
    return FlaggedBias(value=published, first_order=first_order)


def mse_tp_published(p: ParamsLike, q: float, m1: float) -> float:
    """The family MSE expression exactly as published (diagnostic only)."""
    m = as_moments(p)
    mu_y, r = m.params.mu_y, m.r_m
    bracket = m1**2 + q**2 / 4.0 + 4.0 * q**2 * m1**2 + 2.0 * q**2 * m1 - 4.0 * q * m1**2
    return (mu_y**2 + m.v_ym + r**2 * m.v_xm * bracket
            - r * q * m.v_xm * m1 - m.v_yxm * r * (4.0 * q * m1 + q))


def mse_tp(p: ParamsLike, q: float, m1: float) -> MseBreakdown:
    m = as_moments(p)
    first = first_order_mse(m, family_slope(q, m1))
    return MseBreakdown(first.sampling, first.measurement, first.total, first.pre,
                        published_total=mse_tp_published(m, q, m1))


def q_closed_form_published(p: ParamsLike, m1: float) -> Optional[float]:
    m = as_moments(p)
    r = m.r_m
    denom = m.v_xm * r * (8.0 * m1**2 + 0.5)
    if denom == 0:
        return None
    return (4.0 * r * m1**2 * m.v_xm + 2.0 * m.v_xm * m1 + m.v_yxm * (4.0 * m1 + 1.0)) / denom


def optimum_tp(p: ParamsLike, m1: float = 1.0, spec: Optional[SearchSpec] = None) -> OptimumConstants:
    """Numerically optimal q for the family at fixed ``m1``.

    The first-order MSE is quadratic in q, so golden-section search is safe.
    The published closed-form q is reported as ``q_closed_form``.
    """
    m = as_moments(p)
    spec = spec or SearchSpec(*Q_BOX, tolerance=1e-10)
    res = golden_minimize(lambda q: mse_tp(m, q, m1).total, spec)
    if res.minimum < 0:
        raise ValueError(f"negative minimum MSE {res.minimum}; inconsistent inputs")
    return OptimumConstants(
        min_mse=res.minimum,
        q_star=res.argmin,
        m1=m1,
        q_closed_form=q_closed_form_published(m, m1),
        converged=res.converged,
    )
