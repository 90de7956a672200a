"""Population parameters and the derived moments every MSE formula consumes."""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Union

INFINITE = "infinite"

PARAM_KEYS = ("mu_y", "mu_x", "sigma2_y", "sigma2_x", "rho", "sigma2_u", "sigma2_v", "n", "N")


class ParameterError(ValueError):
    """Raised when population parameters violate their invariants."""


@dataclass(frozen=True)
class PopulationParams:
    """True population moments, measurement-error variances and sample size.

    ``N`` is metadata only; no formula applies a finite-population correction.
    """

    mu_y: float
    mu_x: float
    sigma2_y: float
    sigma2_x: float
    rho: float
    sigma2_u: float = 0.0
    sigma2_v: float = 0.0
    n: int = 2
    N: Union[int, str] = INFINITE

    def __post_init__(self):
        if not -1.0 <= self.rho <= 1.0:
            raise ParameterError(f"rho must lie in [-1, 1], got {self.rho}")
        for name in ("sigma2_y", "sigma2_x", "sigma2_u", "sigma2_v"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be non-negative, got {getattr(self, name)}")
        if self.mu_x == 0:
            raise ParameterError("mu_x must be non-zero")
        if int(self.n) != self.n or self.n < 2:
            raise ParameterError(f"n must be an integer >= 2, got {self.n}")
        if self.N != INFINITE and (int(self.N) != self.N or self.N < 1):
            raise ParameterError(f"N must be a positive integer or {INFINITE!r}, got {self.N}")

    @property
    def sigma_y(self) -> float:
        return math.sqrt(self.sigma2_y)

    @property
    def sigma_x(self) -> float:
        return math.sqrt(self.sigma2_x)

    def without_errors(self) -> "PopulationParams":
        """Copy with both measurement-error variances set to zero."""
        return replace(self, sigma2_u=0.0, sigma2_v=0.0)

    def with_n(self, n: int) -> "PopulationParams":
        return replace(self, n=n)


@dataclass(frozen=True)
class DerivedMoments:
    """Moments of the observed sample means (ybar, xbar) under the error model.

    v_ym, v_xm are the variances of ybar and xbar including measurement error;
    v_yxm is their covariance, which the (independent) errors leave untouched.
    """

    r_m: float
    c_x: float
    c_y: float
    v_ym: float
    v_xm: float
    v_yxm: float
    params: PopulationParams


def derive_moments(p: PopulationParams) -> DerivedMoments:
    if p.mu_y == 0:
        raise ParameterError("mu_y must be non-zero (coefficient of variation of y undefined)")
    n = p.n
    return DerivedMoments(
        r_m=p.mu_y / p.mu_x,
        c_x=p.sigma_x / p.mu_x,
        c_y=p.sigma_y / p.mu_y,
        v_ym=(p.sigma2_y + p.sigma2_u) / n,
        v_xm=(p.sigma2_x + p.sigma2_v) / n,
        v_yxm=p.rho * math.sqrt(p.sigma2_y * p.sigma2_x) / n,
        params=p,
    )


def as_moments(obj: Union[PopulationParams, DerivedMoments]) -> DerivedMoments:
    if isinstance(obj, DerivedMoments):
        return obj
    return derive_moments(obj)


# ---------------------------------------------------------------------------
# key=value text format

def _format_value(key: str, value) -> str:
    if key in ("n", "N"):
        return str(value)
    return repr(float(value))


def dumps_params(p: PopulationParams) -> str:
    return "".join(f"{f.name}={_format_value(f.name, getattr(p, f.name))}\n" for f in fields(p))


def loads_params(text: str) -> PopulationParams:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParameterError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in PARAM_KEYS:
            raise ParameterError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ParameterError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value

    missing = [k for k in PARAM_KEYS if k not in raw and k != "N"]
    if missing:
        raise ParameterError(f"missing keys: {', '.join(missing)}")

    kwargs = {}
    for key, value in raw.items():
        try:
            if key == "n":
                kwargs[key] = int(value)
            elif key == "N":
                kwargs[key] = value if value == INFINITE else int(value)
            else:
                kwargs[key] = float(value)
        except ValueError:
            raise ParameterError(f"{key}: cannot parse {value!r}") from None
    return PopulationParams(**kwargs)


def read_params(path) -> PopulationParams:
    return loads_params(Path(path).read_text())


def write_params(p: PopulationParams, path) -> None:
    Path(path).write_text(dumps_params(p))
