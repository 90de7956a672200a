"""Monte Carlo oracle for the bias and MSE of any estimator.

True pairs (Y, X) come from a bivariate normal superpopulation. Observed
values add independent normal measurement errors u and v. Replications are
grouped into fixed-size blocks. Each block draws from its own Philox stream,
keyed on ``(seed, block index)``, so results do not depend on how blocks are
scheduled across workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .estimators import EstimatorId, Sample
from .moments import PopulationParams

BLOCK_SIZE = 2048
DEFAULT_REPLICATIONS = 200_000
UNRELIABLE_FAILURE_RATE = 0.01

CSV_HEADER = "estimator,n,replications,seed,empirical_bias,empirical_mse,se,failed_draws"


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SimulationConfig:
    params: PopulationParams
    estimator: EstimatorId
    replications: int = DEFAULT_REPLICATIONS
    seed: int = 0
    error_distribution: str = "normal"
    superpopulation: str = "bivariate_normal"

    def __post_init__(self):
        if self.replications < 100:
            raise ValueError(f"replications must be >= 100, got {self.replications}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.error_distribution != "normal":
            raise ValueError(f"unsupported error distribution {self.error_distribution!r}")
        if self.superpopulation != "bivariate_normal":
            raise ValueError(f"unsupported superpopulation {self.superpopulation!r}")


@dataclass(frozen=True)
class SimulationResult:
    estimator: str
    n: int
    empirical_bias: float
    empirical_mse: float
    mse_standard_error: float
    replications: int
    seed: int
    failed_draws: int = 0

    @property
    def unreliable(self) -> bool:
        return self.failed_draws / self.replications >= UNRELIABLE_FAILURE_RATE

    def to_csv_row(self) -> str:
        return ",".join([
            self.estimator, str(self.n), str(self.replications), str(self.seed),
            repr(self.empirical_bias), repr(self.empirical_mse),
            repr(self.mse_standard_error), str(self.failed_draws),
        ])


def block_rng(seed: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss))


def _draw_units(params: PopulationParams, rng: np.random.Generator, size: int):
    """Arrays (y_obs, x_obs, y_true, x_true) of shape ``(size, n)``."""
    n = params.n
    z = rng.standard_normal((4, size, n))
    rho = params.rho
    y_true = params.mu_y + params.sigma_y * z[0]
    x_true = params.mu_x + params.sigma_x * (rho * z[0] + math.sqrt(1.0 - rho * rho) * z[1])
    y_obs = y_true + math.sqrt(params.sigma2_u) * z[2]
    x_obs = x_true + math.sqrt(params.sigma2_v) * z[3]
    return y_obs, x_obs, y_true, x_true


def draw_population_sample(params: PopulationParams, rng: np.random.Generator) -> Sample:
    """One sample of ``params.n`` units carrying observed and true values."""
    y_obs, x_obs, y_true, x_true = _draw_units(params, rng, 1)
    return Sample(y_obs[0], x_obs[0], y_true[0], x_true[0])


def _block_means(params: PopulationParams, seed: int, block: int, size: int):
    y_obs, x_obs, _, _ = _draw_units(params, block_rng(seed, block), size)
    return y_obs.mean(axis=1), x_obs.mean(axis=1)


def simulate_means(params: PopulationParams, replications: int, seed: int,
                   workers: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """Observed sample means (ybar, xbar) for every replication, in index order."""
    sizes = [min(BLOCK_SIZE, replications - start) for start in range(0, replications, BLOCK_SIZE)]
    jobs = [(params, seed, b, size) for b, size in enumerate(sizes)]
    if workers <= 1:
        parts = [_block_means(*job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _block_means(*job), jobs))
    ybar = np.concatenate([part[0] for part in parts])
    xbar = np.concatenate([part[1] for part in parts])
    return ybar, xbar


def summarize(estimator: EstimatorId, params: PopulationParams, ybar: np.ndarray,
              xbar: np.ndarray, seed: int) -> SimulationResult:
    estimates, valid = estimator.estimate_from_means(ybar, xbar, params.mu_x)
    failed = int(np.count_nonzero(~valid))
    if failed == len(valid):
        raise SimulationError(f"every replication failed the domain of {estimator.label}")
    errors = estimates[valid] - params.mu_y
    sq = errors**2
    se = float(np.std(sq, ddof=1) / math.sqrt(sq.size)) if sq.size > 1 else math.nan
    return SimulationResult(
        estimator=estimator.label,
        n=params.n,
        empirical_bias=float(np.mean(errors)),
        empirical_mse=float(np.mean(sq)),
        mse_standard_error=se,
        replications=len(valid),
        seed=seed,
        failed_draws=failed,
    )


def run_simulation(cfg: SimulationConfig, workers: int = 1) -> SimulationResult:
    ybar, xbar = simulate_means(cfg.params, cfg.replications, cfg.seed, workers)
    return summarize(cfg.estimator, cfg.params, ybar, xbar, cfg.seed)


def empirical_mse_curve(cfg: SimulationConfig, constant_grid: Sequence[float],
                        workers: int = 1) -> List[Tuple[float, float]]:
    """Empirical MSE along a grid of the estimator's free constant.

    Every grid point reuses the same draws (common random numbers).
    """
    if cfg.estimator.kind not in ("T3", "T5", "TP"):
        raise ValueError(f"estimator {cfg.estimator.kind} has no free constant")
    if len(constant_grid) == 0:
        raise ValueError("constant grid is empty")
    ybar, xbar = simulate_means(cfg.params, cfg.replications, cfg.seed, workers)
    curve = []
    for value in constant_grid:
        est = cfg.estimator.with_constant(float(value))
        curve.append((float(value), summarize(est, cfg.params, ybar, xbar, cfg.seed).empirical_mse))
    return curve
