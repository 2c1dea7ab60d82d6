"""Monte Carlo check of the channel model under on-off signalling.

Samples are produced in fixed-size blocks. Block ``i`` of a run draws from
``SeedSequence(seed, spawn_key=(i, path))``, so a block's content depends only
on the seed, its index and the sampling path; statistics are reduced in block
order, which makes every estimate independent of how blocks are spread over
workers.
"""

import logging
import math
from collections.abc import Iterator
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import stats

from .channel import ChannelParams, OnOffInput, mi_closed
from .errors import DomainError

logger = logging.getLogger(__name__)

SamplingPath = Literal["exponential", "physical"]

_PATH_KEYS: dict[str, int] = {"exponential": 0, "physical": 1}
DEFAULT_BLOCK_SIZE = 1 << 16
MIN_SAMPLES = 1000
MAX_SEED = 2**64


@dataclass(frozen=True)
class SimConfig:
    """A reproducible Monte Carlo run.

    ``params`` selects the physical scale used by the complex-Gaussian path;
    ``None`` means the normalised channel (unit fading and noise variance).
    """

    seed: int
    n_samples: int
    input: OnOffInput
    params: ChannelParams | None = None
    block_size: int = DEFAULT_BLOCK_SIZE

    def __post_init__(self) -> None:
        if not 0 <= self.seed < MAX_SEED:
            raise DomainError(
                "SimConfig", f"seed must be a 64-bit unsigned integer, got {self.seed!r}"
            )
        if self.n_samples < MIN_SAMPLES:
            raise DomainError(
                "SimConfig", f"n_samples must be at least {MIN_SAMPLES}, got {self.n_samples!r}"
            )
        if self.block_size < 1:
            raise DomainError("SimConfig", f"block_size must be positive, got {self.block_size!r}")

    @property
    def n_blocks(self) -> int:
        return -(-self.n_samples // self.block_size)

    def block_length(self, index: int) -> int:
        return min(self.block_size, self.n_samples - index * self.block_size)


@dataclass(frozen=True)
class MiEstimate:
    """Sample mean of the information density and its standard error."""

    estimate: float
    std_error: float
    n_samples: int


@dataclass(frozen=True)
class _Moments:
    count: int
    mean: float
    m2: float

    def merge(self, other: "_Moments") -> "_Moments":
        count = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / count
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / count
        return _Moments(count, mean, m2)


def _block_rng(cfg: SimConfig, index: int, path: SamplingPath) -> np.random.Generator:
    sequence = np.random.SeedSequence(cfg.seed, spawn_key=(index, _PATH_KEYS[path]))
    return np.random.default_rng(sequence)


def _complex_normal(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.standard_normal(size) + 1j * rng.standard_normal(size)


def _sample_block(cfg: SimConfig, index: int, path: SamplingPath) -> tuple[np.ndarray, np.ndarray]:
    rng = _block_rng(cfg, index, path)
    size = cfg.block_length(index)
    inp = cfg.input
    x = np.where(rng.random(size) < inp.p1, inp.x1, 0.0)

    if path == "exponential":
        y = (1.0 + x * x) * rng.standard_exponential(size)
        return x, y

    params = cfg.params or ChannelParams(sigma_h_sq=1.0, sigma_w_sq=1.0, power=inp.average_power)
    s_abs = x * math.sqrt(params.sigma_w_sq / params.sigma_h_sq)
    h = math.sqrt(params.sigma_h_sq / 2.0) * _complex_normal(rng, size)
    w = math.sqrt(params.sigma_w_sq / 2.0) * _complex_normal(rng, size)
    r = h * s_abs + w
    return x, np.abs(r) ** 2 / params.sigma_w_sq


def sample_outputs(
    cfg: SimConfig, path: SamplingPath = "exponential"
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield (x, y) sample blocks in order.

    ``path="exponential"`` draws y directly from the exponential law with mean
    1 + x^2; ``path="physical"`` draws h and w as circular complex Gaussians,
    forms r = h s + w and normalises y = |r|^2 / sigma_w^2.
    """
    if path not in _PATH_KEYS:
        raise DomainError("sample_outputs", f"unknown sampling path {path!r}")
    for index in range(cfg.n_blocks):
        yield _sample_block(cfg, index, path)


def sample_arrays(
    cfg: SimConfig, path: SamplingPath = "exponential"
) -> tuple[np.ndarray, np.ndarray]:
    """All samples of a run as two arrays."""
    blocks = list(sample_outputs(cfg, path))
    return np.concatenate([b[0] for b in blocks]), np.concatenate([b[1] for b in blocks])


def information_density(x: np.ndarray, y: np.ndarray, inp: OnOffInput) -> np.ndarray:
    """ln f(y|x) - ln f(y) under the known densities, evaluated stably."""
    alpha = 1.0 + inp.x1 * inp.x1
    log_alpha = math.log(alpha)
    log_mixture = np.logaddexp(math.log(inp.p0) - y, math.log(inp.p1) - log_alpha - y / alpha)
    log_cond = np.where(x > 0.0, -log_alpha - y / alpha, -y)
    return log_cond - log_mixture


def _block_moments(job: tuple[SimConfig, int]) -> _Moments:
    cfg, index = job
    x, y = _sample_block(cfg, index, "exponential")
    values = information_density(x, y, cfg.input)
    mean = float(np.mean(values))
    return _Moments(values.size, mean, float(np.sum((values - mean) ** 2)))


def estimate_mi(cfg: SimConfig, workers: int = 1) -> MiEstimate:
    """Estimate the mutual information as the sample mean of the information density.

    Args:
        cfg: Run configuration; requires 0 < p1 < 1.
        workers: Number of processes; the estimate does not depend on it.

    Returns:
        MiEstimate with std_error = sample standard deviation / sqrt(n).
    """
    if not 0.0 < cfg.input.p1 < 1.0:
        raise DomainError("estimate_mi", f"p1 must lie in (0, 1), got {cfg.input.p1!r}")
    jobs = [(cfg, index) for index in range(cfg.n_blocks)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_block_moments, jobs))
    else:
        parts = [_block_moments(job) for job in jobs]

    total = parts[0]
    for part in parts[1:]:
        total = total.merge(part)
    variance = total.m2 / (total.count - 1)
    return MiEstimate(total.mean, math.sqrt(variance / total.count), total.count)


def ks_paths(cfg: SimConfig):
    """Two-sample Kolmogorov-Smirnov comparison of the two sampling paths' outputs."""
    _, y_exponential = sample_arrays(cfg, "exponential")
    _, y_physical = sample_arrays(cfg, "physical")
    return stats.ks_2samp(y_exponential, y_physical)


def ks_critical_value(n: int, m: int, alpha: float = 0.01) -> float:
    """Asymptotic two-sample KS critical value at significance ``alpha``."""
    return math.sqrt(-0.5 * math.log(alpha / 2.0)) * math.sqrt((n + m) / (n * m))


@dataclass(frozen=True)
class BatteryOutcome:
    seed: int
    estimate: float
    std_error: float
    deviation: float

    @property
    def z_score(self) -> float:
        return self.deviation / self.std_error


def monte_carlo_battery(
    x1: float, a: float, n_samples: int, seeds: list[int], workers: int = 1
) -> list[BatteryOutcome]:
    """Compare Monte Carlo estimates from several seeds with the closed form."""
    reference = mi_closed(x1, a)
    inp = OnOffInput.for_snr(x1, a)
    outcomes = []
    for seed in seeds:
        result = estimate_mi(SimConfig(seed=seed, n_samples=n_samples, input=inp), workers=workers)
        outcomes.append(
            BatteryOutcome(seed, result.estimate, result.std_error, result.estimate - reference)
        )
        logger.info("seed %d: estimate %.6g +- %.2g", seed, result.estimate, result.std_error)
    return outcomes
