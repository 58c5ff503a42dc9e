"""Sampling estimates of E|f(z)| and E[f(z)^2] under the erasure model.

Randomness comes from numpy's PCG64. The sample stream is cut into fixed
chunks of ``CHUNK`` samples; chunk ``i`` draws from
``PCG64(SeedSequence(seed, spawn_key=(i,)))``, so an estimate depends only
on ``(seed, samples)`` and never on the number of workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .boolfn import BooleanFunction
from .erasure import fourier

CHUNK = 1 << 16
GENERATOR = "numpy PCG64, SeedSequence(seed, spawn_key=(chunk,)), chunk=65536"


@dataclass(frozen=True)
class McConfig:
    p: float
    samples: int
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not 0 < self.p < 1:
            raise ValueError(f"p must lie in (0, 1), got {self.p}")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    samples: int
    seed: int
    generator: str = GENERATOR

    def to_json(self) -> dict:
        return {
            "mean": self.mean,
            "std_error": self.std_error,
            "samples": self.samples,
            "seed": self.seed,
            "generator": self.generator,
        }


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def sample_z(n: int, p: float, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Erasure samples in {-1, 0, 1}: each coordinate is +-1 w.p. p/2 each, 0 w.p. 1-p."""
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    shape = (n,) if size is None else (size, n)
    u = rng.random(shape)
    return np.where(u < p / 2, 1, np.where(u < p, -1, 0)).astype(np.int8)


def _chunk_moments(args):
    coeffs, n, p, seed, index, count, squared = args
    z = sample_z(n, p, chunk_rng(seed, index), count)
    values = _kernels.extension_eval(coeffs, z)
    x = values * values if squared else np.abs(values)
    return float(x.sum()), float((x * x).sum())


def _estimate(f: BooleanFunction, config: McConfig, squared: bool) -> McEstimate:
    coeffs = fourier(f).as_floats()
    jobs = []
    for index, start in enumerate(range(0, config.samples, CHUNK)):
        count = min(CHUNK, config.samples - start)
        jobs.append((coeffs, f.n, config.p, config.seed, index, count, squared))
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            moments = list(pool.map(_chunk_moments, jobs))
    else:
        moments = [_chunk_moments(job) for job in jobs]
    total = math.fsum(m[0] for m in moments)
    total_sq = math.fsum(m[1] for m in moments)
    n = config.samples
    mean = total / n
    if n > 1:
        var = max(total_sq - n * mean * mean, 0.0) / (n - 1)
        se = math.sqrt(var / n)
    else:
        se = float("nan")
    return McEstimate(mean, se, n, config.seed)


def estimate_phi(f: BooleanFunction, config: McConfig) -> McEstimate:
    return _estimate(f, config, squared=False)


def estimate_sq(f: BooleanFunction, config: McConfig) -> McEstimate:
    return _estimate(f, config, squared=True)
