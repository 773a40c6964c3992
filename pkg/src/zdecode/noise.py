"""Bitflip noise: uniform and truncated-Gaussian per-qubit rates.

Randomness comes from counter-based Philox streams. Every sample owns a set
of substreams addressed by ``(master_seed, sample_index, purpose)``, so a
sweep gives the same numbers regardless of worker count or ordering.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

P_MIN = 1e-4
P_MAX = 0.5

# substream purposes
STREAM_RATES = 0
STREAM_ERROR = 1
STREAM_CHOICE = 2
STREAM_DRAW = 3
STREAM_ENSEMBLE = 4
STREAM_WL = 5
STREAM_MISC = 6


def substream(seed: int, index: int = 0, purpose: int = 0) -> np.random.Generator:
    """Independent generator for one (sample, purpose) pair."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index), int(purpose)))
    return np.random.Generator(np.random.Philox(ss))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        raise ValueError("an explicit seed or Generator is required")
    return substream(int(rng))


@dataclass(frozen=True)
class RateVector:
    p: np.ndarray
    mean: float
    sigma_p: float = 0.0

    @property
    def uniform(self) -> bool:
        return self.sigma_p == 0.0

    def __len__(self) -> int:
        return len(self.p)


def uniform_rates(p: float, n: int) -> RateVector:
    if not 0.0 < p < 0.5:
        raise ValueError(f"p must lie in (0, 1/2), got {p}")
    a = np.full(n, float(p))
    a.setflags(write=False)
    return RateVector(a, float(p), 0.0)


def sample_rates(p: float, sigma_p: float, n: int, rng) -> RateVector:
    """Per-qubit rates from Normal(p, sigma_p^2) clamped to [1e-4, 1/2]."""
    if not 0.0 < p < 0.5:
        raise ValueError(f"p must lie in (0, 1/2), got {p}")
    if sigma_p < 0:
        raise ValueError("sigma_p must be nonnegative")
    if sigma_p == 0:
        return uniform_rates(p, n)
    rng = as_generator(rng)
    a = np.clip(rng.normal(p, sigma_p, size=n), P_MIN, P_MAX)
    a.setflags(write=False)
    return RateVector(a, float(p), float(sigma_p))


def sample_error(rates: RateVector, rng) -> np.ndarray:
    rng = as_generator(rng)
    return (rng.random(len(rates.p)) < rates.p).astype(np.uint8)


def error_probability(rates: RateVector, e) -> float:
    """Log-probability of the error configuration ``e``."""
    e = np.asarray(e)
    if e.shape != rates.p.shape:
        raise ValueError(f"error length {e.shape} does not match {len(rates.p)} rates")
    p = rates.p
    return float(np.sum(np.where(e.astype(bool), np.log(p), np.log1p(-p))))
