"""Confidence intervals and the CI-width versus sample-fraction analysis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import beta as beta_dist

from .noise import as_generator

DEFAULT_RESAMPLES = 1000
DEFAULT_LEVEL = 0.95


@dataclass(frozen=True)
class CiResult:
    mean: float
    lower: float
    upper: float
    level: float
    method: str
    n: int = 0

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def overlaps(self, other: "CiResult") -> bool:
        return self.lower <= other.upper and other.lower <= self.upper


def _check_level(level: float) -> None:
    if not 0 <= level < 1:
        raise ValueError("level must lie in [0, 1)")


def bootstrap_ci(samples, n_resamples: int = DEFAULT_RESAMPLES, level: float = DEFAULT_LEVEL,
                 rng=None, chunk: int = 100) -> CiResult:
    """Percentile bootstrap interval for the mean."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("bootstrap needs at least one sample")
    _check_level(level)
    rng = as_generator(rng if rng is not None else 0)
    n = x.size
    means = np.empty(n_resamples)
    for start in range(0, n_resamples, chunk):
        stop = min(start + chunk, n_resamples)
        idx = rng.integers(0, n, size=(stop - start, n))
        means[start:stop] = x[idx].mean(axis=1)
    a = (1 - level) / 2
    lo, hi = np.quantile(means, [a, 1 - a])
    m = float(x.mean())
    # the percentile interval of a constant sample is exactly that constant
    return CiResult(m, float(min(lo, m)), float(max(hi, m)), level, "bootstrap", n)


def jeffreys_ci(k: int, n: int, level: float = DEFAULT_LEVEL) -> CiResult:
    """Equal-tailed interval of Beta(k + 1/2, n - k + 1/2).

    ``mean`` is the posterior mean ``(k + 1/2) / (n + 1)``, which always lies
    inside the interval.
    """
    if n < 1 or not 0 <= k <= n or int(k) != k or int(n) != n:
        raise ValueError(f"need integers 0 <= k <= n with n >= 1, got k={k}, n={n}")
    _check_level(level)
    a = (1 - level) / 2
    lo, hi = beta_dist.ppf([a, 1 - a], k + 0.5, n - k + 0.5)
    return CiResult((k + 0.5) / (n + 1), float(lo), float(hi), level, "jeffreys", int(n))


@dataclass(frozen=True)
class WidthCurve:
    fractions: np.ndarray
    widths: np.ndarray
    reference_width: float | None
    crossing: float | None


def _subsample_widths(x, fractions, method, rng, n_resamples, level):
    order = as_generator(rng).permutation(x.size)
    widths = []
    for f in fractions:
        m = int(round(f * x.size))
        if m < 10:
            raise ValueError(f"fraction {f} leaves fewer than 10 samples")
        sub = x[order[:m]]
        if method == "bootstrap":
            ci = bootstrap_ci(sub, n_resamples, level, rng)
        elif method == "jeffreys":
            ci = jeffreys_ci(int(round(sub.sum())), m, level)
        else:
            raise ValueError(f"unknown method {method!r}")
        widths.append(ci.width)
    return np.array(widths)


def crossing_fraction(fractions, widths, reference: float) -> float | None:
    """First fraction at which ``widths`` drops to ``reference`` (linear
    interpolation between grid points)."""
    f = np.asarray(fractions, dtype=float)
    w = np.asarray(widths, dtype=float)
    order = np.argsort(f)
    f, w = f[order], w[order]
    if w[0] <= reference:
        return float(f[0])
    for k in range(1, len(f)):
        if w[k] <= reference:
            t = (w[k - 1] - reference) / (w[k - 1] - w[k])
            return float(f[k - 1] + t * (f[k] - f[k - 1]))
    return None


def ci_width_vs_fraction(samples, fractions, method: str = "bootstrap", rng=None,
                         reference_samples=None, reference_method: str | None = None,
                         n_resamples: int = DEFAULT_RESAMPLES, level: float = DEFAULT_LEVEL) -> WidthCurve:
    """CI width on seeded without-replacement prefixes of ``samples``.

    If ``reference_samples`` (e.g. the 0/1 counting indicators) are given,
    their full-set width is the reference and the crossing fraction is
    reported.
    """
    fr = np.asarray(fractions, dtype=float)
    if np.any(fr <= 0) or np.any(fr > 1):
        raise ValueError("fractions must lie in (0, 1]")
    rng = as_generator(rng if rng is not None else 0)
    x = np.asarray(samples, dtype=float).ravel()
    widths = _subsample_widths(x, fr, method, rng, n_resamples, level)
    ref = cross = None
    if reference_samples is not None:
        r = np.asarray(reference_samples, dtype=float).ravel()
        rm = reference_method or method
        if rm == "jeffreys":
            ref = jeffreys_ci(int(round(r.sum())), r.size, level).width
        else:
            ref = bootstrap_ci(r, n_resamples, level, rng).width
        cross = crossing_fraction(fr, widths, ref)
    return WidthCurve(fr, widths, ref, cross)


def ci_for(samples, method: str, rng=None, n_resamples: int = DEFAULT_RESAMPLES,
           level: float = DEFAULT_LEVEL) -> CiResult:
    x = np.asarray(samples, dtype=float)
    if method == "jeffreys":
        return jeffreys_ci(int(round(x.sum())), x.size, level)
    return bootstrap_ci(x, n_resamples, level, rng)
