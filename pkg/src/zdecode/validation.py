"""Input checks shared by the estimator-style decoders."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.exceptions import NotFittedError

from .codes import CodeSpec
from .noise import RateVector, uniform_rates


def check_binary_matrix(X, n_columns: int, name: str = "X") -> np.ndarray:
    """2-D uint8 array of 0/1 entries with ``n_columns`` columns.

    A single 1-D vector is promoted to one row.
    """
    A = np.asarray(X)
    if A.ndim == 1:
        A = A[None, :]
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {A.shape}")
    if A.shape[1] != n_columns:
        raise ValueError(f"{name} has {A.shape[1]} columns, expected {n_columns}")
    if A.size and not np.isin(A, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0 and 1")
    return A.astype(np.uint8, copy=False)


def check_labels(y, n_samples: int, n_classes: int) -> np.ndarray:
    a = np.asarray(y)
    if a.ndim != 1 or len(a) != n_samples:
        raise ValueError(f"y must be 1-D with {n_samples} entries")
    if a.size and (a.min() < 0 or a.max() >= n_classes or not np.all(a == np.round(a))):
        raise ValueError(f"labels must be integers in [0, {n_classes})")
    return a.astype(np.int64)


def check_probability(p, name: str = "p") -> float:
    if not isinstance(p, numbers.Real) or not 0.0 < float(p) < 0.5:
        raise ValueError(f"{name} must be a real in (0, 1/2), got {p!r}")
    return float(p)


def check_rates(rates, code: CodeSpec) -> RateVector:
    """Accept a scalar rate, a per-qubit array or a RateVector."""
    if isinstance(rates, RateVector):
        rv = rates
    elif np.ndim(rates) == 0:
        return uniform_rates(check_probability(rates), code.n_qubits)
    else:
        a = np.asarray(rates, dtype=float)
        if np.any(a <= 0) or np.any(a > 0.5):
            raise ValueError("per-qubit rates must lie in (0, 1/2]")
        sigma = float(a.std())
        rv = RateVector(a, float(a.mean()), sigma)
    if len(rv.p) != code.n_qubits:
        raise ValueError(f"{len(rv.p)} rates for {code.n_qubits} qubits")
    return rv


def check_positive_int(v, name: str) -> int:
    if not isinstance(v, numbers.Integral) or v < 1:
        raise ValueError(f"{name} must be a positive integer, got {v!r}")
    return int(v)


def check_is_fitted(est, attribute: str = "code_") -> None:
    if not hasattr(est, attribute):
        raise NotFittedError(f"{type(est).__name__} is not fitted; call fit first")
