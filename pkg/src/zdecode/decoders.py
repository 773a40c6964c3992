"""Decoders in scikit-learn estimator form.

``X`` holds syndromes (one row per shot, one column per detector) and the
targets are logical class labels. ``predict`` returns labels, ``transform``
returns a correction per syndrome and ``score`` is the fraction of shots
whose predicted class equals the true one.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin

from . import matching, noise
from .codes import build_code, class_representative, label_bits, label_index, logical_effect
from .estimators import TIE_TOLERANCE, ClassZProfile, max_z_classes
from .pfaffian import class_log_partitions, default_precision
from .statmech import temperature
from .validation import (check_binary_matrix, check_is_fitted, check_labels, check_positive_int,
                         check_rates)


class _CodeDecoder(ClassifierMixin, TransformerMixin, BaseEstimator):

    def _setup(self):
        self.code_ = build_code(self.code, check_positive_int(self.distance, "distance"))
        self.rates_ = check_rates(self.p, self.code_)
        self.classes_ = np.arange(self.code_.n_classes)
        self.n_features_in_ = self.code_.n_detectors

    def fit(self, X=None, y=None):
        """Build the code and noise model; ``X`` and ``y`` are only checked."""
        self._setup()
        if X is not None:
            A = check_binary_matrix(X, self.code_.n_detectors)
            if y is not None:
                check_labels(y, len(A), self.code_.n_classes)
        return self

    def _rows(self, X):
        check_is_fitted(self)
        return check_binary_matrix(X, self.code_.n_detectors)

    def predict(self, X):
        return np.array([self._predict_one(s) for s in self._rows(X)], dtype=np.int64)

    def transform(self, X):
        """Correction (one bit per qubit) for each syndrome."""
        out = np.zeros((0, self.code_.n_qubits), dtype=np.uint8)
        rows = [self._correct_one(s) for s in self._rows(X)]
        return np.array(rows, dtype=np.uint8) if rows else out

    def _correct_one(self, s):
        lab = label_bits(self._predict_one(s), self.code_.n_observables)
        return class_representative(self.code_, s, lab)


class MWPMDecoder(_CodeDecoder):
    """Minimum-weight perfect matching with log-odds edge weights."""

    def __init__(self, code="torus", distance=4, p=0.1):
        self.code = code
        self.distance = distance
        self.p = p

    def fit(self, X=None, y=None):
        super().fit(X, y)
        self.graph_ = matching.build_matching_graph(self.code_, self.rates_)
        return self

    def _correct_one(self, s):
        return matching.decode(self.code_, self.graph_, s)

    def _predict_one(self, s):
        return label_index(logical_effect(self.code_, self._correct_one(s)))


class EnsembleMWPMDecoder(_CodeDecoder):
    """Majority vote over matchings with perturbed edge weights.

    Each call to ``predict`` draws fresh perturbations from a generator
    seeded by ``random_state``, so repeated calls give the same answer.
    """

    def __init__(self, code="torus", distance=4, p=0.1, n_ensemble=50, sigma=1e-6,
                 mode="weights", random_state=0):
        self.code = code
        self.distance = distance
        self.p = p
        self.n_ensemble = n_ensemble
        self.sigma = sigma
        self.mode = mode
        self.random_state = random_state

    def _votes(self, X):
        rows = self._rows(X)
        rng = noise.substream(int(self.random_state), 0, noise.STREAM_ENSEMBLE)
        n = check_positive_int(self.n_ensemble, "n_ensemble")
        out = [matching.ensemble_decode(self.code_, self.rates_, s, n, float(self.sigma), rng, self.mode)
               for s in rows]
        return out

    def predict(self, X):
        return np.array([w for w, _ in self._votes(X)], dtype=np.int64)

    def predict_proba(self, X):
        """Vote fractions per class."""
        v = np.array([votes for _, votes in self._votes(X)], dtype=float)
        return v / v.sum(axis=1, keepdims=True)

    def _predict_one(self, s):
        return int(self.predict(s[None, :])[0])


class PartitionFunctionDecoder(_CodeDecoder):
    """Class partition functions of the random-bond Ising model (torus only).

    ``temperature`` is a fraction of the Nishimori temperature.
    ``strategy="max"`` returns a class of largest Z (ties broken at random),
    ``strategy="prob"`` samples a class with probability proportional to Z.
    """

    def __init__(self, distance=4, p=0.1, temperature=1.0, strategy="max", precision_bits=None,
                 random_state=0):
        self.distance = distance
        self.p = p
        self.temperature = temperature
        self.strategy = strategy
        self.precision_bits = precision_bits
        self.random_state = random_state

    code = "torus"

    def fit(self, X=None, y=None):
        if self.strategy not in ("max", "prob"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        super().fit(X, y)
        self.T_ = temperature(self.rates_, float(self.temperature))
        self.precision_bits_ = (int(self.precision_bits) if self.precision_bits
                                else default_precision(self.T_, self.rates_.uniform))
        return self

    def log_partitions(self, X):
        """log Z per class at the decoding temperature, shape (n, n_classes)."""
        out = []
        zero = np.zeros(self.code_.n_observables, dtype=np.uint8)
        for s in self._rows(X):
            e = class_representative(self.code_, s, zero)
            lz = class_log_partitions(self.code_, self.rates_, e, self.T_, self.precision_bits_)
            out.append([float(z) for z in lz])
        return np.array(out).reshape(-1, self.code_.n_classes)

    def predict_proba(self, X):
        lz = self.log_partitions(X)
        w = np.exp(lz - lz.max(axis=1, keepdims=True))
        return w / w.sum(axis=1, keepdims=True)

    def predict(self, X):
        lz = self.log_partitions(X)
        rng = noise.substream(int(self.random_state), 0, noise.STREAM_CHOICE)
        out = []
        for row in lz:
            if self.strategy == "max":
                prof = ClassZProfile(row, 0, logz_T=row, tie_tolerance=TIE_TOLERANCE)
                c = max_z_classes(prof)
                out.append(c[0] if len(c) == 1 else int(c[rng.integers(len(c))]))
            else:
                w = np.exp(row - row.max())
                out.append(int(rng.choice(len(w), p=w / w.sum())))
        return np.array(out, dtype=np.int64)

    def _predict_one(self, s):
        return int(self.predict(s[None, :])[0])
