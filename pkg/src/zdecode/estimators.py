"""Partition-function decoders and the decoding/order probability estimators.

For every sampled error the four class partition functions are computed at
the Nishimori temperature (giving the class probabilities) and at each
target temperature (driving the decoder). Per sample this yields

* ``decoding_ratio``: conditional probability of a class picked uniformly
  from the maximum-Z classes at T,
* ``order_ratio``: relative weight of the true class at T,
* ``maxz_success`` / ``probz_success``: whether the maximum-Z decoder and
  the probabilistic decoder (softmax of log Z at T) pick the true class.

Averages of the first two estimate the same quantities as averages of the
last two, with lower variance.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import noise
from .codes import CodeKind, CodeSpec, label_index, logical_effect
from .pfaffian import class_log_partitions, default_precision
from .statmech import build_rbim, class_flipped_instance, temperature
from .wanglandau import (DEFAULT_ALPHA, DEFAULT_LN_F_STOP, DEFAULT_SWEEPS,
                         density_of_states, ground_state)

log = logging.getLogger(__name__)

TIE_TOLERANCE = 2.0 ** -30
ZERO = "zero"


def _logsumexp(x) -> float:
    x = np.asarray(x, dtype=float)
    top = x.max()
    return float(top + math.log(np.exp(x - top).sum()))


@dataclass(frozen=True)
class ClassZProfile:
    """Class partition functions of one sample.

    ``logz_T`` holds log Z at the decoding temperature; for true zero
    temperature it is None and ``ground`` holds ``(E_min, n_max)`` per class
    instead. ``logz_nish`` is always log Z at the Nishimori temperature.
    """

    logz_nish: np.ndarray
    true_class: int
    logz_T: np.ndarray | None = None
    ground: tuple | None = None
    tie_tolerance: float = TIE_TOLERANCE

    def __post_init__(self):
        if (self.logz_T is None) == (self.ground is None):
            raise ValueError("give exactly one of logz_T and ground")

    @property
    def n_classes(self) -> int:
        return len(self.logz_nish)

    def class_weights_T(self) -> np.ndarray:
        """Normalized Z_T(C) / sum Z_T; at T = 0 this is n_max over the
        lowest-energy classes."""
        if self.logz_T is not None:
            x = np.asarray(self.logz_T, dtype=float)
            w = np.exp(x - x.max())
        else:
            e = np.array([g[0] for g in self.ground])
            n = np.array([g[1] for g in self.ground], dtype=float)
            low = e <= e.min() + 1e-9 * max(1.0, abs(e.min()))
            w = np.where(low, n, 0.0)
        return w / w.sum()

    def nishimori_probabilities(self) -> np.ndarray:
        x = np.asarray(self.logz_nish, dtype=float)
        return np.exp(x - _logsumexp(x))


def max_z_classes(profile: ClassZProfile) -> list:
    if profile.logz_T is not None:
        x = np.asarray(profile.logz_T, dtype=float)
        top = x.max()
        tol = profile.tie_tolerance * max(1.0, abs(top))
        return [int(k) for k in np.flatnonzero(x >= top - tol)]
    keys = [(-round(e, 9), n) for e, n in profile.ground]
    best = max(keys)
    return [k for k, key in enumerate(keys) if key == best]


def maxz_decode(profile: ClassZProfile, rng) -> int:
    cands = max_z_classes(profile)
    if len(cands) == 1:
        return cands[0]
    return int(cands[noise.as_generator(rng).integers(len(cands))])


def probz_decode(profile: ClassZProfile, rng) -> int:
    w = profile.class_weights_T()
    return int(noise.as_generator(rng).choice(len(w), p=w))


def decoding_ratio(profile: ClassZProfile, rng=None, chosen: int | None = None) -> float:
    c = maxz_decode(profile, rng) if chosen is None else chosen
    x = np.asarray(profile.logz_nish, dtype=float)
    return float(math.exp(x[c] - _logsumexp(x)))


def order_ratio(profile: ClassZProfile) -> float:
    return float(profile.class_weights_T()[profile.true_class])


@dataclass(frozen=True)
class SampleRecord:
    decoding_ratio: float
    order_ratio: float
    maxz_success: bool
    probz_success: bool
    n_max_classes: int
    seed_path: tuple


def evaluate(profile: ClassZProfile, choice_rng, draw_rng, seed_path=()) -> SampleRecord:
    """All four measurements of one sample, sharing the maximum-Z choice."""
    chosen = maxz_decode(profile, choice_rng)
    drawn = probz_decode(profile, draw_rng)
    return SampleRecord(decoding_ratio(profile, chosen=chosen), order_ratio(profile),
                        chosen == profile.true_class, drawn == profile.true_class,
                        len(max_z_classes(profile)), tuple(seed_path))


def _target_key(t) -> str:
    if t == ZERO:
        return ZERO
    if t == "nishimori":
        return "1"
    return repr(float(t)) if float(t) != 1.0 else "1"


@dataclass(frozen=True)
class SweepConfig:
    """One grid point: code, noise and the temperatures to decode at.

    ``targets`` entries are fractions of T_N (1.0 is T_N itself) or
    ``"zero"`` for Wang-Landau at exactly T = 0. ``precision`` maps a target
    key to bits; missing keys use the default policy.
    """

    code: str
    distance: int
    p: float
    sigma_p: float = 0.0
    targets: tuple = (1.0,)
    n_samples: int = 1000
    seed: int = 0
    precision: dict = field(default_factory=dict)
    wl_alpha: float = DEFAULT_ALPHA
    wl_ln_f_stop: float = DEFAULT_LN_F_STOP
    wl_sweeps: int = DEFAULT_SWEEPS
    sample_offset: int = 0

    def precision_for(self, target, T) -> int:
        key = _target_key(target)
        if key in self.precision:
            return int(self.precision[key])
        return default_precision(T, self.sigma_p == 0)


def _class_instances(code: CodeSpec, rates, e):
    inst = build_rbim(code, rates, e)
    own = label_index(logical_effect(code, e))
    return [class_flipped_instance(inst, code.logical_reps[a ^ own]) for a in range(code.n_classes)]


def zero_temperature_ground(code: CodeSpec, rates, e, seed: int, index: int, alpha=DEFAULT_ALPHA,
                            ln_f_stop=DEFAULT_LN_F_STOP, sweeps=DEFAULT_SWEEPS) -> tuple:
    """Per class ``(E_min, n_max)`` from Wang-Landau ground-state data.

    The ground-state degeneracy counts spin states, which come in pairs
    related by a global flip, so ``n_max = round(g / 2)``.
    """
    out = []
    for a, inst in enumerate(_class_instances(code, rates, e)):
        rng = noise.substream(seed, index, 100 + a)
        dos = density_of_states(inst, rng, alpha, ln_f_stop, sweeps)
        emin, lg = ground_state(dos)
        out.append((emin, max(1, int(round(math.exp(lg) / 2)))))
    return tuple(out)


def sample_profiles(cfg: SweepConfig, index: int):
    """Draw sample ``index`` and return ``{target_key: ClassZProfile}``."""
    code_kind = CodeKind.parse(cfg.code)
    if code_kind is not CodeKind.TORUS:
        raise ValueError("partition-function estimators need the torus")
    code = _code(cfg.code, cfg.distance)
    rates = noise.sample_rates(cfg.p, cfg.sigma_p, code.n_qubits,
                               noise.substream(cfg.seed, index, noise.STREAM_RATES))
    e = noise.sample_error(rates, noise.substream(cfg.seed, index, noise.STREAM_ERROR))
    true = label_index(logical_effect(code, e))
    tn = temperature(rates, "nishimori")
    lz_n = np.array([float(z) for z in class_log_partitions(code, rates, e, tn, cfg.precision_for(1.0, tn))])
    out = {}
    for t in cfg.targets:
        key = _target_key(t)
        if key == ZERO:
            ground = zero_temperature_ground(code, rates, e, cfg.seed, index, cfg.wl_alpha,
                                             cfg.wl_ln_f_stop, cfg.wl_sweeps)
            out[key] = ClassZProfile(lz_n, true, ground=ground)
        elif key == "1":
            out[key] = ClassZProfile(lz_n, true, logz_T=lz_n)
        else:
            T = temperature(rates, float(t))
            lz = class_log_partitions(code, rates, e, T, cfg.precision_for(t, T))
            out[key] = ClassZProfile(lz_n, true, logz_T=np.array([float(z) for z in lz]))
    return out


_CODE_CACHE: dict = {}


def _code(kind, d) -> CodeSpec:
    from .codes import build_code

    key = (str(kind), int(d))
    if key not in _CODE_CACHE:
        _CODE_CACHE[key] = build_code(kind, d)
    return _CODE_CACHE[key]


def _run_one(args):
    cfg, index = args
    try:
        profiles = sample_profiles(cfg, index)
    except Exception as exc:
        log.error("sample %d (seed %d) failed: %s", index, cfg.seed, exc)
        raise RuntimeError(f"sample {index} (seed {cfg.seed}) failed: {exc}") from exc
    out = {}
    for key, prof in profiles.items():
        out[key] = evaluate(prof, noise.substream(cfg.seed, index, noise.STREAM_CHOICE),
                            noise.substream(cfg.seed, index, noise.STREAM_DRAW),
                            (cfg.seed, index))
    return out


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("ZDECODE_WORKERS", "1")))
    except ValueError:
        return 1


def run_sweep(cfg: SweepConfig, workers: int | None = None) -> dict:
    """Run all samples of one grid point; returns ``{target_key: [SampleRecord]}``
    ordered by sample index."""
    workers = worker_count() if workers is None else workers
    jobs = [(cfg, cfg.sample_offset + i) for i in range(cfg.n_samples)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    else:
        results = [_run_one(j) for j in jobs]
    out: dict = {}
    for r in results:
        for key, rec in r.items():
            out.setdefault(key, []).append(rec)
    return out


ESTIMATORS = ("decoding_ratio", "maxz_counting", "order_ratio", "probz_counting")


def estimator_samples(records: list, estimator: str) -> np.ndarray:
    if estimator == "decoding_ratio":
        return np.array([r.decoding_ratio for r in records])
    if estimator == "order_ratio":
        return np.array([r.order_ratio for r in records])
    if estimator == "maxz_counting":
        return np.array([float(r.maxz_success) for r in records])
    if estimator == "probz_counting":
        return np.array([float(r.probz_success) for r in records])
    raise ValueError(f"unknown estimator {estimator!r}")
