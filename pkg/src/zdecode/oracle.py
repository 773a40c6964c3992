"""Brute-force reference computations used to validate everything else.

Enumeration sizes are capped (2^20 configurations) and the caps are hard
errors. Class sums enumerate the coset ``g(s) + ker(H)`` of each syndrome.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import gmpy2
import numpy as np

from .codes import CodeSpec, class_representative, gf2_rref, label_index
from .noise import RateVector
from .pfaffian import LogZ
from .statmech import RbimInstance, TemperatureSpec, edge_endpoints

MAX_ENUM_BITS = 20


def _ctx(prec):
    return gmpy2.context(gmpy2.get_context(), precision=int(prec))


def _spin_table(n: int) -> np.ndarray:
    cfg = np.arange(1 << n, dtype=np.int64)[:, None]
    return 1 - 2 * ((cfg >> np.arange(n)) & 1)


def enumerate_partition(inst: RbimInstance, T: TemperatureSpec, precision_bits: int = 256) -> LogZ:
    """``log Z`` summed over every spin configuration."""
    n = inst.n_spins
    if n > MAX_ENUM_BITS:
        raise ValueError(f"{n} spins exceed the enumeration cap of {MAX_ENUM_BITS}")
    a, b = edge_endpoints(inst.L)
    spins = _spin_table(n)
    bonds = spins[:, a] * spins[:, b]
    J = inst.couplings_mp(precision_bits)
    K = inst.offsets_mp(precision_bits)
    with _ctx(precision_bits):
        beta = T.beta_mp(precision_bits)
        if inst.uniform:
            # sum_e J_e s_a s_b is an integer: group configurations by it
            sums = bonds @ inst.signs.astype(np.int64)
            vals, counts = np.unique(sums, return_counts=True)
            terms = [(int(c), beta * int(v)) for v, c in zip(vals, counts)]
        else:
            terms = [(1, beta * gmpy2.fsum([j * int(x) for j, x in zip(J, row)])) for row in bonds]
        top = max(t for _, t in terms)
        acc = gmpy2.fsum([c * gmpy2.exp(t - top) for c, t in terms])
        return LogZ(top + gmpy2.log(acc) + beta * gmpy2.fsum(K), int(precision_bits))


def transfer_matrix_log_partition(inst: RbimInstance, T: TemperatureSpec) -> float:
    """Float64 row-to-row transfer matrix ``log Z``; practical for L <= 10."""
    L = inst.L
    beta = T.beta
    J = inst.couplings
    Jh = J[: L * L].reshape(L, L)
    Jv = J[L * L:].reshape(L, L)
    s = _spin_table(L).astype(float)
    logz = 0.0
    M = None
    for i in range(L):
        diag = np.exp(beta * (s * np.roll(s, -1, axis=1)) @ Jh[i])
        V = np.exp(beta * (s * Jv[i]) @ s.T)
        step = diag[:, None] * V
        M = step if M is None else M @ step
        scale = np.abs(M).max()
        M /= scale
        logz += math.log(scale)
    return logz + math.log(np.trace(M)) + beta * float(np.sum(inst.offsets))


@lru_cache(maxsize=16)
def _kernel_elements(H_bytes: bytes, shape: tuple) -> np.ndarray:
    H = np.frombuffer(H_bytes, dtype=np.uint8).reshape(shape)
    R, piv = gf2_rref(H)
    n = shape[1]
    free = [c for c in range(n) if c not in piv]
    if len(free) > MAX_ENUM_BITS:
        raise ValueError("kernel too large to enumerate")
    basis = []
    for f in free:
        v = np.zeros(n, dtype=np.uint8)
        v[f] = 1
        for row, c in enumerate(piv):
            v[c] = R[row, f]
        basis.append(v)
    B = np.array(basis, dtype=np.int64)
    coef = ((np.arange(1 << len(free))[:, None] >> np.arange(len(free))) & 1)
    out = ((coef @ B) & 1).astype(np.uint8)
    out.setflags(write=False)
    return out


def coset(code: CodeSpec, s) -> np.ndarray:
    """Every error with syndrome ``s`` (one per row)."""
    if code.n_qubits > MAX_ENUM_BITS:
        raise ValueError(f"{code.n_qubits} qubits exceed the enumeration cap of {MAX_ENUM_BITS}")
    label0 = np.zeros(code.n_observables, dtype=np.uint8)
    g = class_representative(code, s, label0)
    K = _kernel_elements(code.check_matrix.tobytes(), code.check_matrix.shape)
    return K ^ g


def _labels(code: CodeSpec, errors: np.ndarray) -> np.ndarray:
    bits = (errors.astype(np.int64) @ code.observable_matrix.T.astype(np.int64)) & 1
    return bits @ (1 << np.arange(code.n_observables))


def class_probabilities(code: CodeSpec, rates: RateVector, s, precision_bits: int = 256) -> list:
    """Joint probabilities ``P(C_{s,k})`` for every class label ``k`` (mpfr)."""
    errs = coset(code, s)
    labs = _labels(code, errs)
    with _ctx(precision_bits):
        if rates.uniform:
            p = gmpy2.mpfr(float(rates.mean))
            q = 1 - p
            n = code.n_qubits
            w = errs.sum(axis=1)
            out = []
            for k in range(code.n_classes):
                ws, cnt = np.unique(w[labs == k], return_counts=True)
                out.append(gmpy2.fsum([int(c) * p ** int(x) * q ** (n - int(x)) for x, c in zip(ws, cnt)]))
            return out
        lp = [gmpy2.log(gmpy2.mpfr(float(x))) for x in rates.p]
        lq = [gmpy2.log(1 - gmpy2.mpfr(float(x))) for x in rates.p]
        out = [[] for _ in range(code.n_classes)]
        for e, k in zip(errs, labs):
            out[k].append(gmpy2.exp(gmpy2.fsum([lp[i] if b else lq[i] for i, b in enumerate(e)])))
        return [gmpy2.fsum(t) for t in out]


def attainable_syndromes(code: CodeSpec):
    """Iterate over all attainable syndromes (as uint8 vectors)."""
    # column space of H, i.e. the row space of H^T
    R, piv = gf2_rref(code.check_matrix.T)
    rank = len(piv)
    if rank > MAX_ENUM_BITS:
        raise ValueError("too many syndromes to enumerate")
    rows = R[:rank].astype(np.int64)
    for bits in itertools.product((0, 1), repeat=rank):
        v = np.zeros(code.n_detectors, dtype=np.int64)
        for b, r in zip(bits, rows):
            if b:
                v ^= r
        yield v.astype(np.uint8)


def enumerate_class_probabilities(code: CodeSpec, rates: RateVector, precision_bits: int = 256) -> dict:
    """Map syndrome tuple -> joint class probabilities (mpfr)."""
    if code.n_qubits > MAX_ENUM_BITS:
        raise ValueError(f"{code.n_qubits} qubits exceed the enumeration cap of {MAX_ENUM_BITS}")
    return {tuple(int(x) for x in s): class_probabilities(code, rates, s, precision_bits)
            for s in attainable_syndromes(code)}


@dataclass(frozen=True)
class ClassOptimum:
    max_log_prob: float
    n_max: int
    min_weight: int | None


def min_weight_profile(code: CodeSpec, rates: RateVector, s, rel_tol: float = 1e-12) -> list:
    """Per class: largest error probability and how many errors attain it."""
    errs = coset(code, s)
    labs = _labels(code, errs)
    out = []
    if rates.uniform:
        p = rates.mean
        w = errs.sum(axis=1)
        for k in range(code.n_classes):
            wk = w[labs == k]
            m = int(wk.min())
            lp = m * math.log(p) + (code.n_qubits - m) * math.log1p(-p)
            out.append(ClassOptimum(lp, int((wk == m).sum()), m))
        return out
    lp_all = errs @ np.log(rates.p) + (1 - errs) @ np.log1p(-rates.p)
    for k in range(code.n_classes):
        v = lp_all[labs == k]
        top = v.max()
        n = int((v >= top - rel_tol * abs(top)).sum())
        out.append(ClassOptimum(float(top), n, None))
    return out


def mp_class_distribution(profile: list, rel_tol: float = 1e-12) -> np.ndarray:
    """Class distribution of an MP decoder choosing uniformly among all
    maximum-probability errors."""
    top = max(c.max_log_prob for c in profile)
    w = np.array([c.n_max if c.max_log_prob >= top - rel_tol * abs(top) else 0 for c in profile],
                 dtype=float)
    return w / w.sum()


def dmp_classes(profile: list, rel_tol: float = 1e-12) -> set:
    """Classes maximizing (max probability, n_max) lexicographically."""
    top = max(c.max_log_prob for c in profile)
    best = [k for k, c in enumerate(profile) if c.max_log_prob >= top - rel_tol * abs(top)]
    m = max(profile[k].n_max for k in best)
    return {k for k in best if profile[k].n_max == m}


def exhaustive_matching(sg):
    """Minimum-weight perfect matching by exhaustive search over pairings.

    Pairings are explored lowest-index-first, and on equal weight the first
    pairing found wins.
    """
    from .matching import Matching

    n = sg.n_nodes
    if n % 2:
        raise ValueError("odd number of nodes")
    if n > 12:
        raise ValueError("exhaustive matching is limited to 12 nodes")
    W = sg.weights

    @lru_cache(maxsize=None)
    def best(mask: int):
        if mask == 0:
            return 0.0, ()
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        choice = None
        j_mask = rest
        while j_mask:
            j = (j_mask & -j_mask).bit_length() - 1
            j_mask &= j_mask - 1
            w = W[i, j]
            if not np.isfinite(w):
                continue
            sub_w, sub_p = best(rest & ~(1 << j))
            tot = w + sub_w
            if choice is None or tot < choice[0]:
                choice = (tot, ((i, j),) + sub_p)
        if choice is None:
            return math.inf, ()
        return choice

    total, pairs = best((1 << n) - 1)
    if not np.isfinite(total):
        raise ValueError("no perfect matching exists")
    return Matching(tuple(sorted(pairs)), float(total))


def count_pairings(n: int) -> int:
    return math.prod(range(n - 1, 0, -2)) if n else 1


def label_of(code: CodeSpec, e) -> int:
    return label_index((code.observable_matrix.astype(np.int64) @ np.asarray(e, dtype=np.int64)) & 1)
