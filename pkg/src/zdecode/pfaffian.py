"""Exact torus partition functions from Pfaffians of Kasteleyn matrices.

Each dual vertex (plaquette) becomes a four-node city ``N, E, S, W`` whose
six internal edges have unit weight. Every qubit adds one edge between
neighbouring cities with weight ``exp(-2 beta J_e)``; this is the
low-temperature (domain wall) expansion around the all-up state. The four
matrices differ by the signs ``sx, sy`` on edges wrapping around the torus.

With ``S_k`` the domain-wall sum restricted to homology class ``k`` (ordered
like the class labels), the Pfaffians obey

    Pf(sx, sy) = S_0 + a_1 sx S_1 + a_2 sy S_2 + a_3 sx sy S_3

with ``(a_1, a_2, a_3) = (-1, -1, -1)`` for even ``L`` and ``(-1, 1, 1)``
for odd ``L``. The trivial sector alone gives ``Z``; the other three sectors
are exactly the partition functions of the class-shifted disorders, so one
set of four Pfaffians yields all four class partition functions.

All arithmetic is gmpy2 ``mpfr`` with an explicit precision.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import gmpy2
import numpy as np

from .codes import CodeSpec, label_index, logical_effect
from .noise import RateVector
from .statmech import (RbimInstance, TemperatureSpec, build_rbim,
                       class_flipped_instance, temperature)

ORIENTATIONS = ((1, 1), (1, -1), (-1, 1), (-1, -1))
_LABELS = {(1, 1): "++", (1, -1): "+-", (-1, 1): "-+", (-1, -1): "--"}
_N, _E, _S, _W = 0, 1, 2, 3


def _ctx(prec: int):
    return gmpy2.context(gmpy2.get_context(), precision=int(prec))


def default_precision(T: TemperatureSpec, uniform: bool = True) -> int:
    """Bits used at temperature ``T``: 256 at or above T_N, 4096 down to
    0.1 T_N and 9999 below that."""
    f = T.fraction
    if f >= 1.0 - 1e-12:
        return 256
    if f >= 0.1 - 1e-12:
        return 4096
    return 9999


@dataclass(frozen=True)
class LogZ:
    value: object
    precision_bits: int

    def __float__(self) -> float:
        return float(self.value)

    def __repr__(self) -> str:
        return f"LogZ({float(self.value):.17g}, {self.precision_bits} bits)"


@dataclass(frozen=True)
class KasteleynMatrix:
    """Sparse skew-symmetric matrix; ``entries`` maps (i, j), i < j, to mpfr."""

    dimension: int
    entries: dict
    orientation_label: str
    precision_bits: int

    def to_dense(self) -> list:
        n = self.dimension
        z = gmpy2.mpfr(0)
        A = [[z] * n for _ in range(n)]
        with _ctx(self.precision_bits):
            for (i, j), v in self.entries.items():
                A[i][j] = v
                A[j][i] = -v
        return A

    def fingerprint(self) -> str:
        """Stable digest of the pattern, signs and values (for pinning)."""
        h = hashlib.sha256()
        for (i, j) in sorted(self.entries):
            h.update(f"{i},{j},{self.entries[(i, j)].digits(16)};".encode())
        return h.hexdigest()


def dual_edges(L: int) -> list:
    """(city_from, city_to, axis, wraps) for every qubit, in qubit order.

    Horizontal edge ``h(i, j)`` separates plaquettes ``p(i-1, j)`` and
    ``p(i, j)`` and becomes a vertical dual edge; ``v(i, j)`` separates
    ``p(i, j-1)`` and ``p(i, j)``.
    """
    out = []
    for i in range(L):
        for j in range(L):
            out.append((((i - 1) % L) * L + j, i * L + j, "y", i == 0))
    for i in range(L):
        for j in range(L):
            out.append((i * L + (j - 1) % L, i * L + j, "x", j == 0))
    return out


def _dual_weights(inst: RbimInstance, T: TemperatureSpec, prec: int) -> list:
    J = inst.couplings_mp(prec)
    with _ctx(prec):
        beta = T.beta_mp(prec)
        return [gmpy2.exp(-2 * beta * j) for j in J]


def _build(L: int, w: list, sx: int, sy: int, prec: int) -> KasteleynMatrix:
    entries = {}
    one = gmpy2.mpfr(1)
    for c in range(L * L):
        for a in range(4):
            for b in range(a + 1, 4):
                entries[(4 * c + a, 4 * c + b)] = one
    with _ctx(prec):
        for q, (ca, cb, axis, wraps) in enumerate(dual_edges(L)):
            if axis == "y":
                u, v, s = 4 * ca + _S, 4 * cb + _N, (sy if wraps else 1)
            else:
                u, v, s = 4 * ca + _E, 4 * cb + _W, (sx if wraps else 1)
            val = w[q] if s > 0 else -w[q]
            if u < v:
                entries[(u, v)] = val
            else:
                entries[(v, u)] = -val
    return KasteleynMatrix(4 * L * L, entries, _LABELS[(sx, sy)], int(prec))


def kasteleyn_graphs(inst: RbimInstance, T: TemperatureSpec, precision_bits: int = 256) -> list:
    """The four Kasteleyn matrices, ordered ``++, +-, -+, --``."""
    if precision_bits < 64:
        raise ValueError("precision_bits must be at least 64")
    w = _dual_weights(inst, T, precision_bits)
    return [_build(inst.L, w, sx, sy, precision_bits) for sx, sy in ORIENTATIONS]


def _perm_sign(seq: list) -> int:
    n = len(seq)
    seen = [False] * n
    sign = 1
    for s in range(n):
        if seen[s]:
            continue
        length = 0
        x = s
        while not seen[x]:
            seen[x] = True
            x = seq[x]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _sparse_pf(m: KasteleynMatrix):
    """Sparse Parlett-Reid elimination in city order.

    The lowest live vertex ``i`` is paired with the live column of largest
    ``|a_ij|`` (partial pivoting), so entries that cancel to rounding
    residue are never used as pivots while a genuine entry exists. Returns
    None only if a whole row vanishes.
    """
    n = m.dimension
    seq = []
    with _ctx(m.precision_bits):
        # negation must happen inside the context or it rounds to 53 bits
        rows = [dict() for _ in range(n)]
        for (i, j), v in m.entries.items():
            rows[i][j] = v
            rows[j][i] = -v
        pf = gmpy2.mpfr(1)
        alive = [True] * n
        for i in range(n):
            if not alive[i]:
                continue
            ri = rows[i]
            j = max((k for k in ri if alive[k]), key=lambda k: (abs(ri[k]), -k), default=None)
            if j is None or ri[j] == 0:
                return None
            aij = ri[j]
            pf *= aij
            seq += [i, j]
            rj = rows[j]
            alive[i] = alive[j] = False
            front = sorted(k for k in set(ri) | set(rj) if alive[k])
            inv = 1 / aij
            for x, k in enumerate(front):
                aik = ri.get(k)
                ajk = rj.get(k)
                rk = rows[k]
                rk.pop(i, None)
                rk.pop(j, None)
                for l in front[x + 1:]:
                    ail = ri.get(l)
                    ajl = rj.get(l)
                    t = 0
                    if ajk is not None and ail is not None:
                        t = ajk * ail
                    if aik is not None and ajl is not None:
                        t = t - aik * ajl
                    if t == 0:
                        continue
                    v = rk.get(l, 0) + t * inv
                    rk[l] = v
                    rows[l][k] = -v
            rows[i] = rows[j] = None
        return _perm_sign(seq) * pf


def _check_skew(A: list) -> int:
    n = len(A)
    for i in range(n):
        if len(A[i]) != n:
            raise ValueError("matrix must be square")
        if A[i][i] != 0:
            raise ValueError("matrix is not skew-symmetric (nonzero diagonal)")
        for j in range(i + 1, n):
            if A[i][j] != -A[j][i]:
                raise ValueError(f"matrix is not skew-symmetric at ({i}, {j})")
    return n


def pfaffian_dense(A, precision_bits: int = 256):
    """Pfaffian of a dense skew-symmetric matrix by pivoted Parlett-Reid
    elimination. Returns an mpfr value."""
    prec = int(precision_bits)
    with _ctx(prec):
        M = [[gmpy2.mpfr(x) for x in row] for row in (A.tolist() if hasattr(A, "tolist") else A)]
        n = _check_skew(M)
        if n % 2:
            raise ValueError("Pfaffian needs an even dimension")
        if n == 0:
            return gmpy2.mpfr(1)
        if n == 2:
            return M[0][1]
        if n == 4:
            # closed form, a single rounding per product
            return gmpy2.fsum([M[0][1] * M[2][3], -M[0][2] * M[1][3], M[0][3] * M[1][2]])
        res = gmpy2.mpfr(1)
        for k in range(0, n - 1, 2):
            p = max(range(k + 1, n), key=lambda c: abs(M[k][c]))
            if p != k + 1:
                M[k + 1], M[p] = M[p], M[k + 1]
                for row in M:
                    row[k + 1], row[p] = row[p], row[k + 1]
                res = -res
            piv = M[k][k + 1]
            if piv == 0:
                return gmpy2.mpfr(0)
            res *= piv
            tau = [M[k][c] / piv for c in range(k + 2, n)]
            r1 = M[k + 1][k + 2:]
            for a in range(len(tau)):
                row = M[k + 2 + a]
                for b in range(len(tau)):
                    if a != b:
                        row[k + 2 + b] += r1[a] * tau[b] - tau[a] * r1[b]
        return res


def pfaffian(m: KasteleynMatrix):
    """Signed log-magnitude ``(sign, log|Pf|)`` of a Kasteleyn matrix."""
    if m.dimension % 2:
        raise ValueError("Pfaffian needs an even dimension")
    val = _sparse_pf(m)
    if val is None:
        val = pfaffian_dense(m.to_dense(), m.precision_bits)
    with _ctx(m.precision_bits):
        if val == 0:
            return 0, gmpy2.mpfr("-inf")
        return (1 if val > 0 else -1), gmpy2.log(abs(val))


def _sector_coefficients(L: int) -> tuple:
    return (-1, -1, -1) if L % 2 == 0 else (-1, 1, 1)


def _pf_values(inst: RbimInstance, T: TemperatureSpec, prec: int) -> list:
    vals = []
    for m in kasteleyn_graphs(inst, T, prec):
        v = _sparse_pf(m)
        if v is None:
            v = pfaffian_dense(m.to_dense(), prec)
        vals.append(v)
    return vals


def sector_sums(inst: RbimInstance, T: TemperatureSpec, precision_bits: int = 256) -> list:
    """Domain-wall sums ``S_0..S_3`` recovered from the four Pfaffians."""
    L = inst.L
    a = _sector_coefficients(L)
    P = _pf_values(inst, T, precision_bits)
    with _ctx(precision_bits):
        out = [gmpy2.fsum(P) / 4]
        for k in (1, 2, 3):
            terms = []
            for (sx, sy), p in zip(ORIENTATIONS, P):
                char = (sx, sy, sx * sy)[k - 1]
                terms.append(a[k - 1] * char * p)
            out.append(gmpy2.fsum(terms) / 4)
        return out


def _prefactors(inst: RbimInstance, T: TemperatureSpec, prec: int):
    J = inst.couplings_mp(prec)
    K = inst.offsets_mp(prec)
    with _ctx(prec):
        beta = T.beta_mp(prec)
        return beta * gmpy2.fsum(J) + beta * gmpy2.fsum(K)


def torus_log_partition(inst: RbimInstance, T: TemperatureSpec, precision_bits: int = 256) -> LogZ:
    """``log Z`` of the instance at temperature ``T``, offsets included."""
    P = _pf_values(inst, T, precision_bits)
    with _ctx(precision_bits):
        half = gmpy2.fsum(P) / 2
        if not half > 0:
            raise ArithmeticError(f"nonpositive Pfaffian sector sum {float(half)!r}")
        return LogZ(_prefactors(inst, T, precision_bits) + gmpy2.log(half), int(precision_bits))


def class_log_partitions(code: CodeSpec, rates: RateVector, e, T, precision_bits: int = 256,
                         method: str = "sectors") -> list:
    """Class partition functions ordered by absolute class label.

    Entry ``a`` is ``log Z`` of the disorder ``e + L_k`` with
    ``k = a xor label(e)``, so entry ``label(e)`` belongs to ``e`` itself.

    Each value is the spin sum divided by 2, the size of the global-flip
    gauge group, so at the Nishimori temperature ``exp`` of an entry is the
    class probability itself.

    ``method="sectors"`` reads all four classes off one set of Pfaffians and
    re-evaluates directly any class whose sector sum is too small to carry
    half the working precision. ``method="direct"`` always builds the four
    class-shifted instances.
    """
    inst = build_rbim(code, rates, e)
    T = temperature(rates, T)
    prec = int(precision_bits)
    own = label_index(logical_effect(code, e))
    if method == "direct":
        out = [torus_log_partition(class_flipped_instance(inst, code.logical_reps[k]), T, prec)
               for k in range(code.n_classes)]
        return [_halved(out[a ^ own]) for a in range(code.n_classes)]
    if method != "sectors":
        raise ValueError(f"unknown method {method!r}")
    S = sector_sums(inst, T, prec)
    base = _prefactors(inst, T, prec)
    out = []
    with _ctx(prec):
        floor = abs(S[0]) * gmpy2.exp2(-(prec // 2))
        for k, s in enumerate(S):
            if k == 0 and not s > 0:
                raise ArithmeticError(f"nonpositive Pfaffian sector sum {float(s)!r}")
            if s > floor:
                out.append(LogZ(base + gmpy2.log(2 * s), prec))
            else:
                out.append(torus_log_partition(
                    class_flipped_instance(inst, code.logical_reps[k]), T, prec))
    return [_halved(out[a ^ own]) for a in range(code.n_classes)]


def _halved(z: LogZ) -> LogZ:
    with _ctx(z.precision_bits):
        return LogZ(z.value - gmpy2.log(2), z.precision_bits)
