"""Toric and planar surface codes restricted to bitflip noise.

Only the Z-type stabilizers act as detectors. Qubit indices follow a fixed
layout so that CSV files and pinned test vectors stay stable.

Torus layout (``L = d``): vertex ``(i, j)``; horizontal edge ``h(i, j)``
joins ``(i, j)`` and ``(i, j+1)`` and has index ``i*L + j``; vertical edge
``v(i, j)`` joins ``(i, j)`` and ``(i+1, j)`` and has index ``L*L + i*L + j``.
Detectors are plaquettes ``p(i, j)`` with corners ``(i, j)`` to
``(i+1, j+1)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class CodeKind(str, enum.Enum):
    TORUS = "torus"
    UNROTATED_PLANAR = "planar"
    ROTATED_PLANAR = "rotated"

    @classmethod
    def parse(cls, value: "CodeKind | str") -> "CodeKind":
        if isinstance(value, CodeKind):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown code kind {value!r}; expected one of {names}") from None


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.uint8)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CodeSpec:
    """Immutable description of a code under bitflip noise.

    ``logical_reps[k]`` is a syndrome-free error whose logical label, read as
    a little-endian integer, equals ``k``. Entry 0 is the zero vector.
    ``stabilizer_matrix`` holds the X-type stabilizers, i.e. the errors that
    act trivially (stars on the torus).
    """

    kind: CodeKind
    distance: int
    check_matrix: np.ndarray
    observable_matrix: np.ndarray
    logical_reps: tuple
    stabilizer_matrix: np.ndarray
    edge_coordinates: dict = field(repr=False)

    @property
    def n_qubits(self) -> int:
        return self.check_matrix.shape[1]

    @property
    def n_detectors(self) -> int:
        return self.check_matrix.shape[0]

    @property
    def n_observables(self) -> int:
        return self.observable_matrix.shape[0]

    @property
    def n_classes(self) -> int:
        return 1 << self.n_observables


def torus_h(L: int, i: int, j: int) -> int:
    return (i % L) * L + (j % L)


def torus_v(L: int, i: int, j: int) -> int:
    return L * L + (i % L) * L + (j % L)


def _torus(L: int) -> CodeSpec:
    n = 2 * L * L
    H = np.zeros((L * L, n), dtype=np.uint8)
    for i in range(L):
        for j in range(L):
            p = i * L + j
            for q in (torus_h(L, i, j), torus_h(L, i + 1, j),
                      torus_v(L, i, j), torus_v(L, i, j + 1)):
                H[p, q] ^= 1
    O = np.zeros((2, n), dtype=np.uint8)
    l1 = np.zeros(n, dtype=np.uint8)
    l2 = np.zeros(n, dtype=np.uint8)
    for k in range(L):
        O[0, torus_v(L, k, 0)] = 1
        O[1, torus_h(L, 0, k)] = 1
        l1[torus_v(L, 0, k)] = 1
        l2[torus_h(L, k, 0)] = 1
    reps = (np.zeros(n, dtype=np.uint8), l1, l2, l1 ^ l2)
    S = np.zeros((L * L, n), dtype=np.uint8)
    coords = {}
    for i in range(L):
        for j in range(L):
            for q in (torus_h(L, i, j), torus_h(L, i, j - 1),
                      torus_v(L, i, j), torus_v(L, i - 1, j)):
                S[i * L + j, q] ^= 1
            coords[torus_h(L, i, j)] = (float(i), j + 0.5)
            coords[torus_v(L, i, j)] = (i + 0.5, float(j))
    return CodeSpec(CodeKind.TORUS, L, _frozen(H), _frozen(O),
                    tuple(_frozen(r) for r in reps), _frozen(S), coords)


def _unrotated(d: int) -> CodeSpec:
    # (2d-1) x (2d-1) grid: data where r+c is even, Z checks at (odd, even).
    size = 2 * d - 1
    data = [(r, c) for r in range(size) for c in range(size) if (r + c) % 2 == 0]
    qidx = {rc: k for k, rc in enumerate(data)}
    zchecks = [(r, c) for r in range(1, size, 2) for c in range(0, size, 2)]
    xchecks = [(r, c) for r in range(0, size, 2) for c in range(1, size, 2)]

    def incidence(sites):
        M = np.zeros((len(sites), len(data)), dtype=np.uint8)
        for a, (r, c) in enumerate(sites):
            for nb in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if nb in qidx:
                    M[a, qidx[nb]] = 1
        return M

    H = incidence(zchecks)
    S = incidence(xchecks)
    O = np.zeros((1, len(data)), dtype=np.uint8)
    rep = np.zeros(len(data), dtype=np.uint8)
    for k in range(d):
        O[0, qidx[(0, 2 * k)]] = 1
        rep[qidx[(2 * k, 0)]] = 1
    coords = {k: (r / 2.0, c / 2.0) for k, (r, c) in enumerate(data)}
    return CodeSpec(CodeKind.UNROTATED_PLANAR, d, _frozen(H), _frozen(O),
                    (_frozen(np.zeros(len(data))), _frozen(rep)), _frozen(S), coords)


def _rotated(d: int) -> CodeSpec:
    # Data on a d x d grid; plaquette (a, b) touches data (a..a+1, b..b+1).
    # Z plaquettes have a+b even and close the left/right boundaries.
    # X plaquettes have a+b odd and close the top/bottom boundaries.
    zchecks, xchecks = [], []
    for a in range(-1, d):
        for b in range(-1, d):
            bulk = 0 <= a <= d - 2 and 0 <= b <= d - 2
            if (a + b) % 2 == 0 and (bulk or (b in (-1, d - 1) and 0 <= a <= d - 2)):
                zchecks.append((a, b))
            if (a + b) % 2 == 1 and (bulk or (a in (-1, d - 1) and 0 <= b <= d - 2)):
                xchecks.append((a, b))

    def incidence(sites):
        M = np.zeros((len(sites), d * d), dtype=np.uint8)
        for k, (a, b) in enumerate(sites):
            for r in (a, a + 1):
                for c in (b, b + 1):
                    if 0 <= r < d and 0 <= c < d:
                        M[k, r * d + c] = 1
        return M

    H = incidence(zchecks)
    S = incidence(xchecks)
    O = np.zeros((1, d * d), dtype=np.uint8)
    rep = np.zeros(d * d, dtype=np.uint8)
    O[0, 0:d] = 1
    rep[0::d] = 1
    coords = {r * d + c: (float(r), float(c)) for r in range(d) for c in range(d)}
    return CodeSpec(CodeKind.ROTATED_PLANAR, d, _frozen(H), _frozen(O),
                    (_frozen(np.zeros(d * d)), _frozen(rep)), _frozen(S), coords)


def build_code(kind: CodeKind | str, d: int) -> CodeSpec:
    """Build a code of the given family and distance ``d >= 2``."""
    kind = CodeKind.parse(kind)
    if int(d) != d or d < 2:
        raise ValueError(f"distance must be an integer >= 2, got {d!r}")
    d = int(d)
    if kind is CodeKind.TORUS:
        return _torus(d)
    if kind is CodeKind.UNROTATED_PLANAR:
        return _unrotated(d)
    return _rotated(d)


def _as_bits(v, n: int, what: str) -> np.ndarray:
    a = np.asarray(v)
    if a.ndim != 1 or a.shape[0] != n:
        raise ValueError(f"{what} must be a binary vector of length {n}, got shape {a.shape}")
    return (a.astype(np.int64) & 1).astype(np.uint8)


def syndrome(code: CodeSpec, e) -> np.ndarray:
    e = _as_bits(e, code.n_qubits, "error")
    return ((code.check_matrix.astype(np.int64) @ e) & 1).astype(np.uint8)


def logical_effect(code: CodeSpec, e) -> np.ndarray:
    e = _as_bits(e, code.n_qubits, "error")
    return ((code.observable_matrix.astype(np.int64) @ e) & 1).astype(np.uint8)


def label_index(label) -> int:
    """Little-endian integer for a class label bit vector."""
    return int(sum(int(b) << k for k, b in enumerate(np.asarray(label).ravel())))


def label_bits(index: int, n_observables: int) -> np.ndarray:
    return np.array([(index >> k) & 1 for k in range(n_observables)], dtype=np.uint8)


def _torus_path(L: int, a: int, b: int, out: np.ndarray) -> None:
    """XOR into ``out`` a row-then-column path between plaquettes a and b."""
    r, c = divmod(a, L)
    r2, c2 = divmod(b, L)
    dc = (c2 - c) % L
    step = 1 if dc <= L - dc else -1
    while c != c2:
        # crossing from p(r, c) to p(r, c + step)
        out[torus_v(L, r, c + 1 if step == 1 else c)] ^= 1
        c = (c + step) % L
    dr = (r2 - r) % L
    step = 1 if dr <= L - dr else -1
    while r != r2:
        out[torus_h(L, r + 1 if step == 1 else r, c)] ^= 1
        r = (r + step) % L


def class_representative(code: CodeSpec, s, label) -> np.ndarray:
    """Deterministic error with syndrome ``s`` in the class ``label``.

    On the torus defects are paired in index order and joined along
    row-then-column shortest paths. Planar codes use a fixed GF(2) solve.
    """
    s = _as_bits(s, code.n_detectors, "syndrome")
    label = _as_bits(label, code.n_observables, "label")
    e = np.zeros(code.n_qubits, dtype=np.uint8)
    if code.kind is CodeKind.TORUS:
        defects = np.flatnonzero(s)
        if len(defects) % 2:
            raise ValueError("unattainable syndrome: odd number of defects on the torus")
        for a, b in zip(defects[0::2], defects[1::2]):
            _torus_path(code.distance, int(a), int(b), e)
    else:
        sol = gf2_solve(code.check_matrix, s)
        if sol is None:
            raise ValueError("unattainable syndrome")
        e = sol
    fix = label_index(logical_effect(code, e) ^ label)
    return e ^ code.logical_reps[fix]


def gf2_rref(A: np.ndarray):
    """Reduced row echelon form over GF(2); returns (R, pivot_columns)."""
    R = (np.array(A, dtype=np.uint8) & 1).copy()
    rows, cols = R.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(R[r:, c])
        if len(nz) == 0:
            continue
        k = r + nz[0]
        if k != r:
            R[[r, k]] = R[[k, r]]
        hit = np.flatnonzero(R[:, c])
        hit = hit[hit != r]
        R[hit] ^= R[r]
        pivots.append(c)
        r += 1
    return R, pivots


def gf2_rank(A: np.ndarray) -> int:
    return len(gf2_rref(A)[1])


def gf2_solve(A: np.ndarray, b) -> np.ndarray | None:
    """One solution x of A x = b over GF(2) with free variables zero, or None."""
    A = np.asarray(A, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8).reshape(-1, 1)
    R, pivots = gf2_rref(np.hstack([A, b]))
    n = A.shape[1]
    if pivots and pivots[-1] == n:
        return None
    x = np.zeros(n, dtype=np.uint8)
    for row, c in enumerate(pivots):
        x[c] = R[row, n]
    return x


def in_row_space(A: np.ndarray, v) -> bool:
    """True if v is a GF(2) combination of the rows of A."""
    return gf2_solve(np.asarray(A, dtype=np.uint8).T, v) is not None
