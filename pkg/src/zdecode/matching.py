"""Minimum-weight perfect matching decoding and ensembling.

The matching graph has one node per detector and one edge per qubit with
weight ``ln((1-p)/p)``. Qubits touching a single detector (open boundaries)
connect it to a boundary companion; companions are tied together at weight
zero, so for shortest paths they act as one boundary node ``B``.

The exact matcher is the networkx implementation of Edmonds' blossom
algorithm (primal-dual with blossom shrinking), run as a maximum-cardinality
maximum-weight matching on ``c - w``. Nodes and edges are inserted in
ascending index order, so ties are resolved the same way on every run.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from . import noise
from .codes import CodeSpec, label_index, logical_effect, syndrome
from .noise import RateVector, as_generator

log = logging.getLogger(__name__)

PERTURBED_P_MIN = 1e-6
PERTURBED_P_MAX = 0.5 - 1e-6
_TINY = 1e-300


def edge_weights(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    w = np.log1p(-p) - np.log(p)
    if np.any(w < 0):
        log.warning("rates above 1/2 give negative matching weights; clamped to zero")
        w = np.maximum(w, 0.0)
    return w


@dataclass(frozen=True)
class MatchingGraph:
    n_detectors: int
    boundary_set: tuple
    weights: np.ndarray
    endpoints: np.ndarray

    @property
    def edges(self) -> list:
        """(node_a, node_b, weight, qubit) per qubit."""
        return [(int(a), int(b), float(w), q)
                for q, ((a, b), w) in enumerate(zip(self.endpoints, self.weights))]

    @property
    def n_nodes(self) -> int:
        return self.n_detectors + len(self.boundary_set)

    @property
    def has_boundary(self) -> bool:
        return len(self.boundary_set) > 0


def _endpoints(code: CodeSpec) -> tuple[np.ndarray, tuple]:
    H = code.check_matrix
    nd = code.n_detectors
    ends = np.full((code.n_qubits, 2), -1, dtype=np.int64)
    companions = {}
    for q in range(code.n_qubits):
        dets = np.flatnonzero(H[:, q])
        if len(dets) == 2:
            ends[q] = dets
        elif len(dets) == 1:
            a = int(dets[0])
            if a not in companions:
                companions[a] = nd + len(companions)
            ends[q] = (a, companions[a])
        else:
            raise ValueError(f"qubit {q} touches {len(dets)} detectors")
    return ends, tuple(sorted(companions.values()))


def build_matching_graph(code: CodeSpec, rates: RateVector | np.ndarray) -> MatchingGraph:
    p = rates.p if isinstance(rates, RateVector) else np.asarray(rates, dtype=float)
    if len(p) != code.n_qubits:
        raise ValueError("rate vector length does not match the code")
    ends, bset = _endpoints(code)
    w = edge_weights(p)
    w.setflags(write=False)
    ends.setflags(write=False)
    return MatchingGraph(code.n_detectors, bset, w, ends)


def _reweighted(g: MatchingGraph, w: np.ndarray) -> MatchingGraph:
    return MatchingGraph(g.n_detectors, g.boundary_set, w, g.endpoints)


@dataclass(frozen=True)
class SyndromeGraph:
    """Complete graph on the defects (plus one boundary copy per defect).

    ``weights[i, j]`` is a shortest-path length (inf where no edge exists)
    and ``paths[(i, j)]`` the qubits along it.
    """

    defects: tuple
    n_boundary_copies: int
    weights: np.ndarray
    paths: dict

    @property
    def n_nodes(self) -> int:
        return len(self.defects) + self.n_boundary_copies


def _path_graph(g: MatchingGraph):
    # every boundary companion collapses into node n_detectors
    nd = g.n_detectors
    n = nd + (1 if g.has_boundary else 0)
    ends = np.minimum(g.endpoints, nd)
    best = {}
    for q in range(len(g.weights)):
        a, b = int(ends[q, 0]), int(ends[q, 1])
        key = (min(a, b), max(a, b))
        w = float(g.weights[q])
        if key not in best or w < best[key][0]:
            best[key] = (w, q)
    rows, cols, vals = [], [], []
    qubit = {}
    for (a, b), (w, q) in best.items():
        v = max(w, _TINY)
        rows += [a, b]
        cols += [b, a]
        vals += [v, v]
        qubit[(a, b)] = qubit[(b, a)] = q
    return csr_matrix((vals, (rows, cols)), shape=(n, n)), qubit, n


def _trace(pred_row: np.ndarray, src: int, dst: int, qubit: dict) -> tuple:
    out = []
    x = dst
    while x != src:
        y = int(pred_row[x])
        if y < 0:
            raise ValueError("disconnected matching graph")
        out.append(qubit[(y, x)])
        x = y
    return tuple(sorted(out))


def syndrome_graph(g: MatchingGraph, s) -> SyndromeGraph:
    s = np.asarray(s)
    defects = tuple(int(x) for x in np.flatnonzero(s))
    k = len(defects)
    if not g.has_boundary and k % 2:
        raise ValueError("odd number of defects without a boundary")
    if k == 0:
        return SyndromeGraph((), 0, np.zeros((0, 0)), {})
    graph, qubit, n = _path_graph(g)
    dist, pred = dijkstra(graph, directed=False, indices=list(defects), return_predecessors=True)
    nb = k if g.has_boundary else 0
    W = np.full((k + nb, k + nb), np.inf)
    paths = {}
    for i in range(k):
        W[i, i] = 0.0
        for j in range(i + 1, k):
            d = dist[i, defects[j]]
            W[i, j] = W[j, i] = d
            paths[(i, j)] = _trace(pred[i], defects[i], defects[j], qubit)
    if nb:
        B = g.n_detectors
        for i in range(k):
            W[i, k + i] = W[k + i, i] = dist[i, B]
            paths[(i, k + i)] = _trace(pred[i], defects[i], B, qubit)
        W[k:, k:] = 0.0
        for i in range(k):
            for j in range(i + 1, k):
                paths[(k + i, k + j)] = ()
    # exact path sums (replace the tiny stand-ins for zero weights)
    for (i, j), qs in paths.items():
        W[i, j] = W[j, i] = float(np.sum(g.weights[list(qs)])) if qs else 0.0
    return SyndromeGraph(defects, nb, W, paths)


@dataclass(frozen=True)
class Matching:
    pairs: tuple
    total_weight: float


def mwpm(sg: SyndromeGraph, order=None) -> Matching:
    """Exact minimum-weight perfect matching of a syndrome graph.

    ``order`` optionally permutes the node insertion order, which only
    changes how ties are broken.
    """
    n = sg.n_nodes
    if n % 2:
        raise ValueError("odd number of nodes")
    if n == 0:
        return Matching((), 0.0)
    W = sg.weights
    finite = W[np.isfinite(W)]
    c = 1.0 + (finite.max() if finite.size else 0.0)
    nodes = list(range(n)) if order is None else [int(x) for x in order]
    G = nx.Graph()
    G.add_nodes_from(nodes)
    for a_pos, i in enumerate(nodes):
        for j in nodes[a_pos + 1:]:
            if np.isfinite(W[i, j]):
                G.add_edge(i, j, weight=c - W[i, j])
    m = nx.max_weight_matching(G, maxcardinality=True)
    if 2 * len(m) != n:
        raise ValueError("no perfect matching exists")
    pairs = tuple(sorted((min(a, b), max(a, b)) for a, b in m))
    return Matching(pairs, float(sum(W[a, b] for a, b in pairs)))


def correction_from_matching(sg: SyndromeGraph, m: Matching, n_qubits: int) -> np.ndarray:
    g = np.zeros(n_qubits, dtype=np.uint8)
    for pair in m.pairs:
        for q in sg.paths[pair]:
            g[q] ^= 1
    return g


def logical_success(code: CodeSpec, e, g) -> bool:
    return not logical_effect(code, np.asarray(e) ^ np.asarray(g)).any()


def decode(code: CodeSpec, g: MatchingGraph, s, order=None) -> np.ndarray:
    """Plain MWPM correction for syndrome ``s``."""
    sg = syndrome_graph(g, s)
    return correction_from_matching(sg, mwpm(sg, order), code.n_qubits)


def perturbed_weights(p: np.ndarray, sigma: float, rng) -> np.ndarray:
    xi = rng.normal(0.0, sigma, size=len(p)) if sigma > 0 else 0.0
    pp = np.clip(p + xi, PERTURBED_P_MIN, PERTURBED_P_MAX)
    return np.log1p(-pp) - np.log(pp)


def ensemble_decode(code: CodeSpec, rates: RateVector, s, n_ensemble: int, sigma: float, rng,
                    mode: str = "weights"):
    """Majority vote over ``n_ensemble`` perturbed MWPM decodings.

    ``mode="weights"`` perturbs each rate by Normal(0, sigma^2) before taking
    the log-odds; ``mode="permutation"`` keeps weights and shuffles the node
    order instead. Returns ``(label_index, votes)``; vote ties are broken
    uniformly at random.
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if n_ensemble < 1:
        raise ValueError("n_ensemble must be positive")
    rng = as_generator(rng)
    p = np.asarray(rates.p, dtype=float)
    base = build_matching_graph(code, rates)
    votes = np.zeros(code.n_classes, dtype=np.int64)
    if mode == "weights":
        for _ in range(n_ensemble):
            g = _reweighted(base, perturbed_weights(p, sigma, rng))
            votes[label_index(logical_effect(code, decode(code, g, s)))] += 1
    elif mode == "permutation":
        sg = syndrome_graph(base, s)
        for _ in range(n_ensemble):
            m = mwpm(sg, rng.permutation(sg.n_nodes))
            g = correction_from_matching(sg, m, code.n_qubits)
            votes[label_index(logical_effect(code, g))] += 1
    else:
        raise ValueError(f"unknown ensembling mode {mode!r}")
    top = np.flatnonzero(votes == votes.max())
    winner = int(top[0]) if len(top) == 1 else int(rng.choice(top))
    return winner, votes


@dataclass(frozen=True)
class TrialResult:
    """Success flags of one sampled error: plain MWPM, then one per ensemble sigma."""

    index: int
    true_class: int
    mwpm_success: bool
    ensemble_success: tuple


def decode_trial(code: CodeSpec, p: float, sigma_p: float, seed: int, index: int,
                 sigmas=(), n_ensemble: int = 50, mode: str = "weights") -> TrialResult:
    """Sample error ``index`` of stream ``seed`` and decode it with plain MWPM
    and with ensembling at each perturbation width in ``sigmas``.

    All decoders see the same error, so their failure rates are paired.
    """
    rates = noise.sample_rates(p, sigma_p, code.n_qubits, noise.substream(seed, index, noise.STREAM_RATES))
    e = noise.sample_error(rates, noise.substream(seed, index, noise.STREAM_ERROR))
    s = syndrome(code, e)
    true = label_index(logical_effect(code, e))
    g = build_matching_graph(code, rates)
    plain = label_index(logical_effect(code, decode(code, g, s))) == true
    ens = []
    for k, sigma in enumerate(sigmas):
        rng = noise.substream(seed, index, 1000 * noise.STREAM_ENSEMBLE + k)
        winner, _ = ensemble_decode(code, rates, s, n_ensemble, float(sigma), rng, mode)
        ens.append(winner == true)
    return TrialResult(index, true, bool(plain), tuple(bool(x) for x in ens))
