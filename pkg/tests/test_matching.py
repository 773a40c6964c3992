import math

import numpy as np
import pytest

from zdecode import matching as mt
from zdecode import noise, oracle
from zdecode.codes import build_code, class_representative, label_index, logical_effect, syndrome

# four plaquettes on the 6x6 torus whose two minimum-weight classes have
# 1 and 4 minimum-weight errors (class 1 is the degenerate one); checked
# against the class partition functions at 0.01 T_N
DEGENERATE_DEFECTS = (0, 1, 7, 10)


def _degenerate_syndrome():
    s = np.zeros(36, dtype=np.uint8)
    s[list(DEGENERATE_DEFECTS)] = 1
    return s


def test_uniform_weights():
    g = mt.build_matching_graph(build_code("torus", 4), noise.uniform_rates(0.1, 32))
    assert np.allclose(g.weights, math.log(9))
    assert not g.has_boundary


def test_rotated_boundaries():
    code = build_code("rotated", 5)
    g = mt.build_matching_graph(code, noise.uniform_rates(0.1, code.n_qubits))
    assert g.has_boundary
    H = code.check_matrix
    edge_qubits = [q for q in range(code.n_qubits) if H[:, q].sum() == 1]
    # boundary qubits sit on two opposite sides: 2 * d of them
    assert len(edge_qubits) == 2 * 5


def test_adjacent_defects_and_empty():
    code = build_code("torus", 4)
    g = mt.build_matching_graph(code, noise.uniform_rates(0.1, 32))
    e = np.zeros(32, dtype=np.uint8)
    e[6] = 1
    sg = mt.syndrome_graph(g, syndrome(code, e))
    assert sg.n_nodes == 2
    assert sg.weights[0, 1] == pytest.approx(math.log(9))
    assert sg.paths[(0, 1)] == (6,)
    m = mt.mwpm(sg)
    assert m.pairs == ((0, 1),)
    assert np.array_equal(mt.correction_from_matching(sg, m, 32), e)
    empty = mt.syndrome_graph(g, np.zeros(16))
    assert empty.n_nodes == 0 and mt.mwpm(empty).pairs == ()


def test_odd_defects_on_torus_rejected():
    code = build_code("torus", 3)
    g = mt.build_matching_graph(code, noise.uniform_rates(0.1, 18))
    s = np.zeros(9, dtype=np.uint8)
    s[0] = 1
    with pytest.raises(ValueError):
        mt.syndrome_graph(g, s)


def test_rectangle_prefers_cheap_pairs():
    W = np.array([[0, 1, 5, 6], [1, 0, 6, 5], [5, 6, 0, 1], [6, 5, 1, 0]], dtype=float)
    sg = mt.SyndromeGraph((0, 1, 2, 3), 0, W, {})
    assert mt.mwpm(sg).pairs == ((0, 1), (2, 3))
    assert oracle.exhaustive_matching(sg).total_weight == 2


def test_random_graphs_match_exhaustive():
    rng = np.random.default_rng(1)
    for _ in range(100):
        W = rng.random((10, 10)) * 4
        W = np.triu(W, 1) + np.triu(W, 1).T
        sg = mt.SyndromeGraph(tuple(range(10)), 0, W, {})
        assert mt.mwpm(sg).total_weight == pytest.approx(oracle.exhaustive_matching(sg).total_weight,
                                                        rel=1e-12)


@pytest.mark.parametrize("kind", ["torus", "planar", "rotated"])
def test_decode_round_trip(kind):
    code = build_code(kind, 5)
    r = noise.uniform_rates(0.1, code.n_qubits)
    g = mt.build_matching_graph(code, r)
    for i in range(200):
        e = noise.sample_error(r, noise.substream(3, i))
        s = syndrome(code, e)
        assert np.array_equal(syndrome(code, mt.decode(code, g, s)), s)


def test_weight_one_corrected():
    code = build_code("torus", 5)
    g = mt.build_matching_graph(code, noise.uniform_rates(0.05, 50))
    e = np.zeros(50, dtype=np.uint8)
    e[17] = 1
    c = mt.decode(code, g, syndrome(code, e))
    assert np.array_equal(c, e) and mt.logical_success(code, e, c)


def test_half_logical_fails():
    # three of the four edges of a non-contractible loop on the 4x4 torus:
    # matching closes the loop the short way and flips the logical
    code = build_code("torus", 4)
    g = mt.build_matching_graph(code, noise.uniform_rates(0.1, 32))
    loop = np.flatnonzero(code.logical_reps[1])
    e = np.zeros(32, dtype=np.uint8)
    e[loop[:3]] = 1
    c = mt.decode(code, g, syndrome(code, e))
    assert not mt.logical_success(code, e, c)


def test_mwpm_is_minimum_weight_decoder():
    code = build_code("torus", 3)
    r = noise.uniform_rates(0.1, code.n_qubits)
    g = mt.build_matching_graph(code, r)
    for i in range(40):
        e = noise.sample_error(r, noise.substream(6, i))
        s = syndrome(code, e)
        c = mt.decode(code, g, s)
        prof = oracle.min_weight_profile(code, r, s)
        assert int(c.sum()) == min(x.min_weight for x in prof)


def test_ensemble_zero_sigma_equals_plain():
    code = build_code("torus", 4)
    r = noise.uniform_rates(0.1, 32)
    g = mt.build_matching_graph(code, r)
    for i in range(10):
        e = noise.sample_error(r, noise.substream(7, i))
        s = syndrome(code, e)
        winner, votes = mt.ensemble_decode(code, r, s, 5, 0.0, 0)
        assert votes.max() == 5
        assert winner == label_index(logical_effect(code, mt.decode(code, g, s)))


def test_ensemble_validation():
    code = build_code("torus", 3)
    r = noise.uniform_rates(0.1, 18)
    s = np.zeros(9, dtype=np.uint8)
    with pytest.raises(ValueError):
        mt.ensemble_decode(code, r, s, 5, -1.0, 0)
    with pytest.raises(ValueError):
        mt.ensemble_decode(code, r, s, 5, 0.1, 0, mode="vote")


def test_perturbed_rates_clamped():
    w = mt.perturbed_weights(np.full(1000, 0.45), 0.5, np.random.default_rng(0))
    assert np.all(w >= 0) and np.all(np.isfinite(w))


def test_weak_ensembling_prefers_degenerate_class():
    code = build_code("torus", 6)
    r = noise.uniform_rates(0.05, 72)
    s = _degenerate_syndrome()
    wins = [mt.ensemble_decode(code, r, s, 50, 1e-6, noise.substream(11, k))[0] for k in range(20)]
    assert wins.count(1) > len(wins) / 2
    # both tied classes really are minimum weight
    for lab in ([0, 0], [1, 0]):
        assert class_representative(code, s, lab).sum() >= 4
    g = mt.build_matching_graph(code, r)
    assert mt.decode(code, g, s).sum() == 4


def test_decode_trial_is_reproducible():
    code = build_code("torus", 4)
    a = mt.decode_trial(code, 0.1, 0.0, 3, 5, sigmas=(1e-6,), n_ensemble=5)
    b = mt.decode_trial(code, 0.1, 0.0, 3, 5, sigmas=(1e-6,), n_ensemble=5)
    assert a == b and len(a.ensemble_success) == 1


def test_count_pairings():
    assert oracle.count_pairings(10) == 945
    assert oracle.count_pairings(2) == 1
