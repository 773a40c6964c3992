import itertools

import numpy as np
import pytest

from zdecode.codes import (CodeKind, build_code, class_representative, gf2_rank, label_index,
                           logical_effect, syndrome)


@pytest.mark.parametrize("kind", list(CodeKind))
@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_commutation_and_classes(kind, d):
    code = build_code(kind, d)
    H, O = code.check_matrix.astype(int), code.observable_matrix.astype(int)
    assert code.n_classes == 1 << code.n_observables
    # every representative is syndrome-free and carries its own label
    for k, rep in enumerate(code.logical_reps):
        assert not syndrome(code, rep).any()
        assert label_index(logical_effect(code, rep)) == k
    # stabilizers act trivially
    S = code.stabilizer_matrix.astype(int)
    assert not ((H @ S.T) % 2).any()
    assert not ((O @ S.T) % 2).any()


def test_torus_2_sizes():
    code = build_code("torus", 2)
    assert code.n_qubits == 8
    assert code.n_detectors == 4
    assert code.n_classes == 4


@pytest.mark.parametrize("d", [2, 3, 5])
def test_planar_sizes(d):
    rot = build_code("rotated", d)
    assert rot.n_qubits == d * d and rot.n_classes == 2
    unrot = build_code("planar", d)
    assert unrot.n_qubits == d * d + (d - 1) ** 2 and unrot.n_classes == 2


def test_bad_arguments():
    with pytest.raises(ValueError):
        build_code("hexagon", 3)
    with pytest.raises(ValueError):
        build_code("torus", 1)
    code = build_code("torus", 3)
    with pytest.raises(ValueError):
        syndrome(code, np.zeros(5))


def test_single_qubit_gives_two_adjacent_defects():
    code = build_code("torus", 4)
    for q in range(code.n_qubits):
        e = np.zeros(code.n_qubits, dtype=np.uint8)
        e[q] = 1
        assert syndrome(code, e).sum() == 2


def test_zero_error():
    code = build_code("torus", 3)
    z = np.zeros(code.n_qubits, dtype=np.uint8)
    assert not syndrome(code, z).any()
    assert label_index(logical_effect(code, z)) == 0


def test_same_syndrome_different_logical_distinct_labels():
    code = build_code("torus", 2)
    by_syn = {}
    for bits in itertools.product((0, 1), repeat=code.n_qubits):
        e = np.array(bits, dtype=np.uint8)
        by_syn.setdefault(tuple(syndrome(code, e)), []).append(e)
    for errs in by_syn.values():
        for e in errs[:4]:
            for f in errs:
                same = not logical_effect(code, e ^ f).any()
                assert (label_index(logical_effect(code, e)) == label_index(logical_effect(code, f))) == same


@pytest.mark.parametrize("kind", list(CodeKind))
def test_representative_round_trip(kind):
    code = build_code(kind, 4)
    rng = np.random.default_rng(3)
    for _ in range(50):
        e = (rng.random(code.n_qubits) < 0.15).astype(np.uint8)
        s = syndrome(code, e)
        for k in range(code.n_classes):
            lab = [(k >> b) & 1 for b in range(code.n_observables)]
            g = class_representative(code, s, lab)
            assert np.array_equal(syndrome(code, g), s)
            assert label_index(logical_effect(code, g)) == k


def test_representative_trivial_cases():
    code = build_code("torus", 3)
    z = np.zeros(code.n_detectors, dtype=np.uint8)
    assert not class_representative(code, z, [0, 0]).any()
    assert np.array_equal(class_representative(code, z, [1, 0]), code.logical_reps[1])
    # adjacent defects with label 0: the single shared edge
    e = np.zeros(code.n_qubits, dtype=np.uint8)
    e[4] = 1
    assert np.array_equal(class_representative(code, syndrome(code, e), [0, 0]), e)


def test_odd_defects_rejected():
    code = build_code("torus", 3)
    s = np.zeros(code.n_detectors, dtype=np.uint8)
    s[0] = 1
    with pytest.raises(ValueError):
        class_representative(code, s, [0, 0])


def test_torus_stabilizer_rank():
    code = build_code("torus", 4)
    # L^2 checks with one dependency
    assert gf2_rank(code.check_matrix) == code.n_detectors - 1
