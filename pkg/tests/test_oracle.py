import math

import gmpy2

import numpy as np
import pytest

from zdecode import noise, oracle
from zdecode.codes import build_code, syndrome
from zdecode.statmech import build_rbim, temperature


def test_total_probability_d2():
    code = build_code("torus", 2)
    r = noise.uniform_rates(0.1, 8)
    table = oracle.enumerate_class_probabilities(code, r)
    assert len(table) == 8
    with gmpy2.context(gmpy2.get_context(), precision=256):
        total = gmpy2.fsum([x for v in table.values() for x in v])
        assert abs(total - 1) < gmpy2.mpfr(2) ** -240


def test_total_probability_nonuniform():
    code = build_code("torus", 2)
    r = noise.sample_rates(0.1, 0.05, 8, 2)
    table = oracle.enumerate_class_probabilities(code, r)
    with gmpy2.context(gmpy2.get_context(), precision=256):
        total = gmpy2.fsum([x for v in table.values() for x in v])
        assert abs(total - 1) < gmpy2.mpfr(2) ** -240


def test_coset_members_share_syndrome():
    code = build_code("torus", 3)
    e = np.zeros(18, dtype=np.uint8)
    e[[2, 11]] = 1
    s = syndrome(code, e)
    cs = oracle.coset(code, s)
    assert len(cs) == 2 ** (18 - 8)
    assert all(np.array_equal(syndrome(code, x), s) for x in cs[::37])


def test_enumeration_infinite_temperature():
    code = build_code("torus", 2)
    r = noise.uniform_rates(0.1, 8)
    inst = build_rbim(code, r, noise.sample_error(r, 3))
    T = temperature(r, ("absolute", 1e8))
    z = float(oracle.enumerate_partition(inst, T).value)
    assert z == pytest.approx(math.log(16) + inst.offsets.sum() / 1e8, abs=1e-6)


def test_transfer_matrix_matches_enumeration():
    code = build_code("torus", 3)
    r = noise.sample_rates(0.1, 0.05, 18, 4)
    inst = build_rbim(code, r, noise.sample_error(r, 5))
    T = temperature(r, 0.5)
    assert oracle.transfer_matrix_log_partition(inst, T) == pytest.approx(
        float(oracle.enumerate_partition(inst, T).value), rel=1e-12)


def test_adjacent_defects_profile():
    code = build_code("torus", 3)
    e = np.zeros(18, dtype=np.uint8)
    e[4] = 1
    prof = oracle.min_weight_profile(code, noise.uniform_rates(0.1, 18), syndrome(code, e))
    assert prof[0].min_weight == 1 and prof[0].n_max == 1
    assert oracle.dmp_classes(prof) == {0}
    assert np.array_equal(oracle.mp_class_distribution(prof), [1, 0, 0, 0])


def test_even_torus_has_unequal_degeneracies():
    code = build_code("torus", 2)
    r = noise.uniform_rates(0.1, 8)
    found = False
    for s in oracle.attainable_syndromes(code):
        prof = oracle.min_weight_profile(code, r, s)
        m = min(c.min_weight for c in prof)
        if len({c.n_max for c in prof if c.min_weight == m}) > 1:
            found = True
    assert found


def test_distinct_rates_lift_ties():
    code = build_code("torus", 3)
    r = noise.sample_rates(0.1, 0.04, 18, 8)
    assert len(set(r.p)) == 18
    for i in range(10):
        e = noise.sample_error(r, noise.substream(1, i))
        prof = oracle.min_weight_profile(code, r, syndrome(code, e))
        assert all(c.n_max == 1 for c in prof)


def test_exhaustive_matching_small():
    from zdecode.matching import SyndromeGraph

    sg = SyndromeGraph((0, 1), 0, np.array([[0, 2.5], [2.5, 0]]), {})
    assert oracle.exhaustive_matching(sg).pairs == ((0, 1),)
    W = np.array([[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]], dtype=float)
    m = oracle.exhaustive_matching(SyndromeGraph(tuple(range(4)), 0, W, {}))
    assert m.total_weight == 2
    with pytest.raises(ValueError):
        oracle.exhaustive_matching(SyndromeGraph(tuple(range(14)), 0, np.zeros((14, 14)), {}))


def test_caps():
    with pytest.raises(ValueError):
        oracle.coset(build_code("torus", 4), np.zeros(16, dtype=np.uint8))
