import math

import numpy as np
import pytest

from zdecode import noise
from zdecode.codes import build_code
from zdecode.statmech import (build_rbim, class_flipped_instance, energy, log_boltzmann_weight,
                              nishimori_temperature, temperature)


def test_zero_error_ferromagnet():
    code = build_code("torus", 3)
    inst = build_rbim(code, noise.uniform_rates(0.1, code.n_qubits), np.zeros(code.n_qubits))
    assert np.all(inst.couplings == 1)


def test_single_edge_one_negative_coupling():
    code = build_code("torus", 3)
    e = np.zeros(code.n_qubits, dtype=np.uint8)
    e[5] = 1
    inst = build_rbim(code, noise.uniform_rates(0.1, code.n_qubits), e)
    assert np.flatnonzero(inst.couplings < 0).tolist() == [5]


def test_nonuniform_magnitude():
    code = build_code("torus", 2)
    r = noise.RateVector(np.full(8, 0.2), 0.2, 0.05)
    inst = build_rbim(code, r, np.zeros(8))
    assert inst.magnitudes[0] == pytest.approx(0.5 * math.log(4))


def test_nishimori_values():
    assert nishimori_temperature(noise.uniform_rates(0.1, 4)).resolved_T == pytest.approx(2 / math.log(9))
    assert nishimori_temperature(noise.uniform_rates(0.1, 4)).resolved_T == pytest.approx(0.91024, abs=1e-5)
    r = noise.sample_rates(0.1, 0.06, 10, 0)
    assert nishimori_temperature(r).resolved_T == 1.0
    assert nishimori_temperature(noise.uniform_rates(0.4999, 4)).resolved_T > 1000
    with pytest.raises(ValueError):
        noise.uniform_rates(0.5, 4)


def test_temperature_specs():
    r = noise.uniform_rates(0.1, 4)
    tn = nishimori_temperature(r).resolved_T
    assert temperature(r, 0.1).resolved_T == pytest.approx(0.1 * tn)
    assert temperature(r, ("absolute", 2.0)).resolved_T == 2.0
    with pytest.raises(ValueError):
        temperature(r, -1)


def test_class_flip_involution():
    code = build_code("torus", 2)
    r = noise.uniform_rates(0.1, 8)
    inst = build_rbim(code, r, noise.sample_error(r, 1))
    assert np.array_equal(class_flipped_instance(inst, np.zeros(8)).signs, inst.signs)
    rep = code.logical_reps[1]
    once = class_flipped_instance(inst, rep)
    assert (once.signs != inst.signs).sum() == 2
    assert np.array_equal(class_flipped_instance(once, rep).signs, inst.signs)


def test_all_up_energy_and_boltzmann_identity():
    code = build_code("torus", 2)
    r = noise.uniform_rates(0.1, 8)
    inst = build_rbim(code, r, np.zeros(8))
    assert energy(inst, np.ones(4)) == pytest.approx(-(8 + inst.offsets.sum()))
    # exp(-beta_N H(all up)) is the error probability, uniform and not
    rng = np.random.default_rng(4)
    for rates in (r, noise.sample_rates(0.1, 0.05, 8, 9)):
        e = (rng.random(8) < 0.3).astype(np.uint8)
        inst = build_rbim(code, rates, e)
        lw = log_boltzmann_weight(inst, np.ones(4), nishimori_temperature(rates))
        assert float(lw) == pytest.approx(noise.error_probability(rates, e), rel=1e-12)


def test_only_torus():
    code = build_code("rotated", 3)
    with pytest.raises(ValueError):
        build_rbim(code, noise.uniform_rates(0.1, code.n_qubits), np.zeros(code.n_qubits))
