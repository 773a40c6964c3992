import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from zdecode import EnsembleMWPMDecoder, MWPMDecoder, PartitionFunctionDecoder, noise, oracle
from zdecode.codes import build_code, label_index, logical_effect, syndrome


def _shots(d, p, n, seed=0, kind="torus"):
    code = build_code(kind, d)
    r = noise.uniform_rates(p, code.n_qubits)
    E = np.array([noise.sample_error(r, noise.substream(seed, i)) for i in range(n)])
    X = np.array([syndrome(code, e) for e in E])
    y = np.array([label_index(logical_effect(code, e)) for e in E])
    return code, X, y


def test_params_and_clone():
    dec = EnsembleMWPMDecoder(distance=5, sigma=0.02)
    assert dec.get_params()["sigma"] == 0.02
    c = clone(dec).set_params(n_ensemble=7)
    assert c.n_ensemble == 7 and c.distance == 5


def test_not_fitted():
    with pytest.raises(NotFittedError):
        MWPMDecoder().predict(np.zeros((1, 16)))


def test_input_validation():
    dec = MWPMDecoder(distance=3).fit()
    with pytest.raises(ValueError):
        dec.predict(np.zeros((2, 5)))
    with pytest.raises(ValueError):
        dec.predict(np.full((1, 9), 2))
    with pytest.raises(ValueError):
        MWPMDecoder(distance=3).fit(np.zeros((2, 9)), [0, 9])
    with pytest.raises(ValueError):
        MWPMDecoder(distance=0).fit()
    with pytest.raises(ValueError):
        MWPMDecoder(p=0.7).fit()


@pytest.mark.parametrize("kind", ["torus", "planar", "rotated"])
def test_mwpm_score_and_transform(kind):
    code, X, y = _shots(5, 0.05, 60, kind=kind)
    dec = MWPMDecoder(code=kind, distance=5, p=0.05).fit(X, y)
    assert dec.score(X, y) > 0.8
    G = dec.transform(X)
    assert G.shape == (60, code.n_qubits)
    assert all(np.array_equal(syndrome(code, g), s) for g, s in zip(G, X))
    assert np.array_equal(dec.predict(X[0]), dec.predict(X[:1]))


def test_ensemble_probabilities():
    code, X, y = _shots(4, 0.1, 20)
    dec = EnsembleMWPMDecoder(distance=4, n_ensemble=9, sigma=0.02).fit()
    P = dec.predict_proba(X)
    assert P.shape == (20, 4) and np.allclose(P.sum(axis=1), 1)
    assert np.array_equal(dec.predict(X), dec.predict(X))


def test_partition_decoder_is_maximum_likelihood():
    code, X, y = _shots(3, 0.1, 25, seed=4)
    dec = PartitionFunctionDecoder(distance=3, p=0.1).fit()
    P = dec.predict_proba(X)
    r = noise.uniform_rates(0.1, code.n_qubits)
    for s, row in zip(X, P):
        q = np.array([float(v) for v in oracle.class_probabilities(code, r, s)])
        assert np.allclose(row, q / q.sum(), rtol=1e-12)
    pred = dec.predict(X)
    assert all(P[i, pred[i]] >= P[i].max() * (1 - 1e-9) for i in range(len(X)))


def test_partition_decoder_strategies():
    _, X, y = _shots(4, 0.1, 10)
    with pytest.raises(ValueError):
        PartitionFunctionDecoder(strategy="vote").fit()
    dec = PartitionFunctionDecoder(distance=4, temperature=0.1, strategy="prob").fit()
    assert dec.precision_bits_ == 4096
    pred = dec.predict(X)
    assert pred.shape == (10,) and set(pred) <= {0, 1, 2, 3}
