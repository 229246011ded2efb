import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

import esbm
from esbm.estimator import ESBM
from esbm.validation import as_attribute_table, check_adjacency, check_new_edge_rows


@pytest.fixture(scope="module")
def fitted():
    spec = esbm.GeneratorSpec(
        sizes=(10, 10),
        theta=np.array([[0.8, 0.1], [0.1, 0.8]]),
        seed=31,
    )
    net, truth = esbm.generate(spec)
    est = ESBM(prior="gn", gamma=0.5, sweeps=800, burn_in=200, seed=7)
    est.fit(net.adjacency)
    return est, net, truth


def test_fit_recovers_two_blocks(fitted):
    est, net, truth = fitted
    assert est.n_clusters_ == 2
    assert esbm.vi_distance(est.partition_, truth) == pytest.approx(0.0, abs=1e-9)
    assert est.labels_.shape == (20,)
    assert est.labels_.min() == 0  # sklearn-style 0-based labels
    assert est.theta_.shape == (2, 2)
    assert est.similarity_.shape == (20, 20)
    assert est.misclassification_ < 0.2
    assert est.credible_ball_.level == 0.95
    assert np.isfinite(est.log_marginal_.value)
    assert est.deviance_ > 0


def test_predict_proba_and_predict(fitted):
    est, net, truth = fitted
    Y = np.zeros((2, net.V), dtype=int)
    Y[0] = net.adjacency[0]      # clone of node 1
    Y[1, :] = 0                  # isolated node
    proba = est.predict_proba(Y)
    assert proba.shape == (2, est.n_clusters_ + 1)
    assert np.allclose(proba.sum(axis=1), 1.0)
    hard = est.predict(Y)
    assert hard[0] == est.labels_[0]


def test_not_fitted_error():
    est = ESBM()
    with pytest.raises(NotFittedError):
        est.predict_proba(np.zeros((1, 4)))


def test_sklearn_params_and_clone():
    est = ESBM(prior="dp", alpha=2.0, sweeps=100, burn_in=10, seed=3)
    params = est.get_params()
    assert params["prior"] == "dp" and params["alpha"] == 2.0
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(gamma=0.3)
    assert est.gamma == 0.3


def test_fit_with_attributes():
    spec = esbm.GeneratorSpec(
        sizes=(8, 8),
        theta=np.array([[0.7, 0.15], [0.15, 0.7]]),
        seed=5,
    )
    net, truth = esbm.generate(spec)
    attrs = ["left"] * 8 + ["right"] * 8
    est = ESBM(prior="gn", gamma=0.5, sweeps=500, burn_in=100, seed=11)
    est.fit(net.adjacency, attributes=attrs)
    assert est.n_clusters_ == 2
    assert esbm.vi_distance(est.partition_, truth) < 0.5


def test_fit_accepts_network_object():
    net = esbm.Network(6, [(1, 2), (2, 3), (4, 5), (5, 6)])
    est = ESBM(prior="dp", alpha=1.0, sweeps=60, burn_in=10, seed=2)
    est.fit(net)
    assert est.network_ is net


def test_check_adjacency_errors():
    with pytest.raises(ValueError, match="square"):
        check_adjacency(np.zeros((2, 3)))
    with pytest.raises(ValueError, match="at least two"):
        check_adjacency(np.zeros((1, 1)))
    with pytest.raises(ValueError, match="0 or 1"):
        check_adjacency(np.full((3, 3), 0.5))
    bad_diag = np.eye(3)
    with pytest.raises(ValueError, match="diagonal"):
        check_adjacency(bad_diag)
    asym = np.zeros((3, 3))
    asym[0, 1] = 1
    with pytest.raises(ValueError, match="symmetric"):
        check_adjacency(asym)


def test_check_new_edge_rows():
    out = check_new_edge_rows([0, 1, 0], 3)
    assert out.shape == (1, 3)
    with pytest.raises(ValueError, match="matrix"):
        check_new_edge_rows(np.zeros((2, 4)), 3)
    with pytest.raises(ValueError, match="0 or 1"):
        check_new_edge_rows(np.full((1, 3), 2), 3)


def test_as_attribute_table():
    table = as_attribute_table(["a", "b", "a"], 3)
    assert table.values.tolist() == [1, 2, 1]
    assert table.categories == ["a", "b"]
    same = as_attribute_table(table, 3)
    assert same is table
    with pytest.raises(ValueError, match="length-4"):
        as_attribute_table(["a", "b"], 4)
    with pytest.raises(ValueError, match="covers"):
        as_attribute_table(table, 5)
