import math

import numpy as np
import pytest

from esbm.cohesion import (
    AttributeCohesion,
    category_counts,
    log_cohesion,
    log_supervised_prior,
    log_supervised_urn_weight,
)
from esbm.network import AttributeTable, canonicalize
from esbm.priors import DirichletProcess, GnedinProcess, log_eppf
from oracles import oracle_cohesion, supervised_log_prior


def test_cohesion_spec_validation():
    with pytest.raises(ValueError, match="> 0"):
        AttributeCohesion(np.array([1.0, 0.0]))
    with pytest.raises(ValueError, match="1-d"):
        AttributeCohesion(np.ones((2, 2)))
    spec = AttributeCohesion.uniform(3)
    assert spec.C == 3 and spec.alpha0 == 3.0


def test_log_cohesion_frozen():
    spec = AttributeCohesion(np.array([1.0, 1.0]))
    assert log_cohesion(spec, [1, 0]) == pytest.approx(-math.log(2), rel=1e-12)
    assert log_cohesion(spec, [0, 0]) == 0.0


def test_log_cohesion_matches_oracle():
    rng = np.random.default_rng(7)
    for _ in range(40):
        C = int(rng.integers(1, 5))
        alpha = rng.uniform(0.2, 3.0, size=C)
        counts = rng.integers(0, 6, size=C)
        spec = AttributeCohesion(alpha)
        assert log_cohesion(spec, counts) == pytest.approx(
            oracle_cohesion(alpha.tolist(), counts.tolist()), rel=1e-12, abs=1e-12
        )


def test_log_cohesion_validation():
    spec = AttributeCohesion(np.ones(2))
    with pytest.raises(ValueError, match="2 category counts"):
        log_cohesion(spec, [1, 2, 3])
    with pytest.raises(ValueError, match="non-negative"):
        log_cohesion(spec, [-1, 2])


def test_category_counts():
    part = canonicalize([1, 1, 2, 2, 2])
    attrs = AttributeTable([1, 2, 2, 2, 1])
    counts = category_counts(part, attrs)
    assert counts.tolist() == [[1, 1], [1, 2]]
    with pytest.raises(ValueError, match="covers"):
        category_counts(part, AttributeTable([1, 2]))


def test_supervised_prior_matches_oracle():
    prior = GnedinProcess(0.4)
    spec = AttributeCohesion(np.array([0.8, 1.5]))
    rng = np.random.default_rng(12)
    for _ in range(25):
        V = int(rng.integers(2, 8))
        part = canonicalize(rng.integers(1, 4, size=V))
        x = rng.integers(1, 3, size=V)
        attrs = AttributeTable(x, C=2)
        ours = log_supervised_prior(prior, spec, part, attrs)
        ref = supervised_log_prior(
            "gn", (0.4,), tuple(part.labels.tolist()), x.tolist(),
            spec.alpha.tolist(),
        )
        assert ours == pytest.approx(ref, rel=1e-10)


def test_supervised_prior_decomposes():
    prior = DirichletProcess(1.0)
    spec = AttributeCohesion(np.ones(2))
    part = canonicalize([1, 1, 2])
    attrs = AttributeTable([1, 2, 1])
    counts = category_counts(part, attrs)
    expected = log_eppf(prior, part.sizes) + sum(
        log_cohesion(spec, counts[h]) for h in range(part.H)
    )
    assert log_supervised_prior(prior, spec, part, attrs) == pytest.approx(expected)


def test_supervised_urn_frozen():
    prior = DirichletProcess(1.0)
    spec = AttributeCohesion(np.ones(2))
    counts = np.array([[2, 0], [0, 2]])
    w = [
        math.exp(log_supervised_urn_weight(prior, spec, h, counts, 1))
        for h in (1, 2, 3)
    ]
    assert w == pytest.approx([1.5, 0.5, 0.5], rel=1e-12)


def test_supervised_urn_validation():
    prior = DirichletProcess(1.0)
    spec = AttributeCohesion(np.ones(2))
    with pytest.raises(ValueError, match="H x 2"):
        log_supervised_urn_weight(prior, spec, 1, np.ones((2, 3), dtype=int), 1)
    with pytest.raises(ValueError, match="outside"):
        log_supervised_urn_weight(prior, spec, 1, np.ones((2, 2), dtype=int), 3)
    with pytest.raises(ValueError, match="non-empty"):
        log_supervised_urn_weight(prior, spec, 1, np.array([[0, 0], [1, 1]]), 1)
