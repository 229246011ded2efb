import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import esbm
from esbm.inference import (
    credible_ball,
    deviance,
    edge_misclassification,
    effective_sample_size,
    geweke_z,
    kass_raftery_label,
    log_bayes_factor,
    log_harmonic_marginal,
    point_estimate,
    similarity_matrix,
    vi_distance,
)
from esbm.network import Network, canonicalize
from esbm.sampler import LikelihoodSpec, TraceStore, log_marginal_likelihood
from oracles import set_partitions, vi_direct


def _trace(rows, loglik=None, reps=None):
    rows = [list(r) for r in rows]
    if reps is not None:
        expanded = []
        for row, k in zip(rows, reps):
            expanded.extend([row] * k)
        rows = expanded
    samples = np.asarray(rows, dtype=np.int16)
    if loglik is None:
        loglik = np.zeros(samples.shape[0])
    return TraceStore(V=samples.shape[1], samples=samples,
                      loglik=np.asarray(loglik, dtype=float))


def test_vi_frozen_two_bits():
    assert vi_distance([1, 1, 2, 2], [1, 2, 1, 2]) == pytest.approx(2.0, abs=1e-12)
    assert vi_distance([1, 1, 2, 2], [1, 1, 2, 2]) == 0.0


def test_vi_bound_attained():
    V = 32
    singles = np.arange(1, V + 1)
    ones = np.ones(V, dtype=int)
    assert vi_distance(singles, ones) == pytest.approx(math.log2(V), abs=1e-12)


@given(
    st.lists(st.integers(1, 4), min_size=2, max_size=10),
    st.integers(0, 10 ** 6),
)
@settings(deadline=None, max_examples=80)
def test_vi_matches_oracle(raw, seed):
    V = len(raw)
    rng = np.random.default_rng(seed)
    za = canonicalize(raw).labels
    zb = canonicalize(rng.integers(1, 5, size=V)).labels
    ours = vi_distance(za, zb)
    ref = vi_direct(za.tolist(), zb.tolist())
    assert ours == pytest.approx(ref, abs=1e-10)
    assert vi_distance(zb, za) == pytest.approx(ours, abs=1e-12)


def test_vi_shape_mismatch():
    with pytest.raises(ValueError):
        vi_distance([1, 2], [1, 2, 3])


def test_point_estimate_concentrated_trace():
    tr = _trace([[1, 1, 2, 2], [1, 2, 1, 2]], reps=[9, 1])
    part, stat = point_estimate(tr)
    assert part.labels.tolist() == [1, 1, 2, 2]
    # expected VI of the winner: 0.9 * 0 + 0.1 * 2 bits
    assert stat.value == pytest.approx(0.2, abs=1e-10)
    assert stat.max_value == pytest.approx(2.0)


def test_point_estimate_beats_every_partition_small():
    # the returned objective must match a brute-force scan over all
    # partitions of 4 nodes
    tr = _trace(
        [[1, 1, 2, 2], [1, 2, 2, 2], [1, 1, 1, 2], [1, 2, 1, 2]],
        reps=[4, 3, 2, 1],
    )
    labels_u, weights = tr.unique()

    def expected_vi(cand):
        return sum(
            w * vi_direct(cand, row.tolist())
            for row, w in zip(labels_u, weights)
        )

    best = min(set_partitions(4), key=expected_vi)
    part, stat = point_estimate(tr, candidate_limit=None)
    assert stat.value == pytest.approx(expected_vi(tuple(part.labels.tolist())),
                                       abs=1e-10)
    assert stat.value <= expected_vi(best) + 1e-10


def test_point_estimate_greedy_can_leave_candidates():
    # samples disagree on node 4 only; the greedy move should still find a
    # partition at least as central as the best sample
    tr = _trace(
        [[1, 1, 2, 2, 3], [1, 1, 2, 2, 1], [1, 1, 2, 2, 2]],
        reps=[1, 1, 1],
    )
    part, stat = point_estimate(tr)
    labels_u, weights = tr.unique()
    sample_objs = [
        sum(w * vi_direct(tuple(c.tolist()), tuple(r.tolist()))
            for r, w in zip(labels_u, weights))
        for c in labels_u
    ]
    assert stat.value <= min(sample_objs) + 1e-10


def test_credible_ball_level_zero_and_mass():
    center = canonicalize([1, 1, 2, 2])
    tr = _trace([[1, 1, 2, 2], [1, 2, 1, 2], [1, 1, 1, 1]], reps=[6, 3, 1])
    ball0 = credible_ball(tr, center, level=0.0)
    assert ball0.radius == 0.0
    assert ball0.bound.labels.tolist() == [1, 1, 2, 2]
    ball = credible_ball(tr, center, level=0.95)
    labels_u, weights = tr.unique()
    d = np.array([vi_direct(center.labels.tolist(), r.tolist()) for r in labels_u])
    assert weights[d <= ball.radius + 1e-12].sum() >= 0.95
    with pytest.raises(ValueError):
        credible_ball(tr, center, level=1.0)


def test_credible_ball_tie_break_lexicographic():
    center = canonicalize([1, 1, 2, 2])
    # both samples sit at VI 2 from the center; bound picks the smaller row
    tr = _trace([[1, 2, 2, 1], [1, 2, 1, 2]], reps=[1, 1])
    ball = credible_ball(tr, center, level=0.9)
    assert ball.radius == pytest.approx(2.0, abs=1e-12)
    assert ball.bound.labels.tolist() == [1, 2, 1, 2]


def test_similarity_matrix_small():
    tr = _trace([[1, 1, 2], [1, 2, 2]], reps=[1, 1])
    sim = similarity_matrix(tr).matrix
    assert np.allclose(np.diag(sim), 1.0)
    assert sim[0, 1] == pytest.approx(0.5)
    assert sim[1, 2] == pytest.approx(0.5)
    assert sim[0, 2] == pytest.approx(0.0)


def test_harmonic_marginal_constant_chain():
    tr = _trace([[1, 1]] * 50, loglik=np.full(50, -12.5))
    hm = log_harmonic_marginal(tr)
    assert hm.value == pytest.approx(-12.5, abs=1e-12)
    assert hm.mcse == pytest.approx(0.0, abs=1e-12)
    assert not hm.unstable


def test_harmonic_marginal_flags_instability():
    ll = np.zeros(200)
    ll[0] = -60.0  # one sample dominates the reciprocal weights
    tr = _trace([[1, 1]] * 200, loglik=ll)
    hm = log_harmonic_marginal(tr)
    assert hm.unstable
    assert hm.top_weight_share > 0.99


def test_kass_raftery_labels():
    assert kass_raftery_label(1.5) == "not worth more than a bare mention"
    assert kass_raftery_label(3.0) == "positive (favours the first model)"
    assert kass_raftery_label(-7.0) == "strong (favours the second model)"
    assert kass_raftery_label(15.0) == "very strong (favours the first model)"


def test_log_bayes_factor_arithmetic():
    ta = _trace([[1, 1]] * 10, loglik=np.full(10, -5.0))
    tb = _trace([[1, 1]] * 10, loglik=np.full(10, -9.0))
    bf = log_bayes_factor(ta, tb)
    assert bf.two_log_b == pytest.approx(8.0, abs=1e-10)
    assert bf.lm_a == pytest.approx(-5.0)
    assert "strong" in bf.label


def test_deviance_is_negative_log_marginal(small_net):
    net, truth = small_net
    lik = LikelihoodSpec()
    assert deviance(net, truth, lik) == pytest.approx(
        -log_marginal_likelihood(net, truth, lik)
    )


def test_edge_misclassification_perfect_blocks():
    # two complete blocks, no between edges: plug-in theta predicts perfectly
    edges = [(1, 2), (1, 3), (2, 3), (4, 5), (4, 6), (5, 6)]
    net = Network(6, edges)
    part = canonicalize([1, 1, 1, 2, 2, 2])
    assert edge_misclassification(net, part, LikelihoodSpec()) == 0.0
    # one cluster lumps everything: 6 of 15 dyads are edges, theta < 1/2,
    # so all 6 edges are misjudged
    lumped = canonicalize([1] * 6)
    assert edge_misclassification(net, lumped, LikelihoodSpec()) == pytest.approx(6 / 15)


def test_effective_sample_size_behaviour():
    rng = np.random.default_rng(0)
    iid = rng.normal(size=4000)
    ess = effective_sample_size(iid)
    assert ess > 2000
    # a strongly autocorrelated AR(1) chain has a much smaller ESS
    ar = np.empty(4000)
    ar[0] = 0.0
    noise = rng.normal(size=4000)
    for i in range(1, 4000):
        ar[i] = 0.95 * ar[i - 1] + noise[i]
    assert effective_sample_size(ar) < 400
    assert effective_sample_size(np.ones(100)) == 100.0
    assert effective_sample_size(np.array([1.0, 2.0])) == 2.0


def test_geweke_z_stationary_chain():
    rng = np.random.default_rng(1)
    z = geweke_z(rng.normal(size=5000))
    assert abs(z) < 3.0
    assert geweke_z(np.ones(100)) == 0.0
