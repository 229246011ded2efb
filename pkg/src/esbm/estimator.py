"""Scikit-learn style estimator wrapping the full fit/summarise/predict flow."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.exceptions import NotFittedError

from .cohesion import AttributeCohesion
from .inference import (
    credible_ball,
    deviance,
    edge_misclassification,
    log_harmonic_marginal,
    point_estimate,
    similarity_matrix,
)
from .prediction import predict_matrix
from .priors import make_prior
from .sampler import LikelihoodSpec, SamplerConfig, run_chain, theta_plugin
from .validation import as_attribute_table, check_adjacency, check_new_edge_rows

__all__ = ["ESBM"]


class ESBM(BaseEstimator, ClusterMixin):
    """Bayesian stochastic block model with a Gibbs-type partition prior.

    Fits by collapsed Gibbs sampling on a binary symmetric adjacency matrix
    and summarises the posterior over partitions: ``labels_`` minimise the
    trace-averaged variation-of-information distance.  An optional node
    attribute vector supervises the prior, favouring attribute-homogeneous
    clusters.

    Parameters mirror the library defaults: a Gnedin process prior
    (``prior="gn"``, ``gamma=0.45``) with uniform Beta(1, 1) block
    likelihoods and a 50000-sweep chain discarding 10000 as burn-in.
    """

    def __init__(self, prior="gn", gamma=0.45, alpha=None, sigma=None,
                 beta=None, H_bar=None, a=1.0, b=1.0, attribute_alpha=1.0,
                 sweeps=50000, burn_in=10000, thin=1, seed=None,
                 level=0.95, candidate_limit=512):
        self.prior = prior
        self.gamma = gamma
        self.alpha = alpha
        self.sigma = sigma
        self.beta = beta
        self.H_bar = H_bar
        self.a = a
        self.b = b
        self.attribute_alpha = attribute_alpha
        self.sweeps = sweeps
        self.burn_in = burn_in
        self.thin = thin
        self.seed = seed
        self.level = level
        self.candidate_limit = candidate_limit

    def _build_prior(self):
        return make_prior(self.prior, beta=self.beta, H_bar=self.H_bar,
                          alpha=self.alpha, sigma=self.sigma, gamma=self.gamma)

    def fit(self, X, y=None, attributes=None):
        """Sample the partition posterior of the network X.

        X is a binary symmetric adjacency matrix (or a Network); attributes,
        when given, is one categorical value per node (any hashable labels).
        """
        net = check_adjacency(X)
        prior = self._build_prior()
        lik = LikelihoodSpec(a=self.a, b=self.b)
        config = SamplerConfig(sweeps=self.sweeps, burn_in=self.burn_in,
                               thin=self.thin, seed=self.seed)
        cohesion = attrs = None
        if attributes is not None:
            attrs = as_attribute_table(attributes, net.V)
            alpha = np.broadcast_to(
                np.asarray(self.attribute_alpha, dtype=np.float64), (attrs.C,)
            ).copy()
            cohesion = AttributeCohesion(alpha)
        trace = run_chain(net, prior, lik, config, cohesion=cohesion, attrs=attrs)
        part, vistat = point_estimate(trace, candidate_limit=self.candidate_limit)
        self.network_ = net
        self.prior_ = prior
        self.likelihood_ = lik
        self.trace_ = trace
        self.partition_ = part
        self.labels_ = (part.labels - 1).astype(np.int64)
        self.n_clusters_ = part.H
        self.expected_vi_ = vistat.value
        self.theta_ = theta_plugin(net, part, lik).matrix
        self.similarity_ = similarity_matrix(trace).matrix
        self.credible_ball_ = credible_ball(trace, part, level=self.level)
        self.log_marginal_ = log_harmonic_marginal(trace)
        self.deviance_ = deviance(net, part, lik)
        self.misclassification_ = edge_misclassification(net, part, lik)
        return self

    def _check_fitted(self):
        if not hasattr(self, "partition_"):
            raise NotFittedError("this ESBM instance is not fitted yet; call fit first")

    def predict_proba(self, Y):
        """Membership probabilities for new nodes given their edges into the
        fitted network: one row per new node over the n_clusters_ inferred
        clusters plus a final novel-cluster column."""
        self._check_fitted()
        Y = check_new_edge_rows(Y, self.network_.V)
        return predict_matrix(self.network_, self.partition_, self.likelihood_,
                              self.prior_, Y)

    def predict(self, Y):
        """Most probable cluster per new node, 0-based; the value
        ``n_clusters_`` stands for "a new cluster of its own"."""
        return np.argmax(self.predict_proba(Y), axis=1)
