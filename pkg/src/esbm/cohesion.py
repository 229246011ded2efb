"""Attribute-driven cohesion functions for supervised partition priors.

A categorical node attribute enters the partition prior through one
Dirichlet-multinomial marginal likelihood factor per cluster, so clusters
that are homogeneous in the attribute gain prior mass.  Setting every
concentration to its default of 1 recovers a uniform multinomial marginal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .priors import log_eppf, log_urn_weight

__all__ = [
    "AttributeCohesion",
    "category_counts",
    "log_cohesion",
    "log_supervised_prior",
    "log_supervised_urn_weight",
]


@dataclass(frozen=True)
class AttributeCohesion:
    """Dirichlet-multinomial cohesion with one concentration per category."""

    alpha: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=np.float64)
        if alpha.ndim != 1 or alpha.size == 0:
            raise ValueError("alpha must be a non-empty 1-d vector")
        if (alpha <= 0).any():
            raise ValueError("cohesion concentrations must be > 0")
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def uniform(cls, C):
        return cls(np.ones(C))

    @property
    def C(self):
        return self.alpha.size

    @property
    def alpha0(self):
        return float(self.alpha.sum())


def category_counts(part, attrs):
    """H x C matrix of attribute-category counts per cluster."""
    if attrs.V != part.V:
        raise ValueError(
            f"attribute table covers {attrs.V} nodes but partition has {part.V}"
        )
    counts = np.zeros((part.H, attrs.C), dtype=np.int64)
    np.add.at(counts, (part.labels - 1, attrs.values - 1), 1)
    return counts


def log_cohesion(spec, counts):
    """Log cohesion of one cluster given its per-category counts.

    This is the log Dirichlet-multinomial marginal of the cluster's
    attribute values; an empty cluster contributes exactly 0.
    """
    counts = np.asarray(counts, dtype=np.int64)
    if counts.shape != (spec.C,):
        raise ValueError(f"expected {spec.C} category counts, got shape {counts.shape}")
    if (counts < 0).any():
        raise ValueError("category counts must be non-negative")
    n_h = counts.sum()
    if n_h == 0:
        return 0.0
    return float(
        (gammaln(spec.alpha + counts) - gammaln(spec.alpha)).sum()
        - (gammaln(spec.alpha0 + n_h) - gammaln(spec.alpha0))
    )


def log_supervised_prior(prior, spec, part, attrs):
    """Log prior mass of a partition given node attributes, up to the
    attribute-dependent normalising constant shared by all partitions of the
    same nodes."""
    base = log_eppf(prior, part.sizes)
    if base == -np.inf:
        return -np.inf
    counts = category_counts(part, attrs)
    return base + sum(log_cohesion(spec, counts[h]) for h in range(part.H))


def log_supervised_urn_weight(prior, spec, h, counts, x_new):
    """Log urn weight for a new node with attribute ``x_new`` joining
    cluster h, given the H x C category counts of the current clusters.

    Existing clusters are reweighted by how compatible the new node's
    category is with their members; a new cluster is weighted by the
    marginal category probability alpha_x / alpha_0.
    """
    counts = np.asarray(counts, dtype=np.int64)
    if counts.ndim != 2 or counts.shape[1] != spec.C:
        raise ValueError(f"counts must be H x {spec.C}, got shape {counts.shape}")
    if not 1 <= x_new <= spec.C:
        raise ValueError(f"attribute code {x_new} outside 1..{spec.C}")
    H = counts.shape[0]
    sizes = counts.sum(axis=1)
    if (sizes == 0).any():
        raise ValueError("every current cluster must be non-empty")
    base = log_urn_weight(prior, h, sizes)
    if base == -np.inf:
        return -np.inf
    a = spec.alpha[x_new - 1]
    if h <= H:
        factor = (counts[h - 1, x_new - 1] + a) / (sizes[h - 1] + spec.alpha0)
    else:
        factor = a / spec.alpha0
    return float(base + np.log(factor))
