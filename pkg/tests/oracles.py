"""Independent reference implementations used to check the library.

Everything here is written from first principles with plain Python loops and
math.lgamma so that agreement with the package is evidence, not tautology:
partition enumeration, sequential urn probabilities, direct marginal
likelihoods, and exact posteriors by exhaustive enumeration.
"""

import itertools
import math
from math import lgamma, log

import numpy as np


# ---------------------------------------------------------------- enumeration

def set_partitions(V):
    """All partitions of V items as canonical (restricted growth) label
    tuples, 1-based; Bell(V) of them."""
    labels = [0] * V

    def rec(i, maxlab):
        if i == V:
            yield tuple(labels)
            return
        for lab in range(1, maxlab + 2):
            labels[i] = lab
            yield from rec(i + 1, max(maxlab, lab))

    yield from rec(0, 0)


def integer_partitions(V):
    """All multisets of positive integers summing to V (descending tuples)."""

    def rec(n, cap):
        if n == 0:
            yield ()
            return
        for first in range(min(n, cap), 0, -1):
            for rest in rec(n - first, first):
                yield (first,) + rest

    yield from rec(V, V)


def count_labelled_partitions(sizes):
    """Number of set partitions of sum(sizes) items with these cluster sizes:
    V! / (prod sizes! * prod multiplicity!)."""
    V = sum(sizes)
    count = math.factorial(V)
    for s in sizes:
        count //= math.factorial(s)
    mult = {}
    for s in sizes:
        mult[s] = mult.get(s, 0) + 1
    for m in mult.values():
        count //= math.factorial(m)
    return count


# ------------------------------------------------------- urn and EPPF oracles

def urn_probs(kind, params, sizes):
    """Predictive probabilities for the next item: one entry per existing
    cluster plus a final new-cluster entry.  Textbook urn rules, normalised
    explicitly (no shared code with the package)."""
    H = len(sizes)
    V = sum(sizes)
    if H == 0:
        return [1.0]
    if kind == "dm":
        beta, H_bar = params
        w = [n + beta for n in sizes]
        w.append(beta * (H_bar - H) if H < H_bar else 0.0)
    elif kind == "dp":
        (alpha,) = params
        w = [float(n) for n in sizes]
        w.append(alpha)
    elif kind == "py":
        sigma, alpha = params
        w = [n - sigma for n in sizes]
        w.append(alpha + H * sigma)
    elif kind == "gn":
        (gamma,) = params
        w = [(n + 1) * (V - H + gamma) for n in sizes]
        w.append(H * (H - gamma))
    else:
        raise ValueError(kind)
    tot = sum(w)
    return [x / tot for x in w]


def sequential_log_prob(kind, params, labels):
    """Log probability of a canonical label vector built one item at a time
    through the urn; equals the EPPF of the partition."""
    sizes = []
    lp = 0.0
    for lab in labels:
        probs = urn_probs(kind, params, sizes)
        if lab <= len(sizes):
            p = probs[lab - 1]
            sizes[lab - 1] += 1
        else:
            p = probs[-1]
            sizes.append(1)
        if p <= 0:
            return -math.inf
        lp += log(p)
    return lp


def log_eppf_direct(kind, params, sizes):
    """Closed-form EPPF by a route different from the package's weight-times-
    rising-factorial factorisation where one exists (DM, DP), otherwise the
    standard product form written out independently."""
    V = sum(sizes)
    H = len(sizes)
    if kind == "dm":
        beta, H_bar = params
        if H > H_bar:
            return -math.inf
        # marginal of V draws from a symmetric Dirichlet over H_bar boxes,
        # times the number of injective box assignments of the H clusters
        lp = lgamma(H_bar + 1) - lgamma(H_bar - H + 1)
        lp += lgamma(beta * H_bar) - lgamma(beta * H_bar + V)
        for n in sizes:
            lp += lgamma(beta + n) - lgamma(beta)
        return lp
    if kind == "dp":
        (alpha,) = params
        lp = H * log(alpha) + lgamma(alpha) - lgamma(alpha + V)
        for n in sizes:
            lp += lgamma(n)
        return lp
    if kind == "py":
        sigma, alpha = params
        lp = 0.0
        for i in range(1, H):
            lp += log(alpha + i * sigma)
        lp -= lgamma(alpha + V) - lgamma(alpha + 1)
        for n in sizes:
            lp += lgamma(n - sigma) - lgamma(1 - sigma)
        return lp
    if kind == "gn":
        (gamma,) = params
        lp = lgamma(gamma + V - H) - lgamma(gamma)
        for h in range(1, H):
            lp += log(h * (h - gamma))
        for v in range(1, V):
            lp -= log(v * (v + gamma))
        for n in sizes:
            lp += lgamma(n + 1)  # rising(2, n-1) = n!
        return lp
    raise ValueError(kind)


def oracle_cohesion(alpha, counts):
    """Log Dirichlet-multinomial marginal of one cluster's category counts."""
    n = sum(counts)
    if n == 0:
        return 0.0
    a0 = sum(alpha)
    lp = lgamma(a0) - lgamma(a0 + n)
    for a, c in zip(alpha, counts):
        lp += lgamma(a + c) - lgamma(a)
    return lp


def supervised_log_prior(kind, params, labels, x, alpha):
    """Unnormalised log prior of a partition given attributes: EPPF times one
    cohesion factor per cluster."""
    H = max(labels)
    sizes = [0] * H
    for lab in labels:
        sizes[lab - 1] += 1
    lp = sequential_log_prob(kind, params, labels)
    if lp == -math.inf:
        return -math.inf
    C = len(alpha)
    for h in range(1, H + 1):
        counts = [0] * C
        for lab, xv in zip(labels, x):
            if lab == h:
                counts[xv - 1] += 1
        lp += oracle_cohesion(alpha, counts)
    return lp


# ------------------------------------------------------------- likelihood

def oracle_log_lik(adj, labels, a=1.0, b=1.0):
    """Collapsed block-model log likelihood by iterating over every dyad."""
    V = len(labels)
    m = {}
    mbar = {}
    for i in range(V):
        for j in range(i + 1, V):
            key = tuple(sorted((labels[i], labels[j])))
            if adj[i][j]:
                m[key] = m.get(key, 0) + 1
                mbar.setdefault(key, 0)
            else:
                mbar[key] = mbar.get(key, 0) + 1
                m.setdefault(key, 0)

    def lbeta(x, y):
        return lgamma(x) + lgamma(y) - lgamma(x + y)

    lp = 0.0
    for key in m:
        lp += lbeta(a + m[key], b + mbar[key]) - lbeta(a, b)
    return lp


# ---------------------------------------------------------- exact posteriors

def exact_posterior(adj, kind, params, a=1.0, b=1.0, x=None, alpha=None):
    """Exact posterior over all partitions of the V nodes of ``adj``.

    Returns (partitions, probs) with partitions a list of canonical label
    tuples.  Supervised when ``x`` (1-based categories) and ``alpha`` are
    given.
    """
    V = len(adj)
    parts = list(set_partitions(V))
    logp = np.empty(len(parts))
    for i, labels in enumerate(parts):
        if x is None:
            lp = sequential_log_prob(kind, params, labels)
        else:
            lp = supervised_log_prior(kind, params, labels, x, alpha)
        if lp > -math.inf:
            lp += oracle_log_lik(adj, labels, a, b)
        logp[i] = lp
    top = logp.max()
    p = np.exp(logp - top)
    p /= p.sum()
    return parts, p


def coclustering(parts, probs, V):
    """Expected co-clustering matrix of a distribution over partitions."""
    sim = np.zeros((V, V))
    for labels, p in zip(parts, probs):
        z = np.asarray(labels)
        sim += p * (z[:, None] == z[None, :])
    return sim


def exact_h_pmf(kind, params, V):
    """Prior pmf of the number of clusters by brute enumeration."""
    pmf = np.zeros(V)
    for labels in set_partitions(V):
        lp = sequential_log_prob(kind, params, labels)
        if lp > -math.inf:
            pmf[max(labels) - 1] += math.exp(lp)
    return pmf


def prior_moments(kind, params, V, a=1.0, b=1.0, x=None, alpha=None):
    """Exact prior expectations used by the joint-distribution sampler test:
    E[H], E[size of node 1's cluster], and E[number of within-cluster edges]
    under the collapsed Beta(a, b) likelihood (= E[sum_h C(n_h, 2)] a/(a+b)).

    Unsupervised moments come from integer partitions (cheap); supervised
    ones need the full set-partition enumeration.
    """
    eh = en1 = epairs = total = 0.0
    if x is None:
        for sizes in integer_partitions(V):
            lp = log_eppf_direct(kind, params, sizes)
            if lp == -math.inf:
                continue
            w = math.exp(lp) * count_labelled_partitions(sizes)
            total += w
            eh += w * len(sizes)
            en1 += w * sum(n * n for n in sizes) / V
            epairs += w * sum(n * (n - 1) // 2 for n in sizes)
    else:
        for labels in set_partitions(V):
            lp = supervised_log_prior(kind, params, labels, x, alpha)
            if lp == -math.inf:
                continue
            w = math.exp(lp)
            total += w
            sizes = [labels.count(h) for h in range(1, max(labels) + 1)]
            eh += w * len(sizes)
            en1 += w * sizes[labels[0] - 1]
            epairs += w * sum(n * (n - 1) // 2 for n in sizes)
    return {
        "H": eh / total,
        "n1": en1 / total,
        "within_edges": (epairs / total) * a / (a + b),
        "norm": total,
    }


def vi_direct(za, zb):
    """Variation of information in bits, from the contingency table."""
    za = list(za)
    zb = list(zb)
    V = len(za)
    from collections import Counter

    ca = Counter(za)
    cb = Counter(zb)
    cab = Counter(zip(za, zb))

    def ent(counter):
        return -sum((c / V) * math.log2(c / V) for c in counter.values())

    return 2 * ent(cab) - ent(ca) - ent(cb)
