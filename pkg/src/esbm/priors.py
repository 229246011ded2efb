"""Gibbs-type priors on partitions: EPPFs, urn schemes, and the prior on H.

All four prior families share one structure: the probability of a partition
of V nodes into clusters of sizes n_1..n_H is

    W(V, H) * prod_h rising(1 - sigma, n_h - 1)

for a family-specific weight W and discount sigma < 1, and the weights obey
W(V, H) = (V - H * sigma) * W(V + 1, H) + W(V + 1, H + 1).  Everything here
is computed on the log scale; impossible configurations get -inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln, logsumexp

__all__ = [
    "DirichletMultinomial",
    "DirichletProcess",
    "PitmanYor",
    "GnedinProcess",
    "HDistribution",
    "log_eppf",
    "log_urn_weight",
    "h_distribution",
    "gn_population_pmf",
    "gnedin_h_pmf_closed",
    "elicit_prior",
    "make_prior",
]


def log_rising(x, n):
    """log of the ascending factorial x (x+1) ... (x+n-1), with (x)_0 = 1."""
    if n == 0:
        return 0.0
    return gammaln(x + n) - gammaln(x)


@dataclass(frozen=True)
class DirichletMultinomial:
    """Finite symmetric Dirichlet mixture with at most ``H_bar`` clusters."""

    beta: float
    H_bar: int

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if int(self.H_bar) != self.H_bar or self.H_bar < 1:
            raise ValueError(f"H_bar must be a positive integer, got {self.H_bar}")
        object.__setattr__(self, "H_bar", int(self.H_bar))

    @property
    def sigma(self):
        return -self.beta

    def log_weight(self, V, H):
        _check_vh(V, H)
        if H > self.H_bar:
            return -np.inf
        hs = np.arange(1, H)
        return float(
            (H - 1) * math.log(self.beta)
            + np.log(self.H_bar - hs).sum()
            - log_rising(self.beta * self.H_bar + 1, V - 1)
        )

    def _urn_existing(self, n_h, V, H):
        return n_h + self.beta

    def _urn_new(self, V, H):
        if H >= self.H_bar:
            return 0.0
        return self.beta * (self.H_bar - H)

    def kernel_params(self):
        return 0, self.beta, float(self.H_bar)

    def describe(self):
        return f"DM(beta={self.beta:g}, H_bar={self.H_bar})"


@dataclass(frozen=True)
class DirichletProcess:
    """Dirichlet process partition law (zero discount)."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")

    @property
    def sigma(self):
        return 0.0

    def log_weight(self, V, H):
        _check_vh(V, H)
        return float(H * math.log(self.alpha) - log_rising(self.alpha, V))

    def _urn_existing(self, n_h, V, H):
        return float(n_h)

    def _urn_new(self, V, H):
        return self.alpha

    def kernel_params(self):
        return 1, self.alpha, 0.0

    def describe(self):
        return f"DP(alpha={self.alpha:g})"


@dataclass(frozen=True)
class PitmanYor:
    """Pitman-Yor partition law; requires 0 <= sigma < 1 and alpha > -sigma."""

    sigma: float
    alpha: float

    def __post_init__(self):
        if not 0 <= self.sigma < 1:
            raise ValueError(f"sigma must lie in [0, 1), got {self.sigma}")
        if not self.alpha > -self.sigma:
            raise ValueError(
                f"alpha must exceed -sigma = {-self.sigma:g}, got {self.alpha}"
            )

    def log_weight(self, V, H):
        _check_vh(V, H)
        hs = np.arange(1, H)
        return float(
            np.log(self.alpha + hs * self.sigma).sum()
            - log_rising(self.alpha + 1, V - 1)
        )

    def _urn_existing(self, n_h, V, H):
        return n_h - self.sigma

    def _urn_new(self, V, H):
        return self.alpha + H * self.sigma

    def kernel_params(self):
        return 2, self.sigma, self.alpha

    def describe(self):
        return f"PY(sigma={self.sigma:g}, alpha={self.alpha:g})"


@dataclass(frozen=True)
class GnedinProcess:
    """Gnedin partition law (discount -1) with parameter gamma in (0, 1)."""

    gamma: float

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")

    @property
    def sigma(self):
        return -1.0

    def log_weight(self, V, H):
        _check_vh(V, H)
        hs = np.arange(1, H)
        vs = np.arange(1, V)
        return float(
            log_rising(self.gamma, V - H)
            + np.log(hs * (hs - self.gamma)).sum()
            - np.log(vs * (vs + self.gamma)).sum()
        )

    def _urn_existing(self, n_h, V, H):
        return (n_h + 1) * (V - H + self.gamma)

    def _urn_new(self, V, H):
        return H * (H - self.gamma)

    def kernel_params(self):
        return 3, self.gamma, 0.0

    def describe(self):
        return f"GN(gamma={self.gamma:g})"


GibbsTypePrior = (DirichletMultinomial, DirichletProcess, PitmanYor, GnedinProcess)


def _check_vh(V, H):
    if V < 1:
        raise ValueError(f"V must be >= 1, got {V}")
    if not 1 <= H <= V:
        raise ValueError(f"H must lie in 1..{V}, got {H}")


def log_eppf(prior, sizes, V=None):
    """Log prior probability of a partition with the given cluster sizes.

    ``sizes`` is the vector of cluster sizes (order irrelevant by
    exchangeability); V defaults to their sum and is validated against it
    when passed explicitly.
    """
    sizes = np.asarray(sizes, dtype=np.int64)
    if sizes.ndim != 1 or sizes.size == 0:
        raise ValueError("sizes must be a non-empty 1-d sequence")
    if (sizes < 1).any():
        raise ValueError("cluster sizes must be >= 1")
    total = int(sizes.sum())
    if V is None:
        V = total
    elif V != total:
        raise ValueError(f"sizes sum to {total} but V={V} was given")
    H = sizes.size
    lw = prior.log_weight(V, H)
    if lw == -np.inf:
        return -np.inf
    one_minus_sigma = 1.0 - prior.sigma
    terms = gammaln(one_minus_sigma + sizes - 1) - gammaln(one_minus_sigma)
    return float(lw + terms.sum())


def log_urn_weight(prior, h, sizes, V=None):
    """Log unnormalised weight for the next node joining cluster h.

    ``sizes`` describes the clusters of the V nodes currently assigned and
    h ranges over 1..H for the existing clusters and H + 1 for a new one.
    Normalising the H + 1 weights yields the predictive probabilities.
    """
    sizes = np.asarray(sizes, dtype=np.int64)
    total = int(sizes.sum())
    if V is None:
        V = total
    elif V != total:
        raise ValueError(f"sizes sum to {total} but V={V} was given")
    H = sizes.size
    if not 1 <= h <= H + 1:
        raise ValueError(f"cluster index {h} outside 1..{H + 1}")
    if h <= H:
        w = prior._urn_existing(int(sizes[h - 1]), V, H)
    elif H == 0:
        return 0.0  # the first node always opens the first cluster
    else:
        w = prior._urn_new(V, H)
    return float(np.log(w)) if w > 0 else -np.inf


def log_urn_weights(prior, sizes, V=None):
    """Vector of log urn weights over the H existing clusters plus a new one."""
    sizes = np.asarray(sizes, dtype=np.int64)
    return np.array(
        [log_urn_weight(prior, h, sizes, V) for h in range(1, sizes.size + 2)]
    )


@dataclass(frozen=True)
class HDistribution:
    """Prior distribution of the number of occupied clusters among V nodes."""

    pmf: np.ndarray
    mean: float

    @property
    def V(self):
        return self.pmf.size


def _log_partition_sums(V, sigma):
    """Row V of L(n, k) = log sum over partitions of n items into k blocks
    of prod_j rising(1 - sigma, n_j - 1), via the triangular recursion
    L(n, k) = L(n-1, k-1) (+)log (n - 1 - k*sigma) L(n-1, k).

    Every entry is the log of a non-negative number, so no sign bookkeeping
    is needed; at sigma = 0 the entries are unsigned Stirling numbers of the
    first kind.
    """
    prev = np.full(V + 1, -np.inf)
    prev[0] = 0.0
    for n in range(1, V + 1):
        cur = np.full(V + 1, -np.inf)
        k = np.arange(1, n + 1)
        coef = (n - 1) - k * sigma
        with np.errstate(divide="ignore"):
            logcoef = np.where(coef > 0, np.log(np.where(coef > 0, coef, 1.0)), -np.inf)
        cur[1 : n + 1] = np.logaddexp(prev[0:n], logcoef + prev[1 : n + 1])
        prev = cur
    return prev


def h_distribution(prior, V):
    """Exact prior pmf of the number of clusters H for a network of V nodes.

    Combines the family weight W(V, h) with the summed partition masses per
    cluster count; the result must total 1, which doubles as an internal
    consistency check.
    """
    if V < 1:
        raise ValueError(f"V must be >= 1, got {V}")
    logsums = _log_partition_sums(V, prior.sigma)
    logpmf = np.full(V, -np.inf)
    for h in range(1, V + 1):
        lw = prior.log_weight(V, h)
        if lw > -np.inf:
            logpmf[h - 1] = lw + logsums[h]
    total = logsumexp(logpmf)
    if not math.isfinite(total) or abs(math.exp(total) - 1.0) > 1e-8:
        raise RuntimeError(
            f"internal error: prior pmf of H sums to {math.exp(total)!r}, not 1; "
            f"prior {prior.describe()} with V={V} is numerically unstable"
        )
    pmf = np.exp(logpmf - total)
    mean = float(np.arange(1, V + 1) @ pmf)
    return HDistribution(pmf=pmf, mean=mean)


def gn_population_pmf(gamma, h_max):
    """First ``h_max`` probabilities of the Gnedin law on the total number of
    groups in an infinite population: pr(h) = gamma * rising(1-gamma, h-1) / h!.
    """
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    hs = np.arange(1, h_max + 1)
    logp = (
        math.log(gamma)
        + gammaln(1 - gamma + hs - 1)
        - gammaln(1 - gamma)
        - gammaln(hs + 1)
    )
    return np.exp(logp)


def gnedin_h_pmf_closed(gamma, V):
    """Closed-form Gnedin prior pmf of H at sample size V (binomial form)."""
    hs = np.arange(1, V + 1)
    logp = (
        gammaln(V + 1)
        - gammaln(hs + 1)
        - gammaln(V - hs + 1)
        + gammaln(1 - gamma + hs - 1)
        - gammaln(1 - gamma)
        + gammaln(gamma + V - hs)
        - gammaln(gamma)
        - (gammaln(1 + gamma + V - 1) - gammaln(1 + gamma))
    )
    return np.exp(logp)


def make_prior(kind, *, beta=None, H_bar=None, alpha=None, sigma=None, gamma=None):
    """Build a prior from CLI-style keyword values, checking required ones."""
    kind = kind.lower()
    if kind == "dm":
        if beta is None or H_bar is None:
            raise ValueError("the DM prior needs --beta and --H-bar")
        return DirichletMultinomial(beta=beta, H_bar=H_bar)
    if kind == "dp":
        if alpha is None:
            raise ValueError("the DP prior needs --alpha")
        return DirichletProcess(alpha=alpha)
    if kind == "py":
        if sigma is None or alpha is None:
            raise ValueError("the PY prior needs --sigma and --alpha")
        return PitmanYor(sigma=sigma, alpha=alpha)
    if kind == "gn":
        if gamma is None:
            raise ValueError("the GN prior needs --gamma")
        return GnedinProcess(gamma=gamma)
    raise ValueError(f"unknown prior kind {kind!r}; expected dm, dp, py or gn")


def elicit_prior(kind, V, target_mean, *, H_bar=None, sigma=None):
    """Find the free hyperparameter giving a prior mean of ``target_mean``
    clusters among V nodes.

    Solves for alpha (DP, PY with fixed sigma), beta (DM with fixed H_bar)
    or gamma (GN) by root finding on the exact mean of ``h_distribution``.
    """
    kind = kind.lower()
    if not 1 < target_mean < V:
        raise ValueError(f"target mean must lie strictly between 1 and V={V}")

    if kind == "dm":
        if H_bar is None:
            raise ValueError("eliciting a DM prior needs H_bar")
        if target_mean >= H_bar:
            raise ValueError(
                f"a DM prior with H_bar={H_bar} cannot average {target_mean} clusters"
            )
        build = lambda b: DirichletMultinomial(beta=b, H_bar=H_bar)
    elif kind == "dp":
        build = lambda a: DirichletProcess(alpha=a)
    elif kind == "py":
        if sigma is None:
            raise ValueError("eliciting a PY prior needs sigma")
        build = lambda a: PitmanYor(sigma=sigma, alpha=a)
    elif kind == "gn":
        build = lambda g: GnedinProcess(gamma=g)
    else:
        raise ValueError(f"unknown prior kind {kind!r}; expected dm, dp, py or gn")

    def gap(param):
        return h_distribution(build(param), V).mean - target_mean

    if kind == "gn":
        lo, hi = 1e-9, 1 - 1e-9
    else:
        lo = 1e-9 if kind != "py" else -sigma + 1e-9
        hi = max(1.0, lo * 2)
        while gap(hi) < 0:
            hi *= 4
            if hi > 1e9:
                raise ValueError(
                    f"no {kind} hyperparameter reaches a mean of {target_mean} clusters"
                )
    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo == 0:
        return build(lo)
    if g_hi == 0:
        return build(hi)
    if np.sign(g_lo) == np.sign(g_hi):
        raise ValueError(
            f"target mean {target_mean} is unreachable for the {kind} prior "
            f"(attainable range is about [{min(g_lo, g_hi) + target_mean:.3f}, "
            f"{max(g_lo, g_hi) + target_mean:.3f}])"
        )
    root = brentq(gap, lo, hi, xtol=1e-12, rtol=1e-12)
    return build(root)
