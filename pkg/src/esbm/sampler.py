"""Collapsed Gibbs sampling of node partitions for binary undirected networks.

The block-model likelihood is integrated out analytically (independent
Beta(a, b) priors on the block edge probabilities), so the sampler moves one
node at a time between clusters, including a fresh cluster, with weights that
combine the partition prior's urn scheme with ratios of Beta functions over
the affected blocks.

Two routes compute the same full conditional: :func:`full_conditional` is a
plain readable implementation used by tests and by new-node prediction, and
``_sweep_kernel`` is the jitted production loop used by :func:`run_chain`.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit
from scipy.special import betaln, gammaln

from .cohesion import category_counts, log_supervised_urn_weight
from .network import Partition, block_counts, canonicalize, remove_node
from .priors import log_urn_weight

logger = logging.getLogger("esbm")

__all__ = [
    "LikelihoodSpec",
    "SamplerConfig",
    "TraceStore",
    "ThetaEstimate",
    "log_marginal_likelihood",
    "full_conditional",
    "run_chain",
    "gibbs_sweeps",
    "theta_plugin",
]


@dataclass(frozen=True)
class LikelihoodSpec:
    """Beta(a, b) prior on every block edge probability; defaults to uniform."""

    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"a and b must be > 0, got a={self.a}, b={self.b}")


@dataclass(frozen=True)
class SamplerConfig:
    """Chain length and bookkeeping; ``sweeps`` includes the burn-in."""

    sweeps: int = 50000
    burn_in: int = 10000
    thin: int = 1
    seed: int | None = None
    init: str = "singletons"

    def __post_init__(self):
        if self.sweeps < 1:
            raise ValueError(f"sweeps must be >= 1, got {self.sweeps}")
        if not 0 <= self.burn_in < self.sweeps:
            raise ValueError(
                f"burn_in must lie in 0..sweeps-1, got {self.burn_in} of {self.sweeps}"
            )
        if self.thin < 1:
            raise ValueError(f"thin must be >= 1, got {self.thin}")
        if self.init not in ("singletons", "given"):
            raise ValueError(f"init must be 'singletons' or 'given', got {self.init!r}")


def log_marginal_likelihood(net, part, lik):
    """Log of the network likelihood with all block probabilities integrated
    out: one Beta-function ratio per unordered cluster pair."""
    counts = block_counts(net, part)
    iu = np.triu_indices(part.H)
    m = counts.m[iu]
    mbar = counts.mbar[iu]
    return float(
        (betaln(lik.a + m, lik.b + mbar) - betaln(lik.a, lik.b)).sum()
    )


@dataclass(frozen=True)
class ThetaEstimate:
    """Posterior-mean block edge probabilities under a fixed partition."""

    matrix: np.ndarray

    @property
    def H(self):
        return self.matrix.shape[0]


def theta_plugin(net, part, lik):
    """Plug-in block probability estimates (a + m) / (a + b + m + mbar)."""
    counts = block_counts(net, part)
    return ThetaEstimate(
        (lik.a + counts.m) / (lik.a + lik.b + counts.m + counts.mbar)
    )


def full_conditional(net, part, v, prior, lik, cohesion=None, attrs=None):
    """Exact full-conditional distribution of node v's cluster assignment.

    Node v is detached from ``part`` (dropping its cluster if emptied) and the
    returned vector gives the probabilities of joining each remaining cluster
    1..H or a new one at H + 1, under the partition prior (supervised when a
    cohesion and attribute table are passed) combined with the collapsed
    block-model likelihood.
    """
    if (cohesion is None) != (attrs is None):
        raise ValueError("supervised sampling needs both a cohesion and attributes")
    counts0 = block_counts(net, part)
    detached, counts = remove_node(net, part, counts0, v)
    H = counts.H
    z = detached.labels
    nbrs = net.neighbors[v - 1]
    r = np.bincount(z[nbrs], minlength=H + 2)[1 : H + 1].astype(np.int64)
    rbar = detached.sizes - r
    if attrs is not None:
        # count categories against the detached labels directly; they index
        # the same clusters as ``counts`` even when not in appearance order
        keep = z > 0
        cat = np.zeros((H, attrs.C), dtype=np.int64)
        np.add.at(cat, (z[keep] - 1, attrs.values[keep] - 1), 1)
    logw = np.empty(H + 1)
    for h in range(1, H + 2):
        if attrs is not None:
            lp = log_supervised_urn_weight(
                prior, cohesion, h, cat, int(attrs.values[v - 1])
            )
        else:
            lp = log_urn_weight(prior, h, detached.sizes)
        if lp == -np.inf:
            logw[h - 1] = -np.inf
            continue
        if h <= H:
            m_h = counts.m[h - 1]
            mbar_h = counts.mbar[h - 1]
        else:
            m_h = np.zeros(H, dtype=np.int64)
            mbar_h = np.zeros(H, dtype=np.int64)
        lp += (
            betaln(lik.a + m_h + r, lik.b + mbar_h + rbar)
            - betaln(lik.a + m_h, lik.b + mbar_h)
        ).sum()
        logw[h - 1] = lp
    top = logw.max()
    probs = np.exp(logw - top)
    return probs / probs.sum()


@njit(cache=True)
def _sweep_kernel(
    z, sizes, H, m, mbar,
    supervised, nhc, x, alpha_c, alpha0,
    kind, p0, p1,
    indptr, indices,
    T_a, T_b, T_ab, lbab,
    uniforms, rec_z, rec_ll,
):
    V = z.size
    S = uniforms.shape[0]
    C = alpha_c.size
    r = np.zeros(V + 1, dtype=np.int64)
    lw = np.empty(V + 1)
    canon = np.empty(V + 1, dtype=np.int64)
    zero_new = 0
    for s in range(S):
        for v in range(V):
            h_old = z[v]
            for k in range(H):
                r[k] = 0
            for idx in range(indptr[v], indptr[v + 1]):
                r[z[indices[idx]]] += 1
            # detach node v
            sizes[h_old] -= 1
            if supervised:
                nhc[h_old, x[v]] -= 1
            for k in range(H):
                m[h_old, k] -= r[k]
                mbar[h_old, k] -= sizes[k] - r[k]
                m[k, h_old] = m[h_old, k]
                mbar[k, h_old] = mbar[h_old, k]
            if sizes[h_old] == 0:
                H -= 1
                for k in range(h_old, H):
                    sizes[k] = sizes[k + 1]
                    r[k] = r[k + 1]
                sizes[H] = 0
                r[H] = 0
                if supervised:
                    for k in range(h_old, H):
                        for c in range(C):
                            nhc[k, c] = nhc[k + 1, c]
                    for c in range(C):
                        nhc[H, c] = 0
                for a2 in range(h_old, H):
                    for b2 in range(H + 1):
                        m[a2, b2] = m[a2 + 1, b2]
                        mbar[a2, b2] = mbar[a2 + 1, b2]
                for b2 in range(h_old, H):
                    for a2 in range(H):
                        m[a2, b2] = m[a2, b2 + 1]
                        mbar[a2, b2] = mbar[a2, b2 + 1]
                for k in range(H + 1):
                    m[H, k] = 0
                    m[k, H] = 0
                    mbar[H, k] = 0
                    mbar[k, H] = 0
                for u in range(V):
                    if z[u] > h_old:
                        z[u] -= 1
            # weights over the H existing clusters and one new cluster
            Vm1 = V - 1
            maxlw = -np.inf
            for h in range(H + 1):
                if h < H:
                    if kind == 0:
                        w = sizes[h] + p0
                    elif kind == 1:
                        w = float(sizes[h])
                    elif kind == 2:
                        w = sizes[h] - p0
                    else:
                        w = (sizes[h] + 1.0) * (Vm1 - H + p0)
                else:
                    if kind == 0:
                        w = p0 * (p1 - H) if H < p1 else 0.0
                        if w <= 0.0:
                            zero_new += 1
                    elif kind == 1:
                        w = p0
                    elif kind == 2:
                        w = p1 + H * p0
                    else:
                        w = H * (H - p0)
                if w <= 0.0:
                    lw[h] = -np.inf
                    continue
                acc = math.log(w)
                if supervised:
                    if h < H:
                        acc += math.log(
                            (nhc[h, x[v]] + alpha_c[x[v]]) / (sizes[h] + alpha0)
                        )
                    else:
                        acc += math.log(alpha_c[x[v]] / alpha0)
                for k in range(H):
                    rk = r[k]
                    rbk = sizes[k] - rk
                    if h < H:
                        mm = m[h, k]
                        mb = mbar[h, k]
                    else:
                        mm = 0
                        mb = 0
                    acc += (
                        T_a[mm + rk]
                        + T_b[mb + rbk]
                        - T_ab[mm + mb + sizes[k]]
                        - T_a[mm]
                        - T_b[mb]
                        + T_ab[mm + mb]
                    )
                lw[h] = acc
                if acc > maxlw:
                    maxlw = acc
            tot = 0.0
            for h in range(H + 1):
                if lw[h] > -np.inf:
                    tot += math.exp(lw[h] - maxlw)
            u01 = uniforms[s, v] * tot
            h_new = H
            run = 0.0
            for h in range(H + 1):
                if lw[h] > -np.inf:
                    run += math.exp(lw[h] - maxlw)
                    if u01 <= run:
                        h_new = h
                        break
            # attach node v
            if h_new == H:
                H += 1
            z[v] = h_new
            for k in range(H):
                if k != h_new:
                    m[h_new, k] += r[k]
                    mbar[h_new, k] += sizes[k] - r[k]
                    m[k, h_new] = m[h_new, k]
                    mbar[k, h_new] = mbar[h_new, k]
            m[h_new, h_new] += r[h_new]
            mbar[h_new, h_new] += sizes[h_new] - r[h_new]
            sizes[h_new] += 1
            if supervised:
                nhc[h_new, x[v]] += 1
        ll = 0.0
        for hh in range(H):
            for kk in range(hh + 1):
                ll += (
                    T_a[m[hh, kk]]
                    + T_b[mbar[hh, kk]]
                    - T_ab[m[hh, kk] + mbar[hh, kk]]
                    - lbab
                )
        rec_ll[s] = ll
        nxt = 0
        for k in range(H):
            canon[k] = -1
        for u in range(V):
            c = canon[z[u]]
            if c < 0:
                canon[z[u]] = nxt
                c = nxt
                nxt += 1
            rec_z[s, u] = c + 1
    return H, zero_new


class _ChainState:
    """Mutable sampler state bridging numpy setup and the jitted kernel."""

    def __init__(self, net, prior, lik, labels, cohesion=None, attrs=None):
        if (cohesion is None) != (attrs is None):
            raise ValueError("supervised sampling needs both a cohesion and attributes")
        if net.V < 2:
            raise ValueError("sampling needs a network with at least two nodes")
        part = canonicalize(labels)
        if part.V != net.V:
            raise ValueError(f"init partition covers {part.V} nodes, network has {net.V}")
        V = net.V
        self.net = net
        self.prior = prior
        self.lik = lik
        self.supervised = attrs is not None
        self.z = (part.labels.astype(np.int64) - 1).copy()
        self.sizes = np.zeros(V + 1, dtype=np.int64)
        self.sizes[: part.H] = part.sizes
        self.H = part.H
        counts = block_counts(net, part)
        self.m = np.zeros((V + 1, V + 1), dtype=np.int64)
        self.mbar = np.zeros((V + 1, V + 1), dtype=np.int64)
        self.m[: part.H, : part.H] = counts.m
        self.mbar[: part.H, : part.H] = counts.mbar
        if self.supervised:
            if attrs.C != cohesion.C:
                raise ValueError(
                    f"attribute table has {attrs.C} categories but cohesion expects {cohesion.C}"
                )
            self.x = (attrs.values.astype(np.int64) - 1).copy()
            self.alpha_c = cohesion.alpha.astype(np.float64)
            self.alpha0 = cohesion.alpha0
            self.nhc = np.zeros((V + 1, attrs.C), dtype=np.int64)
            self.nhc[: part.H] = category_counts(part, attrs)
        else:
            self.x = np.zeros(V, dtype=np.int64)
            self.alpha_c = np.ones(1)
            self.alpha0 = 1.0
            self.nhc = np.zeros((V + 1, 1), dtype=np.int64)
        kind, p0, p1 = prior.kernel_params()
        self.kind, self.p0, self.p1 = kind, p0, p1
        if kind == 0 and part.H > prior.H_bar:
            raise ValueError(
                f"init partition has {part.H} clusters but the DM prior caps at {prior.H_bar}"
            )
        indptr = np.zeros(V + 1, dtype=np.int64)
        for i, nb in enumerate(net.neighbors):
            indptr[i + 1] = indptr[i] + nb.size
        indices = np.concatenate(net.neighbors) if indptr[-1] else np.zeros(0, dtype=np.int32)
        self.indptr = indptr
        self.indices = indices.astype(np.int64)
        npairs = V * (V - 1) // 2 + V + 2
        grid = np.arange(npairs, dtype=np.float64)
        self.T_a = gammaln(lik.a + grid)
        self.T_b = gammaln(lik.b + grid)
        self.T_ab = gammaln(lik.a + lik.b + grid)
        self.lbab = float(self.T_a[0] + self.T_b[0] - self.T_ab[0])
        self.zero_new = 0

    def sweep(self, uniforms):
        """Run one kernel call over a (S, V) block of uniforms; returns the
        recorded canonical labels and log-likelihoods per sweep."""
        S = uniforms.shape[0]
        rec_z = np.empty((S, self.net.V), dtype=np.int16)
        rec_ll = np.empty(S)
        self.H, zn = _sweep_kernel(
            self.z, self.sizes, self.H, self.m, self.mbar,
            self.supervised, self.nhc, self.x, self.alpha_c, self.alpha0,
            self.kind, self.p0, self.p1,
            self.indptr, self.indices,
            self.T_a, self.T_b, self.T_ab, self.lbab,
            uniforms, rec_z, rec_ll,
        )
        self.zero_new += zn
        return rec_z, rec_ll


def default_init_labels(net, prior, init="singletons"):
    """Default starting partition: one cluster per node, folded round-robin
    into H_bar clusters when a DM prior cannot host V singletons."""
    V = net.V
    if init != "singletons":
        raise ValueError("only the 'singletons' default init can be auto-built")
    H_cap = getattr(prior, "H_bar", None)
    if H_cap is not None and H_cap < V:
        logger.info(
            "DM prior caps clusters at %d < V=%d; starting round-robin instead of singletons",
            H_cap, V,
        )
        return np.arange(V) % H_cap + 1
    return np.arange(1, V + 1)


@dataclass
class TraceStore:
    """Thinned post-burn-in samples of the partition with their log-likelihoods."""

    V: int
    samples: np.ndarray
    loglik: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def T(self):
        return self.samples.shape[0]

    def partition(self, t):
        return Partition(self.samples[t].astype(np.int32))

    def h_values(self):
        return self.samples.max(axis=1).astype(np.int64)

    def unique(self):
        """Distinct sampled partitions with their empirical weights."""
        labels, counts = np.unique(self.samples, axis=0, return_counts=True)
        return labels, counts / self.T

    def save(self, path):
        path = Path(path)
        with path.open("w") as fh:
            fh.write(f"V={self.V} T={self.T}\n")
            for t in range(self.T):
                row = " ".join(str(int(c)) for c in self.samples[t])
                fh.write(f"{self.loglik[t]:.17g} {row}\n")

    @classmethod
    def load(cls, path):
        path = Path(path)
        with path.open() as fh:
            header = fh.readline().strip()
            parts = header.split()
            try:
                V = int(parts[0].split("=")[1])
                T = int(parts[1].split("=")[1])
            except (IndexError, ValueError):
                raise ValueError(
                    f"{path}: malformed trace header {header!r}; expected 'V=<V> T=<T>'"
                ) from None
            data = np.loadtxt(fh, ndmin=2)
        if data.size == 0:
            data = np.empty((0, V + 1))
        if data.shape[0] != T or data.shape[1] != V + 1:
            raise ValueError(
                f"{path}: trace body has shape {data.shape}, "
                f"expected {T} samples of {V + 1} fields"
            )
        return cls(V=V, samples=data[:, 1:].astype(np.int16), loglik=data[:, 0].copy())


def run_chain(net, prior, lik=None, config=None, *, cohesion=None, attrs=None,
              init_labels=None):
    """Run the collapsed Gibbs sampler and collect the thinned trace.

    Sweeps visit nodes 1..V in order; the first ``config.burn_in`` sweeps are
    discarded and every ``config.thin``-th of the rest is kept.  With a fixed
    seed the trace is reproducible exactly.  A keyboard interrupt stops the
    chain early and returns the samples collected so far.
    """
    lik = lik or LikelihoodSpec()
    config = config or SamplerConfig()
    if config.init == "given" or init_labels is not None:
        if init_labels is None:
            raise ValueError("init='given' needs explicit init_labels")
        labels = np.asarray(init_labels)
    else:
        labels = default_init_labels(net, prior, config.init)
    state = _ChainState(net, prior, lik, labels, cohesion=cohesion, attrs=attrs)
    rng = np.random.default_rng(config.seed)
    V = net.V
    chunk = max(1, min(config.sweeps, 2_000_000 // V))
    all_z = []
    all_ll = []
    done = 0
    t0 = time.perf_counter()
    try:
        while done < config.sweeps:
            step = min(chunk, config.sweeps - done)
            uniforms = rng.random((step, V))
            rec_z, rec_ll = state.sweep(uniforms)
            all_z.append(rec_z)
            all_ll.append(rec_ll)
            done += step
    except KeyboardInterrupt:
        logger.warning("interrupted after %d of %d sweeps; trace is truncated",
                       done, config.sweeps)
    elapsed = time.perf_counter() - t0
    if state.zero_new and state.kind == 0:
        logger.info(
            "DM prior at its cluster cap: the new-cluster move was zero-weighted %d times",
            state.zero_new,
        )
    samples = np.concatenate(all_z) if all_z else np.empty((0, V), dtype=np.int16)
    loglik = np.concatenate(all_ll) if all_ll else np.empty(0)
    keep = np.arange(config.burn_in, samples.shape[0], config.thin)
    keep = keep[keep < samples.shape[0]]
    meta = {
        "prior": prior.describe(),
        "a": lik.a,
        "b": lik.b,
        "sweeps": config.sweeps,
        "burn_in": config.burn_in,
        "thin": config.thin,
        "seed": config.seed,
        "init": config.init,
        "supervised": attrs is not None,
        "elapsed_s": elapsed,
        "sweeps_per_s": done / elapsed if elapsed > 0 else float("inf"),
    }
    return TraceStore(V=V, samples=samples[keep], loglik=loglik[keep], meta=meta)


def gibbs_sweeps(net, prior, lik, labels, nsweeps, rng, cohesion=None, attrs=None):
    """Advance ``nsweeps`` full sweeps from the given labels and return the
    final canonical label vector; used by joint-distribution chain tests."""
    state = _ChainState(net, prior, lik, labels, cohesion=cohesion, attrs=attrs)
    rec_z, _ = state.sweep(rng.random((nsweeps, net.V)))
    return rec_z[-1].astype(np.int32)
