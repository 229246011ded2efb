"""Synthetic block-model networks, including three stock covert-network
style scenarios at V = 80 and held-out node generation for prediction tests.

Scenario 1 is five plain communities.  Scenario 2 adds a hierarchy:
two affiliate blocks, each wired to its own boss block, with both boss
blocks tied to a small top block.  Scenario 3 has three locale-based
affiliate blocks, two boss blocks covering locales {1,2} and {3}, and
weaker 0.45 ties among the bosses; the "-strict" variant keeps every block
probability at 0.75 or 0.25 instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .network import Network, Partition

__all__ = ["GeneratorSpec", "generate", "generate_holdout", "preset", "PRESET_NAMES"]


@dataclass(frozen=True)
class GeneratorSpec:
    """Planted-partition generator: cluster sizes, block edge probabilities,
    and the seed making draws reproducible."""

    sizes: tuple
    theta: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes or any(s < 1 for s in sizes):
            raise ValueError("cluster sizes must be positive integers")
        theta = np.asarray(self.theta, dtype=np.float64)
        H0 = len(sizes)
        if theta.shape != (H0, H0):
            raise ValueError(
                f"theta must be {H0} x {H0} to match {H0} clusters, got {theta.shape}"
            )
        if not np.allclose(theta, theta.T):
            raise ValueError("theta must be symmetric")
        if (theta <= 0).any() or (theta >= 1).any():
            raise ValueError("block probabilities must lie strictly in (0, 1)")
        theta.setflags(write=False)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "theta", theta)

    @property
    def V(self):
        return sum(self.sizes)

    @property
    def H0(self):
        return len(self.sizes)

    def truth(self):
        return Partition(np.repeat(np.arange(1, self.H0 + 1), self.sizes).astype(np.int32))


def generate(spec):
    """Draw one network from the planted block model; deterministic in the seed."""
    rng = np.random.default_rng(spec.seed)
    z0 = spec.truth().labels - 1
    V = spec.V
    P = spec.theta[np.ix_(z0, z0)]
    draw = rng.random((V, V)) < P
    iu = np.triu_indices(V, k=1)
    adj = np.zeros((V, V), dtype=np.uint8)
    adj[iu] = draw[iu]
    edges = [(int(i) + 1, int(j) + 1) for i, j in zip(*np.nonzero(adj))]
    return Network(V, edges), spec.truth()


def _allocate_existing(sizes, n):
    """Largest-remainder proportional allocation of n nodes to the groups."""
    sizes = np.asarray(sizes, dtype=np.float64)
    quota = n * sizes / sizes.sum()
    base = np.floor(quota).astype(np.int64)
    short = n - int(base.sum())
    order = np.argsort(-(quota - base), kind="stable")
    base[order[:short]] += 1
    return base


def generate_holdout(spec, n_new, unseen_fraction, seed=None, unseen_rate=0.75):
    """Edges from held-out nodes into the original network.

    ``round(unseen_fraction * n_new)`` nodes come from one extra hub-like
    group the network never saw, tied into every observed group at
    ``unseen_rate``; the rest are split over the existing groups
    proportionally to their sizes.  The hub rate deliberately matches no row
    of the planted block matrix, so the unseen nodes stay identifiable from
    their edges alone: a profile that overlaps an existing row would be
    absorbed into that cluster by any calibrated predictive rule.
    Returns the (n_new, V) edge matrix and the generative group per new node,
    with the unseen group coded H0 + 1.
    """
    if n_new < 1:
        raise ValueError(f"n_new must be >= 1, got {n_new}")
    if not 0 <= unseen_fraction <= 1:
        raise ValueError(f"unseen_fraction must lie in [0, 1], got {unseen_fraction}")
    if not 0 < unseen_rate < 1:
        raise ValueError(f"unseen_rate must lie in (0, 1), got {unseen_rate}")
    rng = np.random.default_rng(seed)
    H0 = spec.H0
    n_unseen = int(round(unseen_fraction * n_new))
    alloc = _allocate_existing(spec.sizes, n_new - n_unseen)
    groups = np.concatenate([
        np.repeat(np.arange(1, H0 + 1), alloc),
        np.full(n_unseen, H0 + 1, dtype=np.int64),
    ])
    theta_ext = np.vstack([spec.theta, np.full((1, H0), unseen_rate)])
    z0 = spec.truth().labels - 1
    P = theta_ext[np.ix_(groups - 1, z0)]
    edges = (rng.random((n_new, spec.V)) < P).astype(np.uint8)
    return edges, groups


def _theta(H0, pairs, base=0.25, high=0.75, weak=0.45):
    t = np.full((H0, H0), base)
    for (i, j), level in pairs.items():
        val = {"high": high, "weak": weak}[level]
        t[i - 1, j - 1] = val
        t[j - 1, i - 1] = val
    return t


_PRESETS = {
    "scenario1": (
        (28, 20, 14, 10, 8),
        {(h, h): "high" for h in range(1, 6)},
    ),
    "scenario2": (
        (30, 30, 8, 8, 4),
        {
            (1, 1): "high", (2, 2): "high", (3, 3): "high", (4, 4): "high",
            (5, 5): "high",
            (1, 3): "high", (2, 4): "high",       # affiliates to their bosses
            (3, 5): "high", (4, 5): "high",       # bosses to the top block
        },
    ),
    "scenario3": (
        (25, 25, 18, 8, 4),
        {
            (1, 1): "high", (2, 2): "high", (3, 3): "high",
            (1, 4): "high", (2, 4): "high",       # locales 1-2 to their bosses
            (3, 5): "high",                        # locale 3 to its bosses
            (4, 4): "weak", (5, 5): "weak", (4, 5): "weak",
        },
    ),
    "scenario3-strict": (
        (25, 25, 18, 8, 4),
        {
            (1, 1): "high", (2, 2): "high", (3, 3): "high",
            (1, 4): "high", (2, 4): "high",
            (3, 5): "high",
            (4, 4): "high", (5, 5): "high",
        },
    ),
}

PRESET_NAMES = tuple(_PRESETS)


def preset(name, seed=None):
    """One of the stock V = 80 scenarios as a GeneratorSpec."""
    try:
        sizes, pairs = _PRESETS[name]
    except KeyError:
        known = ", ".join(PRESET_NAMES)
        raise ValueError(f"unknown preset {name!r}; expected one of {known}") from None
    return GeneratorSpec(sizes=sizes, theta=_theta(len(sizes), pairs), seed=seed)
