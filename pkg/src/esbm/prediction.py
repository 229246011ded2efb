"""Cluster-membership prediction for nodes not in the fitted network.

A new node is placed by the same rule the sampler uses for its full
conditional, evaluated at a fixed reference partition (normally the point
estimate): the partition prior's urn weight times Beta-function ratios over
the new node's edges into each existing cluster.  Multiple new nodes are
scored independently, each against the original network only.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import betaln

from .network import block_counts
from .priors import log_urn_weight

__all__ = ["NewNodeEdges", "predict_membership", "predict_matrix", "read_new_edges"]


@dataclass(frozen=True)
class NewNodeEdges:
    """Edge indicators from one new node to the existing nodes 1..V."""

    vector: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=np.uint8)
        if vec.ndim != 1:
            raise ValueError("edge indicators must form a 1-d vector")
        if not np.isin(vec, (0, 1)).all():
            raise ValueError("edge indicators must be 0 or 1")
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)

    @property
    def V(self):
        return self.vector.size


def predict_membership(net, part, lik, prior, new_edges):
    """Posterior predictive membership probabilities for one new node.

    Returns a vector over clusters 1..H of the reference partition plus a
    final entry for "a cluster of its own".  Equals the sampler's full
    conditional for node V + 1 appended to the network with these edges.
    """
    if isinstance(new_edges, NewNodeEdges):
        y = new_edges.vector
    else:
        y = NewNodeEdges(np.asarray(new_edges)).vector
    if y.size != net.V:
        raise ValueError(f"edge vector covers {y.size} nodes, network has {net.V}")
    if part.V != net.V:
        raise ValueError(f"partition covers {part.V} nodes, network has {net.V}")
    H = part.H
    counts = block_counts(net, part)
    r = np.bincount(part.labels[y == 1], minlength=H + 1)[1:].astype(np.int64)
    rbar = part.sizes - r
    logw = np.empty(H + 1)
    for h in range(1, H + 2):
        lp = log_urn_weight(prior, h, part.sizes)
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


def predict_matrix(net, part, lik, prior, edge_matrix):
    """Stack of predictive membership vectors, one row per new node."""
    edge_matrix = np.asarray(edge_matrix)
    if edge_matrix.ndim != 2:
        raise ValueError("edge_matrix must be 2-d: one row per new node")
    out = np.empty((edge_matrix.shape[0], part.H + 1))
    for i in range(edge_matrix.shape[0]):
        out[i] = predict_membership(net, part, lik, prior, edge_matrix[i])
    return out


def read_new_edges(path, V):
    """Read "new_id,existing_id" rows into per-new-node edge vectors.

    A row with existing_id 0 declares a new node without asserting any edge,
    letting isolated new nodes appear in the output.  Returns the sorted new
    ids and the corresponding edge matrix.
    """
    path = Path(path)
    rows = {}
    with path.open() as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(
                    f"{path}:{lineno}: expected 'new_id,existing_id', got {line!r}"
                )
            try:
                new_id, old_id = int(parts[0]), int(parts[1])
            except ValueError:
                if lineno == 1:
                    # header row, e.g. "new_id,existing_id"
                    continue
                raise ValueError(
                    f"{path}:{lineno}: ids must be integers, got {line!r}"
                ) from None
            if not 0 <= old_id <= V:
                raise ValueError(
                    f"{path}:{lineno}: existing node {old_id} outside 1..{V}"
                )
            vec = rows.setdefault(new_id, np.zeros(V, dtype=np.uint8))
            if old_id > 0:
                vec[old_id - 1] = 1
    if not rows:
        raise ValueError(f"{path}: no new-node rows found")
    new_ids = sorted(rows)
    matrix = np.stack([rows[i] for i in new_ids])
    return new_ids, matrix
