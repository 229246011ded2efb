"""Binary undirected networks, node partitions, and block-level dyad counts.

Nodes are labelled 1..V and cluster labels are 1..H throughout the public
API; the trailing label convention ("order of appearance") makes partition
representations unique so they can be compared, hashed and stored in traces.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

logger = logging.getLogger("esbm")


class Network:
    """An undirected binary network on nodes 1..V with no self-loops.

    Treated as immutable after construction; the dense adjacency matrix and
    the per-node neighbour lists are precomputed because samplers repeatedly
    ask for all edges incident to one node.
    """

    def __init__(self, V, edges):
        if V < 1:
            raise ValueError(f"network needs at least one node, got V={V}")
        self.V = int(V)
        adj = np.zeros((self.V, self.V), dtype=np.uint8)
        canonical = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop {u} {v} is not allowed")
            if not (1 <= u <= self.V and 1 <= v <= self.V):
                raise ValueError(
                    f"edge {u} {v} falls outside the node range 1..{self.V}"
                )
            a, b = (u, v) if u < v else (v, u)
            canonical.add((a, b))
            adj[a - 1, b - 1] = 1
            adj[b - 1, a - 1] = 1
        self.edges = frozenset(canonical)
        self.adjacency = adj
        self.neighbors = [np.flatnonzero(adj[i]).astype(np.int32) for i in range(self.V)]

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_dyads(self):
        return self.V * (self.V - 1) // 2

    @classmethod
    def from_edge_list(cls, path, V=None):
        """Read a whitespace-separated "u v" edge list (1-indexed).

        Duplicate lines and both orientations of the same dyad collapse to a
        single edge.  V defaults to the largest node id seen; ids in 1..V
        that never appear are kept as isolated nodes with a warning.
        """
        path = Path(path)
        edges = []
        seen = set()
        max_id = 0
        with path.open() as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split()
                if len(parts) != 2:
                    raise ValueError(
                        f"{path}:{lineno}: expected two node ids, got {line!r}"
                    )
                try:
                    u, v = int(parts[0]), int(parts[1])
                except ValueError:
                    raise ValueError(
                        f"{path}:{lineno}: node ids must be integers, got {line!r}"
                    ) from None
                if u < 1 or v < 1:
                    raise ValueError(
                        f"{path}:{lineno}: node ids must be >= 1, got {line!r}"
                    )
                if u == v:
                    raise ValueError(f"{path}:{lineno}: self-loop {u} {v}")
                edges.append((u, v))
                seen.update((u, v))
                max_id = max(max_id, u, v)
        if V is None:
            V = max_id
        elif max_id > V:
            raise ValueError(f"{path}: node id {max_id} exceeds declared V={V}")
        if V == 0:
            raise ValueError(f"{path}: no edges found and no node count given")
        missing = sorted(set(range(1, V + 1)) - seen)
        if missing:
            shown = ", ".join(str(m) for m in missing[:10])
            more = "" if len(missing) <= 10 else f" (+{len(missing) - 10} more)"
            logger.warning(
                "%s: node ids %s%s appear in no edge; treating them as isolated",
                path, shown, more,
            )
        return cls(V, edges)

    def write_edge_list(self, path):
        path = Path(path)
        with path.open("w") as fh:
            for u, v in sorted(self.edges):
                fh.write(f"{u} {v}\n")


def canonicalize(labels):
    """Relabel a cluster-assignment vector to order-of-appearance form.

    The first node gets label 1 and each later node gets the smallest unused
    label when it opens a new cluster, so two label vectors describe the same
    partition iff their canonical forms are equal.
    """
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.size == 0:
        raise ValueError("labels must be a non-empty 1-d sequence")
    out = np.empty(labels.size, dtype=np.int32)
    mapping = {}
    for i, lab in enumerate(labels.tolist()):
        if lab not in mapping:
            mapping[lab] = len(mapping) + 1
        out[i] = mapping[lab]
    return Partition(out)


@dataclass(frozen=True)
class Partition:
    """A partition of nodes 1..V stored as canonical labels 1..H."""

    labels: np.ndarray
    H: int = field(init=False)
    sizes: np.ndarray = field(init=False)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int32)
        if labels.ndim != 1 or labels.size == 0:
            raise ValueError("labels must be a non-empty 1-d sequence")
        H = int(labels.max(initial=0))
        if labels.min(initial=1) < 1:
            raise ValueError("cluster labels must be >= 1")
        seen = np.zeros(H, dtype=bool)
        next_new = 1
        for lab in labels.tolist():
            if not seen[lab - 1]:
                if lab != next_new:
                    raise ValueError(
                        "labels are not in order-of-appearance canonical form; "
                        "pass them through canonicalize() first"
                    )
                seen[lab - 1] = True
                next_new += 1
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "H", H)
        sizes = np.bincount(labels, minlength=H + 1)[1:].astype(np.int64)
        sizes.setflags(write=False)
        object.__setattr__(self, "sizes", sizes)

    @property
    def V(self):
        return self.labels.size

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash(self.labels.tobytes())

    def cluster_of(self, v):
        """Cluster label of node v (1-indexed)."""
        return int(self.labels[v - 1])


class AttributeTable:
    """One categorical attribute per node, coded 1..C.

    ``categories`` keeps the original labels in first-appearance order so
    file output can report how codes were assigned.
    """

    def __init__(self, values, C=None, categories=None):
        values = np.asarray(values, dtype=np.int32)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("attribute values must be a non-empty 1-d sequence")
        if values.min() < 1:
            raise ValueError("attribute codes must be >= 1")
        if C is None:
            C = int(values.max())
        elif values.max() > C:
            raise ValueError(f"attribute code {values.max()} exceeds C={C}")
        self.values = values
        self.C = int(C)
        if categories is None:
            categories = [str(c) for c in range(1, self.C + 1)]
        self.categories = list(categories)

    @property
    def V(self):
        return self.values.size

    @classmethod
    def from_csv(cls, path, V):
        """Read "node_id,category_label" rows; codes follow first appearance.

        Every node 1..V must appear exactly once.
        """
        path = Path(path)
        values = np.zeros(V, dtype=np.int32)
        seen = np.zeros(V, dtype=bool)
        mapping = {}
        with path.open() as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split(",")
                if len(parts) != 2:
                    raise ValueError(
                        f"{path}:{lineno}: expected 'node_id,category_label', got {line!r}"
                    )
                try:
                    node = int(parts[0])
                except ValueError:
                    if lineno == 1:
                        # header row, e.g. "node_id,category_label"
                        continue
                    raise ValueError(
                        f"{path}:{lineno}: node id must be an integer, got {parts[0]!r}"
                    ) from None
                if not 1 <= node <= V:
                    raise ValueError(
                        f"{path}:{lineno}: node id {node} outside 1..{V}"
                    )
                if seen[node - 1]:
                    raise ValueError(f"{path}:{lineno}: node {node} listed twice")
                label = parts[1].strip()
                if label not in mapping:
                    mapping[label] = len(mapping) + 1
                values[node - 1] = mapping[label]
                seen[node - 1] = True
        if not seen.all():
            missing = int(np.flatnonzero(~seen)[0]) + 1
            raise ValueError(f"{path}: attribute file is missing node {missing}")
        categories = [lab for lab, _ in sorted(mapping.items(), key=lambda kv: kv[1])]
        return cls(values, C=len(categories), categories=categories)

    def write_mapping(self, path):
        with Path(path).open("w") as fh:
            fh.write("category_label,code\n")
            for code, label in enumerate(self.categories, start=1):
                fh.write(f"{label},{code}\n")


@dataclass
class BlockCounts:
    """Edge and non-edge totals between every ordered pair of clusters.

    ``m[h, k]`` counts edges between clusters h+1 and k+1 (within-cluster
    dyads on the diagonal) and ``mbar`` the non-edges, so
    m + mbar = n_h * n_k off the diagonal and n_h (n_h - 1) / 2 on it.
    """

    H: int
    m: np.ndarray
    mbar: np.ndarray

    def copy(self):
        return BlockCounts(self.H, self.m.copy(), self.mbar.copy())

    def check(self, sizes):
        """Raise if the counts are inconsistent with the cluster sizes."""
        n = np.asarray(sizes, dtype=np.int64)
        if not np.array_equal(self.m, self.m.T) or not np.array_equal(self.mbar, self.mbar.T):
            raise ValueError("block count matrices must be symmetric")
        if (self.m < 0).any() or (self.mbar < 0).any():
            raise ValueError("block counts must be non-negative")
        total = self.m + self.mbar
        expected = np.outer(n, n)
        np.fill_diagonal(expected, n * (n - 1) // 2)
        if not np.array_equal(total, expected):
            raise ValueError("edge and non-edge counts do not add up to the dyad totals")


def block_counts(net, part):
    """Tally edges and non-edges between all cluster pairs of a partition."""
    if part.V != net.V:
        raise ValueError(f"partition covers {part.V} nodes but network has {net.V}")
    H = part.H
    z = part.labels - 1
    onehot = np.zeros((net.V, H), dtype=np.int64)
    onehot[np.arange(net.V), z] = 1
    m = onehot.T @ net.adjacency.astype(np.int64) @ onehot
    np.fill_diagonal(m, np.diag(m) // 2)
    sizes = part.sizes
    total = np.outer(sizes, sizes)
    np.fill_diagonal(total, sizes * (sizes - 1) // 2)
    return BlockCounts(H, m, total - m)


def edges_to_clusters(net, part, v):
    """Count edges from node v (1-indexed) to each cluster, excluding v itself."""
    nbrs = net.neighbors[v - 1]
    return np.bincount(part.labels[nbrs], minlength=part.H + 1)[1:].astype(np.int64)


def remove_node(net, part, counts, v):
    """Detach node v, returning the reduced partition and block counts.

    A cluster emptied by the removal is deleted and higher labels shift down
    by one.  The returned partition keeps a placeholder label 0 at position
    v - 1; reinsert with :func:`insert_node` before using it as a Partition.
    """
    z = part.labels.astype(np.int32).copy()
    h = z[v - 1]
    if h == 0:
        raise ValueError(f"node {v} is already detached")
    r = edges_to_clusters(net, part, v)
    sizes = part.sizes.copy()
    sizes[h - 1] -= 1
    rbar = sizes - r
    m = counts.m.copy()
    mbar = counts.mbar.copy()
    m[h - 1, :] -= r
    m[:, h - 1] = m[h - 1, :]
    mbar[h - 1, :] -= rbar
    mbar[:, h - 1] = mbar[h - 1, :]
    z[v - 1] = 0
    H = counts.H
    if sizes[h - 1] == 0:
        keep = np.arange(H) != h - 1
        m = m[np.ix_(keep, keep)]
        mbar = mbar[np.ix_(keep, keep)]
        sizes = sizes[keep]
        z[z > h] -= 1
        H -= 1
    return _DetachedPartition(z, H, sizes), BlockCounts(H, m, mbar)


def insert_node(net, part, counts, v, h):
    """Assign detached node v to cluster h (H + 1 opens a new cluster).

    The result is returned in canonical labels; if the insertion changes the
    order of appearance, rows and columns of the block counts are permuted to
    stay aligned with the relabelled clusters.
    """
    z = part.labels.astype(np.int32).copy()
    if z[v - 1] != 0:
        raise ValueError(f"node {v} is already assigned")
    H = counts.H
    if not 1 <= h <= H + 1:
        raise ValueError(f"target cluster {h} outside 1..{H + 1}")
    nbrs = net.neighbors[v - 1]
    r = np.bincount(z[nbrs], minlength=H + 2)[1 : H + 1].astype(np.int64)
    sizes = np.asarray(part.sizes, dtype=np.int64).copy()
    rbar = sizes - r
    m = counts.m.copy()
    mbar = counts.mbar.copy()
    if h == H + 1:
        m = np.pad(m, ((0, 1), (0, 1)))
        mbar = np.pad(mbar, ((0, 1), (0, 1)))
        sizes = np.append(sizes, 0)
        r = np.append(r, 0)
        rbar = np.append(rbar, 0)
        H += 1
    m[h - 1, :] += r
    mbar[h - 1, :] += rbar
    m[:, h - 1] = m[h - 1, :]
    mbar[:, h - 1] = mbar[h - 1, :]
    sizes[h - 1] += 1
    z[v - 1] = h
    new_part = canonicalize(z)
    # Align counts with the canonical labels: old cluster ``old`` became
    # ``new_part.labels`` wherever z == old, which is a pure relabelling.
    order = np.zeros(H, dtype=np.int64)
    for old, new in zip(z.tolist(), new_part.labels.tolist()):
        order[new - 1] = old - 1
    m = m[np.ix_(order, order)]
    mbar = mbar[np.ix_(order, order)]
    return new_part, BlockCounts(H, m, mbar)


class _DetachedPartition:
    """Partition-like view used between remove_node and insert_node."""

    def __init__(self, labels, H, sizes):
        self.labels = labels
        self.H = H
        self.sizes = sizes

    @property
    def V(self):
        return self.labels.size
