"""Input validation helpers shared by the estimator and the CLI."""

from __future__ import annotations

import numpy as np

from .network import AttributeTable, Network

__all__ = ["check_adjacency", "check_new_edge_rows", "as_attribute_table"]


def check_adjacency(X):
    """Validate a dense adjacency matrix and wrap it as a Network.

    Accepts anything array-like that is square, symmetric, hollow (zero
    diagonal) and binary; Network instances pass through unchanged.
    """
    if isinstance(X, Network):
        return X
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError(f"adjacency matrix must be square, got shape {X.shape}")
    if X.shape[0] < 2:
        raise ValueError("the network needs at least two nodes")
    if not np.isin(X, (0, 1)).all():
        raise ValueError("adjacency entries must be 0 or 1")
    X = X.astype(np.uint8)
    if (np.diag(X) != 0).any():
        raise ValueError("self-loops are not allowed: the diagonal must be zero")
    if not np.array_equal(X, X.T):
        raise ValueError("adjacency matrix must be symmetric")
    i, j = np.nonzero(np.triu(X, k=1))
    return Network(X.shape[0], zip((i + 1).tolist(), (j + 1).tolist()))


def check_new_edge_rows(Y, V):
    """Validate a (n_new, V) binary matrix of new-node edge indicators."""
    Y = np.asarray(Y)
    if Y.ndim == 1:
        Y = Y[None, :]
    if Y.ndim != 2 or Y.shape[1] != V:
        raise ValueError(
            f"new-node edges must form an (n_new, {V}) matrix, got shape {Y.shape}"
        )
    if not np.isin(Y, (0, 1)).all():
        raise ValueError("new-node edge entries must be 0 or 1")
    return Y.astype(np.uint8)


def as_attribute_table(attributes, V):
    """Encode an attribute vector (ints or labels) as an AttributeTable,
    mapping categories in first-appearance order."""
    if isinstance(attributes, AttributeTable):
        if attributes.V != V:
            raise ValueError(
                f"attribute table covers {attributes.V} nodes, expected {V}"
            )
        return attributes
    values = np.asarray(attributes)
    if values.ndim != 1 or values.size != V:
        raise ValueError(f"attributes must be a length-{V} vector, got shape {values.shape}")
    mapping = {}
    codes = np.empty(V, dtype=np.int32)
    for i, val in enumerate(values.tolist()):
        if val not in mapping:
            mapping[val] = len(mapping) + 1
        codes[i] = mapping[val]
    categories = [str(k) for k, _ in sorted(mapping.items(), key=lambda kv: kv[1])]
    return AttributeTable(codes, C=len(mapping), categories=categories)
