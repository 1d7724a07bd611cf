"""Modularity and a deterministic Louvain partitioner.

The partition is computed once, on the first snapshot, and then held fixed for
the whole scan.  Nodes are visited in ascending id order so repeated runs give
the same communities; pass a ``seed`` to shuffle the visit order instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .graph import CommunityAssignment, Snapshot, symmetrize

TOLERANCE = 1e-7


@dataclass(frozen=True)
class PartitionResult:
    assignment: CommunityAssignment
    modularity: float
    levels: int
    method: str = "louvain"


def _adjacency(g: Snapshot) -> sparse.csr_matrix:
    g = symmetrize(g)
    A = g.sparse_adjacency()
    A.sum_duplicates()
    return A


def _modularity(A: sparse.csr_matrix, labels: np.ndarray) -> float:
    two_m = A.sum()
    k = np.asarray(A.sum(axis=1)).ravel()
    coo = A.tocoo()
    same = labels[coo.row] == labels[coo.col]
    inside = coo.data[same].sum()
    tot = np.bincount(labels, weights=k)
    return float(inside / two_m - np.sum((tot / two_m) ** 2))


def modularity(g: Snapshot, a: CommunityAssignment) -> float:
    """Weighted Newman modularity ``Q = sum_ij [A_ij/2m - k_i k_j/(2m)^2] delta(c_i, c_j)``."""
    if not g.total_weight > 0:
        raise ValueError("modularity is undefined for a graph without edge weight")
    return _modularity(_adjacency(g), a.labels[: g.n_nodes])


def _local_moves(A, labels, order, tol):
    """One Louvain phase: greedy single-node moves until no move gains more than ``tol``.

    Returns the new labels and whether anything moved.
    """
    labels = labels.copy()
    two_m = A.sum()
    m = two_m / 2.0
    k = np.asarray(A.sum(axis=1)).ravel()
    tot = np.bincount(labels, weights=k, minlength=len(labels))
    indptr, indices, data = A.indptr, A.indices, A.data
    moved_any = False
    while True:
        moved = False
        for i in order:
            lo, hi = indptr[i], indptr[i + 1]
            nbr = indices[lo:hi]
            w = data[lo:hi]
            keep = nbr != i
            nbr, w = nbr[keep], w[keep]
            if nbr.size == 0:
                continue
            ci = labels[i]
            cands, inv = np.unique(labels[nbr], return_inverse=True)
            k_in = np.bincount(inv.reshape(-1), weights=w)
            tot[ci] -= k[i]
            own = np.searchsorted(cands, ci)
            k_own = k_in[own] if own < cands.size and cands[own] == ci else 0.0
            gains = (k_in - k_own) / m - k[i] * (tot[cands] - tot[ci]) / (2.0 * m * m)
            best = int(np.argmax(gains))
            if gains[best] > tol and cands[best] != ci:
                labels[i] = cands[best]
                moved = True
            tot[labels[i]] += k[i]
        if not moved:
            return labels, moved_any
        moved_any = True


def _compress(labels: np.ndarray) -> np.ndarray:
    return CommunityAssignment.from_labels(labels).labels.copy()


def _aggregate(A, labels):
    n, c = len(labels), int(labels.max()) + 1
    H = sparse.csr_matrix((np.ones(n), (np.arange(n), labels)), shape=(n, c))
    return (H.T @ A @ H).tocsr()


def louvain_partition(g: Snapshot, seed=None, tol: float = TOLERANCE) -> PartitionResult:
    """Partition ``g`` by greedy modularity agglomeration.

    Alternates node moves and contraction of communities into super-nodes until a
    pass brings no gain.  A final node-level sweep makes the result a fixed point
    of single-node moves at the original resolution.

    Args:
        g: snapshot to partition (directed input is symmetrized).
        seed: ``None`` visits nodes in ascending id order; otherwise the visit order
            at every level is a permutation drawn from this seed.
        tol: minimum modularity gain for a move to be accepted.

    Returns:
        PartitionResult with community ids ordered by their smallest member.
    """
    A = _adjacency(g)
    if not A.sum() > 0:
        raise ValueError("cannot partition a graph without edges")
    rng = None if seed is None else np.random.default_rng(seed)

    def visit(n):
        return np.arange(n) if rng is None else rng.permutation(n)

    node_labels = np.arange(A.shape[0])
    levels = 0
    while True:
        # aggregation phase, starting from the current node-level partition
        labels = _compress(node_labels)
        level_A = _aggregate(A, labels)
        node_labels = labels
        current = np.arange(level_A.shape[0])
        while True:
            current, moved = _local_moves(level_A, current, visit(level_A.shape[0]), tol)
            if not moved:
                break
            levels += 1
            current = _compress(current)
            node_labels = current[node_labels]
            level_A = _aggregate(level_A, current)
            current = np.arange(level_A.shape[0])
        node_labels, moved = _local_moves(A, _compress(node_labels), visit(A.shape[0]), tol)
        if not moved:
            break
    labels = _compress(node_labels)
    a = CommunityAssignment(labels)
    return PartitionResult(a, _modularity(A, labels), levels)


def assignment_partition(g: Snapshot, a: CommunityAssignment, method: str = "given") -> PartitionResult:
    """Wrap a known assignment (e.g. planted communities) as a :class:`PartitionResult`."""
    if a.n_nodes != g.n_nodes:
        raise ValueError(f"assignment covers {a.n_nodes} nodes, snapshot has {g.n_nodes}")
    q = modularity(g, a) if g.total_weight > 0 else float("nan")
    return PartitionResult(a, q, 0, method)
