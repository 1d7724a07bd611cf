"""Snapshot containers, contraction and the small graph transforms the detectors need.

Node ids inside a :class:`Snapshot` are always ``0 .. n_nodes - 1``; external labels
(country codes, user names, ...) live on :class:`DynamicNetwork` and are only used by
the ingest and I/O helpers.  Time indices start at 1.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from collections.abc import Callable, Iterable, Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Snapshot",
    "DynamicNetwork",
    "LazySnapshots",
    "CommunityAssignment",
    "ValidationError",
    "validate",
    "contract",
    "split_communities",
    "induced_subgraph",
    "normalize_weights",
    "unweight",
    "unweight_sequence",
    "symmetrize",
    "symmetrize_sequence",
]


class ValidationError(ValueError):
    """Raised when a snapshot sequence breaks one of the container invariants.

    Attributes:
        t: time index of the offending snapshot (None for sequence-level problems).
        edge: the offending ``(u, v, w)`` triple, when there is one.
    """

    def __init__(self, message: str, t: int | None = None, edge: tuple | None = None):
        super().__init__(message)
        self.t = t
        self.edge = edge


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Snapshot:
    """One timestamped weighted graph over the node universe ``range(n_nodes)``.

    Edges are stored column-wise in three parallel arrays.  Construction does not
    check the invariants (use :func:`validate`), so files read from disk can be
    inspected before being rejected.
    """

    t: int
    n_nodes: int
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    directed: bool = False

    def __post_init__(self):
        src = np.array(self.src, dtype=np.int64).reshape(-1)
        dst = np.array(self.dst, dtype=np.int64).reshape(-1)
        weight = np.array(self.weight, dtype=np.float64).reshape(-1)
        if not (len(src) == len(dst) == len(weight)):
            raise ValueError("src, dst and weight must have equal length")
        object.__setattr__(self, "src", _frozen(src))
        object.__setattr__(self, "dst", _frozen(dst))
        object.__setattr__(self, "weight", _frozen(weight))
        object.__setattr__(self, "t", int(self.t))
        object.__setattr__(self, "n_nodes", int(self.n_nodes))
        object.__setattr__(self, "directed", bool(self.directed))

    @classmethod
    def from_edges(cls, t: int, n_nodes: int, edges: Iterable, directed: bool = False) -> "Snapshot":
        """Build from ``(u, v)`` or ``(u, v, w)`` tuples; missing weights default to 1."""
        rows = [tuple(e) for e in edges]
        if not rows:
            return cls.empty(t, n_nodes, directed)
        src = [r[0] for r in rows]
        dst = [r[1] for r in rows]
        w = [r[2] if len(r) > 2 else 1.0 for r in rows]
        return cls(t, n_nodes, src, dst, w, directed)

    @classmethod
    def empty(cls, t: int, n_nodes: int, directed: bool = False) -> "Snapshot":
        return cls(t, n_nodes, np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0), directed)

    @property
    def n_edges(self) -> int:
        return len(self.weight)

    @property
    def is_binary(self) -> bool:
        # vacuously true for the empty graph
        return bool(np.all(self.weight == 1.0))

    @property
    def total_weight(self) -> float:
        return math.fsum(self.weight)

    def edges(self) -> Iterator[tuple[int, int, float]]:
        for u, v, w in zip(self.src.tolist(), self.dst.tolist(), self.weight.tolist()):
            yield u, v, w

    def replace(self, **changes) -> "Snapshot":
        fields = dict(t=self.t, n_nodes=self.n_nodes, src=self.src, dst=self.dst,
                      weight=self.weight, directed=self.directed)
        fields.update(changes)
        return Snapshot(**fields)

    def degrees(self) -> np.ndarray:
        """Weighted degree of every node (both endpoints counted for undirected edges)."""
        return (np.bincount(self.src, weights=self.weight, minlength=self.n_nodes)
                + np.bincount(self.dst, weights=self.weight, minlength=self.n_nodes))

    def dense_adjacency(self, n: int | None = None) -> np.ndarray:
        """Symmetric dense adjacency matrix, optionally padded to ``n`` nodes."""
        n = self.n_nodes if n is None else n
        A = np.zeros((n, n))
        np.add.at(A, (self.src, self.dst), self.weight)
        if not self.directed:
            A = A + A.T
        return A

    def sparse_adjacency(self):
        """Symmetric CSR adjacency; directed edges are summed with their reverse."""
        from scipy import sparse

        n = self.n_nodes
        rows = np.concatenate([self.src, self.dst])
        cols = np.concatenate([self.dst, self.src])
        data = np.concatenate([self.weight, self.weight])
        return sparse.csr_matrix((data, (rows, cols)), shape=(n, n))


class LazySnapshots(Sequence):
    """Read-only sequence that builds snapshot ``i`` (0-based) on demand.

    Large synthetic sequences (1k dense nodes x 100 steps) do not fit comfortably in
    memory, so generators and readers hand out one of these.  A small LRU cache
    keeps the most recent snapshots around for sliding-window access.
    """

    def __init__(self, length: int, factory: Callable[[int], Snapshot], cache_size: int = 16):
        self._length = int(length)
        self._factory = factory
        self._cache: OrderedDict[int, Snapshot] = OrderedDict()
        self._cache_size = cache_size

    def __len__(self) -> int:
        return self._length

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(self._length))]
        if i < 0:
            i += self._length
        if not 0 <= i < self._length:
            raise IndexError(i)
        hit = self._cache.get(i)
        if hit is not None:
            self._cache.move_to_end(i)
            return hit
        g = self._factory(i)
        self._cache[i] = g
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return g


@dataclass(eq=False)
class DynamicNetwork:
    """Ordered snapshot sequence sharing one node universe.

    ``snapshots`` may be a list or any :class:`~collections.abc.Sequence` (see
    :class:`LazySnapshots`).  ``labels`` optionally maps internal node ids to
    external names.
    """

    snapshots: Sequence[Snapshot]
    n_nodes: int
    directed: bool = False
    labels: list | None = None
    time_labels: list | None = None
    meta: dict = field(default_factory=dict)

    @property
    def T(self) -> int:
        return len(self.snapshots)

    def __len__(self) -> int:
        return len(self.snapshots)

    def __iter__(self) -> Iterator[Snapshot]:
        for i in range(len(self.snapshots)):
            yield self.snapshots[i]

    def at(self, t: int) -> Snapshot:
        """Snapshot with time index ``t`` (1-based)."""
        if not 1 <= t <= self.T:
            raise IndexError(f"t={t} outside 1..{self.T}")
        return self.snapshots[t - 1]

    def map(self, fn: Callable[[Snapshot], Snapshot], directed: bool | None = None) -> "DynamicNetwork":
        """Lazily apply ``fn`` to every snapshot."""
        src = self.snapshots
        return DynamicNetwork(
            LazySnapshots(len(src), lambda i: fn(src[i])),
            self.n_nodes,
            self.directed if directed is None else directed,
            self.labels,
            self.time_labels,
            dict(self.meta),
        )

    def materialize(self) -> "DynamicNetwork":
        return DynamicNetwork(list(self), self.n_nodes, self.directed, self.labels,
                              self.time_labels, dict(self.meta))


@dataclass(frozen=True, eq=False)
class CommunityAssignment:
    """Total map node -> community id, ids ``0 .. k-1``, every community non-empty."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.array(self.labels, dtype=np.int64).reshape(-1)
        if labels.size == 0:
            raise ValueError("assignment must cover at least one node")
        if labels.min() < 0:
            raise ValueError("community ids must be non-negative")
        sizes = np.bincount(labels)
        if np.any(sizes == 0):
            missing = int(np.flatnonzero(sizes == 0)[0])
            raise ValueError(f"community {missing} is empty; ids must be 0..k-1 without gaps")
        object.__setattr__(self, "labels", _frozen(labels))

    @classmethod
    def from_labels(cls, labels) -> "CommunityAssignment":
        """Compress arbitrary labels to ``0..k-1`` in order of first appearance."""
        labels = np.asarray(labels)
        _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
        rank = np.empty(len(first), dtype=np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(len(first))
        return cls(rank[inverse.reshape(-1)])

    @classmethod
    def from_mapping(cls, mapping: dict, n_nodes: int) -> "CommunityAssignment":
        missing = [u for u in range(n_nodes) if u not in mapping]
        if missing:
            raise ValueError(f"node {missing[0]} has no community")
        return cls(np.array([mapping[u] for u in range(n_nodes)]))

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    @property
    def k(self) -> int:
        return int(self.labels.max()) + 1

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    def members(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.labels == i)

    def as_dict(self) -> dict[int, int]:
        return {u: int(c) for u, c in enumerate(self.labels.tolist())}

    def __eq__(self, other):
        return isinstance(other, CommunityAssignment) and np.array_equal(self.labels, other.labels)

    __hash__ = None


# --------------------------------------------------------------------------- validation


def _check_snapshot(g: Snapshot, n_nodes: int) -> None:
    def edge(i):
        return (int(g.src[i]), int(g.dst[i]), float(g.weight[i]))

    bad = np.flatnonzero((g.src < 0) | (g.src >= n_nodes) | (g.dst < 0) | (g.dst >= n_nodes))
    if bad.size:
        raise ValidationError(f"t={g.t}: endpoint outside node universe in edge {edge(bad[0])}",
                              g.t, edge(bad[0]))
    bad = np.flatnonzero(g.src == g.dst)
    if bad.size:
        raise ValidationError(f"t={g.t}: self-loop {edge(bad[0])}", g.t, edge(bad[0]))
    bad = np.flatnonzero(~np.isfinite(g.weight))
    if bad.size:
        raise ValidationError(f"t={g.t}: non-finite weight in edge {edge(bad[0])}", g.t, edge(bad[0]))
    bad = np.flatnonzero(g.weight < 0)
    if bad.size:
        raise ValidationError(f"t={g.t}: negative weight in edge {edge(bad[0])}", g.t, edge(bad[0]))
    if g.directed:
        keys = g.src * n_nodes + g.dst
    else:
        keys = np.minimum(g.src, g.dst) * n_nodes + np.maximum(g.src, g.dst)
    order = np.argsort(keys, kind="stable")
    dup = np.flatnonzero(np.diff(keys[order]) == 0)
    if dup.size:
        i = int(order[dup[0] + 1])
        raise ValidationError(f"t={g.t}: duplicate edge {edge(i)}", g.t, edge(i))


def validate(seq: DynamicNetwork) -> None:
    """Check every container invariant; raise :class:`ValidationError` on the first violation.

    Snapshots are checked in time order, so the reported ``t`` is the earliest bad one.
    """
    if seq.T == 0:
        raise ValidationError("sequence has no snapshots")
    for expected, g in enumerate(seq, start=1):
        if g.t != expected:
            if g.t > expected:
                raise ValidationError(f"gap in time indices at t={expected}", expected)
            raise ValidationError(f"time index {g.t} out of order (expected {expected})", g.t)
        if g.n_nodes > seq.n_nodes:
            raise ValidationError(
                f"t={g.t}: snapshot declares {g.n_nodes} nodes, universe has {seq.n_nodes}", g.t)
        if g.directed != seq.directed:
            raise ValidationError(f"t={g.t}: directed flag differs from the sequence", g.t)
        _check_snapshot(g, seq.n_nodes)


# --------------------------------------------------------------------------- transforms


def contract(g: Snapshot, a: CommunityAssignment) -> Snapshot:
    """Collapse each community to a hyper-node.

    Hyper-edge ``(i, j)`` carries the inter-community edge mass between ``i`` and
    ``j`` divided by ``n_i * n_j``; for a binary snapshot that is the fraction of
    possible inter-community pairs that are present.  Intra-community edges are
    dropped, so the result has no self-loops.
    """
    if g.directed:
        raise ValueError("contract expects an undirected snapshot; symmetrize it first")
    if a.n_nodes < g.n_nodes:
        raise ValueError(f"assignment covers {a.n_nodes} nodes, snapshot has {g.n_nodes}")
    if g.n_edges and (g.src.max() >= a.n_nodes or g.dst.max() >= a.n_nodes):
        raise ValueError("edge endpoint has no community")
    k = a.k
    sizes = a.sizes.astype(np.float64)
    cu = a.labels[g.src]
    cv = a.labels[g.dst]
    inter = cu != cv
    i = np.minimum(cu[inter], cv[inter])
    j = np.maximum(cu[inter], cv[inter])
    mass = np.bincount(i * k + j, weights=g.weight[inter], minlength=k * k)
    keys = np.flatnonzero(mass > 0)
    hi, hj = np.divmod(keys, k)
    w = mass[keys] / (sizes[hi] * sizes[hj])
    return Snapshot(g.t, k, hi, hj, w)


class _Splitter:
    """Precomputed bookkeeping for cutting snapshots into per-community induced subgraphs."""

    def __init__(self, a: CommunityAssignment):
        self.a = a
        self.k = a.k
        self.sizes = a.sizes
        self.local = np.empty(a.n_nodes, dtype=np.int64)
        for c in range(self.k):
            m = a.members(c)
            self.local[m] = np.arange(len(m))

    def __call__(self, g: Snapshot) -> list[Snapshot]:
        labels = self.a.labels
        cu = labels[g.src]
        intra = np.flatnonzero(cu == labels[g.dst])
        comm = cu[intra]
        order = intra[np.argsort(comm, kind="stable")]
        bounds = np.concatenate([[0], np.cumsum(np.bincount(comm, minlength=self.k))])
        out = []
        for c in range(self.k):
            idx = order[bounds[c]:bounds[c + 1]]
            out.append(Snapshot(g.t, int(self.sizes[c]), self.local[g.src[idx]],
                                self.local[g.dst[idx]], g.weight[idx], g.directed))
        return out


def split_communities(g: Snapshot, a: CommunityAssignment) -> list[Snapshot]:
    """Induced subgraph of every community, relabelled to local ids (ascending node order)."""
    return _Splitter(a)(g)


def induced_subgraph(g: Snapshot, nodes) -> Snapshot:
    """Subgraph on ``nodes`` with node ``nodes[i]`` relabelled to ``i``."""
    nodes = np.asarray(nodes, dtype=np.int64)
    pos = np.full(g.n_nodes, -1, dtype=np.int64)
    pos[nodes] = np.arange(len(nodes))
    keep = (pos[g.src] >= 0) & (pos[g.dst] >= 0)
    return Snapshot(g.t, len(nodes), pos[g.src[keep]], pos[g.dst[keep]], g.weight[keep], g.directed)


def normalize_weights(g: Snapshot) -> Snapshot:
    """Divide every weight by the snapshot's total weight."""
    total = g.total_weight
    if not total > 0:
        raise ValueError(f"t={g.t}: cannot normalize a snapshot with zero total weight")
    if total == 1.0:
        return g
    return g.replace(weight=g.weight / total)


def unweight(g: Snapshot, seed=None) -> Snapshot:
    """Keep each edge independently with probability equal to its weight.

    Kept edges get weight 1.  Weights must lie in ``[0, 1]``.
    """
    w = g.weight
    if w.size and (w.max() > 1.0 or w.min() < 0.0):
        raise ValueError(f"t={g.t}: unweight needs weights in [0, 1]")
    rng = np.random.default_rng(seed)
    keep = rng.random(w.size) < w
    return Snapshot(g.t, g.n_nodes, g.src[keep], g.dst[keep], np.ones(int(keep.sum())), g.directed)


def unweight_sequence(seq: DynamicNetwork, seed: int) -> DynamicNetwork:
    """Lazily unweight every snapshot; snapshot ``t`` uses the stream ``(seed, t)``."""
    return seq.map(lambda g: unweight(g, np.random.SeedSequence([seed, g.t])))


def symmetrize(g: Snapshot) -> Snapshot:
    """Turn a directed snapshot into an undirected one, summing both directions."""
    if not g.directed:
        return g
    n = g.n_nodes
    lo = np.minimum(g.src, g.dst)
    hi = np.maximum(g.src, g.dst)
    keys, inverse = np.unique(lo * n + hi, return_inverse=True)
    w = np.bincount(inverse.reshape(-1), weights=g.weight, minlength=len(keys))
    u, v = np.divmod(keys, n)
    return Snapshot(g.t, n, u, v, w, directed=False)


def symmetrize_sequence(seq: DynamicNetwork) -> DynamicNetwork:
    if not seq.directed:
        return seq
    return seq.map(symmetrize, directed=False)
