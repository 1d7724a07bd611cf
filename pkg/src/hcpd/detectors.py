"""Dissimilarity scores between consecutive snapshots (or windows of snapshots).

Two detectors are provided:

* ``deltacon``: node-affinity matrices from the linear system
  ``(I + eps^2 D - eps A) S = I`` and the rooted Euclidean (Matusita) distance
  between the affinities of consecutive snapshots.
* ``edge-monitoring``: per node-pair edge probabilities estimated from a window of
  snapshots, compared across two adjacent windows by a Bernoulli KL divergence.

Every score is non-negative and larger means more changed.  Besides the pure
pairwise functions, the module has small streaming scanners used by the
framework so that each snapshot is processed once per scope.
"""

from __future__ import annotations

from collections import deque
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import linalg

from .graph import Snapshot, symmetrize

DELTACON = "deltacon"
EDGE_MONITORING = "edge-monitoring"
KINDS = (DELTACON, EDGE_MONITORING)

EPSILON_CAP = 0.05
NEGATIVE_AFFINITY_TOL = 1e-12


@dataclass(frozen=True)
class DetectorConfig:
    """Detector parameters.

    ``epsilon=None`` picks ``min(0.05, 1 / (1 + 2 * max_degree))`` from the first
    snapshot of each scope, which keeps the affinity system diagonally dominant
    with headroom for degrees to double later in the sequence.  ``pair_budget=None``
    tracks every node pair of a scope; an integer samples that many pairs
    (seeded by ``seed``).
    """

    kind: str = EDGE_MONITORING
    window: int = 4
    epsilon: float | None = None
    smoothing: float = 1e-6
    pair_budget: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown detector {self.kind!r}; expected one of {KINDS}")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.epsilon is not None and not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if not 0 < self.smoothing < 0.5:
            raise ValueError("smoothing must lie in (0, 0.5)")
        if self.pair_budget is not None and self.pair_budget < 1:
            raise ValueError("pair_budget must be positive or None")

    @property
    def effective_window(self) -> int:
        """Snapshots per window; DeltaCon always compares single snapshots."""
        return 1 if self.kind == DELTACON else self.window

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pair_budget"] = "all" if self.pair_budget is None else self.pair_budget
        d["epsilon"] = "auto" if self.epsilon is None else self.epsilon
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DetectorConfig":
        d = dict(d)
        aliases = {"pairBudget": "pair_budget", "epsilonAffinity": "epsilon"}
        for old, new in aliases.items():
            if old in d:
                d[new] = d.pop(old)
        if d.get("pair_budget") in ("all", None, ""):
            d["pair_budget"] = None
        if d.get("epsilon") in ("auto", None, ""):
            d["epsilon"] = None
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown detector keys: {sorted(unknown)}")
        casts = {"window": int, "epsilon": float, "smoothing": float, "pair_budget": int, "seed": int}
        for key, cast in casts.items():
            if d.get(key) is not None:
                d[key] = cast(d[key])
        return cls(**d)


@dataclass(frozen=True, eq=False)
class ScoreSeries:
    """Outlier scores of one scope, indexed by time, with its threshold and change set.

    ``scope`` is ``"global"`` (contracted network), ``"original"`` or a community id.
    """

    scope: object
    times: np.ndarray
    scores: np.ndarray
    threshold: float = float("nan")
    changes: tuple = field(default=())

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.int64).reshape(-1)
        scores = np.asarray(self.scores, dtype=np.float64).reshape(-1)
        if times.shape != scores.shape:
            raise ValueError("times and scores must have equal length")
        if scores.size and scores.min() < 0:
            raise ValueError("scores must be non-negative")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "changes", tuple(int(t) for t in self.changes))

    def __len__(self) -> int:
        return len(self.times)

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.times.tolist(), self.scores.tolist()))

    def with_threshold(self, threshold: float) -> "ScoreSeries":
        changes = self.times[self.scores > threshold]
        return replace(self, threshold=float(threshold), changes=tuple(changes.tolist()))


# --------------------------------------------------------------------------- DeltaCon


def auto_epsilon(max_degree: float) -> float:
    return min(EPSILON_CAP, 1.0 / (1.0 + 2.0 * max_degree))


def root_affinity(g: Snapshot, epsilon: float, n: int | None = None) -> np.ndarray:
    """Element-wise square root of the affinity matrix ``(I + eps^2 D - eps A)^-1``.

    Raises:
        ValueError: if the system is not strictly diagonally dominant for this
            epsilon, or the solve returns an affinity below ``-1e-12``.
    """
    g = symmetrize(g)
    n = g.n_nodes if n is None else n
    A = g.dense_adjacency(n)
    d = A.sum(axis=1)
    if np.any(epsilon * d >= 1.0 + epsilon * epsilon * d):
        raise ValueError(
            f"t={g.t}: epsilon={epsilon:g} too large for max degree {d.max():g}; "
            "affinity system is not diagonally dominant")
    M = -epsilon * A
    M[np.diag_indices(n)] += 1.0 + epsilon * epsilon * d
    S = linalg.cho_solve(linalg.cho_factor(M, lower=True, check_finite=False),
                         np.eye(n), check_finite=False)
    low = S.min() if S.size else 0.0
    if low < -NEGATIVE_AFFINITY_TOL:
        raise ValueError(f"t={g.t}: negative affinity {low:g}")
    np.maximum(S, 0.0, out=S)
    return np.sqrt(S, out=S)


def matusita(r1: np.ndarray, r2: np.ndarray) -> float:
    diff = r1 - r2
    return float(np.sqrt(np.einsum("ij,ij->", diff, diff)))


def deltacon_score(g1: Snapshot, g2: Snapshot, cfg: DetectorConfig | None = None) -> float:
    """Rooted Euclidean distance between the node affinities of two snapshots.

    The smaller snapshot is padded with isolated nodes.  With ``cfg.epsilon`` unset,
    epsilon is derived from the larger max degree of the two graphs, so the score
    is symmetric in its arguments.
    """
    cfg = cfg or DetectorConfig(kind=DELTACON)
    n = max(g1.n_nodes, g2.n_nodes)
    eps = cfg.epsilon
    if eps is None:
        dmax = max((symmetrize(g).degrees().max(initial=0.0) for g in (g1, g2)), default=0.0)
        eps = auto_epsilon(dmax)
    return matusita(root_affinity(g1, eps, n), root_affinity(g2, eps, n))


# --------------------------------------------------------------------------- EdgeMonitoring


def _all_pair_index(u: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
    """Position of pair ``(u, v)``, ``u < v``, in row-major upper-triangle order."""
    return u * (2 * n - u - 1) // 2 + (v - u - 1)


def n_pairs(n: int) -> int:
    return n * (n - 1) // 2


class PairIndex:
    """The node pairs tracked in one scope, with a fast edge -> slot lookup."""

    def __init__(self, n: int, pairs=None):
        self.n = n
        self.all_pairs = pairs is None
        if pairs is None:
            self.size = n_pairs(n)
            self.keys = None
        else:
            pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
            if pairs.shape[0] == 0:
                raise ValueError("empty pair set")
            u, v = np.minimum(pairs[:, 0], pairs[:, 1]), np.maximum(pairs[:, 0], pairs[:, 1])
            if np.any(u == v) or u.min() < 0 or v.max() >= n:
                raise ValueError("pairs must join two distinct nodes of the scope")
            self.keys = np.unique(_all_pair_index(u, v, n))
            self.size = len(self.keys)
        if self.size == 0:
            raise ValueError("empty pair set")

    @classmethod
    def sample(cls, n: int, budget: int | None, seed) -> "PairIndex":
        total = n_pairs(n)
        if budget is None or budget >= total:
            return cls(n)
        rng = np.random.default_rng(seed)
        keys = np.sort(rng.choice(total, size=budget, replace=False))
        idx = cls.__new__(cls)
        idx.n, idx.all_pairs, idx.keys, idx.size = n, False, keys, budget
        return idx

    def vector(self, g: Snapshot) -> np.ndarray:
        """Edge weight of every tracked pair in ``g`` (0 where absent)."""
        lo = np.minimum(g.src, g.dst)
        hi = np.maximum(g.src, g.dst)
        keys = _all_pair_index(lo, hi, self.n)
        if self.all_pairs:
            return np.bincount(keys, weights=g.weight, minlength=self.size)
        pos = np.searchsorted(self.keys, keys)
        pos_c = np.minimum(pos, self.size - 1)
        hit = self.keys[pos_c] == keys
        return np.bincount(pos_c[hit], weights=g.weight[hit], minlength=self.size)


def _entry(g: Snapshot, index: PairIndex) -> tuple[np.ndarray, bool, float]:
    """Per-pair vector of one snapshot: indicators if binary, else normalized weights."""
    g = symmetrize(g)
    vec = index.vector(g)
    binary = g.is_binary
    total = g.total_weight
    if not binary and total > 0:
        vec = vec / total
    # a weighted snapshot with no mass contributes zeros
    return vec, binary, total


def _window_mean(entries) -> np.ndarray:
    if all(binary for _, binary, _ in entries):
        return np.sum([vec for vec, _, _ in entries], axis=0) / len(entries)
    # mixed window: binary members are normalized like the weighted ones
    out = np.zeros_like(entries[0][0])
    for vec, binary, total in entries:
        out += vec / total if binary and total > 0 else vec
    return out / len(entries)


def em_window_estimate(window, pairs=None) -> np.ndarray:
    """Edge probability of each tracked pair over a window of snapshots.

    Binary windows give the occurrence frequency; weighted windows give the mean
    of the per-snapshot normalized weights.

    Args:
        window: list of snapshots over the same node set.
        pairs: ``(P, 2)`` array of node pairs, or ``None`` for all pairs.
    """
    if not window:
        raise ValueError("window must contain at least one snapshot")
    n = max(g.n_nodes for g in window)
    index = pairs if isinstance(pairs, PairIndex) else PairIndex(n, pairs)
    return _window_mean([_entry(g, index) for g in window])


def _excess(y: np.ndarray) -> np.ndarray:
    """``y - log1p(y)`` (>= 0), accurate when ``y`` is tiny."""
    out = y - np.log1p(y)
    small = np.abs(y) < 1e-4
    ys = y[small]
    out[small] = ys * ys * (0.5 - ys / 3.0 + ys * ys / 4.0)
    return out


def kl_divergence(p, q, smoothing: float = 1e-6) -> float:
    """Sum over pairs of the Bernoulli KL divergence ``D(p_i || q_i)`` in nats.

    Both vectors are clamped into ``[smoothing, 1 - smoothing]`` first.  Each term is
    evaluated as ``p g(q/p) + (1-p) g((1-q)/(1-p))`` with ``g(x) = x - 1 - log x``,
    which is non-negative term by term and zero only where ``p_i == q_i``.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    p = np.clip(p, smoothing, 1.0 - smoothing)
    q = np.clip(q, smoothing, 1.0 - smoothing)
    pc = 1.0 - p
    terms = p * _excess((q - p) / p) + pc * _excess((p - q) / pc)
    return float(np.sum(terms))


def em_score(prev_window, curr_window, cfg: DetectorConfig | None = None, pairs=None) -> float:
    """KL divergence from the previous window's estimate to the current one's."""
    cfg = cfg or DetectorConfig()
    if len(prev_window) != len(curr_window):
        raise ValueError("windows must have equal length")
    n = max(g.n_nodes for g in list(prev_window) + list(curr_window))
    index = pairs if isinstance(pairs, PairIndex) else PairIndex(n, pairs)
    p = em_window_estimate(prev_window, index)
    q = em_window_estimate(curr_window, index)
    return kl_divergence(p, q, cfg.smoothing)


# --------------------------------------------------------------------------- streaming scanners


class DeltaConScan:
    """Scores consecutive snapshots of one scope; each affinity is solved once."""

    def __init__(self, n: int, cfg: DetectorConfig):
        self.n = n
        self.epsilon = cfg.epsilon
        self._prev = None

    def push(self, g: Snapshot):
        if self.epsilon is None:
            self.epsilon = auto_epsilon(symmetrize(g).degrees().max(initial=0.0))
        root = root_affinity(g, self.epsilon, self.n)
        prev, self._prev = self._prev, root
        if prev is None:
            return None
        return g.t, matusita(prev, root)


class EdgeMonitorScan:
    """Sliding pair of windows; emits a score once ``2 * window`` snapshots are seen.

    The score is assigned to the first time index of the current window.
    """

    def __init__(self, n: int, cfg: DetectorConfig, pair_seed=None):
        self.window = cfg.window
        self.smoothing = cfg.smoothing
        self.index = PairIndex.sample(n, cfg.pair_budget, pair_seed)
        self._buf: deque = deque(maxlen=2 * cfg.window)

    def push(self, g: Snapshot):
        self._buf.append((*_entry(g, self.index), g.t))
        if len(self._buf) < 2 * self.window:
            return None
        items = list(self._buf)
        prev = _window_mean([i[:3] for i in items[: self.window]])
        curr = _window_mean([i[:3] for i in items[self.window:]])
        return items[self.window][3], kl_divergence(prev, curr, self.smoothing)


def make_scan(cfg: DetectorConfig, n: int, pair_seed=None):
    if cfg.kind == DELTACON:
        return DeltaConScan(n, cfg)
    return EdgeMonitorScan(n, cfg, pair_seed)
