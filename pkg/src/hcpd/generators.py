"""Seeded synthetic dynamic networks with injected change events.

Two models:

* SBM: every pair's edge weight is ``Binomial(trials, p) / trials`` where ``p`` is the
  block-matrix entry of the two endpoint communities.
* BTER: intra-community pairs follow a per-community Erdos-Renyi probability,
  inter-community pairs a Chung-Lu probability ``min(1, w_u w_v / sum(w))``.

Snapshot ``t`` is drawn from its own random stream ``(seed, t)`` and uses exactly one
uniform variate per node pair (inverse-CDF binomial sampling).  Changing the
probability of some pairs therefore leaves every other pair's weight bit-identical,
and snapshots can be produced lazily in any order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .graph import CommunityAssignment, DynamicNetwork, LazySnapshots, Snapshot

RATE_SCALE = "rate-scale"
MATRIX_REGENERATE = "matrix-regenerate"
CL_REGENERATE = "cl-regenerate"
EVENT_KINDS = (RATE_SCALE, MATRIX_REGENERATE, CL_REGENERATE)

TABLE1_SBM_SIZES = (300, 200, 150, 100, 80, 70, 50, 50)
DEFAULT_T = 100
DEFAULT_TRIALS = 10


@dataclass(frozen=True)
class Event:
    """One injected change.

    For ``rate-scale`` a local event multiplies the intra-community rate of each
    listed community, a global event multiplies the inter-community rates among
    the listed communities.  Regeneration events redraw the block matrix (SBM) or
    the Chung-Lu weights of the listed communities' nodes (BTER).
    """

    t: int
    kind: str
    communities: tuple[int, ...]
    is_global: bool
    factor: float = 1.0
    note: str = ""

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")
        if not self.factor > 0:
            raise ValueError("event factor must be positive")
        object.__setattr__(self, "communities", tuple(int(c) for c in self.communities))

    @property
    def scope(self):
        return "global" if self.is_global else self.communities

    def to_dict(self) -> dict:
        return {"t": self.t, "kind": self.kind, "communities": list(self.communities),
                "scope": "global" if self.is_global else "local", "factor": self.factor,
                "note": self.note}

    @classmethod
    def from_dict(cls, d: dict) -> "Event":
        return cls(int(d["t"]), d["kind"], tuple(d["communities"]), d["scope"] == "global",
                   float(d.get("factor", 1.0)), d.get("note", ""))


@dataclass(frozen=True)
class EventSchedule:
    events: tuple[Event, ...] = ()

    def __post_init__(self):
        times = [e.t for e in self.events]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("event times must be strictly increasing")
        if times and times[0] < 1:
            raise ValueError("event times start at 1")

    def __iter__(self):
        return iter(self.events)

    def __len__(self):
        return len(self.events)

    @property
    def times(self) -> tuple[int, ...]:
        return tuple(e.t for e in self.events)

    @property
    def global_times(self) -> tuple[int, ...]:
        return tuple(e.t for e in self.events if e.is_global)

    @property
    def local_times(self) -> tuple[int, ...]:
        return tuple(e.t for e in self.events if not e.is_global)

    def local_times_for(self, community: int) -> tuple[int, ...]:
        return tuple(e.t for e in self.events if not e.is_global and community in e.communities)


def table1_schedules() -> tuple[EventSchedule, EventSchedule]:
    """The four-event schedules injected into the SBM and BTER sequences."""
    sbm = EventSchedule((
        Event(16, RATE_SCALE, (0,), False, 2 / 3, "intra rate of largest community c0 reduced by 1/3"),
        Event(31, RATE_SCALE, (0, 1, 5, 6), True, 2 / 3, "inter rates among c0,c1,c5,c6 reduced by 1/3"),
        Event(51, RATE_SCALE, (6, 7), False, 2.0, "intra rates of smallest communities c6,c7 doubled"),
        Event(76, MATRIX_REGENERATE, tuple(range(8)), True, 1.0, "block matrix regenerated"),
    ))
    bter = EventSchedule((
        Event(16, RATE_SCALE, (0,), False, 2 / 3, "ER probability of largest community c0 reduced by 1/3"),
        Event(31, CL_REGENERATE, (0,), True, 1.0, "Chung-Lu weights of c0 regenerated"),
        Event(51, RATE_SCALE, (3, 4), False, 2.0, "ER probabilities of smallest communities c3,c4 doubled"),
        Event(76, CL_REGENERATE, tuple(range(5)), True, 1.0, "Chung-Lu weights of all nodes regenerated"),
    ))
    return sbm, bter


@dataclass(frozen=True, eq=False)
class GroundTruth:
    model: str
    seed: int
    T: int
    schedule: EventSchedule
    assignment: CommunityAssignment
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"model": self.model, "seed": self.seed, "T": self.T,
                "events": [e.to_dict() for e in self.schedule],
                "community_sizes": self.assignment.sizes.tolist(), "params": self.params}

    @classmethod
    def from_dict(cls, d: dict, assignment: CommunityAssignment) -> "GroundTruth":
        schedule = EventSchedule(tuple(Event.from_dict(e) for e in d["events"]))
        return cls(d["model"], int(d["seed"]), int(d["T"]), schedule, assignment, d.get("params", {}))

    def write(self, directory) -> None:
        from .fileio import write_assignment

        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "ground_truth.json").write_text(json.dumps(self.to_dict(), indent=2) + "\n",
                                                     encoding="utf-8")
        write_assignment(self.assignment, directory / "assignment.tsv")

    @classmethod
    def read(cls, directory) -> "GroundTruth":
        from .fileio import read_assignment

        directory = Path(directory)
        d = json.loads((directory / "ground_truth.json").read_text(encoding="utf-8"))
        return cls.from_dict(d, read_assignment(directory / "assignment.tsv"))


# --------------------------------------------------------------------------- sampling helpers


def _rng(seed, *path):
    return np.random.default_rng(np.random.SeedSequence([int(seed), *path]))


def sample_block_matrix(k: int, rng) -> np.ndarray:
    """Symmetric Uniform(0, 1) block matrix whose every diagonal entry exceeds every off-diagonal one.

    Equivalent in distribution to drawing i.i.d. uniforms and rejecting until the
    constraint holds: the ``k`` largest of the ``k(k+1)/2`` draws go to the
    diagonal, each group in uniformly random order.
    """
    m = k * (k + 1) // 2
    vals = np.sort(rng.random(m))[::-1]
    diag = rng.permutation(vals[:k])
    off = rng.permutation(vals[k:])
    B = np.zeros((k, k))
    iu = np.triu_indices(k, 1)
    B[iu] = off
    B = B + B.T
    B[np.diag_indices(k)] = diag
    return B


def _power_law_int(rng, lo: int, hi: int, exponent: float, size: int) -> np.ndarray:
    support = np.arange(lo, hi + 1)
    p = support.astype(float) ** -exponent
    return rng.choice(support, size=size, p=p / p.sum())


def _power_law_weights(rng, size: int, exponent: float) -> np.ndarray:
    # continuous Pareto with x_min = 1
    return (1.0 - rng.random(size)) ** (-1.0 / (exponent - 1.0))


def _binomial_weights(u: np.ndarray, p_index: np.ndarray, p_values: np.ndarray, trials: int) -> np.ndarray:
    """``Binomial(trials, p) / trials`` by inverting the CDF at one uniform per pair.

    ``u`` must lie in ``(0, 1]``.
    """
    cdf = stats.binom.cdf(np.arange(trials), trials, p_values[:, None])
    counts = np.zeros(u.shape, dtype=np.int64)
    for j in range(trials):
        counts += u > cdf[p_index, j]
    return counts / trials


class _PairModel:
    """Per-pair probabilities of one model state plus the pair list."""

    def __init__(self, n: int):
        self.n = n
        self.iu, self.ju = np.triu_indices(n, 1)

    def snapshot(self, t: int, seed: int, p_index, p_values, trials: int) -> Snapshot:
        rng = _rng(seed, t)
        u = 1.0 - rng.random(len(self.iu))
        w = _binomial_weights(u, p_index, p_values, trials)
        keep = w > 0
        return Snapshot(t, self.n, self.iu[keep], self.ju[keep], w[keep])


def _segments(schedule: EventSchedule, T: int):
    bounds = [1] + [e.t for e in schedule if e.t <= T]
    return list(zip(bounds, bounds[1:] + [T + 1]))


def _check_schedule(schedule: EventSchedule, T: int, k: int) -> None:
    for e in schedule:
        if e.t > T:
            raise ValueError(f"event at t={e.t} beyond T={T}")
        bad = [c for c in e.communities if not 0 <= c < k]
        if bad:
            raise ValueError(f"event at t={e.t} references unknown community {bad[0]}")


def _lazy_sequence(n: int, T: int, states, make) -> DynamicNetwork:
    """``states`` lists ``(start, end, state)``; ``make(t, state)`` builds snapshot t."""

    def factory(i):
        t = i + 1
        for start, end, state in states:
            if start <= t < end:
                return make(t, state)
        raise IndexError(t)

    return DynamicNetwork(LazySnapshots(T, factory), n, directed=False)


# --------------------------------------------------------------------------- SBM


@dataclass(frozen=True, eq=False)
class SbmConfig:
    community_sizes: tuple[int, ...]
    block_matrix: np.ndarray
    trials: int = DEFAULT_TRIALS

    def __post_init__(self):
        B = np.array(self.block_matrix, dtype=np.float64)
        k = len(self.community_sizes)
        if B.shape != (k, k):
            raise ValueError(f"block matrix must be {k}x{k}")
        if not np.allclose(B, B.T, rtol=0, atol=0):
            raise ValueError("block matrix must be symmetric")
        if B.min() < 0 or B.max() > 1:
            raise ValueError("block probabilities must lie in [0, 1]")
        off = B + np.diag(np.full(k, -np.inf))
        if k > 1 and np.any(np.diag(B) <= off.max(axis=1)):
            raise ValueError("each diagonal entry must exceed the off-diagonal entries of its row")
        if min(self.community_sizes) < 1:
            raise ValueError("community sizes must be positive")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        object.__setattr__(self, "community_sizes", tuple(int(s) for s in self.community_sizes))
        object.__setattr__(self, "block_matrix", B)

    @property
    def n(self) -> int:
        return sum(self.community_sizes)

    @property
    def k(self) -> int:
        return len(self.community_sizes)

    @property
    def labels(self) -> np.ndarray:
        return np.repeat(np.arange(self.k), self.community_sizes)

    def to_dict(self) -> dict:
        return {"community_sizes": list(self.community_sizes),
                "block_matrix": self.block_matrix.tolist(), "trials": self.trials}


def table1_sbm_config(seed: int, sizes=TABLE1_SBM_SIZES, trials: int = DEFAULT_TRIALS) -> SbmConfig:
    """1000 nodes in 8 communities of sizes 50..300 with a random dominant-diagonal block matrix."""
    return SbmConfig(tuple(sizes), sample_block_matrix(len(sizes), _rng(seed, 0, 0)), trials)


def _apply_sbm_event(B: np.ndarray, e: Event, seed: int, idx: int) -> np.ndarray:
    B = B.copy()
    if e.kind == MATRIX_REGENERATE:
        return sample_block_matrix(len(B), _rng(seed, 0, idx + 1))
    if e.kind != RATE_SCALE:
        raise ValueError(f"SBM does not support {e.kind!r} events")
    cs = list(e.communities)
    if e.is_global:
        for a in cs:
            for b in cs:
                if a != b:
                    B[a, b] *= e.factor
    else:
        for c in cs:
            B[c, c] *= e.factor
    return np.clip(B, 0.0, 1.0)


def sbm_block_matrices(cfg: SbmConfig, T: int, schedule: EventSchedule, seed: int):
    """``(start, end, block_matrix)`` for every segment between events."""
    _check_schedule(schedule, T, cfg.k)
    B = cfg.block_matrix
    events = [e for e in schedule if e.t <= T]
    out = []
    for idx, (start, end) in enumerate(_segments(schedule, T)):
        if idx > 0:
            B = _apply_sbm_event(B, events[idx - 1], seed, idx - 1)
        out.append((start, end, B))
    return out


def sbm_generate(cfg: SbmConfig, T: int, schedule: EventSchedule, seed: int):
    """Weighted SBM sequence with events applied from their time stamp onward.

    Returns:
        ``(DynamicNetwork, GroundTruth)``; the network is lazy and deterministic
        per ``seed``.
    """
    states = sbm_block_matrices(cfg, T, schedule, seed)
    model = _PairModel(cfg.n)
    labels = cfg.labels
    k = cfg.k
    block_pair = labels[model.iu] * k + labels[model.ju]

    def make(t, B):
        return model.snapshot(t, seed, block_pair, B.ravel(), cfg.trials)

    seq = _lazy_sequence(cfg.n, T, states, make)
    seq.meta.update(model="sbm", seed=seed)
    truth = GroundTruth("sbm", seed, T, schedule, CommunityAssignment(labels),
                        {"config": cfg.to_dict(),
                         "block_matrices": [{"start": s, "matrix": B.tolist()} for s, _, B in states]})
    return seq, truth


# --------------------------------------------------------------------------- BTER


@dataclass(frozen=True, eq=False)
class BterConfig:
    community_sizes: tuple[int, ...]
    er_probs: np.ndarray
    cl_weights: np.ndarray
    trials: int = DEFAULT_TRIALS
    cl_exponent: float = 2.0

    def __post_init__(self):
        er = np.array(self.er_probs, dtype=np.float64)
        w = np.array(self.cl_weights, dtype=np.float64)
        if len(er) != len(self.community_sizes):
            raise ValueError("one ER probability per community")
        if er.min() < 0 or er.max() > 1:
            raise ValueError("ER probabilities must lie in [0, 1]")
        if len(w) != sum(self.community_sizes):
            raise ValueError("one Chung-Lu weight per node")
        if not np.all(w > 0):
            raise ValueError("Chung-Lu weights must be positive")
        object.__setattr__(self, "community_sizes", tuple(int(s) for s in self.community_sizes))
        object.__setattr__(self, "er_probs", er)
        object.__setattr__(self, "cl_weights", w)

    @property
    def n(self) -> int:
        return sum(self.community_sizes)

    @property
    def k(self) -> int:
        return len(self.community_sizes)

    @property
    def labels(self) -> np.ndarray:
        return np.repeat(np.arange(self.k), self.community_sizes)

    def to_dict(self) -> dict:
        return {"community_sizes": list(self.community_sizes), "er_probs": self.er_probs.tolist(),
                "cl_weights": self.cl_weights.tolist(), "trials": self.trials,
                "cl_exponent": self.cl_exponent}


def sample_bter_config(seed: int, n: int = 100, k: int = 5, size_range=(15, 25),
                       size_exponent: float = 2.5, cl_exponent: float = 2.0,
                       beta=(2.0, 5.0), er_scale: float = 0.5,
                       trials: int = DEFAULT_TRIALS) -> BterConfig:
    """Random BTER parameters: power-law community sizes within ``size_range``
    summing to ``n`` (rejection sampling, largest first), ``er_scale * Beta(*beta)``
    ER probabilities and Pareto(``cl_exponent``) Chung-Lu weights."""
    rng = _rng(seed, 0, 0)
    lo, hi = size_range
    if not k * lo <= n <= k * hi:
        raise ValueError(f"cannot split {n} nodes into {k} communities of size {lo}..{hi}")
    for _ in range(100_000):
        head = _power_law_int(rng, lo, hi, size_exponent, k - 1)
        last = n - head.sum()
        if lo <= last <= hi:
            sizes = tuple(sorted([*head.tolist(), int(last)], reverse=True))
            break
    else:  # pragma: no cover - the acceptance region is large for sane inputs
        raise RuntimeError("community size rejection sampling did not converge")
    er = er_scale * rng.beta(*beta, size=k)
    w = _power_law_weights(rng, n, cl_exponent)
    return BterConfig(sizes, er, w, trials, cl_exponent)


def bter_probabilities(cfg_sizes, er: np.ndarray, w: np.ndarray, iu, ju, labels) -> np.ndarray:
    """Edge probability of every pair ``(iu[i], ju[i])``."""
    cu, cv = labels[iu], labels[ju]
    cl = np.minimum(1.0, w[iu] * w[ju] / w.sum())
    return np.where(cu == cv, er[cu], cl)


def _apply_bter_event(er, w, e: Event, labels, seed: int, idx: int, cl_exponent: float):
    er, w = er.copy(), w.copy()
    if e.kind == RATE_SCALE:
        if e.is_global:
            raise ValueError("BTER rate-scale events act on ER probabilities (local)")
        for c in e.communities:
            er[c] = min(1.0, er[c] * e.factor)
    elif e.kind == CL_REGENERATE:
        nodes = np.flatnonzero(np.isin(labels, e.communities))
        w[nodes] = _power_law_weights(_rng(seed, 0, idx + 1), len(nodes), cl_exponent)
    else:
        raise ValueError(f"BTER does not support {e.kind!r} events")
    return er, w


def bter_states(cfg: BterConfig, T: int, schedule: EventSchedule, seed: int):
    _check_schedule(schedule, T, cfg.k)
    labels = cfg.labels
    er, w = cfg.er_probs, cfg.cl_weights
    events = [e for e in schedule if e.t <= T]
    out = []
    for idx, (start, end) in enumerate(_segments(schedule, T)):
        if idx > 0:
            er, w = _apply_bter_event(er, w, events[idx - 1], labels, seed, idx - 1, cfg.cl_exponent)
        out.append((start, end, (er, w)))
    return out


def bter_generate(cfg: BterConfig, T: int, schedule: EventSchedule, seed: int):
    """Weighted BTER sequence; same conventions as :func:`sbm_generate`."""
    states = bter_states(cfg, T, schedule, seed)
    model = _PairModel(cfg.n)
    labels = cfg.labels
    pair_ids = np.arange(len(model.iu))
    prob_states = [(start, end, bter_probabilities(cfg.community_sizes, er, w, model.iu, model.ju, labels))
                   for start, end, (er, w) in states]

    def make(t, probs):
        return model.snapshot(t, seed, pair_ids, probs, cfg.trials)

    seq = _lazy_sequence(cfg.n, T, prob_states, make)
    seq.meta.update(model="bter", seed=seed)
    truth = GroundTruth("bter", seed, T, schedule, CommunityAssignment(labels),
                        {"config": cfg.to_dict()})
    return seq, truth


# --------------------------------------------------------------------------- presets


def table1_sbm(seed: int, T: int = DEFAULT_T):
    """SBM preset: 1k nodes, 8 communities, the four table-1 events."""
    schedule = table1_schedules()[0]
    schedule = EventSchedule(tuple(e for e in schedule if e.t <= T))
    return sbm_generate(table1_sbm_config(seed), T, schedule, seed)


def table1_bter(seed: int, T: int = DEFAULT_T):
    """BTER preset: 100 nodes, 5 communities sized 15..25, the four table-1 events."""
    schedule = table1_schedules()[1]
    schedule = EventSchedule(tuple(e for e in schedule if e.t <= T))
    return bter_generate(sample_bter_config(seed), T, schedule, seed)


PRESETS = {("sbm", "table1"): table1_sbm, ("bter", "table1"): table1_bter}
