"""Bootstrap percentile thresholds and change extraction."""

from __future__ import annotations

import numpy as np

from .detectors import ScoreSeries


def bootstrap_threshold(scores, level: float = 0.95, n_resamples: int = 1000, seed=0) -> float:
    """Mean ``level``-percentile over bootstrap resamples of a score sequence.

    Each of the ``n_resamples`` resamples draws ``len(scores)`` values with
    replacement; its percentile uses linear interpolation between order
    statistics.  The result always lies in ``[min(scores), max(scores)]``.

    Args:
        scores: at least two finite, non-negative outlier scores.
        level: percentile level in (0, 1).
        n_resamples: number of bootstrap resamples.
        seed: anything accepted by :func:`numpy.random.default_rng`.
    """
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    if scores.size < 2:
        raise ValueError("bootstrap threshold needs at least two scores")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    if n_resamples < 1:
        raise ValueError("n_resamples must be >= 1")
    lo, hi = scores.min(), scores.max()
    if lo == hi:
        return float(lo)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, scores.size, size=(n_resamples, scores.size))
    pct = np.percentile(scores[idx], 100.0 * level, axis=1, method="linear")
    return float(np.clip(pct.mean(), lo, hi))


def extract_changes(series: ScoreSeries) -> tuple[int, ...]:
    """Times whose score strictly exceeds the series threshold."""
    if np.isnan(series.threshold):
        raise ValueError(f"series {series.scope!r} has no threshold")
    return tuple(series.times[series.scores > series.threshold].tolist())
