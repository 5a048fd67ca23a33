"""K-means grouping of filter taps in the complex plane.

The result of clustering is a :class:`ClusteredFilter`: ``n_clusters``
complex centroids and a routing map assigning every tap position to one of
them. The routing map is what the hardware uses to steer input samples into
pre-summation accumulators.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .taps import TapSet


@dataclass
class ClusteredFilter:
    centroids: np.ndarray
    routing: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.asarray(self.centroids)
        # object arrays (exact rationals) pass through untouched
        self.centroids = (c if c.dtype == object else c.astype(complex)).ravel()
        self.routing = np.asarray(self.routing, dtype=np.int64).ravel()
        n_c = self.centroids.size
        if n_c < 1:
            raise ValueError("a clustered filter needs at least one centroid")
        if self.routing.size < n_c:
            raise ValueError("more clusters than tap positions")
        if self.routing.min() < 0 or self.routing.max() >= n_c:
            raise ValueError("routing entry out of range")
        if np.unique(self.routing).size != n_c:
            raise ValueError("every cluster must own at least one tap position")

    @property
    def n_clusters(self) -> int:
        return self.centroids.size

    @property
    def source_filter_len(self) -> int:
        return self.routing.size


def _assign(points: np.ndarray, centroids: np.ndarray):
    d2 = np.abs(points[:, None] - centroids[None, :]) ** 2
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(points.size), labels]


def _kmeans_pp(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centroids = [points[rng.integers(points.size)]]
    d2 = np.abs(points - centroids[0]) ** 2
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            # fewer distinct points than clusters: pick any not-yet-chosen position
            idx = rng.integers(points.size)
        else:
            idx = rng.choice(points.size, p=d2 / total)
        centroids.append(points[idx])
        d2 = np.minimum(d2, np.abs(points - points[idx]) ** 2)
    return np.array(centroids, dtype=complex)


def _repair_empty(points, labels, centroids, dist2):
    """Hand each empty cluster the point farthest from its current centroid."""
    k = centroids.size
    counts = np.bincount(labels, minlength=k)
    for c in np.flatnonzero(counts == 0):
        # only take points from clusters that can spare one
        donors = counts[labels] > 1
        cand = np.where(donors, dist2, -1.0)
        idx = int(np.argmax(cand))
        counts[labels[idx]] -= 1
        labels[idx] = c
        counts[c] += 1
        centroids[c] = points[idx]
        dist2[idx] = 0.0
    return labels, centroids


def wcss(points, centroids, labels) -> float:
    """Within-cluster sum of squared distances."""
    points = np.asarray(points, dtype=complex)
    return float(np.sum(np.abs(points - np.asarray(centroids)[labels]) ** 2))


def kmeans_cluster(
    taps,
    n_clusters: int,
    seed: int = 0,
    max_iter: int = 300,
    tol: float = 1e-10,
    return_history: bool = False,
):
    """Lloyd's k-means on the taps viewed as points of the complex plane.

    Parameters
    ----------
    taps : TapSet or array_like of complex
        Filter taps to group.
    n_clusters : int
        Number of centroids, ``1 <= n_clusters <= M``.
    seed : int
        Seed for the k-means++ initialization; equal seeds give equal results.
    max_iter, tol : int, float
        Stop after ``max_iter`` Lloyd steps or once no centroid moves more
        than ``tol``.
    return_history : bool
        Also return the objective after every iteration.

    Returns
    -------
    ClusteredFilter
        Optionally with the list of per-iteration objectives.
    """
    points = taps.taps if isinstance(taps, TapSet) else np.asarray(taps, dtype=complex).ravel()
    M = points.size
    if n_clusters < 1:
        raise ValueError("n_clusters must be >= 1")
    if n_clusters > M:
        raise ValueError(f"n_clusters={n_clusters} exceeds the number of taps {M}")
    rng = np.random.default_rng(seed)

    if n_clusters == M:
        # one cluster per tap position; duplicate taps still get their own slot
        centroids = points.copy()
        labels = np.arange(M)
        history = [0.0]
    else:
        centroids = _kmeans_pp(points, n_clusters, rng)
        labels, dist2 = _assign(points, centroids)
        labels, centroids = _repair_empty(points, labels, centroids, dist2)
        history = [wcss(points, centroids, labels)]
        for _ in range(max_iter):
            counts = np.bincount(labels, minlength=n_clusters)
            sums = np.bincount(labels, weights=points.real, minlength=n_clusters) + 1j * np.bincount(
                labels, weights=points.imag, minlength=n_clusters
            )
            new = sums / counts
            shift = np.max(np.abs(new - centroids))
            centroids = new
            new_labels, dist2 = _assign(points, centroids)
            new_labels, centroids = _repair_empty(points, new_labels, centroids, dist2)
            history.append(wcss(points, centroids, new_labels))
            converged = shift < tol and np.array_equal(new_labels, labels)
            labels = new_labels
            if converged:
                break
        # final centroid update so the centroids are exact cluster means
        counts = np.bincount(labels, minlength=n_clusters)
        centroids = (
            np.bincount(labels, weights=points.real, minlength=n_clusters)
            + 1j * np.bincount(labels, weights=points.imag, minlength=n_clusters)
        ) / counts

    cf = ClusteredFilter(centroids, labels, {"method": "kmeans", "seed": seed})
    if return_history:
        return cf, history
    return cf


def best_of_restarts(taps, n_clusters: int, restarts: int = 10, seed: int = 0, **kw) -> ClusteredFilter:
    """Lowest-objective clustering over several seeds."""
    points = taps.taps if isinstance(taps, TapSet) else np.asarray(taps, dtype=complex)
    best, best_obj = None, np.inf
    for r in range(restarts):
        cf = kmeans_cluster(points, n_clusters, seed=seed + r, **kw)
        obj = wcss(points, cf.centroids, cf.routing)
        if obj < best_obj:
            best, best_obj = cf, obj
    return best


def reconstruct_taps(cf: ClusteredFilter) -> TapSet:
    """Tap vector implied by a clustered filter, ``g[k] = g_C[Q[k]]``."""
    return TapSet(cf.centroids[cf.routing])


def clustering_error(taps, cf: ClusteredFilter) -> dict:
    """Max and RMS magnitude of the per-tap clustering error."""
    g = taps.taps if isinstance(taps, TapSet) else np.asarray(taps, dtype=complex)
    if g.size != cf.source_filter_len:
        raise ValueError(f"tap count {g.size} does not match routing length {cf.source_filter_len}")
    err = np.abs(g - cf.centroids[cf.routing])
    return {"max_abs": float(err.max()), "rms": float(np.sqrt(np.mean(err**2)))}
