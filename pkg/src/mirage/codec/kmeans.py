"""Lloyd's k-means with k-means++ seeding, used to initialise codebooks."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..errors import InsufficientDataError
from .vq import Codebook, nearest_codeword


class KMeansResult(NamedTuple):
    centroids: np.ndarray
    labels: np.ndarray
    objective: list  # within-cluster squared error after seeding and after each iteration


def _sq_dist(X, C, labels):
    return ((X - C[labels]) ** 2).sum(axis=1)


def _plusplus(X, K, rng):
    n = len(X)
    centers = [X[rng.integers(n)]]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, K):
        total = d2.sum()
        # total > 0 is guaranteed while fewer than K distinct points are chosen
        i = rng.choice(n, p=d2 / total)
        centers.append(X[i])
        d2 = np.minimum(d2, ((X - X[i]) ** 2).sum(axis=1))
    return np.array(centers)


def kmeans(latents, K: int, seed: int = 0, iters: int = 50) -> KMeansResult:
    X = np.asarray(latents, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if len(np.unique(X, axis=0)) < K:
        raise InsufficientDataError(f"need at least {K} distinct vectors to fit {K} centroids")
    rng = np.random.default_rng(seed)
    C = _plusplus(X, K, rng)
    labels = nearest_codeword(X, C)
    objective = [float(_sq_dist(X, C, labels).sum())]

    for _ in range(iters):
        # re-seed empty clusters from the point farthest from its centroid
        counts = np.bincount(labels, minlength=K)
        for k in np.flatnonzero(counts == 0):
            far = int(np.argmax(_sq_dist(X, C, labels)))
            labels[far] = k
            C[k] = X[far]
        counts = np.bincount(labels, minlength=K)
        sums = np.zeros_like(C)
        np.add.at(sums, labels, X)
        C = sums / counts[:, None]
        objective.append(float(_sq_dist(X, C, labels).sum()))
        new = nearest_codeword(X, C)
        if np.array_equal(new, labels):
            break
        labels = new
    return KMeansResult(C, labels, objective)


def kmeans_codebook(latents, K: int, seed: int = 0, iters: int = 50) -> Codebook:
    return Codebook(kmeans(latents, K, seed, iters).centroids)
