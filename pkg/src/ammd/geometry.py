"""Postures, sequences and the geometry of the k-sequential-neighbours graph."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _backend
from ._pykernels import COINCIDENT_EPS


class InputError(ValueError):
    """Malformed data: wrong shapes, non-finite values, empty inputs."""


class ConfigError(ValueError):
    """Invalid parameters (threshold, neighbour count, protocol)."""


def as_postures(postures) -> np.ndarray:
    """Validate and return an (F, D) float array of postures."""
    X = np.asarray(postures, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise InputError(f"expected a non-empty (frames, dims) array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        bad = int(np.argwhere(~np.isfinite(X))[0, 0])
        raise InputError(f"non-finite coordinate in posture {bad}")
    return X


@dataclass
class PostureSequence:
    """Temporally ordered postures (rows of ``postures``) plus metadata."""

    postures: np.ndarray
    label: Optional[str] = None
    subject: Optional[str] = None
    name: str = ""
    environment: Optional[str] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.postures = as_postures(self.postures)

    def __len__(self):
        return self.postures.shape[0]

    @property
    def dims(self) -> int:
        return self.postures.shape[1]

    def with_postures(self, postures) -> "PostureSequence":
        return PostureSequence(postures, self.label, self.subject, self.name,
                               self.environment, dict(self.meta))


def _check_k(k: int) -> int:
    if int(k) != k or k < 1:
        raise ConfigError(f"neighbour count k must be an integer >= 1, got {k!r}")
    return int(k)


def euclidean_distance(p, q) -> float:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1:
        raise InputError(f"posture dimension mismatch: {p.shape} vs {q.shape}")
    return float(np.sqrt(((p - q) ** 2).sum()))


def sequential_graph_edges(patch_length: int, k: int) -> list[tuple[int, int]]:
    """Undirected edges (t, s), t < s, with 0 < s - t <= k; 1-based indices."""
    k = _check_k(k)
    if patch_length < 1:
        raise InputError("patch_length must be >= 1")
    return [(t, s)
            for t in range(1, patch_length + 1)
            for s in range(t + 1, min(patch_length, t + k) + 1)]


@dataclass
class PatchGeometry:
    euclidean: np.ndarray
    geodesic: np.ndarray
    ratio: np.ndarray


def ratio_matrix(euclidean: np.ndarray, geodesic: np.ndarray) -> np.ndarray:
    """Geodesic / Euclidean, with 1 on the diagonal and for coincident postures."""
    r = np.ones_like(euclidean)
    mask = euclidean >= COINCIDENT_EPS
    r[mask] = np.maximum(geodesic[mask] / euclidean[mask], 1.0)
    return r


def patch_geometry(patch, k: int) -> PatchGeometry:
    X = as_postures(patch)
    E, G = _backend.kernels().sequential_apsp(X, _check_k(k))
    return PatchGeometry(E, G, ratio_matrix(E, G))


def geodesic_distances(patch, k: int) -> np.ndarray:
    """All-pairs shortest paths over the k-sequential-neighbours graph."""
    X = as_postures(patch)
    return _backend.kernels().sequential_apsp(X, _check_k(k))[1]


def nonlinearity_score(patch, k: int) -> float:
    """Mean geodesic/Euclidean ratio over all ordered pairs, diagonal included.

    Always >= 1; exactly 1 for a single posture or a straight patch.
    """
    X = as_postures(patch)
    return float(_backend.kernels().nonlinearity(X, _check_k(k)))
