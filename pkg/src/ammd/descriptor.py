"""Patch descriptors: major posture (mean) and main direction (top principal axis)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decompose import Cmlp, CmlpSequence
from .geometry import InputError, as_postures

RANK_EPS = 1e-12
TIE_GAP = 1e-6
CONV_TOL = 1e-12
MAX_ITER = 10_000
SIGN_EPS = 1e-12


@dataclass(frozen=True)
class SnippetDescriptor:
    """Mean posture and unit main direction of one patch.

    ``direction`` is the zero vector when the patch has no spread (a single
    posture or repeated identical postures). ``tie`` is only filled in when
    diagnostics were requested; None means "not checked".
    """

    mean: np.ndarray
    direction: np.ndarray
    frames: int
    tie: bool | None = None

    @property
    def flat(self) -> bool:
        return not np.any(self.direction)

    def to_dict(self) -> dict:
        d = {"frames": self.frames, "mean": self.mean.tolist(),
             "direction": self.direction.tolist(), "flat": self.flat}
        if self.tie is not None:
            d["tie"] = self.tie
        return d


def _postures(cmlp) -> np.ndarray:
    if isinstance(cmlp, Cmlp):
        return as_postures(cmlp.postures)
    return as_postures(cmlp)


def major_posture(cmlp) -> np.ndarray:
    return _postures(cmlp).mean(axis=0)


def covariance(cmlp) -> np.ndarray:
    """Biased (1/F) scatter matrix of the patch postures."""
    X = _postures(cmlp)
    Z = X - X.mean(axis=0)
    C = Z.T @ Z / X.shape[0]
    return (C + C.T) * 0.5


def canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flip ``v`` so its first component with |v_i| > 1e-12 is positive."""
    idx = np.flatnonzero(np.abs(v) > SIGN_EPS)
    if idx.size and v[idx[0]] < 0:
        return -v
    return v


def _top_eigenpair(S: np.ndarray):
    """Largest eigenvalue and unit eigenvector of a symmetric PSD matrix.

    Power iteration applied to the repeated squares S, S^2, S^4, ... (each
    rescaled to unit trace) until successive iterates agree to CONV_TOL,
    then a few plain power steps on S. The limit is the spectral projector
    of the top eigenspace; applying it to the all-ones start vector (or to
    e1, e2, ... if that start is orthogonal to the top eigenspace) gives the
    eigenvector. Returns (0.0, None) for a matrix with zero trace.
    """
    D = S.shape[0]
    t = float(np.trace(S))
    if not t > 0:
        return 0.0, None
    M = S / t
    it = 0
    while it < MAX_ITER:
        M2 = M @ M
        M2 = (M2 + M2.T) * 0.5
        tr = float(np.trace(M2))
        if not tr > 0:
            break
        M2 /= tr
        it += 1
        done = np.linalg.norm(M2 - M) < CONV_TOL
        M = M2
        if done:
            break

    x = None
    starts = [np.full(D, 1.0 / np.sqrt(D))] + [np.eye(D)[i] for i in range(D)]
    for s in starts:
        y = M @ s
        ny = np.linalg.norm(y)
        if ny >= CONV_TOL:
            x = y / ny
            break
    if x is None:
        return 0.0, None

    while it < MAX_ITER:
        y = S @ x
        ny = np.linalg.norm(y)
        if ny == 0:
            break
        y /= ny
        it += 1
        done = np.linalg.norm(y - x) < CONV_TOL
        x = y
        if done:
            break
    return float(x @ S @ x), x


def principal_direction(cov, *, diagnostics: bool = False):
    """Unit eigenvector of the largest eigenvalue of ``cov``, sign-canonical.

    Returns the zero vector when the largest eigenvalue is below
    1e-12 * max(1, trace). With ``diagnostics=True`` returns
    ``(direction, info)`` where ``info`` holds the top two eigenvalues and a
    ``tie`` flag (relative gap below 1e-6).
    """
    S = np.asarray(cov, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] == 0:
        raise InputError(f"covariance must be a non-empty square matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise InputError("covariance has non-finite entries")
    scale = max(1.0, float(np.abs(S).max()))
    if np.abs(S - S.T).max() > 1e-12 * scale:
        raise InputError("covariance matrix is not symmetric")
    S = (S + S.T) * 0.5
    D = S.shape[0]
    trace = float(np.trace(S))
    eps = RANK_EPS * max(1.0, trace)

    lam, v = _top_eigenpair(S)
    if v is None or lam < eps:
        out = np.zeros(D)
        info = {"eigenvalue": max(lam, 0.0), "second": 0.0, "tie": False, "flat": True}
        return (out, info) if diagnostics else out
    v = canonical_sign(v)
    if not diagnostics:
        return v
    lam2, _ = _top_eigenpair(S - lam * np.outer(v, v))
    lam2 = max(lam2, 0.0)
    info = {"eigenvalue": lam, "second": lam2,
            "tie": (lam - lam2) < TIE_GAP * lam, "flat": False}
    return v, info


def describe(cmlp, *, diagnostics: bool = False) -> SnippetDescriptor:
    X = _postures(cmlp)
    mean = major_posture(X)
    if diagnostics:
        direction, info = principal_direction(covariance(X), diagnostics=True)
        return SnippetDescriptor(mean, direction, X.shape[0], bool(info["tie"]))
    return SnippetDescriptor(mean, principal_direction(covariance(X)), X.shape[0])


def describe_all(patches: CmlpSequence | list, *, diagnostics: bool = False) -> list[SnippetDescriptor]:
    return [describe(p, diagnostics=diagnostics) for p in patches]
