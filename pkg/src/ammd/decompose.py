"""Split a posture sequence into continuous maximal linear patches (CMLPs)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .geometry import ConfigError, PostureSequence, _check_k, as_postures


@dataclass(frozen=True)
class Cmlp:
    """A contiguous run of postures, ``start``..``end`` inclusive (0-based)."""

    start: int
    end: int
    postures: np.ndarray
    score: float

    def __len__(self):
        return self.end - self.start + 1


@dataclass
class CmlpSequence:
    patches: list[Cmlp]
    delta: float
    k: int
    source: str = ""

    def __len__(self):
        return len(self.patches)

    def __iter__(self):
        return iter(self.patches)

    @property
    def boundaries(self) -> list[tuple[int, int]]:
        return [(p.start, p.end) for p in self.patches]


def check_delta(delta: float) -> float:
    delta = float(delta)
    if not delta > 1.0 or not np.isfinite(delta):
        raise ConfigError(f"threshold delta must be a finite number > 1, got {delta!r}")
    return delta


def decompose(sequence, delta: float, k: int) -> CmlpSequence:
    """Grow patches one posture at a time and close a patch once its score exceeds ``delta``.

    The posture that pushes the score past ``delta`` stays in the patch it
    closes; the next patch starts empty at the following frame. Whatever
    remains at the end becomes the last patch.
    """
    delta = check_delta(delta)
    k = _check_k(k)
    if isinstance(sequence, PostureSequence):
        X, source = sequence.postures, sequence.name
    else:
        X, source = as_postures(sequence), ""
    bounds = _backend.kernels().decompose_bounds(X, delta, k)
    patches = [Cmlp(s, e, X[s:e + 1], float(score)) for s, e, score in bounds]
    return CmlpSequence(patches, delta, k, source)
