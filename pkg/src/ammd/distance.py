"""Distances between patch descriptors and between whole descriptor sequences."""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _backend
from .descriptor import SnippetDescriptor
from .geometry import ConfigError, InputError

ZERO_EPS = 1e-12


class DegenerateInputError(InputError):
    """A mean posture with (near) zero norm: its angle to anything is undefined."""


class Feature(enum.Enum):
    MPD = "mpd"
    MDD = "mdd"
    COMBINED = "combined"


class Matcher(enum.Enum):
    AMMD = "ammd"
    EQUAL = "equal"
    CLOSEST = "closest"
    DTW = "dtw"


_MEASURE_RE = re.compile(r"^(mpd|mdd|combined)[-+:x_/]?(ammd|equal|closest|dtw)$")


@dataclass(frozen=True)
class MeasureKind:
    feature: Feature = Feature.COMBINED
    matcher: Matcher = Matcher.AMMD

    @classmethod
    def parse(cls, text: str) -> "MeasureKind":
        """Parse ``"combined-ammd"``, ``"mpd:dtw"``, ``"mddxclosest"`` and similar."""
        m = _MEASURE_RE.match(text.strip().lower())
        if not m:
            raise ConfigError(
                f"bad measure {text!r}; expected {{mpd|mdd|combined}}-{{ammd|equal|closest|dtw}}")
        return cls(Feature(m.group(1)), Matcher(m.group(2)))

    def __str__(self):
        return f"{self.feature.value}-{self.matcher.value}"


COMBINED_AMMD = MeasureKind()


def _unit(x: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(x)
    if not n > ZERO_EPS:
        raise DegenerateInputError(f"mean posture has norm {n:.3g}; posture angle undefined")
    return x / n


@dataclass
class DescriptorSequence:
    """Ordered patch descriptors of one activity sequence."""

    descriptors: list[SnippetDescriptor]
    source: str = ""
    label: Optional[str] = None
    subject: Optional[str] = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.descriptors = list(self.descriptors)
        if not self.descriptors:
            raise InputError("descriptor sequence is empty")

    def __len__(self):
        return len(self.descriptors)

    def __getitem__(self, i):
        return self.descriptors[i]

    @property
    def unit_means(self) -> np.ndarray:
        if "U" not in self._cache:
            self._cache["U"] = np.array([_unit(d.mean) for d in self.descriptors])
        return self._cache["U"]

    @property
    def directions(self) -> np.ndarray:
        if "V" not in self._cache:
            self._cache["V"] = np.array([d.direction for d in self.descriptors], dtype=np.float64)
        return self._cache["V"]

    @property
    def flat(self) -> np.ndarray:
        if "flat" not in self._cache:
            self._cache["flat"] = np.array([d.flat for d in self.descriptors])
        return self._cache["flat"]

    def reversed(self) -> "DescriptorSequence":
        return DescriptorSequence(self.descriptors[::-1], self.source, self.label, self.subject)


def _sine(a: np.ndarray, b: np.ndarray) -> float:
    # |a-b| |a+b| / 2 == sqrt(1 - cos^2) for unit a, b, without cancellation
    s = 0.5 * float(np.linalg.norm(a - b) * np.linalg.norm(a + b))
    return min(s, 1.0)


def mpd(a: SnippetDescriptor, b: SnippetDescriptor) -> float:
    """Sine of the angle between the two mean postures."""
    return _sine(_unit(a.mean), _unit(b.mean))


def mdd(a: SnippetDescriptor, b: SnippetDescriptor) -> float:
    """Sine of the angle between the two main directions; 0 if either is flat."""
    if a.flat or b.flat:
        return 0.0
    return _sine(a.direction / np.linalg.norm(a.direction), b.direction / np.linalg.norm(b.direction))


def cmlp_distance(a: SnippetDescriptor, b: SnippetDescriptor) -> float:
    return float(np.hypot(mpd(a, b), mdd(a, b)))


def _as_seq(x) -> DescriptorSequence:
    if isinstance(x, DescriptorSequence):
        return x
    return DescriptorSequence(list(x))


def local_matrix(reference, test, feature: Feature = Feature.COMBINED) -> np.ndarray:
    """Patch-to-patch distances, rows = reference patches, columns = test patches."""
    R, T = _as_seq(reference), _as_seq(test)
    if feature is Feature.MDD:
        # the posture part is never used; avoid demanding non-degenerate means
        Ur = np.zeros((len(R), 1))
        Ut = np.zeros((len(T), 1))
    else:
        Ur, Ut = R.unit_means, T.unit_means
    P, Dd = _backend.kernels().sine_matrices(Ur, R.directions, R.flat, Ut, T.directions, T.flat)
    if feature is Feature.MPD:
        return P
    if feature is Feature.MDD:
        return Dd
    return np.hypot(P, Dd)


def ammd(reference, test, feature: Feature = Feature.COMBINED) -> float:
    """Sum over adjacent test patch pairs of the closest adjacent reference pair.

    Not symmetric. A one-patch test matches its single patch against every
    reference patch; a one-patch reference is matched as if duplicated.
    """
    return float(_backend.kernels().ammd_from_matrix(local_matrix(reference, test, feature)))


def mmd_equal_weight(reference, test, feature: Feature = Feature.COMBINED) -> float:
    """Mean of all m*n patch distances."""
    return float(local_matrix(reference, test, feature).mean())


def mmd_closest_pair(reference, test, feature: Feature = Feature.COMBINED) -> float:
    return float(local_matrix(reference, test, feature).min())


def dtw_distance(reference, test, feature: Feature = Feature.COMBINED) -> float:
    """Unconstrained DTW cost (sum of local distances on the best monotone path)."""
    return float(_backend.kernels().dtw_from_matrix(local_matrix(reference, test, feature)))


_MATCHERS = {
    Matcher.AMMD: ammd,
    Matcher.EQUAL: mmd_equal_weight,
    Matcher.CLOSEST: mmd_closest_pair,
    Matcher.DTW: dtw_distance,
}


def manifold_distance(reference, test, measure: MeasureKind = COMBINED_AMMD) -> float:
    return _MATCHERS[measure.matcher](reference, test, measure.feature)


def match_matrix(C: np.ndarray, matcher: Matcher) -> float:
    """Apply a sequence matcher to a precomputed local distance matrix."""
    k = _backend.kernels()
    if matcher is Matcher.AMMD:
        return float(k.ammd_from_matrix(C))
    if matcher is Matcher.DTW:
        return float(k.dtw_from_matrix(C))
    if matcher is Matcher.EQUAL:
        return float(C.mean())
    return float(C.min())


def all_measures(matchers: Sequence[Matcher] = tuple(Matcher)) -> list[MeasureKind]:
    return [MeasureKind(f, m) for m in matchers for f in Feature]
