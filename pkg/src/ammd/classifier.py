"""Nearest-manifold classification over a gallery of labelled reference sequences."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _backend
from .decompose import check_delta, decompose
from .descriptor import describe_all
from .distance import (COMBINED_AMMD, DescriptorSequence, Feature, MeasureKind,
                       match_matrix)
from .geometry import InputError, PostureSequence, _check_k


def describe_sequence(seq: PostureSequence, delta: float, k: int) -> DescriptorSequence:
    """Decompose ``seq`` and describe every patch."""
    patches = decompose(seq, delta, k)
    return DescriptorSequence(describe_all(patches), seq.name, seq.label, seq.subject)


@dataclass
class ReferenceGallery:
    """Described training sequences grouped by class label."""

    entries: dict[str, list[DescriptorSequence]]
    delta: float
    k: int
    measure: MeasureKind = COMBINED_AMMD

    def __post_init__(self):
        if not self.entries or any(not v for v in self.entries.values()):
            raise InputError("gallery needs at least one class with at least one sequence")

    @property
    def labels(self) -> list[str]:
        return sorted(self.entries)

    def __len__(self):
        return sum(len(v) for v in self.entries.values())

    @classmethod
    def from_descriptors(cls, seqs: Iterable[DescriptorSequence], delta: float, k: int,
                         measure: MeasureKind = COMBINED_AMMD) -> "ReferenceGallery":
        entries: dict[str, list[DescriptorSequence]] = defaultdict(list)
        for s in seqs:
            if s.label is None:
                raise InputError(f"training sequence {s.source!r} has no label")
            entries[str(s.label)].append(s)
        return cls(dict(entries), delta, k, measure)


def fit(training: Sequence[PostureSequence], delta: float, k: int,
        measure: MeasureKind = COMBINED_AMMD) -> ReferenceGallery:
    delta = check_delta(delta)
    k = _check_k(k)
    if not training:
        raise InputError("no training sequences")
    for s in training:
        if s.label is None:
            raise InputError(f"training sequence {s.name!r} has no label")
    described = [describe_sequence(s, delta, k) for s in training]
    return ReferenceGallery.from_descriptors(described, delta, k, measure)


@dataclass
class Prediction:
    label: str
    scores: list[tuple[str, float]]  # (class, distance), classes in sorted order


def _local(P: np.ndarray, Dd: np.ndarray, feature: Feature) -> np.ndarray:
    if feature is Feature.MPD:
        return P
    if feature is Feature.MDD:
        return Dd
    return np.hypot(P, Dd)


def class_scores(gallery: ReferenceGallery, test: DescriptorSequence,
                 measures: Sequence[MeasureKind]) -> dict[MeasureKind, dict[str, float]]:
    """Per-class distance (min over the class's references) for several measures at once."""
    kern = _backend.kernels()
    need_means = any(m.feature is not Feature.MDD for m in measures)
    out = {m: {} for m in measures}
    for label in gallery.labels:
        best = {m: np.inf for m in measures}
        for ref in gallery.entries[label]:
            if need_means:
                Ur, Ut = ref.unit_means, test.unit_means
            else:
                Ur, Ut = np.zeros((len(ref), 1)), np.zeros((len(test), 1))
            P, Dd = kern.sine_matrices(Ur, ref.directions, ref.flat, Ut, test.directions, test.flat)
            local = {}
            for m in measures:
                if m.feature not in local:
                    local[m.feature] = _local(P, Dd, m.feature)
                d = match_matrix(local[m.feature], m.matcher)
                if d < best[m]:
                    best[m] = d
        for m in measures:
            out[m][label] = float(best[m])
    return out


def argmin_label(scores: dict[str, float]) -> str:
    # sorted labels + strict '<' gives the lowest label on ties
    best_label, best = None, np.inf
    for label in sorted(scores):
        if best_label is None or scores[label] < best:
            best_label, best = label, scores[label]
    return best_label


def _prepare(gallery: ReferenceGallery, test) -> DescriptorSequence:
    if isinstance(test, DescriptorSequence):
        return test
    if isinstance(test, PostureSequence):
        return describe_sequence(test, gallery.delta, gallery.k)
    raise InputError(f"cannot classify object of type {type(test).__name__}")


def predict(gallery: ReferenceGallery, test, measure: Optional[MeasureKind] = None) -> Prediction:
    measure = measure or gallery.measure
    scores = class_scores(gallery, _prepare(gallery, test), [measure])[measure]
    return Prediction(argmin_label(scores), [(c, scores[c]) for c in sorted(scores)])


@dataclass
class EvaluationReport:
    labels: list[str]
    confusion: np.ndarray  # rows = true label, columns = predicted label
    predictions: list[dict] = field(default_factory=list)
    measure: str = str(COMBINED_AMMD)

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.confusion)) / self.total

    @property
    def recall(self) -> dict[str, Optional[float]]:
        rows = self.confusion.sum(axis=1)
        return {c: (float(self.confusion[i, i]) / rows[i] if rows[i] else None)
                for i, c in enumerate(self.labels)}

    def to_dict(self) -> dict:
        return {
            "measure": self.measure,
            "accuracy": self.accuracy,
            "total": self.total,
            "labels": self.labels,
            "confusion": self.confusion.tolist(),
            "recall": self.recall,
            "predictions": self.predictions,
        }


def report_from_predictions(truth: Sequence[str], predicted: Sequence[str],
                            names: Sequence[str] = (), measure: str = str(COMBINED_AMMD),
                            labels: Optional[Sequence[str]] = None) -> EvaluationReport:
    if not truth:
        raise InputError("no test sequences to evaluate")
    labels = sorted(set(labels or ()) | set(truth) | set(predicted))
    index = {c: i for i, c in enumerate(labels)}
    cm = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, p in zip(truth, predicted):
        cm[index[t], index[p]] += 1
    names = list(names) or [""] * len(truth)
    preds = [{"name": n, "true": t, "predicted": p} for n, t, p in zip(names, truth, predicted)]
    return EvaluationReport(labels, cm, preds, measure)


def evaluate(gallery: ReferenceGallery, tests: Sequence, measure: Optional[MeasureKind] = None) -> EvaluationReport:
    measure = measure or gallery.measure
    if not tests:
        raise InputError("no test sequences to evaluate")
    truth, predicted, names = [], [], []
    for t in tests:
        d = _prepare(gallery, t)
        if d.label is None:
            raise InputError(f"test sequence {d.source!r} has no label")
        truth.append(str(d.label))
        predicted.append(predict(gallery, d, measure).label)
        names.append(d.source)
    return report_from_predictions(truth, predicted, names, str(measure), gallery.labels)
