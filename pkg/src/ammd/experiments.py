"""Protocol runs and parameter sweeps shared by the CLI and the acceptance tests."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .classifier import ReferenceGallery, argmin_label, class_scores, describe_sequence, report_from_predictions
from .distance import DescriptorSequence, MeasureKind
from .dataset import Split
from .geometry import ConfigError, PostureSequence

log = logging.getLogger(__name__)


def describe_dataset(seqs: Sequence[PostureSequence], delta: float, k: int) -> list[DescriptorSequence]:
    return [describe_sequence(s, delta, k) for s in seqs]


@dataclass
class ProtocolResult:
    measure: MeasureKind
    reports: list = field(default_factory=list)
    tags: list = field(default_factory=list)

    @property
    def accuracies(self) -> list[float]:
        return [r.accuracy for r in self.reports]

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.accuracies))

    def to_dict(self) -> dict:
        return {
            "measure": str(self.measure),
            "mean_accuracy": self.mean_accuracy,
            "splits": [dict(tag=t, **r.to_dict()) for t, r in zip(self.tags, self.reports)],
        }


def run_splits(described: Sequence[DescriptorSequence], splits: Sequence[Split],
               measures: Sequence[MeasureKind], delta: float, k: int) -> dict[MeasureKind, ProtocolResult]:
    """Evaluate every split for several measures, sharing the patch-distance work."""
    if not splits:
        raise ConfigError("no splits to evaluate")
    results = {m: ProtocolResult(m) for m in measures}
    for split in splits:
        gallery = ReferenceGallery.from_descriptors([described[i] for i in split.train], delta, k)
        truth, names = [], []
        predicted = {m: [] for m in measures}
        for i in split.test:
            test = described[i]
            scores = class_scores(gallery, test, measures)
            truth.append(str(test.label))
            names.append(test.source)
            for m in measures:
                predicted[m].append(argmin_label(scores[m]))
        for m in measures:
            rep = report_from_predictions(truth, predicted[m], names, str(m), gallery.labels)
            results[m].reports.append(rep)
            results[m].tags.append(split.tag)
        log.debug("split %s done", split.tag)
    return results


def sweep(seqs: Sequence[PostureSequence], splits: Sequence[Split], deltas: Sequence[float],
          ks: Sequence[int], measures: Sequence[MeasureKind]) -> list[dict]:
    """Mean accuracy for every (delta, k, measure) grid point."""
    rows = []
    for k in ks:
        for delta in deltas:
            described = describe_dataset(seqs, delta, k)
            res = run_splits(described, splits, measures, delta, k)
            for m in measures:
                rows.append({"delta": float(delta), "k": int(k), "measure": str(m),
                             "mean_accuracy": res[m].mean_accuracy, "splits": len(splits)})
            log.info("k=%d delta=%g: %s", k, delta,
                     ", ".join(f"{m}={res[m].mean_accuracy:.3f}" for m in measures))
    return rows


def spread_by_measure(rows: Sequence[dict]) -> dict[str, float]:
    """Max minus min mean accuracy per measure over a sweep."""
    acc: dict[str, list[float]] = {}
    for r in rows:
        acc.setdefault(r["measure"], []).append(r["mean_accuracy"])
    return {m: max(v) - min(v) for m, v in acc.items()}
