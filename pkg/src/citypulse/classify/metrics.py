"""Confusion counts, precision/recall/F1, ROC points and AUC."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import List, Sequence, Tuple

import numpy as np


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @classmethod
    def from_labels(cls, y_true, y_pred) -> "ConfusionCounts":
        """Counts for the positive class; labels are +1 / -1 (or 1 / 0)."""
        t = np.asarray(y_true) > 0
        p = np.asarray(y_pred) > 0
        return cls(int((t & p).sum()), int((~t & p).sum()), int((t & ~p).sum()), int((~t & ~p).sum()))


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float
    degenerate: Tuple[str, ...] = ()


def metrics(counts: ConfusionCounts) -> Metrics:
    """Precision tp/(tp+fp), recall tp/(tp+fn), F1 their harmonic mean.

    A 0/0 is reported as 0 and named in ``degenerate``.
    """
    flags = []
    if counts.tp + counts.fp:
        p = counts.tp / (counts.tp + counts.fp)
    else:
        p = 0.0
        flags.append("precision")
    if counts.tp + counts.fn:
        r = counts.tp / (counts.tp + counts.fn)
    else:
        r = 0.0
        flags.append("recall")
    if p + r:
        f1 = 2 * p * r / (p + r)
    else:
        f1 = 0.0
        flags.append("f1")
    return Metrics(p, r, f1, tuple(flags))


def f1_from(precision: float, recall: float) -> float:
    return 2 * precision * recall / (precision + recall) if precision + recall else 0.0


def roc_auc(scores: Sequence[float], labels: Sequence[int]):
    """ROC points ``[(fpr, tpr), ...]`` from (0, 0) to (1, 1) and trapezoidal AUC.

    One point per distinct score, so tied scores form a single diagonal
    segment and count one half in the area, as in the rank statistic.
    Returns ``nan`` for the AUC when one class is missing.
    """
    s = np.asarray(scores, dtype=np.float64)
    pos = np.asarray(labels) > 0
    n_pos = int(pos.sum())
    n_neg = int(pos.size - n_pos)
    if s.size == 0:
        return [(0.0, 0.0), (1.0, 1.0)], float("nan")
    order = np.argsort(-s, kind="mergesort")
    s, pos = s[order], pos[order]
    tps = np.cumsum(pos)
    fps = np.cumsum(~pos)
    last = np.r_[np.nonzero(np.diff(s))[0], s.size - 1]
    tp = np.r_[0, tps[last]].astype(np.float64)
    fp = np.r_[0, fps[last]].astype(np.float64)
    tpr = tp / n_pos if n_pos else np.zeros_like(tp)
    fpr = fp / n_neg if n_neg else np.zeros_like(fp)
    points = list(zip(fpr.tolist(), tpr.tolist()))
    if not (n_pos and n_neg):
        return points, float("nan")
    auc = float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1]) / 2.0))
    return points, auc


def trapezoid_area(points) -> float:
    pts = np.asarray(points, dtype=np.float64)
    x, y = pts[:, 0], pts[:, 1]
    return float(np.sum((x[1:] - x[:-1]) * (y[1:] + y[:-1]) / 2.0))


@dataclass
class EvalReport:
    counts: ConfusionCounts
    precision: float
    recall: float
    f1: float
    roc: List[Tuple[float, float]] = field(default_factory=list)
    auc: float = float("nan")
    degenerate: Tuple[str, ...] = ()

    @classmethod
    def from_scores(cls, scores, labels, threshold: float) -> "EvalReport":
        scores = np.asarray(scores, dtype=np.float64)
        pred = np.where(scores > threshold, 1, -1)
        counts = ConfusionCounts.from_labels(labels, pred)
        m = metrics(counts)
        roc, auc = roc_auc(scores, labels)
        return cls(counts, m.precision, m.recall, m.f1, roc, auc, m.degenerate)

    def to_dict(self) -> dict:
        return {
            "counts": asdict(self.counts),
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "auc": None if np.isnan(self.auc) else self.auc,
            "roc": [list(p) for p in self.roc],
            "degenerate": list(self.degenerate),
        }


@dataclass
class MeanReport:
    precision: float
    recall: float
    f1: float
    auc: float
    n: int

    @classmethod
    def of(cls, reports: Sequence[EvalReport]) -> "MeanReport":
        aucs = [r.auc for r in reports if not np.isnan(r.auc)]
        return cls(
            float(np.mean([r.precision for r in reports])),
            float(np.mean([r.recall for r in reports])),
            float(np.mean([r.f1 for r in reports])),
            float(np.mean(aucs)) if aucs else float("nan"),
            len(reports),
        )

    def to_dict(self):
        d = asdict(self)
        if np.isnan(self.auc):
            d["auc"] = None
        return d
