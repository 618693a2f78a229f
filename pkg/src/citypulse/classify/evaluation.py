"""Stratified k-fold cross-validation and leave-one-group-out evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np
from scipy import sparse

from ..errors import EmptyGroup, TooFewExamples, UnknownMode
from .metrics import EvalReport, MeanReport

# trainer(X_train, y_train) -> model with decision_score(X) and threshold
Trainer = Callable[[object, np.ndarray], object]


def _rows(X, idx):
    X = getattr(X, "X", X)
    return X[np.asarray(idx, dtype=np.int64)]


def _rng(seed):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def fold_assignment(y, k: int, seed: int = 0, stratified: bool = True) -> np.ndarray:
    """Fold number per example.

    Stratified: each class is shuffled and dealt round-robin, so every fold
    holds each class to within one example.
    """
    y = np.asarray(y) > 0
    n = y.size
    if k < 2 or n < k:
        raise TooFewExamples(f"{n} examples cannot fill {k} folds")
    rng = _rng(seed)
    folds = np.empty(n, dtype=np.int64)
    if stratified:
        if min(int(y.sum()), int((~y).sum())) < k:
            raise TooFewExamples(f"a class has fewer than {k} examples")
        start = 0
        for cls in (True, False):
            idx = rng.permutation(np.nonzero(y == cls)[0])
            folds[idx] = (np.arange(idx.size) + start) % k
            start = (start + idx.size) % k
    else:
        idx = rng.permutation(n)
        for f, part in enumerate(np.array_split(idx, k)):
            folds[part] = f
    return folds


@dataclass
class CvResult:
    folds: List[EvalReport]
    mean: MeanReport

    def to_dict(self):
        return {"mean": self.mean.to_dict(), "folds": [r.to_dict() for r in self.folds]}


def k_fold_cv(X, y, trainer: Trainer, k: int = 10, seed: int = 0, stratified: bool = True) -> CvResult:
    y = np.where(np.asarray(y) > 0, 1, -1)
    folds = fold_assignment(y, k, seed, stratified)
    reports = []
    for f in range(k):
        test = np.nonzero(folds == f)[0]
        train = np.nonzero(folds != f)[0]
        model = trainer(_rows(X, train), y[train])
        reports.append(EvalReport.from_scores(model.decision_score(_rows(X, test)), y[test], model.threshold))
    return CvResult(reports, MeanReport.of(reports))


@dataclass(frozen=True)
class LogoSplit:
    mode: str
    train_pos: np.ndarray
    train_neg: np.ndarray
    test_pos: np.ndarray
    test_neg: np.ndarray

    def sizes(self) -> Dict[str, int]:
        return {"train_pos": len(self.train_pos), "train_neg": len(self.train_neg),
                "test_pos": len(self.test_pos), "test_neg": len(self.test_neg)}


def plan_logo_splits(positives_by_mode: Mapping[str, Sequence[int]], negatives: Sequence[int],
                     test_negatives: int, seed: int = 0,
                     heldout_negatives: Optional[Sequence[int]] = None,
                     modes: Optional[Sequence[str]] = None) -> List[LogoSplit]:
    """One split per hidden mode, sharing a single test-negative sample.

    With ``heldout_negatives`` the test negatives are drawn from that pool and
    every training negative is kept; otherwise ``test_negatives`` are carved
    out of ``negatives`` and the rest train. A row listed under two modes is
    a positive of both, so it is held out whenever either mode is hidden.
    """
    known = sorted(positives_by_mode)
    modes = known if modes is None else list(modes)
    for m in modes:
        if m not in positives_by_mode:
            raise UnknownMode(m)
    for m in modes:
        if len(positives_by_mode[m]) == 0:
            raise EmptyGroup(f"mode {m!r} has no positives")
    rng = _rng(seed)
    negatives = np.asarray(negatives, dtype=np.int64)
    if heldout_negatives is not None:
        pool = np.asarray(heldout_negatives, dtype=np.int64)
        if test_negatives > pool.size:
            raise TooFewExamples(f"{pool.size} held-out negatives, {test_negatives} requested")
        test_neg = np.sort(rng.choice(pool, size=test_negatives, replace=False))
        train_neg = negatives
    else:
        if test_negatives >= negatives.size:
            raise TooFewExamples(f"{negatives.size} negatives cannot supply {test_negatives} test rows")
        pick = rng.choice(negatives.size, size=test_negatives, replace=False)
        mask = np.zeros(negatives.size, dtype=bool)
        mask[pick] = True
        test_neg = np.sort(negatives[mask])
        train_neg = negatives[~mask]
    splits = []
    for m in modes:
        test_pos = np.unique(np.asarray(positives_by_mode[m], dtype=np.int64))
        others = [np.asarray(positives_by_mode[o], dtype=np.int64) for o in known if o != m]
        pool = np.unique(np.concatenate(others)) if others else np.zeros(0, dtype=np.int64)
        train_pos = np.setdiff1d(pool, test_pos)
        if train_pos.size == 0:
            raise EmptyGroup(f"no training positives left when {m!r} is hidden")
        splits.append(LogoSplit(m, train_pos, train_neg, test_pos, test_neg))
    return splits


@dataclass
class LogoResult:
    per_mode: Dict[str, EvalReport] = field(default_factory=dict)
    sizes: Dict[str, Dict[str, int]] = field(default_factory=dict)
    mean: Optional[MeanReport] = None

    def to_dict(self):
        return {
            "mean": self.mean.to_dict() if self.mean else None,
            "modes": {m: dict(r.to_dict(), sizes=self.sizes[m]) for m, r in self.per_mode.items()},
        }


def leave_one_group_out(X, positives_by_mode, negatives, trainer: Trainer, test_negatives: int = 300,
                        seed: int = 0, heldout_negatives=None, modes=None) -> LogoResult:
    """Train without one mode's positives, test on that mode plus shared negatives."""
    result = LogoResult()
    for s in plan_logo_splits(positives_by_mode, negatives, test_negatives, seed, heldout_negatives, modes):
        train = np.r_[s.train_pos, s.train_neg]
        y_train = np.r_[np.ones(s.train_pos.size, int), -np.ones(s.train_neg.size, int)]
        test = np.r_[s.test_pos, s.test_neg]
        y_test = np.r_[np.ones(s.test_pos.size, int), -np.ones(s.test_neg.size, int)]
        model = trainer(_rows(X, train), y_train)
        result.per_mode[s.mode] = EvalReport.from_scores(model.decision_score(_rows(X, test)), y_test,
                                                         model.threshold)
        result.sizes[s.mode] = s.sizes()
    result.mean = MeanReport.of(list(result.per_mode.values()))
    return result
