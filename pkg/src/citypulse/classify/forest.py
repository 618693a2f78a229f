"""Random forest of gini CART trees with bootstrap samples and out-of-bag error."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np
from numba import njit

from ..errors import ArtifactError, SingleClassTraining

MAGIC = "CPRF1"
VERSION = 1


@njit(cache=True)
def _best_split(X, pos, rows, features, min_leaf):
    """Lowest weighted gini over every (feature, midpoint) candidate.

    Ties keep the first candidate seen: features in the given order, then
    ascending thresholds. Returns (feature, threshold, impurity); feature -1
    means no admissible split.
    """
    n = rows.shape[0]
    best_f = -1
    best_t = 0.0
    best_g = np.inf
    vals = np.empty(n)
    lab = np.empty(n)
    total_pos = 0.0
    for i in range(n):
        total_pos += pos[rows[i]]
    for f in features:
        for i in range(n):
            vals[i] = X[rows[i], f]
        order = np.argsort(vals, kind="mergesort")
        for i in range(n):
            lab[i] = pos[rows[order[i]]]
        left_pos = 0.0
        for i in range(n - 1):
            left_pos += lab[i]
            a = vals[order[i]]
            b = vals[order[i + 1]]
            if a == b:
                continue
            nl = i + 1
            nr = n - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            pl = left_pos / nl
            pr = (total_pos - left_pos) / nr
            g = (nl * 2.0 * pl * (1.0 - pl) + nr * 2.0 * pr * (1.0 - pr)) / n
            if g < best_g - 1e-12:
                best_g = g
                best_f = f
                best_t = 0.5 * (a + b)
    return best_f, best_t, best_g


def gini(pos_fraction: float) -> float:
    return 2.0 * pos_fraction * (1.0 - pos_fraction)


def best_split(X, y, features=None, min_leaf: int = 1):
    """Public wrapper over the split search; ``y`` in {+1,-1} or {1,0}."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    pos = (np.asarray(y) > 0).astype(np.float64)
    feats = np.arange(X.shape[1], dtype=np.int64) if features is None else np.asarray(features, dtype=np.int64)
    return _best_split(X, pos, np.arange(X.shape[0], dtype=np.int64), feats, min_leaf)


@dataclass
class Tree:
    feature: List[int] = field(default_factory=list)
    threshold: List[float] = field(default_factory=list)
    left: List[int] = field(default_factory=list)
    right: List[int] = field(default_factory=list)
    value: List[float] = field(default_factory=list)  # positive fraction at the node

    def vote(self, X) -> np.ndarray:
        """Class vote (1 or 0) of the leaf each row lands in."""
        X = np.asarray(X, dtype=np.float64)
        node = np.zeros(X.shape[0], dtype=np.int64)
        feat = np.asarray(self.feature)
        thr = np.asarray(self.threshold)
        left = np.asarray(self.left)
        right = np.asarray(self.right)
        active = feat[node] >= 0
        while active.any():
            idx = np.nonzero(active)[0]
            n = node[idx]
            go_left = X[idx, feat[n]] <= thr[n]
            node[idx] = np.where(go_left, left[n], right[n])
            active = feat[node] >= 0
        return (np.asarray(self.value)[node] > 0.5).astype(np.int64)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)


@dataclass
class ForestConfig:
    n_trees: int = 100
    max_features: Optional[int] = None  # None means round(sqrt(arity))
    max_depth: Optional[int] = None
    min_leaf: int = 1
    seed: int = 0


def _grow(X, pos, rows, rng, m, cfg: ForestConfig) -> Tree:
    tree = Tree()
    stack = [(rows, 0, -1, False)]
    while stack:
        rows, depth, parent, is_right = stack.pop()
        nid = tree.n_nodes
        frac = float(pos[rows].mean())
        tree.feature.append(-1)
        tree.threshold.append(0.0)
        tree.left.append(-1)
        tree.right.append(-1)
        tree.value.append(frac)
        if parent >= 0:
            if is_right:
                tree.right[parent] = nid
            else:
                tree.left[parent] = nid
        if frac in (0.0, 1.0) or rows.size < 2 * cfg.min_leaf:
            continue
        if cfg.max_depth is not None and depth >= cfg.max_depth:
            continue
        feats = np.sort(rng.choice(X.shape[1], size=m, replace=False)).astype(np.int64)
        f, t, _ = _best_split(X, pos, rows, feats, cfg.min_leaf)
        if f < 0:
            continue
        tree.feature[nid] = int(f)
        tree.threshold[nid] = float(t)
        mask = X[rows, f] <= t
        stack.append((rows[~mask], depth + 1, nid, True))
        stack.append((rows[mask], depth + 1, nid, False))
    return tree


@dataclass
class RandomForest:
    config: ForestConfig
    trees: List[Tree]
    arity: int
    oob_error: float = float("nan")
    threshold: float = 0.5
    blocks: tuple = ()

    def decision_score(self, X) -> np.ndarray:
        """Fraction of trees voting positive."""
        X = _dense(X)
        if X.shape[1] != self.arity:
            raise ValueError(f"expected {self.arity} features, got {X.shape[1]}")
        votes = np.zeros(X.shape[0])
        for t in self.trees:
            votes += t.vote(X)
        return votes / len(self.trees)

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision_score(X) > self.threshold, 1, -1)


def _dense(X) -> np.ndarray:
    X = getattr(X, "X", X)
    if hasattr(X, "toarray"):
        X = X.toarray()
    return np.ascontiguousarray(X, dtype=np.float64)


def train_forest(X, y, config: ForestConfig = None, blocks=()) -> RandomForest:
    """Tree ``i`` draws its bootstrap and feature subsets from seed ``config.seed + i``."""
    config = config or ForestConfig()
    X = _dense(X)
    pos = (np.asarray(y) > 0).astype(np.float64)
    if pos.size == 0 or pos.min() == pos.max():
        raise SingleClassTraining("training data must contain both classes")
    n, arity = X.shape
    m = config.max_features or max(1, int(round(math.sqrt(arity))))
    m = min(m, arity)
    trees = []
    oob_votes = np.zeros(n)
    oob_counts = np.zeros(n)
    for i in range(config.n_trees):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(config.seed + i)))
        rows = np.sort(rng.integers(0, n, size=n))
        tree = _grow(X, pos, rows, rng, m, config)
        trees.append(tree)
        oob = np.setdiff1d(np.arange(n), rows)
        if oob.size:
            oob_votes[oob] += tree.vote(X[oob])
            oob_counts[oob] += 1
    seen = oob_counts > 0
    oob_error = float("nan")
    if seen.any():
        pred = oob_votes[seen] / oob_counts[seen] > 0.5
        oob_error = float(np.mean(pred != (pos[seen] > 0)))
    return RandomForest(config, trees, arity, oob_error, 0.5, tuple(blocks))


def forest_to_json(forest: RandomForest, extra: dict = None) -> str:
    return json.dumps({
        "magic": MAGIC, "version": VERSION, "arity": forest.arity,
        "config": asdict(forest.config), "oob_error": None if math.isnan(forest.oob_error) else forest.oob_error,
        "threshold": forest.threshold, "blocks": [list(b) for b in forest.blocks],
        "trees": [asdict(t) for t in forest.trees], "extra": extra or {},
    }, sort_keys=True, separators=(",", ":"))


def save_forest(forest: RandomForest, path, extra: dict = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(forest_to_json(forest, extra))


def load_forest(path):
    try:
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
    except (OSError, ValueError) as exc:
        raise ArtifactError(f"unreadable forest file: {exc}") from exc
    if d.get("magic") != MAGIC:
        raise ArtifactError(f"bad magic {d.get('magic')!r}, expected {MAGIC}")
    if d.get("version") != VERSION:
        raise ArtifactError(f"unsupported version {d.get('version')!r}")
    oob = d.get("oob_error")
    forest = RandomForest(ForestConfig(**d["config"]), [Tree(**t) for t in d["trees"]], d["arity"],
                          float("nan") if oob is None else oob, d["threshold"],
                          tuple(tuple(b) for b in d["blocks"]))
    return forest, d.get("extra", {})
