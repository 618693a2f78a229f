"""Row-aligned feature matrices: sparse BoW, dense BoE, and their horizontal concatenation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from ..errors import RowMismatch


@dataclass
class Standardizer:
    """Per-column z-score; a zero-variance column gets scale 1 and maps to zeros."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X) -> "Standardizer":
        X = np.asarray(X, dtype=np.float64)
        if X.shape[0] == 0:
            return cls(np.zeros(X.shape[1]), np.ones(X.shape[1]))
        std = X.std(axis=0)
        std[std == 0] = 1.0
        return cls(X.mean(axis=0), std)

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.scale

    def to_dict(self):
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["mean"], dtype=np.float64), np.asarray(d["scale"], dtype=np.float64))


@dataclass
class FeatureMatrix:
    X: sparse.csr_matrix
    row_ids: Tuple[str, ...]
    blocks: Tuple[Tuple[str, int], ...] = ()
    scaler: Optional[Standardizer] = None

    def __post_init__(self):
        self.X = sparse.csr_matrix(self.X)
        self.row_ids = tuple(self.row_ids)
        if len(self.row_ids) != self.X.shape[0]:
            raise RowMismatch(f"{len(self.row_ids)} ids for {self.X.shape[0]} rows")
        if len(set(self.row_ids)) != len(self.row_ids):
            raise RowMismatch("duplicate row ids")
        if not self.blocks:
            self.blocks = (("features", self.X.shape[1]),)

    @property
    def arity(self) -> int:
        return self.X.shape[1]

    def __len__(self):
        return self.X.shape[0]

    def take(self, rows) -> "FeatureMatrix":
        rows = np.asarray(rows, dtype=np.int64)
        return FeatureMatrix(self.X[rows], [self.row_ids[i] for i in rows], self.blocks, self.scaler)

    @classmethod
    def from_bow(cls, bow: sparse.spmatrix, row_ids) -> "FeatureMatrix":
        return cls(sparse.csr_matrix(bow, dtype=np.float64), row_ids, (("bow", bow.shape[1]),))

    @classmethod
    def from_dense(cls, dense, row_ids, scaler: Standardizer = None, name="boe") -> "FeatureMatrix":
        dense = np.asarray(dense, dtype=np.float64)
        if scaler is None:
            scaler = Standardizer.fit(dense)
        return cls(sparse.csr_matrix(scaler.transform(dense)), row_ids, ((name, dense.shape[1]),), scaler)


def concat_features(bow: FeatureMatrix, boe_rows, boe_ids: Sequence[str] = None,
                    scaler: Standardizer = None) -> FeatureMatrix:
    """BoW block first, standardized BoE block second.

    ``scaler`` is fit on ``boe_rows`` when not given; pass the training
    scaler when building test rows.
    """
    boe_ids = bow.row_ids if boe_ids is None else tuple(boe_ids)
    dense = np.asarray(boe_rows, dtype=np.float64)
    if dense.shape[0] != len(bow) or tuple(boe_ids) != bow.row_ids:
        raise RowMismatch("BoW and BoE rows are not aligned")
    if scaler is None:
        scaler = Standardizer.fit(dense)
    X = sparse.hstack([bow.X, sparse.csr_matrix(scaler.transform(dense))], format="csr")
    return FeatureMatrix(X, bow.row_ids, bow.blocks + (("boe", dense.shape[1]),), scaler)
