from .embeddings import (
    DocEmbedding,
    EmbeddingModel,
    SkipgramConfig,
    cosine,
    infer_doc_vector,
    infer_matrix,
    train_pvdbow,
    train_skipgram,
)
from .matrix import FeatureMatrix, Standardizer, concat_features
from .vocab import BowVector, Vocabulary, bow_matrix, bow_vector, build_vocabulary

__all__ = [
    "BowVector", "DocEmbedding", "EmbeddingModel", "FeatureMatrix", "SkipgramConfig",
    "Standardizer", "Vocabulary", "bow_matrix", "bow_vector", "build_vocabulary",
    "concat_features", "cosine", "infer_doc_vector", "infer_matrix", "train_pvdbow",
    "train_skipgram",
]
