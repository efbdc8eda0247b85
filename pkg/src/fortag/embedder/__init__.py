"""Supervised averaged-embedding text classifier (fastText-style).

Documents are bags of word and hashed word-n-gram features. Their embeddings
are averaged into a hidden vector and scored by a linear layer trained with
SGD under a softmax or one-vs-all loss.
"""
from fortag.embedder.io import load_model, save_model
from fortag.embedder.model import (
    OVA,
    SOFTMAX,
    ModelParams,
    Prediction,
    TextClassifierModel,
    Vocabulary,
    predict,
)
from fortag.embedder.text import featurize, fnv1a_64, normalize, tokenize
from fortag.embedder.training import (
    build_vocabulary,
    loss_and_gradients,
    train,
    train_with_history,
)
from fortag.embedder.vectors import analogies, nearest_neighbors

__all__ = [
    "OVA",
    "SOFTMAX",
    "ModelParams",
    "Prediction",
    "TextClassifierModel",
    "Vocabulary",
    "analogies",
    "build_vocabulary",
    "featurize",
    "fnv1a_64",
    "load_model",
    "loss_and_gradients",
    "nearest_neighbors",
    "normalize",
    "predict",
    "save_model",
    "tokenize",
    "train",
    "train_with_history",
]
