"""scikit-learn compatible wrapper around the training harness."""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.preprocessing import LabelEncoder
from sklearn.utils.validation import check_array, check_is_fitted

from .corpus import Corpus
from .losses import LossSpec
from .network import embed
from .training import TrainConfig, train


def _check_frames(X, frame_dim=None):
    X = check_array(X, allow_nd=True, dtype=np.float64, ensure_min_samples=1)
    if X.ndim != 3:
        raise ValueError(f"expected (n_utterances, n_frames, frame_dim) input, got shape {X.shape}")
    if frame_dim is not None and X.shape[2] != frame_dim:
        raise ValueError(f"X has frame_dim {X.shape[2]}, estimator was fitted with {frame_dim}")
    return X


class AngularMarginEmbedder(ClassifierMixin, TransformerMixin, BaseEstimator):
    """Speaker embedding network trained with a softmax, angular-margin or
    circle loss.

    ``fit`` takes utterances of shape (n_utterances, n_frames, frame_dim)
    and speaker labels; ``transform`` returns unit embeddings of whole
    utterances; ``predict`` the closest classifier column.

    Parameters mirror :class:`amcircle.training.TrainConfig`; ``loss`` is one
    of ``"softmax"``, ``"angular"`` or ``"circle"``.
    """

    def __init__(self, loss="circle", s=60.0, m=0.4, m1=1.0, m2=0.0, m3=0.0,
                 margin_mode="fixed", stage_margins=(0.40, 0.35, 0.32), chunk_lambda=0.25,
                 lr=0.01, momentum=0.9, weight_decay=1e-3, lr_drop=10.0, batch_size=64,
                 epochs=15, chunk_intervals=((20, 40), (30, 50), (40, 60)),
                 stage_boundaries=None, hidden_dim=64, n_hidden=2, embed_dim=32,
                 diag_fraction=0.1, random_state=0):
        self.loss = loss
        self.s = s
        self.m = m
        self.m1 = m1
        self.m2 = m2
        self.m3 = m3
        self.margin_mode = margin_mode
        self.stage_margins = stage_margins
        self.chunk_lambda = chunk_lambda
        self.lr = lr
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.lr_drop = lr_drop
        self.batch_size = batch_size
        self.epochs = epochs
        self.chunk_intervals = chunk_intervals
        self.stage_boundaries = stage_boundaries
        self.hidden_dim = hidden_dim
        self.n_hidden = n_hidden
        self.embed_dim = embed_dim
        self.diag_fraction = diag_fraction
        self.random_state = random_state

    def _train_config(self):
        spec = LossSpec(self.loss, s=self.s, m1=self.m1, m2=self.m2, m3=self.m3, m=self.m)
        return TrainConfig(
            loss=spec, margin_mode=self.margin_mode, stage_margins=tuple(self.stage_margins),
            chunk_lambda=self.chunk_lambda, lr=self.lr, momentum=self.momentum,
            weight_decay=self.weight_decay, lr_drop=self.lr_drop, batch_size=self.batch_size,
            epochs=self.epochs, chunk_intervals=tuple(self.chunk_intervals),
            stage_boundaries=self.stage_boundaries, hidden_dim=self.hidden_dim,
            n_hidden=self.n_hidden, embed_dim=self.embed_dim,
            diag_fraction=self.diag_fraction, seed=int(self.random_state or 0),
        )

    def fit(self, X, y):
        X = _check_frames(X)
        y = np.asarray(y)
        if y.shape != (X.shape[0],):
            raise ValueError("y must have one label per utterance")
        self._encoder = LabelEncoder().fit(y)
        self.classes_ = self._encoder.classes_
        if len(self.classes_) < 2:
            raise ValueError("need at least two speakers")
        labels = self._encoder.transform(y)
        corpus = Corpus(X, labels, labels, np.empty(0, dtype=np.intp), len(self.classes_), None)
        self.model_, self.diagnostics_ = train(self._train_config(), corpus)
        self.n_features_in_ = X.shape[2]
        return self

    def transform(self, X):
        check_is_fitted(self, "model_")
        return embed(self.model_, _check_frames(X, self.n_features_in_))

    def decision_function(self, X):
        """Cosine between each utterance embedding and every class weight."""
        return self.transform(X) @ self.model_.classifier

    def predict(self, X):
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]
