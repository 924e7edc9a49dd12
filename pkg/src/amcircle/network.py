"""Mean-pooled frame network with hand-written backpropagation.

Frames pass through ``tanh`` hidden layers, are averaged over time, then
projected linearly and length-normalized.  A cosine classifier with unit
columns sits on top.
"""

from dataclasses import dataclass

import numpy as np

from .losses import batch_loss_grad


@dataclass
class ToyModel:
    hidden: list  # [(W, b), ...]
    projection: np.ndarray
    classifier: np.ndarray  # (embed_dim, n_classes), unit columns
    activation: str = "tanh"

    @property
    def frame_dim(self):
        return self.hidden[0][0].shape[0]

    @property
    def embed_dim(self):
        return self.projection.shape[1]

    @property
    def n_classes(self):
        return self.classifier.shape[1]

    def arrays(self):
        """Parameters in storage order: hidden (W, b) pairs, projection, classifier."""
        out = []
        for W, b in self.hidden:
            out += [W, b]
        return out + [self.projection, self.classifier]

    @classmethod
    def from_arrays(cls, arrays):
        if len(arrays) < 4 or len(arrays) % 2:
            raise ValueError(f"bad parameter count {len(arrays)}")
        hidden = [(arrays[i], np.ravel(arrays[i + 1])) for i in range(0, len(arrays) - 2, 2)]
        return cls(hidden, arrays[-2], arrays[-1])

    def copy(self):
        return ToyModel.from_arrays([a.copy() for a in self.arrays()])


def init_model(frame_dim, n_classes, rng, hidden_dim=64, n_hidden=2, embed_dim=32):
    hidden = []
    fan_in = frame_dim
    for _ in range(n_hidden):
        W = rng.standard_normal((fan_in, hidden_dim)) / np.sqrt(fan_in)
        hidden.append((W, np.zeros(hidden_dim)))
        fan_in = hidden_dim
    projection = rng.standard_normal((fan_in, embed_dim)) / np.sqrt(fan_in)
    classifier = rng.standard_normal((embed_dim, n_classes))
    classifier /= np.linalg.norm(classifier, axis=0, keepdims=True)
    return ToyModel(hidden, projection, classifier)


def normalize_columns(W):
    return W / np.linalg.norm(W, axis=0, keepdims=True)


def _forward(model, X):
    acts = [X]
    h = X
    for W, b in model.hidden:
        h = np.tanh(h @ W + b)
        acts.append(h)
    pooled = h.mean(axis=1)
    e = pooled @ model.projection
    norm = np.linalg.norm(e, axis=1, keepdims=True)
    return acts, pooled, e / norm, norm


def embed(model, X):
    """Unit embeddings for a batch of equal-length chunks, shape (N, L, d)."""
    X = np.asarray(X, dtype=np.float64)
    return _forward(model, X)[2]


def forward_embed(model, chunk):
    """Unit embedding of a single (L, d) chunk."""
    chunk = np.asarray(chunk, dtype=np.float64)
    if chunk.ndim != 2 or chunk.shape[0] == 0:
        raise ValueError("chunk must be a non-empty (frames, frame_dim) array")
    return embed(model, chunk[None])[0]


def loss_and_grads(model, X, labels, spec):
    """Mean loss over the batch, gradients for every parameter array, and
    the per-sample losses and embeddings.

    Gradients come back in :meth:`ToyModel.arrays` order.  The classifier is
    used as stored (its columns are assumed unit) so the gradient is the
    plain derivative w.r.t. its entries.
    """
    X = np.asarray(X, dtype=np.float64)
    n, L, _ = X.shape
    acts, pooled, u, norm = _forward(model, X)
    cos = u @ model.classifier
    losses, dcos = batch_loss_grad(cos, labels, spec)
    dcos /= n

    g_cls = u.T @ dcos
    du = dcos @ model.classifier.T
    de = (du - u * np.sum(u * du, axis=1, keepdims=True)) / norm
    g_proj = pooled.T @ de
    dh = np.broadcast_to((de @ model.projection.T)[:, None, :] / L, acts[-1].shape)

    hidden_grads = []
    for k in range(len(model.hidden) - 1, -1, -1):
        W, _ = model.hidden[k]
        h = acts[k + 1]
        da = dh * (1.0 - h * h)
        inp = acts[k]
        gW = inp.reshape(-1, inp.shape[-1]).T @ da.reshape(-1, da.shape[-1])
        gb = da.sum(axis=(0, 1))
        hidden_grads = [gW, gb] + hidden_grads
        if k:
            dh = da @ W.T
    grads = hidden_grads + [g_proj, g_cls]
    return float(losses.mean()), grads, losses, u
