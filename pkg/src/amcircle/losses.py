"""Angular-margin classification losses with analytic gradients.

All losses are cross-entropies over cosine logits.  Three families are
supported:

* ``softmax``  -- logits ``s * cos(theta_j)``.
* ``angular``  -- target logit ``s * (cos(m1 * theta_y + m2) - m3)``; with
  ``m3`` alone this is the additive-margin softmax, with ``m2`` alone the
  additive-angular-margin softmax.
* ``circle``   -- target logit ``s * (m**2 - (1 - s_p)**2)``, negative logits
  ``s * (s_n**2 - m**2)``.

Every function here is pure and thread-safe.  Batch reduction (the mean over
samples) is left to the caller.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .exceptions import ConfigError, DomainError, SimilarityRangeWarning

SOFTMAX = "softmax"
ANGULAR = "angular"
CIRCLE = "circle"
VARIANTS = (SOFTMAX, ANGULAR, CIRCLE)

# |cos| is clamped to this before dividing by sqrt(1 - cos**2).
ARCCOS_CLAMP = 1.0 - 1e-7
_COS_TOL = 1e-9


@dataclass(frozen=True)
class LossSpec:
    """Loss variant plus hyperparameters.

    Only the fields relevant to ``variant`` are read: ``m1, m2, m3`` for
    ``angular`` and ``m`` for ``circle``.
    """

    variant: str = CIRCLE
    s: float = 60.0
    m1: float = 1.0
    m2: float = 0.0
    m3: float = 0.0
    m: float = 0.4

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown loss variant {self.variant!r}; expected one of {VARIANTS}")
        if not (math.isfinite(self.s) and self.s > 0):
            raise ConfigError(f"scale s must be > 0, got {self.s}")
        if self.variant == ANGULAR:
            if not self.m1 >= 1:
                raise ConfigError(f"m1 must be >= 1, got {self.m1}")
            for name in ("m2", "m3"):
                value = getattr(self, name)
                if not 0 <= value < 1:
                    raise ConfigError(f"{name} must lie in [0, 1), got {value}")
        if self.variant == CIRCLE and not 0 < self.m < 1:
            raise ConfigError(f"circle margin m must lie in (0, 1), got {self.m}")

    @classmethod
    def softmax(cls, s=30.0):
        return cls(SOFTMAX, s=s)

    @classmethod
    def am_softmax(cls, s=30.0, m=0.2):
        return cls(ANGULAR, s=s, m3=m)

    @classmethod
    def arc_softmax(cls, s=30.0, m=0.25):
        return cls(ANGULAR, s=s, m2=m)

    @classmethod
    def circle(cls, s=60.0, m=0.4):
        return cls(CIRCLE, s=s, m=m)

    @property
    def plain_target(self):
        """True when the angular target logit reduces to ``cos - m3``."""
        return self.m1 == 1 and self.m2 == 0


@dataclass(frozen=True)
class GradPair:
    """Gradient magnitudes on the positive and negative similarity.

    For the toy-scenario functions these follow the descent-magnitude sign
    convention: ``g_p = -dL/ds_p`` and ``g_n = dL/ds_n``, so both are
    non-negative when the loss pushes ``s_p`` up and ``s_n`` toward 0.
    """

    g_p: object
    g_n: object


@dataclass(frozen=True)
class CircleInternals:
    alpha_p: float
    alpha_n: np.ndarray
    O_p: float
    O_n: float
    Delta_p: float
    Delta_n: float


# ---------------------------------------------------------------------------
# stable cross-entropy over logits
# ---------------------------------------------------------------------------

def _cross_entropy(z, labels):
    """Row-wise ``-log softmax(z)[label]`` and the softmax itself.

    ``z`` has shape (N, C).  The loss is formed from logit differences
    relative to the target so that near-zero losses keep full relative
    precision.
    """
    rows = np.arange(z.shape[0])
    d = z - z[rows, labels][:, None]
    top = d.max(axis=1)  # >= 0 since d[label] == 0
    e = np.exp(d - top[:, None])
    total = e.sum(axis=1)
    loss = top + np.log(total)
    # target is the largest logit: log1p keeps tiny losses accurate
    best = top == 0
    if best.any():
        rest = e[best].copy()
        rest[np.arange(rest.shape[0]), labels[best]] = 0.0
        loss[best] = np.log1p(rest.sum(axis=1))
    prob = e / total[:, None]
    # 1 - p_y summed from the other classes to avoid cancellation
    p_off = prob.copy()
    p_off[rows, labels] = 0.0
    residual = p_off.sum(axis=1)
    grad = prob
    grad[rows, labels] = -residual
    return loss, grad


def _check_label(labels, n_classes):
    labels = np.asarray(labels)
    if not np.issubdtype(labels.dtype, np.integer):
        raise DomainError("labels must be integers")
    if np.any(labels < 0) or np.any(labels >= n_classes):
        raise DomainError(f"label out of range [0, {n_classes})")
    return labels.astype(np.intp)


def _check_cosines(cos):
    if not np.all(np.isfinite(cos)):
        raise DomainError("cosines must be finite")
    if np.any(np.abs(cos) > 1 + _COS_TOL):
        raise DomainError("cosines must lie in [-1, 1]")


def _logits(cos, labels, spec):
    """Logits and their elementwise derivative w.r.t. each cosine."""
    n, _ = cos.shape
    rows = np.arange(n)
    c_y = cos[rows, labels]
    s = spec.s
    if spec.variant == SOFTMAX:
        return s * cos, np.full_like(cos, s)
    if spec.variant == ANGULAR:
        z = s * cos
        dz = np.full_like(cos, s)
        if spec.plain_target:
            z[rows, labels] = s * (c_y - spec.m3)
        else:
            theta = np.arccos(np.clip(c_y, -1.0, 1.0))
            z[rows, labels] = s * (np.cos(spec.m1 * theta + spec.m2) - spec.m3)
            c_safe = np.clip(c_y, -ARCCOS_CLAMP, ARCCOS_CLAMP)
            dz[rows, labels] = (
                s * spec.m1 * np.sin(spec.m1 * theta + spec.m2) / np.sqrt(1.0 - c_safe**2)
            )
        return z, dz
    m = spec.m
    z = s * (cos**2 - m**2)
    dz = 2.0 * s * cos
    z[rows, labels] = s * (m**2 - (1.0 - c_y) ** 2)
    dz[rows, labels] = 2.0 * s * (1.0 - c_y)
    return z, dz


def batch_loss_grad(cos, labels, spec):
    """Per-sample losses and gradients w.r.t. an (N, C) cosine matrix.

    Returns ``(losses, grad)`` with ``losses`` of shape (N,) and ``grad`` of
    shape (N, C).  Not averaged.
    """
    cos = np.asarray(cos, dtype=np.float64)
    if cos.ndim != 2:
        raise DomainError("cosine matrix must be 2-D")
    _check_cosines(cos)
    labels = _check_label(labels, cos.shape[1])
    z, dz = _logits(cos, labels, spec)
    loss, dlogit = _cross_entropy(z, labels)
    return loss, dlogit * dz


def classification_loss_grad(cosines, label, spec):
    """Loss and gradient w.r.t. every cosine for one sample.

    The target cosine is ``cosines[label]``.  For the additive-angular form
    the arccos derivative is singular at ``|cos| = 1``; its input is clamped
    to ``|cos| <= 1 - 1e-7``.
    """
    cos = np.asarray(cosines, dtype=np.float64).reshape(1, -1)
    loss, grad = batch_loss_grad(cos, np.array([label]), spec)
    return float(loss[0]), grad[0]


# ---------------------------------------------------------------------------
# single-sample forward losses
# ---------------------------------------------------------------------------

def softmax_loss(logits, label):
    """``-log(exp(z_label) / sum_j exp(z_j))`` for one sample."""
    z = np.asarray(logits, dtype=np.float64).reshape(1, -1)
    if z.shape[1] < 1:
        raise DomainError("need at least one logit")
    if not np.all(np.isfinite(z)):
        raise DomainError("logits must be finite")
    labels = _check_label(np.array([label]), z.shape[1])
    loss, _ = _cross_entropy(z, labels)
    return float(loss[0])


def angular_softmax_loss(theta_target, theta_negatives, spec):
    """Angular-margin softmax loss from the target and non-target angles."""
    if spec.variant != ANGULAR:
        raise ConfigError("angular_softmax_loss needs an angular LossSpec")
    theta = np.concatenate([[theta_target], np.ravel(theta_negatives)]).astype(np.float64)
    if not np.all(np.isfinite(theta)) or np.any(theta < 0) or np.any(theta > math.pi):
        raise DomainError("angles must lie in [0, pi]")
    z = spec.s * np.cos(theta)
    if spec.plain_target:
        z[0] = spec.s * (math.cos(theta[0]) - spec.m3)
    else:
        z[0] = spec.s * (math.cos(spec.m1 * theta[0] + spec.m2) - spec.m3)
    loss, _ = _cross_entropy(z.reshape(1, -1), np.array([0]))
    return float(loss[0])


def _split_state(s_p, s_n):
    neg = np.atleast_1d(np.asarray(s_n, dtype=np.float64))
    cos = np.concatenate([[float(s_p)], neg])
    _check_cosines(cos)
    return cos


def circle_loss(s_p, s_n, spec):
    """Circle loss for one sample with negatives ``s_n`` (length C - 1)."""
    if spec.variant != CIRCLE:
        raise ConfigError("circle_loss needs a circle LossSpec")
    cos = _split_state(s_p, s_n)
    loss, _ = batch_loss_grad(cos.reshape(1, -1), np.array([0]), spec)
    return float(loss[0])


def circle_internals(s_p, s_n, O_p, O_n, Delta_p, Delta_n):
    neg = np.atleast_1d(np.asarray(s_n, dtype=np.float64))
    return CircleInternals(O_p - s_p, neg - O_n, O_p, O_n, Delta_p, Delta_n)


def circle_loss_general(s_p, s_n, O_p, O_n, Delta_p, Delta_n, s):
    """Circle loss with explicit optima and margins.

    Self-paced weights ``alpha_p = O_p - s_p`` and ``alpha_n = s_n - O_n``
    are used unclipped.  With ``O_p = 1 + m``, ``O_n = -m``,
    ``Delta_p = 1 - m``, ``Delta_n = m`` this equals :func:`circle_loss`:
    the negative logit becomes ``s (s_n + m)(s_n - m)``.  ``alpha_p`` cannot
    vanish for ``O_p > 1`` since ``s_p <= 1``.
    """
    cos = _split_state(s_p, s_n)
    st = circle_internals(cos[0], cos[1:], O_p, O_n, Delta_p, Delta_n)
    z = np.empty_like(cos)
    z[0] = s * st.alpha_p * (cos[0] - Delta_p)
    z[1:] = s * st.alpha_n * (cos[1:] - Delta_n)
    loss, _ = _cross_entropy(z.reshape(1, -1), np.array([0]))
    return float(loss[0])


# ---------------------------------------------------------------------------
# toy scenario: one positive, C - 1 identical negatives
# ---------------------------------------------------------------------------

def _check_toy(s_p, s_n, C, lo):
    if C < 2:
        raise DomainError(f"class count C must be >= 2, got {C}")
    s_p = np.asarray(s_p, dtype=np.float64)
    s_n = np.asarray(s_n, dtype=np.float64)
    for v in (s_p, s_n):
        if not np.all(np.isfinite(v)) or np.any(np.abs(v) > 1 + _COS_TOL):
            raise DomainError("similarities must lie in [-1, 1]")
    if lo == 0.0 and (np.any(s_p < 0) or np.any(s_n < 0)):
        warnings.warn("toy similarity outside [0, 1]", SimilarityRangeWarning, stacklevel=3)
    return s_p, s_n


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def amsoftmax_toy_loss(s_p, s_n, spec, C):
    """Additive-margin softmax in the toy scenario; margin is ``spec.m3``."""
    s_p, s_n = _check_toy(s_p, s_n, C, 0.0)
    x = spec.s * (s_n - s_p + spec.m3) + math.log(C - 1)
    return _out(np.logaddexp(0.0, x))


def amsoftmax_toy_grad(s_p, s_n, spec, C):
    """Closed-form toy gradients; ``g_p`` and ``g_n`` are the same value."""
    s_p, s_n = _check_toy(s_p, s_n, C, 0.0)
    g = spec.s * expit(math.log(C - 1) - spec.s * (s_p - s_n - spec.m3))
    g = _out(g)
    return GradPair(g, g)


def _circle_toy_gap(s_p, s_n, spec):
    m = spec.m
    return spec.s * (2 * m * m - (1.0 - s_p) ** 2 - s_n**2)


def circle_toy_loss(s_p, s_n, spec, C):
    s_p, s_n = _check_toy(s_p, s_n, C, -1.0)
    return _out(np.logaddexp(0.0, math.log(C - 1) - _circle_toy_gap(s_p, s_n, spec)))


def circle_toy_grad(s_p, s_n, spec, C):
    """Closed-form toy gradients of the circle loss.

    Both share the weight ``(C-1) / (exp(gap) + C - 1)``; ``g_p`` carries
    ``2 s (1 - s_p)`` and ``g_n`` carries ``2 s s_n``.
    """
    s_p, s_n = _check_toy(s_p, s_n, C, -1.0)
    w = expit(math.log(C - 1) - _circle_toy_gap(s_p, s_n, spec))
    return GradPair(_out(w * 2 * spec.s * (1.0 - s_p)), _out(w * 2 * spec.s * s_n))


def toy_loss(s_p, s_n, spec, C):
    if spec.variant == CIRCLE:
        return circle_toy_loss(s_p, s_n, spec, C)
    if spec.variant == ANGULAR:
        return amsoftmax_toy_loss(s_p, s_n, spec, C)
    raise ConfigError("toy scenario is defined for angular (m3) and circle losses")


def toy_grad(s_p, s_n, spec, C):
    if spec.variant == CIRCLE:
        return circle_toy_grad(s_p, s_n, spec, C)
    if spec.variant == ANGULAR:
        return amsoftmax_toy_grad(s_p, s_n, spec, C)
    raise ConfigError("toy scenario is defined for angular (m3) and circle losses")
