"""Deterministic minibatch SGD over the synthetic corpus.

The recipe follows a staged curriculum: every stage has its own chunk-width
interval, the learning rate drops by ``lr_drop`` at each stage boundary and,
for stage-based margins, the circle-loss margin steps down.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np

from .corpus import sample_chunk, sample_chunk_width
from .exceptions import ConfigError, DomainError, NumericalError
from .losses import ANGULAR, CIRCLE, LossSpec
from .network import embed, init_model, loss_and_grads, normalize_columns
from .schedules import ChunkMarginSpec, StageSchedule, chunk_margin, stage_margin, stage_of_epoch

logger = logging.getLogger(__name__)

MARGIN_MODES = ("fixed", "stage", "chunk")
DIAG_HEADER = ("epoch", "s_p_mean", "s_n_mean", "r_mean", "loss", "margin")

# SeedSequence tags for the independent random streams of one run
_INIT, _STEPS, _DIAG = 0, 1, 2


@dataclass(frozen=True)
class TrainConfig:
    loss: LossSpec = LossSpec.circle()
    margin_mode: str = "fixed"
    stage_margins: tuple = (0.40, 0.35, 0.32)
    chunk_lambda: float = 0.25
    lr: float = 0.01
    momentum: float = 0.9
    weight_decay: float = 1e-3
    lr_drop: float = 10.0
    batch_size: int = 64
    epochs: int = 9
    chunk_intervals: tuple = ((20, 40), (30, 50), (40, 60))
    stage_boundaries: tuple = None
    hidden_dim: int = 64
    n_hidden: int = 2
    embed_dim: int = 32
    diag_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        intervals = tuple(tuple(int(v) for v in iv) for iv in self.chunk_intervals)
        object.__setattr__(self, "chunk_intervals", intervals)
        if not intervals:
            raise ConfigError("need at least one chunk-width interval")
        for lo, hi in intervals:
            if not 1 <= lo <= hi:
                raise ConfigError(f"bad chunk-width interval [{lo}, {hi}]")
        for (a, b), (c, d) in zip(intervals, intervals[1:]):
            if c < a or d < b:
                raise ConfigError("chunk-width intervals must be non-decreasing across stages")
        if self.margin_mode not in MARGIN_MODES:
            raise ConfigError(f"margin_mode must be one of {MARGIN_MODES}, got {self.margin_mode!r}")
        if self.margin_mode != "fixed" and self.loss.variant != CIRCLE:
            raise ConfigError("stage and chunk margins apply to the circle loss only")
        if self.margin_mode == "stage":
            if len(StageSchedule(self.stage_margins)) != len(intervals):
                raise ConfigError(
                    f"{len(self.stage_margins)} stage margins for {len(intervals)} stages"
                )
        if self.margin_mode == "chunk":
            ChunkMarginSpec(self.loss.m, self.chunk_lambda, 0, 1)
        if self.epochs < 0 or self.batch_size < 1:
            raise ConfigError("epochs must be >= 0 and batch_size >= 1")
        if not (self.lr > 0 and 0 <= self.momentum < 1 and self.weight_decay >= 0 and self.lr_drop >= 1):
            raise ConfigError("invalid optimizer settings")
        if not 0 < self.diag_fraction <= 1:
            raise ConfigError("diag_fraction must lie in (0, 1]")

    @property
    def n_stages(self):
        return len(self.chunk_intervals)

    def stage(self, epoch):
        return stage_of_epoch(epoch, self.epochs, self.n_stages, self.stage_boundaries)


@dataclass(frozen=True)
class EpochDiagnostics:
    epoch: int  # 1-based
    s_p_mean: float
    s_n_mean: float
    r_mean: float
    loss: float
    margin: float

    def row(self):
        return (self.epoch, self.s_p_mean, self.s_n_mean, self.r_mean, self.loss, self.margin)


def mean_radius(s_p_mean, s_n_mean):
    """Distance of the mean (s_p, s_n) point from the optimum (1, 0)."""
    return math.sqrt((1.0 - s_p_mean) ** 2 + s_n_mean**2)


def _rng(seed, tag, *extra):
    return np.random.default_rng(np.random.SeedSequence([int(seed), tag, *extra]))


def _step_margin(config, stage, L):
    if config.margin_mode == "stage":
        return stage_margin(StageSchedule(config.stage_margins), stage)
    if config.margin_mode == "chunk":
        lo, hi = config.chunk_intervals[stage]
        if lo == hi:
            return config.loss.m
        return chunk_margin(ChunkMarginSpec(config.loss.m, config.chunk_lambda, lo, hi), L)
    spec = config.loss
    if spec.variant == CIRCLE:
        return spec.m
    return spec.m3 or spec.m2 if spec.variant == ANGULAR else 0.0


def similarity_stats(model, frames, labels):
    """Mean target cosine and mean non-target cosine over whole utterances."""
    u = embed(model, frames)
    cos = u @ model.classifier
    rows = np.arange(len(labels))
    pos = cos[rows, labels]
    mask = np.ones_like(cos, dtype=bool)
    mask[rows, labels] = False
    return float(pos.mean()), float(cos[mask].mean())


def diagnose(model, corpus, config, epoch, loss_mean, margin):
    n = len(corpus)
    k = max(1, int(round(config.diag_fraction * n)))
    idx = np.sort(_rng(config.seed, _DIAG, epoch).choice(n, size=k, replace=False))
    sp, sn = similarity_stats(model, corpus.frames[idx], corpus.labels[idx])
    return EpochDiagnostics(epoch + 1, sp, sn, mean_radius(sp, sn), loss_mean, margin)


def train(config, corpus, callback=None):
    """Train a :class:`ToyModel` on ``corpus``; returns ``(model, diagnostics)``.

    Raises :class:`NumericalError` carrying the offending state if a loss or
    gradient becomes non-finite.
    """
    n = len(corpus)
    model = init_model(
        corpus.frames.shape[2], corpus.num_speakers, _rng(config.seed, _INIT),
        config.hidden_dim, config.n_hidden, config.embed_dim,
    )
    rng = _rng(config.seed, _STEPS)
    params = model.arrays()
    velocity = [np.zeros_like(p) for p in params]
    history = []

    for epoch in range(config.epochs):
        stage = config.stage(epoch)
        lr = config.lr / config.lr_drop**stage
        interval = config.chunk_intervals[stage]
        order = rng.permutation(n)
        loss_sum = 0.0
        margins = []
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            L = sample_chunk_width(interval, rng)
            X = np.stack([sample_chunk(corpus.frames[i], L, rng) for i in batch])
            margin = _step_margin(config, stage, L)
            spec = config.loss
            if spec.variant == CIRCLE and margin != spec.m:
                spec = dataclasses.replace(spec, m=margin)
            margins.append(margin)

            step = start // config.batch_size
            state = {"epoch": epoch + 1, "step": step, "chunk_width": L, "margin": margin, "lr": lr}
            try:
                loss, grads, losses, _ = loss_and_grads(model, X, corpus.labels[batch], spec)
            except DomainError as exc:
                raise NumericalError(f"non-finite cosines at epoch {epoch + 1}, step {step}", state) from exc
            if not (math.isfinite(loss) and all(np.all(np.isfinite(g)) for g in grads)):
                raise NumericalError(f"non-finite loss at epoch {epoch + 1}, step {step}", {**state, "loss": loss})
            loss_sum += float(losses.sum())

            last = len(params) - 1
            with np.errstate(over="ignore", invalid="ignore"):
                for i, (p, g, v) in enumerate(zip(params, grads, velocity)):
                    if i != last and config.weight_decay:
                        g = g + config.weight_decay * p
                    v *= config.momentum
                    v += g
                    p -= lr * v
            if not all(np.all(np.isfinite(p)) for p in params):
                raise NumericalError(f"parameters diverged at epoch {epoch + 1}, step {step}", state)
            params[last][...] = normalize_columns(params[last])

        # fixed and stage margins are constant within an epoch: report exactly
        margin = margins[0] if len(set(margins)) == 1 else math.fsum(margins) / len(margins)
        diag = diagnose(model, corpus, config, epoch, loss_sum / n, float(margin))
        history.append(diag)
        logger.debug("epoch %d: %s", epoch, diag)
        if callback is not None:
            callback(model, diag)
    return model, history
