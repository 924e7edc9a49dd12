"""Seeded synthetic speaker corpus and chunk sampling."""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, DomainError


@dataclass(frozen=True)
class SyntheticCorpusSpec:
    num_speakers: int = 50
    utterances_per_speaker: int = 20
    frame_dim: int = 16
    max_frames: int = 60
    within_speaker_noise: float = 1.0
    label_noise_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.frame_dim < 2:
            raise ConfigError(f"frame_dim must be >= 2, got {self.frame_dim}")
        if self.num_speakers < 2:
            raise ConfigError(f"num_speakers must be >= 2, got {self.num_speakers}")
        if self.utterances_per_speaker < 1 or self.max_frames < 1:
            raise ConfigError("utterances_per_speaker and max_frames must be >= 1")
        if not self.within_speaker_noise >= 0:
            raise ConfigError("within_speaker_noise must be >= 0")
        if not 0 <= self.label_noise_rate < 1:
            raise ConfigError(f"label_noise_rate must lie in [0, 1), got {self.label_noise_rate}")


@dataclass
class Corpus:
    """Utterances as a dense (n_utts, max_frames, frame_dim) array.

    ``labels`` are the training labels after label noise; ``true_labels``
    the generating speakers; ``relabeled`` the indices that were changed.
    """

    frames: np.ndarray
    labels: np.ndarray
    true_labels: np.ndarray
    relabeled: np.ndarray
    num_speakers: int
    directions: np.ndarray

    def __len__(self):
        return self.frames.shape[0]

    @property
    def ids(self):
        return [f"utt{i:05d}" for i in range(len(self))]


def generate_corpus(spec):
    """Build a corpus as a pure function of ``spec``.

    Every speaker has a unit mean direction drawn uniformly from the sphere;
    frames are that direction plus isotropic Gaussian noise.  Exactly
    ``floor(label_noise_rate * n_utts)`` utterances get a different
    speaker's label.
    """
    rng = np.random.default_rng(spec.seed)
    d = rng.standard_normal((spec.num_speakers, spec.frame_dim))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    true_labels = np.repeat(np.arange(spec.num_speakers), spec.utterances_per_speaker)
    n = true_labels.size
    noise = rng.standard_normal((n, spec.max_frames, spec.frame_dim))
    frames = d[true_labels][:, None, :] + spec.within_speaker_noise * noise

    n_flip = math.floor(spec.label_noise_rate * n)
    relabeled = np.sort(rng.choice(n, size=n_flip, replace=False))
    labels = true_labels.copy()
    shift = rng.integers(1, spec.num_speakers, size=n_flip)
    labels[relabeled] = (true_labels[relabeled] + shift) % spec.num_speakers
    return Corpus(frames, labels, true_labels, relabeled, spec.num_speakers, d)


def sample_chunk_width(interval, rng):
    lo, hi = interval
    if lo > hi:
        raise ConfigError(f"empty chunk-width interval [{lo}, {hi}]")
    return int(rng.integers(lo, hi + 1))


def sample_chunk(frames, L, rng):
    """Random contiguous window of exactly ``L`` frames.

    Utterances shorter than ``L`` are tiled end to end first, then cropped.
    """
    frames = np.asarray(frames)
    n = frames.shape[0]
    if n == 0:
        raise DomainError("cannot sample a chunk from an empty utterance")
    if L < 1:
        raise DomainError(f"chunk width must be >= 1, got {L}")
    if n < L:
        reps = -(-L // n)
        frames = np.concatenate([frames] * reps, axis=0)
        n = frames.shape[0]
    start = int(rng.integers(0, n - L + 1))
    return frames[start:start + L]
