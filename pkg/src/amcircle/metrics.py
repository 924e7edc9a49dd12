"""Verification scoring: cosine trials, EER, minDCF and score histograms.

A trial is accepted when its score is ``>=`` the threshold.  Operating
points are taken at every distinct score plus one reject-all point just
above the maximum, so identical scores always move together.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, DomainError

_UNIT_TOL = 1e-6


@dataclass(frozen=True)
class TrialScore:
    score: float
    is_target: bool


@dataclass(frozen=True)
class DcfSpec:
    p_target: float = 0.01
    c_miss: float = 1.0
    c_fa: float = 1.0

    def __post_init__(self):
        if not 0 < self.p_target < 1:
            raise ConfigError(f"p_target must lie in (0, 1), got {self.p_target}")
        if not (self.c_miss > 0 and self.c_fa > 0):
            raise ConfigError("detection costs must be > 0")


def cosine_score(e1, e2):
    e1 = np.asarray(e1, dtype=np.float64)
    e2 = np.asarray(e2, dtype=np.float64)
    for e in (e1, e2):
        if abs(np.linalg.norm(e) - 1.0) > _UNIT_TOL:
            raise DomainError("cosine_score expects unit-norm embeddings")
    return float(e1 @ e2)


def _split(trials):
    """Scores and boolean target flags from TrialScores or a (scores, labels) pair."""
    if isinstance(trials, tuple) and len(trials) == 2 and not isinstance(trials[0], TrialScore):
        scores, targets = trials
    else:
        scores = [t.score for t in trials]
        targets = [t.is_target for t in trials]
    scores = np.asarray(scores, dtype=np.float64)
    targets = np.asarray(targets, dtype=bool)
    if scores.shape != targets.shape or scores.ndim != 1:
        raise DomainError("scores and target flags must be equal-length vectors")
    if not np.all(np.isfinite(scores)):
        raise DomainError("trial scores must be finite")
    n_tar = int(targets.sum())
    if n_tar == 0 or n_tar == targets.size:
        raise DomainError("need at least one target and one non-target trial")
    return scores, targets


def operating_points(scores, targets):
    """Thresholds with their miss and false-acceptance rates.

    Rows run from accept-all (lowest threshold) to reject-all.
    """
    order = np.argsort(scores, kind="mergesort")
    s = scores[order]
    t = targets[order]
    n_tar = t.sum()
    n_non = t.size - n_tar
    # rejected below each distinct score: cumulative counts before first occurrence
    first = np.concatenate([[True], s[1:] != s[:-1]])
    cum_tar = np.concatenate([[0], np.cumsum(t)])
    cum_non = np.concatenate([[0], np.cumsum(~t)])
    idx = np.flatnonzero(first)
    thresholds = np.append(s[idx], np.nextafter(s[-1], np.inf))
    miss = np.append(cum_tar[idx], n_tar) / n_tar
    fa = (n_non - np.append(cum_non[idx], n_non)) / n_non
    return thresholds, miss, fa


def _crossing(thresholds, miss, fa):
    diff = miss - fa  # rises from -1 (accept-all) to +1 (reject-all)
    k = int(np.flatnonzero(diff >= 0)[0])
    if diff[k] == 0 or k == 0:
        return float(miss[k]), float(thresholds[k])
    d0, d1 = diff[k - 1], diff[k]
    a = d0 / (d0 - d1)
    eer = miss[k - 1] + a * (miss[k] - miss[k - 1])
    thr = thresholds[k - 1] + a * (thresholds[k] - thresholds[k - 1])
    return float(eer), float(thr)


def compute_eer(trials):
    """Equal error rate and its threshold.

    The miss and false-acceptance curves are joined linearly between
    adjacent operating points; the EER is where they cross.
    """
    return _crossing(*operating_points(*_split(trials)))


def _dcf(miss, fa, spec):
    dcf = spec.c_miss * spec.p_target * miss + spec.c_fa * (1 - spec.p_target) * fa
    return dcf / min(spec.c_miss * spec.p_target, spec.c_fa * (1 - spec.p_target))


def compute_min_dcf(trials, spec=DcfSpec()):
    """Minimum normalized detection cost and the threshold attaining it."""
    thresholds, miss, fa = operating_points(*_split(trials))
    dcf = _dcf(miss, fa, spec)
    k = int(np.argmin(dcf))
    return float(dcf[k]), float(thresholds[k])


def score_trials(embeddings, trials):
    """One TrialScore per ``(enroll_id, test_id, is_target)`` trial, in order."""
    out = []
    for a, b, tgt in trials:
        for key in (a, b):
            if key not in embeddings:
                raise KeyError(f"no embedding for utterance id {key!r}")
        out.append(TrialScore(cosine_score(embeddings[a], embeddings[b]), bool(tgt)))
    return out


def similarity_histogram(scores, bin_count):
    """Counts over ``bin_count`` uniform bins on [-1, 1].

    Bins are left-closed except the last, which is closed on both sides.
    Scores are clipped into [-1, 1] first so rounding just past a unit
    cosine is still counted.
    """
    if bin_count < 1:
        raise ConfigError("bin_count must be >= 1")
    scores = np.clip(np.asarray(scores, dtype=np.float64).ravel(), -1.0, 1.0)
    counts, edges = np.histogram(scores, bins=bin_count, range=(-1.0, 1.0))
    return edges, counts
