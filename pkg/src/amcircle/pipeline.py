"""Glue between the trained model and the verification metrics."""

from dataclasses import dataclass

import numpy as np

from .metrics import DcfSpec, TrialScore, compute_eer, compute_min_dcf
from .network import embed


@dataclass
class EvalResult:
    trials: list
    scores: list
    eer: float
    eer_threshold: float
    min_dcf: float
    dcf_threshold: float


def embed_corpus(model, corpus):
    """Embeddings of whole utterances keyed by utterance id."""
    u = embed(model, corpus.frames)
    return dict(zip(corpus.ids, u))


def all_pair_trials(corpus):
    """Every unordered pair of distinct utterances, labelled by true speaker."""
    ids = corpus.ids
    i, j = np.triu_indices(len(corpus), 1)
    same = corpus.true_labels[i] == corpus.true_labels[j]
    return [(ids[a], ids[b], bool(t)) for a, b, t in zip(i, j, same)]


def score_all(model, corpus, trials):
    """Vectorised cosine scoring; equivalent to metrics.score_trials."""
    u = embed(model, corpus.frames)
    index = {k: n for n, k in enumerate(corpus.ids)}
    for a, b, _ in trials:
        for key in (a, b):
            if key not in index:
                raise KeyError(f"no embedding for utterance id {key!r}")
    ia = np.array([index[a] for a, _, _ in trials], dtype=np.intp)
    ib = np.array([index[b] for _, b, _ in trials], dtype=np.intp)
    s = np.einsum("ij,ij->i", u[ia], u[ib])
    return [TrialScore(float(x), bool(t[2])) for x, t in zip(s, trials)]


def evaluate(model, corpus, trials=None, dcf=DcfSpec()):
    trials = all_pair_trials(corpus) if trials is None else trials
    scores = score_all(model, corpus, trials)
    eer, eer_thr = compute_eer(scores)
    min_dcf, dcf_thr = compute_min_dcf(scores, dcf)
    return EvalResult(trials, scores, eer, eer_thr, min_dcf, dcf_thr)
