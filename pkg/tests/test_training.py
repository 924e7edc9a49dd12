import math

import numpy as np
import pytest

from amcircle.corpus import SyntheticCorpusSpec, generate_corpus
from amcircle.exceptions import ConfigError, NumericalError
from amcircle.losses import LossSpec
from amcircle.network import embed
from amcircle.schedules import StageSchedule, stage_margin
from amcircle.training import TrainConfig, mean_radius, similarity_stats, train

SMALL = SyntheticCorpusSpec(8, 6, 6, 20, 0.5, 0.0, seed=1)


def small_config(**kw):
    base = dict(epochs=3, batch_size=16, hidden_dim=8, embed_dim=6,
                chunk_intervals=((5, 10), (8, 12), (10, 15)), seed=3)
    return TrainConfig(**{**base, **kw})


@pytest.fixture(scope="module")
def corpus():
    return generate_corpus(SMALL)


class TestMeanRadius:
    def test_optimum(self):
        assert mean_radius(1.0, 0.0) == 0.0

    def test_origin(self):
        assert mean_radius(0.0, 0.0) == 1.0

    def test_value(self):
        assert mean_radius(0.8, 0.3) == pytest.approx(0.36055512754639893, rel=1e-15)


class TestTrainConfig:
    @pytest.mark.parametrize("kw", [
        dict(chunk_intervals=((30, 50), (20, 40))),
        dict(margin_mode="plateau"),
        dict(margin_mode="stage", loss=LossSpec.softmax()),
        dict(margin_mode="stage", stage_margins=(0.4, 0.3)),
        dict(lr=0.0),
        dict(epochs=-1),
    ])
    def test_invalid(self, kw):
        with pytest.raises(ConfigError):
            TrainConfig(**kw)

    def test_stage_thirds(self):
        cfg = TrainConfig(epochs=9)
        assert [cfg.stage(e) for e in range(9)] == [0, 0, 0, 1, 1, 1, 2, 2, 2]


def test_zero_epochs(corpus):
    model, history = train(small_config(epochs=0), corpus)
    assert history == []
    again, _ = train(small_config(epochs=0), corpus)
    for a, b in zip(model.arrays(), again.arrays()):
        np.testing.assert_array_equal(a, b)


def test_deterministic(corpus):
    cfg = small_config(loss=LossSpec.circle(60, 0.4), margin_mode="chunk")
    m1, h1 = train(cfg, corpus)
    m2, h2 = train(cfg, corpus)
    assert h1 == h2
    for a, b in zip(m1.arrays(), m2.arrays()):
        assert a.tobytes() == b.tobytes()


def test_seed_changes_run(corpus):
    _, h1 = train(small_config(seed=1), corpus)
    _, h2 = train(small_config(seed=2), corpus)
    assert h1 != h2


def test_noiseless_reaches_full_accuracy():
    corpus = generate_corpus(SyntheticCorpusSpec(8, 10, 16, 60, 0.0, 0.0, seed=1))
    model, _ = train(TrainConfig(loss=LossSpec.softmax(30.0), epochs=5, seed=1), corpus)
    pred = np.argmax(embed(model, corpus.frames) @ model.classifier, axis=1)
    assert np.mean(pred == corpus.labels) == 1.0


def test_unit_norm_after_every_epoch(corpus):
    seen = []

    def check(model, diag):
        seen.append(np.max(np.abs(np.linalg.norm(model.classifier, axis=0) - 1)))
        u = embed(model, corpus.frames)
        seen.append(np.max(np.abs(np.linalg.norm(u, axis=1) - 1)))

    train(small_config(), corpus, callback=check)
    assert max(seen) <= 1e-9


def test_stage_margins_in_diagnostics(corpus):
    cfg = small_config(epochs=6, margin_mode="stage")
    _, history = train(cfg, corpus)
    sched = StageSchedule(cfg.stage_margins)
    assert [d.margin for d in history] == [stage_margin(sched, cfg.stage(e)) for e in range(6)]


def test_chunk_margins_within_bounds(corpus):
    cfg = small_config(epochs=3, margin_mode="chunk", chunk_lambda=0.5)
    _, history = train(cfg, corpus)
    for d in history:
        assert 0.5 * 0.4 - 1e-15 <= d.margin <= 0.4 + 1e-15


def test_diagnostics_consistent(corpus):
    _, history = train(small_config(), corpus)
    assert [d.epoch for d in history] == [1, 2, 3]
    for d in history:
        assert d.r_mean == math.sqrt((1 - d.s_p_mean) ** 2 + d.s_n_mean**2)
        assert d.loss >= 0


def test_similarity_stats_brute_force(corpus):
    model, _ = train(small_config(epochs=1), corpus)
    sp, sn = similarity_stats(model, corpus.frames, corpus.labels)
    u = embed(model, corpus.frames)
    pos, neg = [], []
    for i, y in enumerate(corpus.labels):
        for j in range(corpus.num_speakers):
            (pos if j == y else neg).append(float(u[i] @ model.classifier[:, j]))
    assert sp == pytest.approx(np.mean(pos), rel=1e-12)
    assert sn == pytest.approx(np.mean(neg), rel=1e-12, abs=1e-15)


def test_non_finite_aborts(corpus):
    bad = generate_corpus(SMALL)
    bad.frames[0] = np.nan
    with pytest.raises(NumericalError) as info:
        train(small_config(batch_size=100), bad)
    assert info.value.state["epoch"] == 1
