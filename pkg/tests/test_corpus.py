import numpy as np
import pytest

from amcircle.corpus import SyntheticCorpusSpec, generate_corpus, sample_chunk, sample_chunk_width
from amcircle.exceptions import ConfigError, DomainError


def test_deterministic():
    spec = SyntheticCorpusSpec(5, 4, 6, 12, 0.7, 0.2, seed=9)
    a, b = generate_corpus(spec), generate_corpus(spec)
    assert a.frames.tobytes() == b.frames.tobytes()
    np.testing.assert_array_equal(a.labels, b.labels)


def test_noiseless_utterances_identical():
    c = generate_corpus(SyntheticCorpusSpec(4, 3, 5, 8, 0.0, 0.0, seed=2))
    for spk in range(4):
        utts = c.frames[c.true_labels == spk]
        assert np.all(utts == utts[0, 0])
    np.testing.assert_allclose(np.linalg.norm(c.directions, axis=1), 1.0)


def test_label_noise_count():
    c = generate_corpus(SyntheticCorpusSpec(100, 10, 4, 2, 1.0, 0.1, seed=3))
    changed = np.flatnonzero(c.labels != c.true_labels)
    assert changed.size == 100
    np.testing.assert_array_equal(changed, c.relabeled)


@pytest.mark.parametrize("kwargs", [dict(frame_dim=1), dict(num_speakers=1), dict(label_noise_rate=1.0)])
def test_invalid_spec(kwargs):
    with pytest.raises(ConfigError):
        SyntheticCorpusSpec(**kwargs)


class TestSampleChunk:
    utt = np.arange(10.0).reshape(5, 2)

    def test_full_length(self):
        np.testing.assert_array_equal(sample_chunk(self.utt, 5, np.random.default_rng(0)), self.utt)

    def test_single_frame_reproducible(self):
        a = sample_chunk(self.utt, 1, np.random.default_rng(4))
        b = sample_chunk(self.utt, 1, np.random.default_rng(4))
        assert a.shape == (1, 2)
        np.testing.assert_array_equal(a, b)
        assert any((a == row).all() for row in self.utt)

    def test_cyclic_extension(self):
        out = sample_chunk(self.utt, 10, np.random.default_rng(1))
        np.testing.assert_array_equal(out, np.concatenate([self.utt, self.utt]))

    def test_contiguous(self):
        rng = np.random.default_rng(0)
        for L in range(1, 13):
            out = sample_chunk(self.utt, L, rng)
            assert out.shape == (L, 2)
            assert np.all(np.diff(out[:, 0]) % 10 == 2) or L == 1

    def test_empty(self):
        with pytest.raises(DomainError):
            sample_chunk(np.empty((0, 2)), 3, np.random.default_rng(0))


class TestChunkWidth:
    def test_degenerate(self):
        assert sample_chunk_width((300, 300), np.random.default_rng(0)) == 300

    def test_mean(self):
        rng = np.random.default_rng(123)
        draws = [sample_chunk_width((200, 400), rng) for _ in range(100_000)]
        assert min(draws) == 200 and max(draws) == 400
        assert abs(np.mean(draws) - 300) < 1

    def test_reproducible(self):
        a = [sample_chunk_width((20, 40), np.random.default_rng(5)) for _ in range(3)]
        r1, r2 = np.random.default_rng(8), np.random.default_rng(8)
        assert [sample_chunk_width((20, 40), r1) for _ in range(50)] == [
            sample_chunk_width((20, 40), r2) for _ in range(50)]
        assert len(set(a)) == 1

    def test_empty_interval(self):
        with pytest.raises(ConfigError):
            sample_chunk_width((40, 20), np.random.default_rng(0))
