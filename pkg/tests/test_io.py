import struct

import numpy as np
import pytest

from amcircle import io
from amcircle.network import init_model


def test_fmt_round_trips():
    rng = np.random.default_rng(0)
    for x in rng.normal(size=200) * 10.0 ** rng.integers(-20, 20, 200):
        assert float(io.fmt(x)) == x


def test_csv_round_trip(tmp_path):
    path = tmp_path / "d.csv"
    io.write_csv(path, ("epoch", "x"), [(1, 0.1), (2, 1 / 3)])
    header, rows = io.read_csv(path)
    assert header == ["epoch", "x"]
    assert rows == [["1", "0.10000000000000001"], ["2", "0.33333333333333331"]]
    assert path.read_bytes().endswith(b"\n") and b"\r" not in path.read_bytes()


def test_model_round_trip(tmp_path):
    model = init_model(3, 4, np.random.default_rng(1), hidden_dim=5, n_hidden=2, embed_dim=2)
    io.save_model(model, tmp_path / "m.bin")
    again = io.load_model(tmp_path / "m.bin")
    for a, b in zip(model.arrays(), again.arrays()):
        np.testing.assert_array_equal(a, b)
    assert io.model_to_bytes(again) == (tmp_path / "m.bin").read_bytes()


def test_model_layout():
    model = init_model(2, 3, np.random.default_rng(2), hidden_dim=2, n_hidden=1, embed_dim=2)
    data = io.model_to_bytes(model)
    assert data[:4] == b"AMCM"
    assert struct.unpack_from("<II", data, 4) == (1, 4)
    assert struct.unpack_from("<II", data, 12) == (2, 2)
    first = np.frombuffer(data, "<f8", 4, 20).reshape(2, 2)
    np.testing.assert_array_equal(first, model.hidden[0][0])
    assert len(data) == 12 + 4 * 8 + 8 * (4 + 2 + 4 + 6)


@pytest.mark.parametrize("mutate", [
    lambda d: b"XXXX" + d[4:],
    lambda d: d[:4] + struct.pack("<I", 9) + d[8:],
    lambda d: d[:-8],
    lambda d: d + b"\0",
])
def test_model_rejects_corrupt(mutate):
    data = io.model_to_bytes(init_model(2, 3, np.random.default_rng(2), 2, 1, 2))
    with pytest.raises(ValueError):
        io.model_from_bytes(mutate(data))


def test_trials_and_scores(tmp_path):
    trials = [("a", "b", True), ("a", "c", False)]
    io.write_trials(tmp_path / "t.txt", trials)
    assert (tmp_path / "t.txt").read_text() == "a b 1\na c 0\n"
    assert io.read_trials(tmp_path / "t.txt") == trials

    class S:
        def __init__(self, score):
            self.score = score

    io.write_scores(tmp_path / "s.txt", trials, [S(0.5), S(-1 / 3)])
    assert io.read_scores(tmp_path / "s.txt") == [("a", "b", 0.5), ("a", "c", -1 / 3)]


def test_bad_trial_line(tmp_path):
    (tmp_path / "t.txt").write_text("a b yes\n")
    with pytest.raises(ValueError, match="t.txt:1"):
        io.read_trials(tmp_path / "t.txt")
