"""File formats: diagnostics/grid CSVs, model binaries, trial and score lists.

Model binary layout (all integers unsigned 32-bit little-endian)::

    b"AMCM"                  magic
    version                  currently 1
    n_arrays                 hidden (W, b) pairs, then projection, classifier
    per array: rows, cols, rows * cols float64 little-endian, row-major

Biases are stored as 1 x H arrays.  The hidden nonlinearity is ``tanh``.
"""

import csv
import struct

import numpy as np

from .network import ToyModel

MAGIC = b"AMCM"
VERSION = 1


def fmt(x):
    """17 significant digits: round-trips any double exactly."""
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, (int, np.integer, str)) else fmt(v) for v in row])


def read_csv(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    return rows[0], rows[1:]


def model_to_bytes(model):
    arrays = model.arrays()
    parts = [MAGIC, struct.pack("<II", VERSION, len(arrays))]
    for a in arrays:
        a2 = np.atleast_2d(np.asarray(a, dtype=np.float64))
        parts.append(struct.pack("<II", *a2.shape))
        parts.append(np.ascontiguousarray(a2, dtype="<f8").tobytes())
    return b"".join(parts)


def model_from_bytes(data):
    if data[:4] != MAGIC:
        raise ValueError("not a model file (bad magic)")
    version, n = struct.unpack_from("<II", data, 4)
    if version != VERSION:
        raise ValueError(f"unsupported model file version {version}")
    off = 12
    arrays = []
    for _ in range(n):
        rows, cols = struct.unpack_from("<II", data, off)
        off += 8
        size = rows * cols * 8
        if off + size > len(data):
            raise ValueError("truncated model file")
        arrays.append(np.frombuffer(data, dtype="<f8", count=rows * cols, offset=off)
                      .reshape(rows, cols).astype(np.float64))
        off += size
    if off != len(data):
        raise ValueError("trailing bytes in model file")
    return ToyModel.from_arrays(arrays)


def save_model(model, path):
    with open(path, "wb") as f:
        f.write(model_to_bytes(model))


def load_model(path):
    with open(path, "rb") as f:
        return model_from_bytes(f.read())


def read_trials(path):
    """Parse ``enroll_id test_id {1|0}`` lines."""
    trials = []
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3 or parts[2] not in ("0", "1"):
                raise ValueError(f"{path}:{lineno}: expected 'enroll test 0|1'")
            trials.append((parts[0], parts[1], parts[2] == "1"))
    return trials


def write_trials(path, trials):
    with open(path, "w") as f:
        for a, b, tgt in trials:
            f.write(f"{a} {b} {int(bool(tgt))}\n")


def write_scores(path, trials, scores):
    with open(path, "w") as f:
        for (a, b, _), t in zip(trials, scores):
            f.write(f"{a} {b} {fmt(t.score)}\n")


def read_scores(path):
    out = []
    with open(path) as f:
        for line in f:
            parts = line.split()
            if parts:
                out.append((parts[0], parts[1], float(parts[2])))
    return out
