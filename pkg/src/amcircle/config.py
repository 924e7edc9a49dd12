"""Run configuration files.

INI syntax; every option is addressed by its dotted name ``section.key``.
Unknown sections or keys are rejected.  Defaults (see ``DEFAULTS``)::

    [run]     seed = 0
    [loss]    variant = circle, s = 60, m = 0.4, m1 = 1, m2 = 0, m3 = 0
    [margin]  mode = fixed, stage_margins = 0.40, 0.35, 0.32, lambda = 0.25
    [train]   epochs = 15, batch_size = 64, lr = 0.01, momentum = 0.9,
              weight_decay = 0.001, lr_drop = 10,
              chunk_intervals = 20-40, 30-50, 40-60, stage_boundaries = (even),
              hidden_dim = 64, n_hidden = 2, embed_dim = 32, diag_fraction = 0.1
    [corpus]  num_speakers = 50, utterances_per_speaker = 20, frame_dim = 16,
              max_frames = 60, noise = 1.0, label_noise = 0.05,
              seed = (run.seed)
    [eval]    num_speakers = 20, utterances_per_speaker = 10,
              noise = (corpus.noise), seed = (corpus.seed + 1000),
              trials = (all pairs), bins = 40,
              p_target = 0.01, c_miss = 1, c_fa = 1,
              train_eer = true (train command also scores the training split)
    [output]  dir = out
"""

import configparser
from dataclasses import dataclass
from pathlib import Path

from .corpus import SyntheticCorpusSpec
from .exceptions import ConfigError
from .losses import LossSpec
from .metrics import DcfSpec
from .training import TrainConfig


def _floats(text):
    return tuple(float(v) for v in text.replace(",", " ").split())


def _ints(text):
    return tuple(int(v) for v in text.replace(",", " ").split())


def _intervals(text):
    out = []
    for item in text.split(","):
        lo, sep, hi = item.strip().partition("-")
        if not sep:
            raise ValueError(f"interval {item.strip()!r} is not 'lo-hi'")
        out.append((int(lo), int(hi)))
    return tuple(out)


def _bool(text):
    return text.strip().lower() in ("1", "true", "yes", "on")


# dotted key -> (parser, default); None default means derived or absent
DEFAULTS = {
    "run.seed": (int, 0),
    "loss.variant": (str, "circle"),
    "loss.s": (float, 60.0),
    "loss.m": (float, 0.4),
    "loss.m1": (float, 1.0),
    "loss.m2": (float, 0.0),
    "loss.m3": (float, 0.0),
    "margin.mode": (str, "fixed"),
    "margin.stage_margins": (_floats, (0.40, 0.35, 0.32)),
    "margin.lambda": (float, 0.25),
    "train.epochs": (int, 15),
    "train.batch_size": (int, 64),
    "train.lr": (float, 0.01),
    "train.momentum": (float, 0.9),
    "train.weight_decay": (float, 1e-3),
    "train.lr_drop": (float, 10.0),
    "train.chunk_intervals": (_intervals, ((20, 40), (30, 50), (40, 60))),
    "train.stage_boundaries": (_ints, None),
    "train.hidden_dim": (int, 64),
    "train.n_hidden": (int, 2),
    "train.embed_dim": (int, 32),
    "train.diag_fraction": (float, 0.1),
    "corpus.num_speakers": (int, 50),
    "corpus.utterances_per_speaker": (int, 20),
    "corpus.frame_dim": (int, 16),
    "corpus.max_frames": (int, 60),
    "corpus.noise": (float, 1.0),
    "corpus.label_noise": (float, 0.05),
    "corpus.seed": (int, None),
    "eval.num_speakers": (int, 20),
    "eval.utterances_per_speaker": (int, 10),
    "eval.noise": (float, None),
    "eval.seed": (int, None),
    "eval.trials": (str, None),
    "eval.bins": (int, 40),
    "eval.p_target": (float, 0.01),
    "eval.c_miss": (float, 1.0),
    "eval.c_fa": (float, 1.0),
    "eval.train_eer": (_bool, True),
    "output.dir": (str, "out"),
}


@dataclass(frozen=True)
class RunConfig:
    train: TrainConfig
    corpus: SyntheticCorpusSpec
    eval_corpus: SyntheticCorpusSpec
    dcf: DcfSpec
    trials: str
    bins: int
    train_eer: bool
    out_dir: Path


def read_flat(path):
    """Dotted ``section.key -> raw string`` mapping from an INI file."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        with open(path) as f:
            parser.read_file(f)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    flat = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            flat[f"{section}.{key}"] = value
    return flat


def parse_flat(raw):
    """Typed values for every known key; raises ConfigError naming a bad key."""
    values = {}
    for key, text in raw.items():
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config key {key!r}")
        conv, _ = DEFAULTS[key]
        try:
            values[key] = conv(text) if isinstance(text, str) else text
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from exc
    for key, (_, default) in DEFAULTS.items():
        values.setdefault(key, default)
    return values


def _build(key, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ConfigError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def build_run_config(values):
    v = values
    seed = v["run.seed"]
    loss = _build("loss", LossSpec, v["loss.variant"], s=v["loss.s"], m1=v["loss.m1"],
                  m2=v["loss.m2"], m3=v["loss.m3"], m=v["loss.m"])
    train = _build(
        "train/margin", TrainConfig,
        loss=loss,
        margin_mode=v["margin.mode"],
        stage_margins=v["margin.stage_margins"],
        chunk_lambda=v["margin.lambda"],
        lr=v["train.lr"],
        momentum=v["train.momentum"],
        weight_decay=v["train.weight_decay"],
        lr_drop=v["train.lr_drop"],
        batch_size=v["train.batch_size"],
        epochs=v["train.epochs"],
        chunk_intervals=v["train.chunk_intervals"],
        stage_boundaries=v["train.stage_boundaries"],
        hidden_dim=v["train.hidden_dim"],
        n_hidden=v["train.n_hidden"],
        embed_dim=v["train.embed_dim"],
        diag_fraction=v["train.diag_fraction"],
        seed=seed,
    )
    corpus_seed = seed if v["corpus.seed"] is None else v["corpus.seed"]
    corpus = _build(
        "corpus", SyntheticCorpusSpec,
        num_speakers=v["corpus.num_speakers"],
        utterances_per_speaker=v["corpus.utterances_per_speaker"],
        frame_dim=v["corpus.frame_dim"],
        max_frames=v["corpus.max_frames"],
        within_speaker_noise=v["corpus.noise"],
        label_noise_rate=v["corpus.label_noise"],
        seed=corpus_seed,
    )
    eval_corpus = _build(
        "eval", SyntheticCorpusSpec,
        num_speakers=v["eval.num_speakers"],
        utterances_per_speaker=v["eval.utterances_per_speaker"],
        frame_dim=corpus.frame_dim,
        max_frames=corpus.max_frames,
        within_speaker_noise=corpus.within_speaker_noise if v["eval.noise"] is None else v["eval.noise"],
        label_noise_rate=0.0,
        seed=corpus_seed + 1000 if v["eval.seed"] is None else v["eval.seed"],
    )
    dcf = _build("eval", DcfSpec, v["eval.p_target"], v["eval.c_miss"], v["eval.c_fa"])
    if v["eval.bins"] < 1:
        raise ConfigError("eval.bins: must be >= 1")
    return RunConfig(train, corpus, eval_corpus, dcf, v["eval.trials"], v["eval.bins"],
                     v["eval.train_eer"], Path(v["output.dir"]))


def load_run_config(path=None, overrides=None):
    """Read ``path`` (optional), apply dotted-key ``overrides``, build RunConfig."""
    raw = read_flat(path) if path is not None else {}
    raw.update(overrides or {})
    return build_run_config(parse_flat(raw))
