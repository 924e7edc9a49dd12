"""Command-line entry point: ``amcircle {grad-field,train,eval,margin-plan}``.

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 numerical
failure.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import load_run_config
from .corpus import generate_corpus
from .exceptions import ConfigError, NumericalError
from .losses import LossSpec, toy_grad
from .metrics import similarity_histogram
from .pipeline import all_pair_trials, evaluate
from .schedules import ChunkMarginSpec, StageSchedule, chunk_margin, stage_margin
from .training import DIAG_HEADER, train

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3

GRAD_HEADER = ("s_p", "s_n", "dL_dsp", "dL_dsn")
HIST_HEADER = ("bin_left", "bin_right", "count")


def _overrides(args):
    out = {}
    if getattr(args, "seed", None) is not None:
        out["run.seed"] = str(args.seed)
    if getattr(args, "out", None) is not None:
        out["output.dir"] = args.out
    return out


def _config(args):
    return load_run_config(getattr(args, "config", None), _overrides(args))


def grad_field_rows(spec, resolution, C):
    """Toy-scenario gradients over a uniform ``resolution`` x ``resolution``
    grid on [0, 1]^2, ``s_p`` varying slowest."""
    if resolution < 2:
        raise ConfigError("resolution must be >= 2")
    axis = np.linspace(0.0, 1.0, resolution)
    sp, sn = np.meshgrid(axis, axis, indexing="ij")
    g = toy_grad(sp.ravel(), sn.ravel(), spec, C)
    return np.column_stack([sp.ravel(), sn.ravel(), g.g_p, g.g_n])


def cmd_grad_field(args):
    if args.loss == "circle":
        spec = LossSpec.circle(args.s or 60.0, 0.4 if args.m is None else args.m)
    else:
        spec = LossSpec.am_softmax(args.s or 30.0, 0.2 if args.m is None else args.m)
    rows = grad_field_rows(spec, args.resolution, args.classes)
    path = Path(args.output) if args.output else Path(getattr(args, "out", "out")) / "grad_field.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    io.write_csv(path, GRAD_HEADER, rows)
    print(f"wrote {len(rows)} rows to {path}")
    return EXIT_OK


def cmd_train(args):
    cfg = _config(args)
    corpus = generate_corpus(cfg.corpus)
    try:
        model, history = train(cfg.train, corpus)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(json.dumps(exc.state, default=float), file=sys.stderr)
        return EXIT_NUMERIC
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    io.write_csv(cfg.out_dir / "diagnostics.csv", DIAG_HEADER, [d.row() for d in history])
    io.save_model(model, cfg.out_dir / "model.bin")
    if history:
        last = history[-1]
        print(f"final loss {last.loss:.6f}  r_mean {last.r_mean:.6f}  margin {last.margin:.4f}")
    else:
        print("no epochs run")
    if cfg.train_eer:
        res = evaluate(model, corpus, dcf=cfg.dcf)
        print(f"train EER {100 * res.eer:.2f}%  minDCF {res.min_dcf:.3f}")
    return EXIT_OK


def cmd_eval(args):
    cfg = _config(args)
    model_path = Path(args.model) if args.model else cfg.out_dir / "model.bin"
    try:
        model = io.load_model(model_path)
    except ValueError as exc:
        raise OSError(f"{model_path}: {exc}") from exc
    corpus = generate_corpus(cfg.eval_corpus)
    if model.frame_dim != cfg.eval_corpus.frame_dim:
        raise ConfigError(
            f"corpus.frame_dim: model expects {model.frame_dim}, corpus has {cfg.eval_corpus.frame_dim}"
        )
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    if cfg.trials:
        trials = io.read_trials(cfg.trials)
    else:
        trials = all_pair_trials(corpus)
        io.write_trials(cfg.out_dir / "trials.txt", trials)
    res = evaluate(model, corpus, trials, cfg.dcf)
    io.write_scores(cfg.out_dir / "scores.txt", trials, res.scores)
    for name, want in (("hist_target.csv", True), ("hist_nontarget.csv", False)):
        edges, counts = similarity_histogram(
            [t.score for t in res.scores if t.is_target == want], cfg.bins
        )
        io.write_csv(cfg.out_dir / name, HIST_HEADER, zip(edges[:-1], edges[1:], counts.tolist()))
    report = f"EER {100 * res.eer:.2f}%  minDCF {res.min_dcf:.3f}  trials {len(trials)}"
    (cfg.out_dir / "eval_report.txt").write_text(report + "\n")
    print(report)
    return EXIT_OK


def margin_plan(train_cfg):
    """Rows of the effective margin: (epoch, stage, margin) for fixed and
    stage modes, (stage, L, margin) for chunk mode."""
    spec = train_cfg.loss
    if train_cfg.margin_mode == "chunk":
        rows = []
        for stage, (lo, hi) in enumerate(train_cfg.chunk_intervals):
            for L in range(lo, hi + 1):
                m = spec.m if lo == hi else chunk_margin(
                    ChunkMarginSpec(spec.m, train_cfg.chunk_lambda, lo, hi), L)
                rows.append((stage + 1, L, m))
        return ("stage", "L", "margin"), rows
    rows = []
    for epoch in range(train_cfg.epochs):
        stage = train_cfg.stage(epoch)
        if train_cfg.margin_mode == "stage":
            m = stage_margin(StageSchedule(train_cfg.stage_margins), stage)
        else:
            m = spec.m if spec.variant == "circle" else (spec.m3 or spec.m2)
        rows.append((epoch + 1, stage + 1, m))
    return ("epoch", "stage", "margin"), rows


def cmd_margin_plan(args):
    cfg = _config(args)
    header, rows = margin_plan(cfg.train)
    print("\t".join(header))
    for a, b, m in rows:
        print(f"{a}\t{b}\t{m!r}")
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    # SUPPRESS so a flag given before the subcommand is not reset after it
    common.add_argument("--config", default=argparse.SUPPRESS,
                        help="run configuration file (INI, dotted keys)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override run.seed")
    common.add_argument("--out", default=argparse.SUPPRESS, help="override output.dir")

    parser = argparse.ArgumentParser(prog="amcircle", parents=[common], description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("grad-field", parents=[common], help="export toy-scenario gradient grid")
    g.add_argument("--loss", choices=("circle", "am-softmax"), default="circle")
    g.add_argument("--s", type=float, default=None)
    g.add_argument("--m", type=float, default=None)
    g.add_argument("--classes", type=int, default=5994)
    g.add_argument("--resolution", type=int, default=101)
    g.add_argument("--output", help="CSV path (default <out>/grad_field.csv)")
    g.set_defaults(func=cmd_grad_field)

    t = sub.add_parser("train", parents=[common], help="train on the synthetic corpus")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", parents=[common], help="score held-out trials")
    e.add_argument("--model", help="model file (default <out>/model.bin)")
    e.set_defaults(func=cmd_eval)

    p = sub.add_parser("margin-plan", parents=[common], help="print the margin schedule")
    p.set_defaults(func=cmd_margin_plan)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, KeyError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
