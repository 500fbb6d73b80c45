"""Command-line entry point: gen-data, train, eval and sweep."""

from pathlib import Path
from typing import List, Optional, Sequence
import argparse
import sys

import orjson
import structlog

from rimsa.autodiff.checkpoint import load_checkpoint
from rimsa.config import ExperimentConfig, get_settings, load_config
from rimsa.controller.model import RimsaController, parameter_counts
from rimsa.errors import (
    ConfigError,
    EmptyDatasetError,
    FormatError,
    ShapeError,
    SequenceOverflowError,
)
from rimsa.experiments import AXES, run_sweep, with_overrides, write_sweep_csv
from rimsa.training.dataset import generate_dataset, load_dataset, save_dataset
from rimsa.training.evaluation import evaluate, random_baseline, zf_reference
from rimsa.training.trainer import train
from rimsa.utils.logging import configure_logging

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
DATA_ERRORS = (
    ConfigError,
    FormatError,
    EmptyDatasetError,
    ShapeError,
    SequenceOverflowError,
    OSError,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dumps(payload) -> str:
    return orjson.dumps(payload, option=orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2).decode()


def _config_path(args: argparse.Namespace, fallback: Optional[Path] = None) -> Path:
    path = args.config or get_settings().config
    if path:
        return Path(path)
    if fallback is not None and fallback.exists():
        return fallback
    raise ConfigError("no configuration given; pass --config or set RIMSA_CONFIG")


def _seeded(exp: ExperimentConfig, seed: Optional[int]) -> ExperimentConfig:
    if seed is None:
        return exp
    return with_overrides(
        exp,
        f"--seed {seed}",
        controller={"seed": seed},
        training={"seed": seed},
        data={"seed": seed},
    )


def cmd_gen_data(args: argparse.Namespace) -> int:
    exp = _seeded(load_config(_config_path(args)), args.seed)
    seed = exp.data.seed
    ds = generate_dataset(
        exp.system, exp.data.split_sizes(args.samples), seed=seed, workers=args.workers
    )
    save_dataset(args.out, ds)
    print(_dumps(ds.summary()))
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    exp = _seeded(load_config(_config_path(args)), args.seed)
    overrides = {}
    if args.utility:
        overrides["utility"] = args.utility
    if args.epochs:
        overrides["epochs"] = args.epochs
    if overrides:
        exp = with_overrides(exp, "command line", training=overrides)

    ds = load_dataset(args.dataset)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    checkpoint = out_dir / "best.rmck"

    model = RimsaController(exp.system, exp.controller)
    trainable, frozen = parameter_counts(model)
    logger.info(
        f"Training with {exp.training.utility} utility; val_loss is the negated "
        f"{'max-min' if exp.training.utility == 'maxmin' else 'sum'} rate",
        trainable=trainable,
        frozen=frozen,
    )
    exp.dump(checkpoint.with_name(checkpoint.name + ".json"))
    report = train(model, ds, exp.training, exp.system, checkpoint_path=checkpoint)

    report.tracker.write_csv(out_dir / "metrics.csv")
    (out_dir / "metrics.json").write_bytes(report.tracker.to_json())
    print(
        _dumps(
            {
                "checkpoint": str(checkpoint),
                "epochs_run": report.epochs_run,
                "best_epoch": report.best_epoch,
                "best_val_loss": report.best_val_loss,
                "early_stopped": report.early_stopped,
            }
        )
    )
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    if args.checkpoint is None and not args.random_only:
        raise ConfigError("eval needs --checkpoint unless --random-only is given")
    sidecar = Path(f"{args.checkpoint}.json") if args.checkpoint else None
    exp = _seeded(load_config(_config_path(args, fallback=sidecar)), args.seed)
    seed = exp.data.seed

    ds = load_dataset(args.dataset)
    ds.check_compatible(exp.system)
    split = ds.split(args.split)

    results = {"dataset": ds.summary(), "split": args.split}
    results["random"] = random_baseline(exp.system, split, seed).to_dict()
    if not args.random_only:
        model = RimsaController(exp.system, exp.controller)
        load_checkpoint(args.checkpoint, model.checkpoint_tensors())
        results["model"] = evaluate(model, split, exp.system).to_dict()
        results["zf_oracle"] = zf_reference(exp.system, split, seed).to_dict()
    print(_dumps(results))
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    exp = _seeded(load_config(_config_path(args)), args.seed)
    seed = exp.data.seed
    rows = run_sweep(
        exp, args.axis, args.values, base_seed=seed, workers=args.workers, n_train=args.samples
    )
    write_sweep_csv(args.out, rows)
    logger.info(f"Wrote {len(rows)} sweep rows", path=str(args.out))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rimsa", description="RIMSA channel simulation and learned control")
    parser.add_argument("--config", help="experiment config JSON (default: $RIMSA_CONFIG)")
    parser.add_argument("--log-level", default=None)
    parser.add_argument("--log-json", action="store_true", default=None)
    parser.add_argument("--seed", type=int, default=None)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen-data", help="generate a pilot/channel dataset")
    gen.add_argument("out")
    gen.add_argument("--samples", type=int, default=None, help="training samples")
    gen.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    gen.add_argument("--workers", type=int, default=1)
    gen.set_defaults(handler=cmd_gen_data)

    tr = sub.add_parser("train", help="train a controller")
    tr.add_argument("dataset")
    tr.add_argument("out_dir")
    tr.add_argument("--utility", choices=["sum", "maxmin"], default=None)
    tr.add_argument("--epochs", type=int, default=None)
    tr.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    tr.set_defaults(handler=cmd_train)

    ev = sub.add_parser("eval", help="score a checkpoint and the reference methods")
    ev.add_argument("dataset")
    ev.add_argument("--checkpoint", default=None)
    ev.add_argument("--random-only", action="store_true")
    ev.add_argument("--split", choices=["train", "val", "test"], default="test")
    ev.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    ev.set_defaults(handler=cmd_eval)

    sw = sub.add_parser("sweep", help="sweep one experiment axis")
    sw.add_argument("axis", choices=AXES)
    sw.add_argument("--values", type=float, nargs="+", required=True)
    sw.add_argument("--out", required=True)
    sw.add_argument("--workers", type=int, default=1)
    sw.add_argument("--samples", type=int, default=None)
    sw.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    sw.set_defaults(handler=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_settings()
    configure_logging(
        args.log_level or settings.log_level,
        json=settings.log_json if args.log_json is None else args.log_json,
    )
    try:
        return args.handler(args)
    except DATA_ERRORS as e:
        logger.error(f"{args.command} failed: {e}", error_type=type(e).__name__)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


def run(argv: Optional[List[str]] = None) -> None:
    sys.exit(main(argv))


if __name__ == "__main__":
    run()
