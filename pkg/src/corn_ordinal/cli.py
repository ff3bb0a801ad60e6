"""Command-line entry point: ``train``, ``evaluate``, ``compare``, ``synth``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import data as data_mod
from .heads import HEAD_KINDS
from .labels import LabelError
from .training import RunConfig, evaluate_checkpoint, format_table, run_compare, run_train

log = logging.getLogger("corn_ordinal")

# config-file key -> argparse dest
CONFIG_KEYS = {
    "method": "method", "data": "data", "k": "k", "hidden": "hidden", "lr": "lr",
    "batch-size": "batch_size", "batch_size": "batch_size", "epochs": "epochs", "seeds": "seeds",
    "out": "out", "weight-decay": "weight_decay", "weight_decay": "weight_decay",
    "dropout": "dropout", "split-seed": "split_seed", "split_seed": "split_seed",
    "label-column": "label_column", "label_column": "label_column",
    "remap-labels": "remap_labels", "remap_labels": "remap_labels",
    "no-balance": "no_balance", "no_balance": "no_balance",
}


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", ",").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _bool(text: str) -> bool:
    if text.lower() in ("1", "true", "yes", "on"):
        return True
    if text.lower() in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: expected key=value with a known key, got {raw!r}")
        values[CONFIG_KEYS[key]] = value.strip()
    return values


def _apply_config(args: argparse.Namespace) -> None:
    if not getattr(args, "config", None):
        return
    converters = {
        "k": int, "hidden": _int_list, "lr": float, "batch_size": int, "epochs": int, "seeds": _int_list,
        "weight_decay": float, "dropout": float, "split_seed": int, "label_column": int,
        "remap_labels": _bool, "no_balance": _bool,
    }
    for dest, value in read_config_file(args.config).items():
        try:
            setattr(args, dest, converters.get(dest, str)(value))
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"config value for {dest}: {exc}") from None


def _add_run_flags(p: argparse.ArgumentParser, with_method: bool) -> None:
    if with_method:
        p.add_argument("--method", default="corn", help=f"one of {', '.join(HEAD_KINDS)}")
    p.add_argument("--data", help="CSV path or synth:n=..,d=..,k=..,noise=..,seed=..")
    p.add_argument("--k", type=int, help="number of ranks (default: largest label)")
    p.add_argument("--hidden", type=_int_list, help="hidden widths, e.g. 300,300 (default: per method)")
    p.add_argument("--lr", type=float, help="learning rate (default: per method)")
    p.add_argument("--batch-size", type=int, help="minibatch size (default: per method)")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--seeds", type=_int_list, default=[0, 1, 2, 3, 4])
    p.add_argument("--out", default="runs")
    p.add_argument("--weight-decay", type=float, default=0.2)
    p.add_argument("--dropout", type=float, default=0.2)
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--label-column", type=int, default=-1, help="index of the label column (default: last)")
    p.add_argument("--remap-labels", action="store_true", help="map sorted distinct label values to 1..K")
    p.add_argument("--no-balance", action="store_true", help="skip class balancing")
    p.add_argument("--config", help="key=value file; its values override flags")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="corn-ordinal", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log every epoch")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one method over a list of seeds")
    _add_run_flags(p, with_method=True)

    p = sub.add_parser("compare", help="train all four methods on identical splits and seeds")
    _add_run_flags(p, with_method=False)

    p = sub.add_parser("evaluate", help="score a checkpoint on a dataset")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split-file", help="restrict to the row ids listed in a split manifest")
    p.add_argument("--label-column", type=int, default=-1)
    p.add_argument("--remap-labels", action="store_true")

    p = sub.add_parser("synth", help="write a synthetic ordinal CSV dataset")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--d", type=int, default=8)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")
    return parser


def _run_config(args, method: str) -> RunConfig:
    if not args.data:
        raise UsageError("--data is required")
    try:
        return RunConfig(
            method=method, data=args.data, num_classes=args.k, hidden_dims=args.hidden, lr=args.lr,
            batch_size=args.batch_size, epochs=args.epochs, seeds=args.seeds, out=args.out,
            weight_decay=args.weight_decay, dropout_p=args.dropout, split_seed=args.split_seed,
            balance=not args.no_balance, label_column=args.label_column, remap_labels=args.remap_labels,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("corn_ordinal.training").setLevel(logging.INFO if args.verbose else logging.WARNING)
    try:
        _apply_config(args)
        if args.command == "train":
            cfg = _run_config(args, args.method)
            reports = run_train(cfg)
            print(format_table({cfg.method: reports}), end="")
        elif args.command == "compare":
            cfg = _run_config(args, "corn")
            overrides = {"lr": args.lr, "batch_size": args.batch_size, "hidden_dims": args.hidden}
            table, _ = run_compare(cfg, overrides=overrides)
            print(table, end="")
        elif args.command == "evaluate":
            mae_, rmse_ = evaluate_checkpoint(args.checkpoint, args.data, args.split_file,
                                              label_column=args.label_column, remap_labels=args.remap_labels)
            print(f"MAE {mae_:.6f}\nRMSE {rmse_:.6f}")
        elif args.command == "synth":
            ds = data_mod.synth_ordinal(args.n, args.d, args.k, args.noise, args.seed)
            data_mod.write_csv(args.out, ds)
            print(f"wrote {len(ds)} rows to {args.out}", file=sys.stderr)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"corn-ordinal: error: {exc}", file=sys.stderr)
        return 2
    except (data_mod.DataError, LabelError, ValueError, OSError) as exc:
        print(f"corn-ordinal: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
