"""End-to-end training runs: data prep, epoch loop, model selection, artifacts."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import data as data_mod
from .heads import HEAD_KINDS
from .metrics import TrainReport, mae, rmse
from .model import MlpConfig, MlpModel, init_parameters, load_checkpoint, save_checkpoint
from .optim import OptimizerState, adamw_step
from .tensor import backward

log = logging.getLogger(__name__)

METHOD_LABELS = {"ce": "CE-NN", "ornn": "OR-NN", "coral": "CORAL", "corn": "CORN"}
METHOD_ORDER = ("ce", "ornn", "coral", "corn")

# tuned Fireman settings per method
METHOD_DEFAULTS = {
    "corn": {"lr": 1e-3, "batch_size": 128, "hidden_dims": [300, 300]},
    "ornn": {"lr": 5e-4, "batch_size": 128, "hidden_dims": [300, 300]},
    "coral": {"lr": 5e-4, "batch_size": 64, "hidden_dims": [300, 200]},
    "ce": {"lr": 5e-4, "batch_size": 64, "hidden_dims": [300, 200]},
}


@dataclass
class RunConfig:
    method: str = "corn"
    data: str = ""
    num_classes: int | None = None
    hidden_dims: list[int] | None = None
    lr: float | None = None
    batch_size: int | None = None
    epochs: int = 200
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    out: str = "runs"
    weight_decay: float = 0.2
    dropout_p: float = 0.2
    split_seed: int = 0
    balance: bool = True
    label_column: int = -1
    remap_labels: bool = False

    def __post_init__(self):
        self.method = self.method.lower()
        if self.method not in HEAD_KINDS:
            raise ValueError(f"unknown method {self.method!r}; choose from {', '.join(HEAD_KINDS)}")
        defaults = METHOD_DEFAULTS[self.method]
        if self.lr is None:
            self.lr = defaults["lr"]
        if self.batch_size is None:
            self.batch_size = defaults["batch_size"]
        if self.hidden_dims is None:
            self.hidden_dims = list(defaults["hidden_dims"])
        if self.lr <= 0 or self.batch_size <= 0 or self.epochs <= 0:
            raise ValueError("lr, batch_size and epochs must be positive")
        if any(h <= 0 for h in self.hidden_dims):
            raise ValueError("hidden widths must be positive")
        if not self.seeds:
            raise ValueError("need at least one seed")

    def for_method(self, method: str, keep_overrides: dict | None = None) -> "RunConfig":
        """Same run with another method; per-method defaults unless overridden."""
        fields = asdict(self)
        fields["method"] = method
        for key in ("lr", "batch_size", "hidden_dims"):
            fields[key] = (keep_overrides or {}).get(key)
        return RunConfig(**fields)


def load_dataset(spec: str, num_classes: int | None = None, label_column: int = -1, remap_labels: bool = False):
    """Load a CSV path, or build synthetic data from ``synth:n=..,d=..,k=..,noise=..,seed=..``."""
    if spec.startswith("synth:"):
        params = dict(n=2000, d=8, k=num_classes or 5, noise=0.0, seed=0)
        for item in filter(None, spec[len("synth:"):].split(",")):
            key, _, value = item.partition("=")
            if key.strip() not in params:
                raise ValueError(f"unknown synth parameter {key!r}")
            params[key.strip()] = type(params[key.strip()])(value)
        return data_mod.synth_ordinal(params["n"], params["d"], params["k"], params["noise"], params["seed"])
    return data_mod.load_csv(spec, num_classes, label_column=label_column, remap_labels=remap_labels)


def prepare_splits(ds: data_mod.Dataset, split_seed: int = 0, balance: bool = True):
    """balance -> split -> standardize; the partition depends on ``split_seed`` only."""
    if balance:
        ds = data_mod.balance_classes(ds, np.random.default_rng([split_seed, 7]))
    train, val, test = data_mod.split(ds, seed=split_seed)
    return data_mod.standardize(train, val, test)


def evaluate(model: MlpModel, ds: data_mod.Dataset) -> tuple[float, float]:
    pred = model.predict(ds.features)
    return mae(ds.labels, pred), rmse(ds.labels, pred)


def epoch_batches(n: int, batch_size: int, seed: int, epoch: int) -> list[np.ndarray]:
    """Shuffled minibatch indices; the last short batch is kept."""
    perm = np.random.default_rng([seed, epoch]).permutation(n)
    return [perm[i:i + batch_size] for i in range(0, n, batch_size)]


def train_model(train, val, method: str, hidden_dims, lr: float, batch_size: int, epochs: int, seed: int,
                weight_decay: float = 0.2, dropout_p: float = 0.2, report: TrainReport | None = None):
    """Train one model; returns it loaded with its best-validation-RMSE weights."""
    config = MlpConfig(train.n_features, list(hidden_dims), method, train.num_classes,
                       dropout_p=dropout_p, seed=seed)
    model = init_parameters(config)
    params = model.parameters()
    state = OptimizerState(lr=lr, weight_decay=weight_decay, decay_mask=model.decay_mask())
    x = train.features.astype(model.dtype)
    y = train.labels
    report = report if report is not None else TrainReport(method=method, seed=seed)
    best_rmse, best_arrays = np.inf, model.get_arrays()

    for epoch in range(1, epochs + 1):
        model.train()
        losses = []
        for idx in epoch_batches(len(y), batch_size, seed, epoch):
            loss = model.loss(x[idx], y[idx])
            backward(loss)
            adamw_step([p.data for p in params], [p.grad for p in params], state)
            losses.append(loss.item())
        val_mae, val_rmse = evaluate(model, val)
        report.add_epoch(float(np.mean(losses)), val_mae, val_rmse)
        if val_rmse < best_rmse:
            best_rmse, best_arrays = val_rmse, model.get_arrays()
            report.selected_epoch = epoch
        log.info("%s seed=%d epoch %d/%d loss=%.4f val_mae=%.4f val_rmse=%.4f",
                 method, seed, epoch, epochs, np.mean(losses), val_mae, val_rmse)

    model.set_arrays(best_arrays)
    model.eval()
    return model, report


def run_seed(cfg: RunConfig, splits, seed: int, out_dir: Path) -> TrainReport:
    train, val, test = splits
    out_dir.mkdir(parents=True, exist_ok=True)
    snapshot = {k: v for k, v in asdict(cfg).items() if k not in ("seeds", "out")}
    report = TrainReport(method=cfg.method, seed=seed, config=snapshot)
    model, report = train_model(train, val, cfg.method, cfg.hidden_dims, cfg.lr, cfg.batch_size, cfg.epochs,
                                seed, cfg.weight_decay, cfg.dropout_p, report)
    report.test_mae, report.test_rmse = evaluate(model, test)

    save_checkpoint(out_dir / "checkpoint.bin", model, {"mean": train.mean, "std": train.std})
    report.write(out_dir / "report.jsonl")
    for name, part in zip(("train", "val", "test"), splits):
        write_manifest(out_dir / f"split_{name}.idx", part.row_ids)
    (out_dir / "summary.txt").write_text(
        f"method: {METHOD_LABELS[cfg.method]}\n"
        f"seed: {seed}\n"
        f"selected_epoch: {report.selected_epoch}\n"
        f"test_mae: {report.test_mae:.6f}\n"
        f"test_rmse: {report.test_rmse:.6f}\n"
    )
    log.info("%s seed=%d done: epoch %d, test MAE %.4f RMSE %.4f",
             cfg.method, seed, report.selected_epoch, report.test_mae, report.test_rmse)
    return report


def write_manifest(path, row_ids) -> None:
    Path(path).write_text("".join(f"{int(i)}\n" for i in row_ids))


def read_manifest(path) -> np.ndarray:
    return np.array([int(line) for line in Path(path).read_text().split()], dtype=np.int64)


def run_train(cfg: RunConfig, ds=None, splits=None) -> list[TrainReport]:
    if splits is None:
        if ds is None:
            ds = load_dataset(cfg.data, cfg.num_classes, cfg.label_column, cfg.remap_labels)
        splits = prepare_splits(ds, cfg.split_seed, cfg.balance)
    method_dir = Path(cfg.out) / cfg.method
    reports = [run_seed(cfg, splits, seed, method_dir / f"seed_{seed}") for seed in cfg.seeds]
    (method_dir / "summary.txt").write_text(format_table({cfg.method: reports}))
    return reports


def run_compare(cfg: RunConfig, methods=METHOD_ORDER, overrides: dict | None = None) -> tuple[str, dict]:
    """All methods on identical splits and seeds; returns (table, reports)."""
    ds = load_dataset(cfg.data, cfg.num_classes, cfg.label_column, cfg.remap_labels)
    splits = prepare_splits(ds, cfg.split_seed, cfg.balance)
    results = {}
    for method in methods:
        results[method] = run_train(cfg.for_method(method, overrides), splits=splits)
    table = format_table(results)
    Path(cfg.out).mkdir(parents=True, exist_ok=True)
    (Path(cfg.out) / "comparison.txt").write_text(table)
    return table, results


def mean_sd(values) -> tuple[float, float]:
    values = np.asarray(values, dtype=np.float64)
    sd = float(values.std(ddof=1)) if len(values) > 1 else 0.0
    return float(values.mean()), sd


def format_table(results: dict) -> str:
    """Per-seed test MAE/RMSE rows plus an AVG+-SD row per method."""
    lines = [f"{'Method':<8} {'Seed':<8} {'MAE':>13} {'RMSE':>13}"]
    for method, reports in results.items():
        lines.append("-" * len(lines[0]))
        for i, r in enumerate(reports):
            name = METHOD_LABELS[method] if i == 0 else ""
            lines.append(f"{name:<8} {r.seed:<8} {r.test_mae:>13.2f} {r.test_rmse:>13.2f}")
        m_avg, m_sd = mean_sd([r.test_mae for r in reports])
        r_avg, r_sd = mean_sd([r.test_rmse for r in reports])
        lines.append(f"{'':<8} {'AVG±SD':<8} {f'{m_avg:.2f} ± {m_sd:.2f}':>13} {f'{r_avg:.2f} ± {r_sd:.2f}':>13}")
    return "\n".join(lines) + "\n"


def evaluate_checkpoint(checkpoint, data_spec: str, manifest=None, num_classes=None,
                        label_column: int = -1, remap_labels: bool = False) -> tuple[float, float]:
    """Score a saved model on a dataset, optionally restricted to manifest rows."""
    model, extra = load_checkpoint(checkpoint)
    ds = load_dataset(data_spec, num_classes or model.config.num_classes, label_column, remap_labels)
    if ds.n_features != model.config.input_dim:
        raise ValueError(f"checkpoint expects {model.config.input_dim} features, data has {ds.n_features}")
    if ds.num_classes != model.config.num_classes:
        raise ValueError(f"checkpoint expects K={model.config.num_classes}, data has K={ds.num_classes}")
    if manifest is not None:
        ds = ds.subset(read_manifest(manifest))
    if "mean" in extra:
        ds = data_mod.apply_standardization(ds, extra["mean"], extra["std"])
    return evaluate(model, ds)
