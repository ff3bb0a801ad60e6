"""Multilayer perceptron with a pluggable ordinal output layer."""

from __future__ import annotations

import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .heads import HEAD_KINDS, OrdinalHead
from .tensor import Tensor, dropout, leaky_relu, matmul

CHECKPOINT_FORMAT = "corn-ordinal-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass
class MlpConfig:
    input_dim: int
    hidden_dims: list[int]
    head_kind: str
    num_classes: int
    leaky_slope: float = 0.01
    dropout_p: float = 0.2
    seed: int = 0
    dtype: str = "float32"

    def __post_init__(self):
        self.hidden_dims = [int(h) for h in self.hidden_dims]
        self.head_kind = self.head_kind.lower()
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be positive, got {self.input_dim}")
        if len(self.hidden_dims) not in (1, 2) or min(self.hidden_dims) < 1:
            raise ValueError(f"expected one or two positive hidden widths, got {self.hidden_dims}")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError(f"dropout_p must be in [0, 1), got {self.dropout_p}")
        if not 0.0 < self.leaky_slope < 1.0:
            raise ValueError(f"leaky_slope must be in (0, 1), got {self.leaky_slope}")
        if self.head_kind not in HEAD_KINDS:
            raise ValueError(f"unknown head kind {self.head_kind!r}")
        if self.num_classes < 2:
            raise ValueError(f"need at least 2 ranks, got {self.num_classes}")


@dataclass
class MlpModel:
    config: MlpConfig
    weights: list[Tensor]
    biases: list[Tensor]
    head: OrdinalHead
    training: bool = True
    dropout_rng: np.random.Generator = field(default_factory=np.random.default_rng)

    def train(self) -> "MlpModel":
        self.training = True
        return self

    def eval(self) -> "MlpModel":
        self.training = False
        return self

    @property
    def dtype(self):
        return self.head.weight.dtype

    def parameters(self) -> list[Tensor]:
        params = []
        for w, b in zip(self.weights, self.biases):
            params += [w, b]
        return params + self.head.parameters

    def decay_mask(self) -> list[bool]:
        """True for weight matrices, False for biases."""
        return [i % 2 == 0 for i in range(len(self.parameters()))]

    def forward(self, x) -> Tensor:
        h = x if isinstance(x, Tensor) else Tensor(x, dtype=self.dtype)
        if h.shape[1] != self.config.input_dim:
            raise ValueError(f"expected {self.config.input_dim} input features, got {h.shape[1]}")
        for w, b in zip(self.weights, self.biases):
            h = leaky_relu(matmul(h, w) + b, self.config.leaky_slope)
            h = dropout(h, self.config.dropout_p, self.training, self.dropout_rng)
        return self.head.logits(h)

    __call__ = forward

    def loss(self, x, ranks) -> Tensor:
        return self.head.loss(self.forward(x), ranks)

    def predict(self, x, batch_size: int = 4096) -> np.ndarray:
        """Rank indices in eval mode; restores the previous mode."""
        was_training = self.training
        self.eval()
        try:
            x = np.asarray(x, dtype=self.dtype)
            out = [self.head.predict(self.forward(x[i:i + batch_size])) for i in range(0, len(x), batch_size)]
        finally:
            self.training = was_training
        return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)

    def get_arrays(self) -> list[np.ndarray]:
        return [p.data.copy() for p in self.parameters()]

    def set_arrays(self, arrays) -> None:
        params = self.parameters()
        if len(arrays) != len(params):
            raise ValueError(f"expected {len(params)} arrays, got {len(arrays)}")
        for p, a in zip(params, arrays):
            if a.shape != p.shape:
                raise ValueError(f"parameter shape {p.shape} does not match array {a.shape}")
            p.data = np.array(a, dtype=p.dtype)

    def astype(self, dtype) -> "MlpModel":
        """Copy of the model with every parameter cast to ``dtype``."""
        cfg = MlpConfig(**{**asdict(self.config), "dtype": np.dtype(dtype).name})
        clone = init_parameters(cfg)
        clone.set_arrays([a.astype(dtype) for a in self.get_arrays()])
        clone.training = self.training
        return clone


def init_parameters(config: MlpConfig, rng: np.random.Generator | None = None) -> MlpModel:
    """Weights uniform in +-sqrt(1/fan_in), biases zero, deterministic per seed."""
    if rng is None:
        rng = np.random.default_rng([config.seed, 0])
    dtype = np.dtype(config.dtype)
    weights, biases = [], []
    fan_in = config.input_dim
    for width in config.hidden_dims:
        bound = np.sqrt(1.0 / fan_in)
        weights.append(Tensor(rng.uniform(-bound, bound, size=(fan_in, width)), requires_grad=True, dtype=dtype))
        biases.append(Tensor(np.zeros((1, width)), requires_grad=True, dtype=dtype))
        fan_in = width
    head = OrdinalHead(config.head_kind, config.num_classes, fan_in, rng, dtype=dtype)
    return MlpModel(config, weights, biases, head, dropout_rng=np.random.default_rng([config.seed, 1]))


def save_checkpoint(path, model: MlpModel, extra: dict | None = None) -> None:
    """Write config, parameters and optional extra arrays to one file.

    The file is a numpy ``.npz`` archive with a JSON header entry. Arrays are
    stored with their exact dtype, so a load reproduces them bit for bit.
    """
    extra = dict(extra or {})
    header = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": asdict(model.config),
        "n_params": len(model.parameters()),
        "extra": sorted(extra),
    }
    arrays = {f"param_{i:03d}": a for i, a in enumerate(model.get_arrays())}
    arrays.update({f"extra_{k}": np.asarray(v) for k, v in extra.items()})
    buf = io.BytesIO()
    np.savez(buf, header=np.frombuffer(json.dumps(header).encode(), dtype=np.uint8), **arrays)
    Path(path).write_bytes(buf.getvalue())


def load_checkpoint(path) -> tuple[MlpModel, dict]:
    """Inverse of :func:`save_checkpoint`; returns ``(model, extra)``."""
    try:
        archive = np.load(Path(path), allow_pickle=False)
    except (OSError, ValueError) as exc:
        raise ValueError(f"{path}: not a readable checkpoint ({exc})") from exc
    with archive:
        if "header" not in archive.files:
            raise ValueError(f"{path}: missing checkpoint header")
        header = json.loads(archive["header"].tobytes().decode())
        if header.get("format") != CHECKPOINT_FORMAT:
            raise ValueError(f"{path}: not a {CHECKPOINT_FORMAT} file")
        if header.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {header.get('version')}")
        model = init_parameters(MlpConfig(**header["config"]))
        model.set_arrays([archive[f"param_{i:03d}"] for i in range(header["n_params"])])
        extra = {k: archive[f"extra_{k}"] for k in header["extra"]}
    model.eval()
    return model, extra
