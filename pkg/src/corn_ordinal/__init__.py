"""Rank-consistent ordinal regression (CORN) and its baselines on a small numpy autodiff core."""

from .data import Dataset, balance_classes, load_csv, split, standardize, synth_ordinal
from .heads import HEAD_KINDS, OrdinalHead
from .labels import build_subset_masks, extend_labels
from .losses import (
    ce_loss,
    chain_rule_probs,
    coral_loss,
    corn_loss,
    corn_loss_reference,
    decode_rank,
    decode_rank_ce,
    ornn_loss,
)
from .metrics import TrainReport, mae, rmse, select_best
from .model import MlpConfig, MlpModel, init_parameters, load_checkpoint, save_checkpoint
from .optim import OptimizerState, adam_step, adamw_step
from .tensor import Tensor, backward

__version__ = "0.1.0"
