# %% [markdown]
# # The CORN loss, step by step
#
# A batch of six examples with K=4 ranks. We build the conditional
# subsets, evaluate the loss by hand, and compare with the stable and the
# per-example implementations.

# %%
import math

import numpy as np
from scipy.special import expit

from corn_ordinal.labels import build_subset_masks, extend_labels
from corn_ordinal.losses import corn_loss, corn_loss_reference
from corn_ordinal.tensor import Tensor, backward

K = 4
ranks = np.array([1, 2, 2, 3, 4, 4])
logits = np.array([
    [-1.0, 0.3, 0.0],
    [0.5, -0.2, 1.0],
    [2.0, -1.5, 0.1],
    [1.2, 0.8, -0.7],
    [3.0, 2.0, 1.5],
    [0.1, 0.4, 0.9],
])

# %% [markdown]
# ## Extended labels and subsets
# Task j only trains on examples whose rank is above j-1.

# %%
print("extended labels:\n", extend_labels(ranks, K))
masks = build_subset_masks(ranks, K)
print("subset membership:\n", masks.members.astype(int))
print("subset sizes:", masks.sizes, "total:", masks.total)

# %% [markdown]
# ## By hand
# Binary cross-entropy on each subset, summed, divided by the total size.

# %%
p = expit(logits)
bits = extend_labels(ranks, K)
total = 0.0
for j in range(K - 1):
    for i in np.flatnonzero(masks.members[:, j]):
        total += math.log(p[i, j]) if bits[i, j] else math.log(1 - p[i, j])
by_hand = -total / masks.total
print(f"by hand:   {by_hand:.12f}")
print(f"reference: {corn_loss_reference(p, ranks, K):.12f}")
print(f"stable:    {corn_loss(Tensor(logits), ranks, K).item():.12f}")

# %% [markdown]
# ## Gradients
# Rows outside a task's subset get exactly zero gradient in that column.

# %%
z = Tensor(logits, requires_grad=True)
backward(corn_loss(z, ranks, K))
print(np.round(z.grad, 4))
