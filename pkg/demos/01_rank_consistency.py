# %% [markdown]
# # Rank consistency: OR-NN vs CORAL vs CORN
#
# Three ways of turning K-1 binary outputs into a rank. Only two of them
# guarantee that the task probabilities never go back up.

# %%
import numpy as np
from scipy.special import expit

from corn_ordinal.losses import chain_rule_probs, coral_logits, decode_rank
from corn_ordinal.tensor import Tensor

rng = np.random.default_rng(0)
K = 6
logits = rng.normal(scale=2.0, size=(5, K - 1))

# %% [markdown]
# ## OR-NN: independent tasks
# Each column is its own sigmoid. Nothing stops task 3 from being more
# confident than task 2.

# %%
ornn = expit(logits)
print(np.round(ornn, 3))
print("rows with a violation:", int(np.any(np.diff(ornn, axis=1) > 0, axis=1).sum()))

# %% [markdown]
# ## CORAL: one shared weight column, K-1 biases
# Task logits differ only by their biases, so sorted biases give sorted
# probabilities for every input.

# %%
shared = rng.normal(size=(5, 1))
bias = np.sort(rng.normal(size=(1, K - 1)))[:, ::-1].copy()
coral = expit(coral_logits(Tensor(shared), Tensor(bias)).data)
print(np.round(coral, 3))
print("rows with a violation:", int(np.any(np.diff(coral, axis=1) > 0, axis=1).sum()))

# %% [markdown]
# ## CORN: conditional outputs, chained
# Outputs are read as P(y > r_k | y > r_{k-1}). Multiplying them up gives
# unconditional probabilities, which can only shrink.

# %%
corn = chain_rule_probs(expit(logits))
print(np.round(corn, 3))
print("rows with a violation:", int(np.any(np.diff(corn, axis=1) > 0, axis=1).sum()))
print("predicted ranks:", decode_rank(corn))
