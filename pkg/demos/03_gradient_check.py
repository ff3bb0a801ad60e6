# %% [markdown]
# # Checking backprop against finite differences
#
# Every head on a small two-hidden-layer MLP, in float64 with dropout off.

# %%
import numpy as np

from corn_ordinal.model import MlpConfig, init_parameters
from corn_ordinal.tensor import backward


def numeric_grad(f, arr, h=1e-5):
    g = np.zeros_like(arr)
    for i in np.ndindex(arr.shape):
        old = arr[i]
        arr[i] = old + h
        up = f()
        arr[i] = old - h
        down = f()
        arr[i] = old
        g[i] = (up - down) / (2 * h)
    return g


rng = np.random.default_rng(1)
x = rng.normal(size=(7, 3))
y = np.array([1, 1, 2, 1, 2, 1, 1])  # subsets for tasks 3..4 are empty

for kind in ("corn", "coral", "ornn", "ce"):
    model = init_parameters(MlpConfig(3, [5, 4], kind, 5, seed=3, dtype="float64")).eval()
    backward(model.loss(x, y))
    worst = 0.0
    for p in model.parameters():
        num = numeric_grad(lambda: model.loss(x, y).item(), p.data)
        scale = max(np.abs(num).max(), np.abs(p.grad).max(), 1e-8)
        worst = max(worst, np.abs(num - p.grad).max() / scale)
    print(f"{kind:>5}: max relative error {worst:.1e}")
