import math

import numpy as np
import pytest
from scipy.special import expit

from corn_ordinal import losses as L
from corn_ordinal.heads import OrdinalHead
from corn_ordinal.tensor import Tensor, backward

from conftest import central_difference, max_relative_error

LOG2 = math.log(2.0)


def _leaf(a):
    return Tensor(a, requires_grad=True, dtype=np.float64)


class TestCornLoss:
    def test_single_example_in_both_subsets(self):
        # y=2 is in S1 (label 1) and S2 (label 0): -(1/2)[log .5 + log .5]
        assert L.corn_loss(Tensor([[0.0, 0.0]]), [2]).item() == pytest.approx(LOG2, abs=1e-12)

    def test_second_subset_empty(self):
        # y=1 only enters task 1; the second logit is irrelevant
        for z2 in (0.0, 7.0, -40.0):
            assert L.corn_loss(Tensor([[0.0, z2]]), [1]).item() == pytest.approx(LOG2, abs=1e-12)

    def test_empty_subset_gets_zero_gradient(self):
        z = _leaf([[0.3, 1.7]])
        backward(L.corn_loss(z, [1]))
        assert z.grad[0, 1] == 0.0

    @pytest.mark.parametrize("rank, logits", [(3, [30.0, 30.0]), (1, [-30.0, 30.0]), (2, [30.0, -30.0])])
    def test_saturated_correct_logits(self, rank, logits):
        assert 0.0 <= L.corn_loss(Tensor([logits]), [rank]).item() <= 1e-12

    def test_denominator_is_total_subset_size(self):
        # K=4, ranks (1,2,3,4): subset sizes 4, 3, 2 -> 9 terms, each log 2 at z=0
        loss = L.corn_loss(Tensor(np.zeros((4, 3))), [1, 2, 3, 4])
        assert loss.item() == pytest.approx(LOG2)

    def test_wrong_width(self):
        with pytest.raises(ValueError):
            L.corn_loss(Tensor(np.zeros((2, 3))), [1, 2], num_classes=3)

    def test_float32_stays_float32(self):
        loss = L.corn_loss(Tensor(np.zeros((2, 3)), dtype=np.float32), [1, 4])
        assert loss.dtype == np.float32


class TestReferenceLoss:
    def test_zero_logit_exact(self):
        assert L.corn_loss_reference([[0.5, 0.5]], [2]) == LOG2
        assert L.corn_loss(Tensor([[0.0, 0.0]]), [2]).item() == LOG2

    @pytest.mark.parametrize("logits, rank", [([0.0, 0.0], 2), ([0.0, 3.0], 1)])
    def test_matches_stable_form(self, logits, rank):
        ref = L.corn_loss_reference(expit(np.array([logits])), [rank])
        assert L.corn_loss(Tensor([logits]), [rank]).item() == pytest.approx(ref, abs=1e-9)

    def test_random_trials(self):
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(1000):
            k = int(rng.integers(2, 9))
            n = int(rng.integers(1, 17))
            z = rng.uniform(-5, 5, size=(n, k - 1))
            y = rng.integers(1, k + 1, size=n)
            worst = max(worst, abs(L.corn_loss(Tensor(z), y, k).item() - L.corn_loss_reference(expit(z), y, k)))
        assert worst <= 1e-6

    def test_clamps_degenerate_probabilities(self):
        assert math.isfinite(L.corn_loss_reference([[1.0, 0.0]], [1]))


def test_corn_gradient_with_empty_subsets():
    rng = np.random.default_rng(11)
    for ranks in ([1, 1, 1], [1, 2, 2, 1], [5, 1, 3]):
        z = rng.normal(size=(len(ranks), 4))
        leaf = _leaf(z)
        backward(L.corn_loss(leaf, ranks, 5))
        (num,) = central_difference(lambda: L.corn_loss(Tensor(z), ranks, 5).item(), [z])
        assert max_relative_error(leaf.grad, num) <= 1e-4


class TestBinaryTaskLosses:
    @pytest.mark.parametrize("k", [2, 3, 7])
    def test_coral_zero_logits(self, k):
        loss = L.coral_loss(Tensor([[0.0]]), Tensor(np.zeros((1, k - 1))), [1])
        assert loss.item() == pytest.approx((k - 1) * LOG2)

    def test_coral_saturated(self):
        loss = L.coral_loss(Tensor([[40.0]]), Tensor([[0.0, -1.0, -2.0]]), [4])
        assert loss.item() == pytest.approx(0.0, abs=1e-12)

    def test_coral_sorted_bias_gives_monotone_probs(self, rng):
        bias = -np.sort(-rng.normal(size=(1, 6)))
        shared = rng.normal(size=(50, 1)) * 5
        probs = expit(L.coral_logits(Tensor(shared), Tensor(bias)).data)
        assert np.all(np.diff(probs, axis=1) <= 0)

    def test_ornn_hand_value(self):
        assert L.ornn_loss(Tensor([[0.0, 0.0]]), [2]).item() == pytest.approx(2 * LOG2)
        assert L.ornn_loss(Tensor([[0.0, 0.0]]), [2]).item() == pytest.approx(1.386294, abs=1e-6)

    def test_ornn_saturated(self):
        assert L.ornn_loss(Tensor([[30.0, -30.0]]), [2]).item() == pytest.approx(0.0, abs=1e-12)

    def test_ornn_allows_inconsistent_probabilities(self):
        probs = L.task_probabilities(np.array([[-2.0, 2.0]]))
        np.testing.assert_allclose(probs, [[0.119203, 0.880797]], atol=1e-6)
        assert probs[0, 0] < probs[0, 1]

    def test_batch_average(self):
        # divided by batch size, not batch * tasks
        loss = L.ornn_loss(Tensor(np.zeros((4, 3))), [1, 2, 3, 4])
        assert loss.item() == pytest.approx(3 * LOG2)


class TestCrossEntropy:
    def test_uniform(self):
        assert L.ce_loss(Tensor(np.zeros((3, 4))), [1, 2, 4]).item() == pytest.approx(math.log(4))

    def test_saturated(self):
        assert L.ce_loss(Tensor([[0.0, 0.0, 50.0]]), [3]).item() == pytest.approx(0.0, abs=1e-12)

    def test_softmax_rows_sum_to_one(self, rng):
        p = L.softmax(rng.normal(size=(20, 6)) * 10)
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-7)


class TestDecoding:
    def test_chain_rule(self):
        np.testing.assert_allclose(L.chain_rule_probs([[0.9, 0.8, 0.5]]), [[0.9, 0.72, 0.36]])
        np.testing.assert_array_equal(L.chain_rule_probs(np.ones((2, 4))), np.ones((2, 4)))

    def test_chain_rule_monotone(self, rng):
        p = L.chain_rule_probs(rng.uniform(0.01, 0.99, size=(100, 10)))
        assert np.all(np.diff(p, axis=1) < 0)

    @pytest.mark.parametrize(
        "probs, rank",
        [([0.9, 0.72, 0.36], 3), ([0.5, 0.2, 0.1, 0.0], 1), ([0.9, 0.8, 0.7, 0.6], 5), ([0.5], 1)],
    )
    def test_decode_rank(self, probs, rank):
        assert L.decode_rank([probs])[0] == rank

    @pytest.mark.parametrize(
        "logits, rank",
        [([0.1, 2.0, 0.3], 2), ([1.0, 1.0], 1), ([0.0, 0.0, 0.0, 1.0], 4)],
    )
    def test_decode_rank_ce(self, logits, rank):
        assert L.decode_rank_ce([logits])[0] == rank

    def test_corn_decoding_is_rank_consistent(self, rng):
        for k in range(2, 17):
            z = rng.normal(scale=4, size=(200, k - 1))
            bits = L.chain_rule_probs(expit(z)) > 0.5
            assert np.all(np.diff(bits.astype(int), axis=1) <= 0)


class TestHeadsAndInvariants:
    def test_coral_monotone_iff_bias_non_increasing(self):
        rng = np.random.default_rng(5)
        shared = np.linspace(-8, 8, 41).reshape(-1, 1)
        for _ in range(200):
            bias = rng.normal(size=(1, 5))
            if rng.random() < 0.5:
                bias = -np.sort(-bias)
            probs = expit(L.coral_logits(Tensor(shared), Tensor(bias)).data)
            monotone = bool(np.all(np.diff(probs, axis=1) <= 0))
            assert monotone == bool(np.all(np.diff(bias) <= 0))

    def test_coral_equals_ornn_when_k_is_two(self, rng):
        w = rng.normal(size=(6, 1))
        b = rng.normal(size=(1, 1))
        hidden = Tensor(rng.normal(size=(9, 6)))
        ranks = rng.integers(1, 3, size=9)
        heads = {}
        for kind in ("coral", "ornn"):
            head = OrdinalHead(kind, 2, 6, rng, dtype=np.float64)
            head.weight.data[...] = w
            head.bias.data[...] = b
            heads[kind] = head.loss(head.logits(hidden), ranks).item()
        assert heads["coral"] == pytest.approx(heads["ornn"], abs=1e-15)

    def test_all_losses_non_negative(self, rng):
        for _ in range(50):
            k = int(rng.integers(2, 8))
            n = int(rng.integers(1, 10))
            y = rng.integers(1, k + 1, size=n)
            z = rng.normal(scale=3, size=(n, k - 1))
            assert L.corn_loss(Tensor(z), y, k).item() >= 0
            assert L.ornn_loss(Tensor(z), y, k).item() >= 0
            assert L.coral_loss(Tensor(z[:, :1]), Tensor(rng.normal(size=(1, k - 1))), y).item() >= 0
            assert L.ce_loss(Tensor(rng.normal(size=(n, k))), y, k).item() >= 0

    @pytest.mark.parametrize("kind, width", [("corn", 4), ("ornn", 4), ("coral", 1), ("ce", 5)])
    def test_head_shapes(self, kind, width, rng):
        head = OrdinalHead(kind, 5, 7, rng)
        assert head.weight.shape == (7, width)
        assert head.bias.shape == (1, 5 if kind == "ce" else 4)

    def test_unknown_head(self, rng):
        with pytest.raises(ValueError):
            OrdinalHead("softmax", 5, 3, rng)
