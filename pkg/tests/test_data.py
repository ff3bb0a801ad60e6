import numpy as np
import pytest

from corn_ordinal.data import (
    DataError,
    Dataset,
    balance_classes,
    load_csv,
    split,
    split_sizes,
    standardize,
    synth_ordinal,
    write_csv,
)
from corn_ordinal.labels import LabelError


def _write(path, text):
    path.write_text(text)
    return path


class TestLoadCsv:
    def test_with_header(self, tmp_path):
        p = _write(tmp_path / "a.csv", "f1,f2,rank\n0.5,1,1\n2,3.5,3\n-1,0,2\n")
        ds = load_csv(p)
        assert ds.features.shape == (3, 2)
        assert ds.num_classes == 3
        assert ds.feature_names == ["f1", "f2"]
        np.testing.assert_array_equal(ds.labels, [1, 3, 2])

    def test_without_header_declared_k(self, tmp_path):
        ds = load_csv(_write(tmp_path / "a.csv", "1,2,1\n3,4,2\n"), num_classes=5)
        assert ds.num_classes == 5 and len(ds) == 2

    def test_label_first_column(self, tmp_path):
        ds = load_csv(_write(tmp_path / "a.csv", "y,a,b\n2,0.1,0.2\n1,0.3,0.4\n"), label_column=0)
        np.testing.assert_array_equal(ds.labels, [2, 1])
        np.testing.assert_array_equal(ds.features, [[0.1, 0.2], [0.3, 0.4]])

    def test_remap(self, tmp_path):
        ds = load_csv(_write(tmp_path / "a.csv", "1,10\n2,30\n3,20\n4,10\n"), remap_labels=True)
        np.testing.assert_array_equal(ds.labels, [1, 3, 2, 1])

    @pytest.mark.parametrize("text", ["", "a,b,rank\n", "\n\n"])
    def test_empty_inputs(self, tmp_path, text):
        with pytest.raises(DataError):
            load_csv(_write(tmp_path / "a.csv", text))

    def test_malformed_row_reports_line(self, tmp_path):
        with pytest.raises(DataError, match=":3:"):
            load_csv(_write(tmp_path / "a.csv", "a,b,y\n1,2,1\n1,x,2\n"))

    def test_ragged_row(self, tmp_path):
        with pytest.raises(DataError, match=":2:"):
            load_csv(_write(tmp_path / "a.csv", "1,2,1\n1,2\n"))

    def test_label_out_of_range(self, tmp_path):
        with pytest.raises(LabelError, match=":2:"):
            load_csv(_write(tmp_path / "a.csv", "1,2,1\n1,2,7\n"), num_classes=5)

    def test_zero_label(self, tmp_path):
        with pytest.raises(LabelError):
            load_csv(_write(tmp_path / "a.csv", "1,2,0\n"))

    def test_round_trip(self, tmp_path):
        ds = synth_ordinal(50, 3, 4, 0.1, seed=1)
        write_csv(tmp_path / "s.csv", ds)
        back = load_csv(tmp_path / "s.csv", num_classes=4)
        np.testing.assert_array_equal(back.features, ds.features)
        np.testing.assert_array_equal(back.labels, ds.labels)


class TestBalance:
    def test_downsamples_to_smallest(self):
        ds = Dataset(np.zeros((30, 1)), [1] * 10 + [2] * 20, 2)
        out = balance_classes(ds, np.random.default_rng(0))
        np.testing.assert_array_equal(out.class_counts(), [10, 10])

    def test_balanced_input_unchanged(self):
        ds = Dataset(np.arange(12.0).reshape(-1, 1), [1, 2, 3] * 4, 3)
        out = balance_classes(ds, np.random.default_rng(0))
        np.testing.assert_array_equal(out.row_ids, np.arange(12))

    def test_empty_class(self):
        with pytest.raises(DataError):
            balance_classes(Dataset(np.zeros((3, 1)), [1, 1, 3], 3), np.random.default_rng(0))

    def test_deterministic(self):
        ds = synth_ordinal(500, 2, 4, 0.3, seed=2)
        a = balance_classes(ds, np.random.default_rng(5)).row_ids
        b = balance_classes(ds, np.random.default_rng(5)).row_ids
        np.testing.assert_array_equal(a, b)

    def test_fireman_sized_counts(self):
        # 16 classes, smallest 2543 -> 40,688 rows
        counts = np.full(16, 2548)
        counts[3] = 2543
        counts[0] += 40_768 - counts.sum()
        labels = np.repeat(np.arange(1, 17), counts)
        ds = Dataset(np.zeros((len(labels), 1)), labels, 16)
        out = balance_classes(ds, np.random.default_rng(0))
        assert len(ds) == 40_768
        assert len(out) == 40_688
        assert set(out.class_counts()) == {2543}


class TestSplit:
    def test_largest_remainder_sizes(self):
        # 40688 * (.75, .05, .20) = (30516, 2034.4, 8137.6): the leftover row goes to test
        assert split_sizes(40_688) == [30_516, 2_034, 8_138]

    def test_sizes_sum(self):
        for n in range(20, 200):
            assert sum(split_sizes(n)) == n

    def test_partition(self):
        ds = synth_ordinal(137, 2, 3, 0.1, seed=0)
        parts = split(ds, seed=3)
        ids = np.concatenate([p.row_ids for p in parts])
        assert sorted(ids.tolist()) == list(range(137))
        assert [len(p) for p in parts] == split_sizes(137)

    def test_same_seed_same_partition(self):
        ds = synth_ordinal(100, 2, 3, 0.1, seed=0)
        for a, b in zip(split(ds, seed=1), split(ds, seed=1)):
            np.testing.assert_array_equal(a.row_ids, b.row_ids)

    def test_too_small(self):
        with pytest.raises(DataError):
            split(synth_ordinal(10, 2, 2, seed=0))

    def test_bad_fractions(self):
        with pytest.raises(ValueError):
            split_sizes(100, (0.5, 0.2, 0.2))


class TestStandardize:
    def test_constant_column_becomes_zero(self):
        train = Dataset(np.column_stack([np.full(5, 5.0), np.arange(5.0)]), [1, 2, 1, 2, 1], 2)
        (out,) = standardize(train)
        np.testing.assert_array_equal(out.features[:, 0], 0.0)

    def test_train_moments(self):
        rng = np.random.default_rng(0)
        train = Dataset(rng.normal(3, 7, size=(200, 4)), rng.integers(1, 4, 200), 3)
        (out,) = standardize(train)
        assert np.abs(out.features.mean(axis=0)).max() <= 1e-9
        np.testing.assert_allclose(out.features.std(axis=0), 1.0)

    def test_others_use_train_statistics(self):
        train = Dataset(np.array([[0.0], [2.0]]), [1, 2], 2)
        test = Dataset(np.array([[10.0], [12.0]]), [1, 2], 2)
        _, t = standardize(train, test)
        np.testing.assert_allclose(t.features[:, 0], [9.0, 11.0])
        np.testing.assert_allclose(t.mean, [1.0])


class TestSynth:
    def test_noise_free_labels_monotone_in_score(self):
        rng = np.random.default_rng(0)
        w = rng.normal(size=5)
        w /= np.linalg.norm(w)
        ds = synth_ordinal(2000, 5, 6, noise=0.0, seed=0)
        score = ds.features @ w
        order = np.argsort(score)
        assert np.all(np.diff(ds.labels[order]) >= 0)

    def test_k2_linearly_separable(self):
        ds = synth_ordinal(500, 3, 2, noise=0.0, seed=4)
        w = np.random.default_rng(4).normal(size=3)
        s = ds.features @ (w / np.linalg.norm(w))
        assert s[ds.labels == 1].max() < s[ds.labels == 2].min()

    def test_histogram_roughly_uniform(self):
        n, k = 100_000, 8
        counts = synth_ordinal(n, 4, k, noise=0.05, seed=3).class_counts()
        assert np.all(np.abs(counts - n / k) <= 0.2 * n / k)

    def test_too_few(self):
        with pytest.raises(ValueError):
            synth_ordinal(3, 2, 5)


def test_pipeline_keeps_labels_valid_and_disjoint():
    ds = synth_ordinal(3000, 4, 7, noise=0.1, seed=8)
    bal = balance_classes(ds, np.random.default_rng(1))
    train, val, test = standardize(*split(bal, seed=1))
    for part in (train, val, test):
        assert part.labels.min() >= 1 and part.labels.max() <= 7
    assert not set(train.row_ids) & set(test.row_ids)
    assert not set(train.row_ids) & set(val.row_ids)
