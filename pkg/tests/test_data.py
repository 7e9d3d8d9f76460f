import numpy as np
import pytest

from netgame.data import (
    Dataset,
    MissingColumn,
    NoValidRows,
    PartitionSpec,
    TooFewRows,
    binarize_labels,
    load_csv,
    partition,
    synth_generate,
)


class TestLoadCsv:
    def test_basic_two_rows(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("a,b,y\n1,2,0.5\n3,4,1.5\n")
        ds = load_csv(p, ["a", "b"], "y")
        assert ds.n_rows == 2 and ds.dim == 2
        assert ds.features == pytest.approx(np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert ds.labels == pytest.approx([0.5, 1.5])

    def test_missing_label_column(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("a,b\n1,2\n")
        with pytest.raises(MissingColumn):
            load_csv(p, ["a"], "y")

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(tmp_path / "absent.csv", ["a"], "y")

    def test_unparseable_rows_skipped_and_counted(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("a,y\n1,1\nbad,2\n3,3\n4,oops\n")
        ds = load_csv(p, ["a"], "y")
        assert ds.n_rows == 2
        assert "2 skipped" in ds.provenance

    def test_all_rows_bad(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("a,y\nx,1\n")
        with pytest.raises(NoValidRows):
            load_csv(p, ["a"], "y")

    def test_normalize_constant_column_to_zeros(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("a,b,y\n5,1,0\n5,2,1\n5,3,2\n")
        ds = load_csv(p, ["a", "b"], "y", normalize=True)
        assert np.all(ds.features[:, 0] == 0.0)
        assert ds.features[:, 1].mean() == pytest.approx(0.0, abs=1e-12)
        assert ds.features[:, 1].std() == pytest.approx(1.0, rel=1e-9)


class TestBinarize:
    def test_median_with_tie_to_minus(self):
        ds = Dataset(np.zeros((3, 1)), np.array([1.0, 2.0, 3.0]))
        out = binarize_labels(ds, "median")
        assert out.labels == pytest.approx([-1.0, -1.0, 1.0])

    def test_value_threshold(self):
        ds = Dataset(np.zeros((2, 1)), np.array([-1.0, 5.0]))
        out = binarize_labels(ds, 0.0)
        assert out.labels == pytest.approx([-1.0, 1.0])

    def test_idempotent_at_zero(self):
        ds = Dataset(np.zeros((4, 1)), np.array([-3.0, -0.5, 0.2, 9.0]))
        once = binarize_labels(ds, 0.0)
        twice = binarize_labels(once, 0.0)
        assert np.array_equal(once.labels, twice.labels)


class TestPartition:
    def test_biased_sorts_by_label(self):
        ds = Dataset(np.array([[30.0], [10.0], [20.0]]), np.array([3.0, 1.0, 2.0]))
        parts = partition(ds, PartitionSpec(n_nodes=3, mode="biased"))
        assert [p.labels[0] for p in parts] == [1.0, 2.0, 3.0]
        assert [p.features[0, 0] for p in parts] == [10.0, 20.0, 30.0]

    def test_unbiased_deterministic(self, rng):
        ds = Dataset(rng.standard_normal((20, 2)), rng.standard_normal(20))
        spec = PartitionSpec(n_nodes=4, mode="unbiased", seed=5)
        a = partition(ds, spec)
        b = partition(ds, spec)
        for pa, pb in zip(a, b):
            assert np.array_equal(pa.features, pb.features)

    def test_blocks_disjoint_and_cover(self, rng):
        ds = Dataset(rng.standard_normal((11, 1)), np.arange(11, dtype=float))
        parts = partition(ds, PartitionSpec(n_nodes=3, mode="unbiased", seed=1))
        assert [p.n_rows for p in parts] == [4, 4, 3]  # remainder to low indices
        seen = np.concatenate([p.labels for p in parts])
        assert sorted(seen.tolist()) == list(range(11))

    def test_biased_label_means_monotone(self, rng):
        ds = Dataset(rng.standard_normal((100, 2)), rng.standard_normal(100))
        parts = partition(ds, PartitionSpec(n_nodes=5, mode="biased"))
        means = [p.labels.mean() for p in parts]
        assert all(a <= b for a, b in zip(means, means[1:]))

    def test_unbiased_means_statistically_flat(self):
        rng = np.random.default_rng(0)
        labels = rng.standard_normal(5000)
        ds = Dataset(np.zeros((5000, 1)), labels)
        parts = partition(ds, PartitionSpec(n_nodes=5, mode="unbiased", seed=3))
        se = labels.std() / np.sqrt(1000)
        for p in parts:
            assert abs(p.labels.mean() - labels.mean()) < 2 * se

    def test_too_few_rows(self, rng):
        ds = Dataset(rng.standard_normal((3, 1)), np.zeros(3))
        with pytest.raises(TooFewRows):
            partition(ds, PartitionSpec(n_nodes=4))
        with pytest.raises(TooFewRows):
            partition(ds, PartitionSpec(n_nodes=2, per_node=2))


class TestSynthGenerate:
    def test_noiseless_least_squares_recovers_weights(self):
        w = np.array([1.5, -2.0, 0.5])
        parts = synth_generate(3, per_node=12, d=3, model=("shared", w), seed=4)
        for ds in parts:
            est, *_ = np.linalg.lstsq(ds.features, ds.labels, rcond=None)
            assert np.max(np.abs(est - w)) < 1e-6

    def test_per_node_shift_separates_minimizers(self):
        delta = 3.0
        parts = synth_generate(3, per_node=40, d=2, model=("per_node_shift", delta), seed=9)
        fits = []
        for ds in parts:
            est, *_ = np.linalg.lstsq(ds.features, ds.labels, rcond=None)
            fits.append(est)
        for i in range(3):
            for j in range(i + 1, 3):
                assert np.linalg.norm(fits[i] - fits[j]) > delta / 2

    def test_seeded_reproducibility(self):
        a = synth_generate(2, per_node=5, d=2, noise_sigma=0.5, seed=7)
        b = synth_generate(2, per_node=5, d=2, noise_sigma=0.5, seed=7)
        for da, db in zip(a, b):
            assert np.array_equal(da.features, db.features)
            assert np.array_equal(da.labels, db.labels)
