import math
import os

import numpy as np
import pytest

from obsexplain import (
    Dataset,
    InputError,
    KernelConfig,
    OmpConfig,
    build_report,
    gen_ackley,
    gen_quadratic,
    load_csv,
    standardize,
    write_tables,
)
from obsexplain.data import ackley, quadratic, read_table

DATA_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "data")
POSSUM = os.path.join(DATA_DIR, "possum_predictions.csv")

# 40-digit mpmath evaluation of the Ackley function at (1, 1)
ACKLEY_11 = 3.6253849384403628266


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoadCsv:
    def test_basic(self, tmp_path):
        ds = load_csv(write(tmp_path, "a,b,y\n1,2,3\n4,5,6\n7,8,9\n"), "y")
        assert (ds.n, ds.p) == (3, 2)
        assert ds.column_names == ("a", "b")
        np.testing.assert_array_equal(ds.targets, [3, 6, 9])

    def test_missing_target(self, tmp_path):
        with pytest.raises(InputError, match="target column"):
            load_csv(write(tmp_path, "a,b\n1,2\n"), "y")

    def test_non_numeric_column_dropped(self, tmp_path):
        with pytest.warns(UserWarning, match="non-numeric"):
            ds = load_csv(write(tmp_path, "a,s,y\n1,x,3\n2,y,4\n3,z,5\n"), "y")
        assert ds.column_names == ("a",)

    def test_bad_rows_dropped_and_counted(self, tmp_path):
        ds = load_csv(write(tmp_path, "a,y\n1,3\nNA,4\n3,5\n4,oops\n5,1\n"), "y")
        assert ds.n == 3 and ds.dropped_rows == 2
        np.testing.assert_array_equal(ds.points[:, 0], [1, 3, 5])

    def test_too_many_dropped(self, tmp_path):
        with pytest.raises(InputError, match="more than half"):
            load_csv(write(tmp_path, "a,y\n1,3\nNA,4\n,5\n4,1\nx,2\n"), "y")

    def test_zero_rows(self, tmp_path):
        with pytest.raises(InputError):
            load_csv(write(tmp_path, "a,y\n"), "y")

    def test_explicit_features_and_exclude(self, tmp_path):
        p = write(tmp_path, "id,a,b,y\n1,1,2,3\n2,4,5,6\n")
        assert load_csv(p, "y", features=["b"]).column_names == ("b",)
        assert load_csv(p, "y", exclude=["id"]).column_names == ("a", "b")

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError, match="no such file"):
            load_csv(tmp_path / "nope.csv", "y")

    def test_possum_file(self):
        ds = load_csv(POSSUM, "prediction", exclude=["case", "totlngth"])
        assert ds.n == 101
        assert ds.p == 6


class TestStandardize:
    def test_small_column(self):
        ds = standardize(Dataset(np.array([[1.0], [2.0], [3.0]]), np.zeros(3), ("a",)))
        np.testing.assert_allclose(ds.points[:, 0], [-1.2247448713915890491, 0.0,
                                                     1.2247448713915890491], rtol=1e-15)
        assert ds.standardization == ((2.0, math.sqrt(2.0 / 3.0)),)

    def test_moments_and_inverse(self):
        X = np.random.default_rng(0).normal(3.0, 5.0, size=(50, 4))
        ds = standardize(Dataset(X, np.zeros(50), ("a", "b", "c", "d")))
        assert np.all(np.abs(ds.points.mean(0)) <= 1e-9)
        assert np.all(np.abs(ds.points.std(0) - 1) <= 1e-9)
        np.testing.assert_allclose(ds.original_points(), X, rtol=1e-12)

    def test_idempotent(self):
        X = np.random.default_rng(1).normal(size=(30, 2))
        once = standardize(Dataset(X, np.zeros(30), ("a", "b")))
        twice = standardize(once)
        np.testing.assert_allclose(twice.points, once.points, atol=1e-9)
        np.testing.assert_allclose(twice.original_points(), X, rtol=1e-12)

    def test_constant_column(self):
        with pytest.raises(InputError, match="'b'"):
            standardize(Dataset(np.array([[1.0, 2.0], [3.0, 2.0]]), np.zeros(2), ("a", "b")))


class TestGenerators:
    def test_quadratic_values(self):
        np.testing.assert_array_equal(quadratic([[0.0, 0.0], [1.0, -1.0]]), [1.0, 3.0])

    def test_ackley_values(self):
        assert ackley([[0.0, 0.0]])[0] == pytest.approx(0.0, abs=1e-14)
        assert ackley([[1.0, 1.0]])[0] == pytest.approx(ACKLEY_11, rel=1e-14)

    def test_quadratic_mean(self):
        # E[x1^2 + x2^2 + 1] = 3 for standard Gaussian inputs
        means = [gen_quadratic(1000, seed=s).targets.mean() for s in range(20)]
        assert all(abs(m - 3) <= 0.3 for m in means)

    def test_ackley_nonnegative(self):
        assert np.all(gen_ackley(5000, seed=3).targets >= 0)

    @pytest.mark.parametrize("gen", [gen_quadratic, gen_ackley])
    def test_seed_determinism(self, gen):
        a, b = gen(200, seed=17), gen(200, seed=17)
        assert a.points.tobytes() == b.points.tobytes()
        assert a.targets.tobytes() == b.targets.tobytes()
        assert gen(200, seed=18).points.tobytes() != a.points.tobytes()

    def test_marginals(self):
        X = gen_quadratic(100_000, seed=0).points
        assert np.all(np.abs(X.mean(0)) <= 0.02)
        assert np.all(np.abs(X.std(0, ddof=1) - 1) <= 0.02)

    def test_bad_n(self):
        with pytest.raises(InputError):
            gen_quadratic(0)


class TestTables:
    def test_layout_and_round_trip(self, tmp_path):
        ds = gen_quadratic(80, seed=1)
        _, report = build_report(ds.points, ds.targets, KernelConfig("gaussian", 1.5),
                                 OmpConfig(1e-4))
        full, expl = write_tables(report, ds, tmp_path, "quad")
        assert os.path.basename(full) == "quad_full.txt"
        header, data = read_table(full)
        assert header == ["X1", "X2", "Y_pred", "Abs_err"]
        assert data.shape == (80, 4)
        np.testing.assert_allclose(data[:, 3], report.errors, rtol=1e-6, atol=1e-15)
        np.testing.assert_allclose(data[:, :2], ds.points, rtol=1e-8)
        header, data = read_table(expl)
        assert header == ["X1", "X2", "Y_pred", "Gamma"]
        assert data.shape == (report.n_selected, 4)
        assert data[:, 3].max() == 1.0
        with open(full, "rb") as fh:
            assert b"\r" not in fh.read()

    def test_two_rows_one_selected(self, tmp_path):
        ds = Dataset(np.array([[0.0], [0.1]]), np.array([1.0, 1.0]), ("a",))
        _, report = build_report(ds.points, ds.targets, KernelConfig("gaussian", 1.0),
                                 OmpConfig(0.01))
        assert report.n_selected == 1
        full, expl = write_tables(report, ds, tmp_path)
        assert read_table(full)[1].shape[0] == 2
        assert read_table(expl)[1].shape[0] == 1

    def test_original_units(self, tmp_path):
        X = np.array([[10.0, 1.0], [20.0, 3.0], [30.0, 2.0]])
        ds = standardize(Dataset(X, np.array([1.0, 2.0, 3.0]), ("a", "b")))
        _, report = build_report(ds.points, ds.targets, KernelConfig("gaussian", 1.0))
        full, _ = write_tables(report, ds, tmp_path)
        np.testing.assert_allclose(read_table(full)[1][:, :2], X, rtol=1e-8)

    def test_mismatched_n(self, tmp_path):
        ds = gen_quadratic(10, seed=0)
        _, report = build_report(ds.points[:5], ds.targets[:5], KernelConfig("gaussian", 1.0))
        with pytest.raises(InputError):
            write_tables(report, ds, tmp_path)

    def test_unwritable(self, tmp_path):
        ds = gen_quadratic(5, seed=0)
        _, report = build_report(ds.points, ds.targets, KernelConfig("gaussian", 1.0))
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(InputError):
            write_tables(report, ds, blocker / "sub")
