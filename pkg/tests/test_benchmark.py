import numpy as np
import pytest

from stickreg.benchmark import (DATASET_INFO, MODEL_NAMES, SuiteSettings,
                                manifest_for, materialize_builtin,
                                resolve_dataset, run_model, run_suite,
                                split_indices, suite_table)
from stickreg.data import load_csv, write_csv
from stickreg.errors import DataError
from stickreg.synth import square_grid


class TestSplits:
    def test_counts_match_protocol(self):
        # 80/20 repeated splits reproduce the published train sizes
        for name, n, train in [("iris", 150, 120), ("wine", 178, 142),
                               ("glass", 214, 171)]:
            tr, te = split_indices(n, 0.8, DATASET_INFO[name]["id"], 0)
            assert tr.size == train
            assert te.size == n - train

    def test_disjoint_sorted_exhaustive(self):
        tr, te = split_indices(100, 0.7, 3, 2)
        assert np.all(np.diff(tr) > 0)
        assert np.all(np.diff(te) > 0)
        merged = np.sort(np.concatenate([tr, te]))
        np.testing.assert_array_equal(merged, np.arange(100))

    def test_deterministic_per_trial(self):
        a, _ = split_indices(150, 0.8, 1, 0)
        b, _ = split_indices(150, 0.8, 1, 0)
        c, _ = split_indices(150, 0.8, 1, 1)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_manifest_trial_counts(self):
        assert len(manifest_for("iris", 150)) == 5
        assert len(manifest_for("waveform", 5000)) == 1


class TestSettings:
    def test_scale_shrinks_lengths(self):
        it, bu = SuiteSettings(scale=0.01).lengths(8000, 5000)
        assert (it, bu) == (80, 50)

    def test_floors_protect_tiny_scales(self):
        it, bu = SuiteSettings(scale=0.001).lengths(8000, 5000)
        assert it == 60
        assert bu == 30
        assert bu <= it - 20

    def test_full_scale_identity(self):
        assert SuiteSettings().lengths(8000, 5000) == (8000, 5000)


class TestDatasetResolution:
    def test_builtin_materialization(self, tmp_path):
        materialize_builtin("iris", tmp_path)
        splits = resolve_dataset("iris", tmp_path)
        assert len(splits) == 5
        train, test = splits[0]
        assert (train.n_obs, test.n_obs) == (120, 30)
        assert train.n_categories == 3

    def test_missing_files_named_in_error(self, tmp_path):
        with pytest.raises(DataError) as err:
            resolve_dataset("vehicle", tmp_path)
        assert "vehicle.train" in str(err.value)

    def test_predefined_pair_loaded(self, tmp_path):
        ds = square_grid(4, n_points=300, seed=14)
        write_csv(tmp_path / "vehicle.train.csv", ds.subset(np.arange(200)))
        write_csv(tmp_path / "vehicle.test.csv",
                  ds.subset(np.arange(200, 300)))
        splits = resolve_dataset("vehicle", tmp_path)
        assert len(splits) == 1
        train, test = splits[0]
        assert (train.n_obs, test.n_obs) == (200, 100)

    def test_manifest_splits_from_single_file(self, tmp_path):
        ds = square_grid(4, n_points=214, seed=15)
        write_csv(tmp_path / "glass.csv", ds)
        splits = resolve_dataset("glass", tmp_path)
        assert len(splits) == 5
        assert all(tr.n_obs == 171 for tr, _ in splits)


class TestModelRuns:
    def _splits(self):
        ds = square_grid(4, n_points=400, seed=16)
        train = ds.subset(np.arange(280))
        test = ds.subset(np.arange(280, 400))
        return train, test

    @pytest.mark.parametrize("model", ["pasb-mlr", "pasb-robit", "msr-1-1"])
    def test_error_and_active_fields(self, model):
        train, test = self._splits()
        settings = SuiteSettings(scale=0.01, pg_method="approximate")
        err, active = run_model(model, train, test, settings, seed=17)
        assert 0.0 <= err <= 1.0
        assert active >= 0

    def test_mlr_active_count_fixed_by_grid(self):
        train, test = self._splits()
        settings = SuiteSettings(scale=0.01, pg_method="approximate")
        _, active = run_model("pasb-mlr", train, test, settings, seed=18)
        assert active == train.n_categories - 1

    def test_unknown_model_rejected(self):
        train, test = self._splits()
        with pytest.raises(ValueError):
            run_model("mystery", train, test, SuiteSettings(), seed=0)

    def test_svm_width_search_tries_every_candidate(self, monkeypatch):
        # each cross-validation fit must see its own candidate width;
        # the stub makes exactly one width predict perfectly
        import stickreg.benchmark as bench
        from stickreg.data import rbf_width_grid
        train, _ = self._splits()
        seen = []

        def fake_fit(tr, te, spec, construction, iters, burn_in, seed,
                     permute=True, init_sticks=None, rbf_width=None,
                     transform=None):
            seen.append(rbf_width)
            probs = np.zeros((te.n_obs, tr.n_categories))
            if rbf_width == 4.0:
                probs[np.arange(te.n_obs), te.y] = 1.0
            else:
                probs[:, 0] = 1.0
            return None, None, probs, None

        monkeypatch.setattr(bench, "_fit_predict", fake_fit)
        width = bench._cv_svm_width(train, SuiteSettings(scale=0.01), seed=5)
        assert width == 4.0
        assert set(seen) == set(rbf_width_grid())


class TestSuite:
    def test_rows_and_table(self, tmp_path):
        materialize_builtin("iris", tmp_path)
        settings = SuiteSettings(scale=0.002, pg_method="approximate")
        rows = run_suite(["iris", "vehicle"], ["pasb-mlr"], tmp_path,
                         settings)
        assert len(rows) == 2
        iris, vehicle = rows
        assert iris.status == "ok"
        assert 0.0 <= iris.errors["pasb-mlr"] <= 1.0
        assert vehicle.status.startswith("missing")

        out = suite_table(rows, ["pasb-mlr"])
        lines = out.strip().split("\n")
        assert lines[0].startswith("dataset,")
        assert len(lines) == 3
        assert lines[1].startswith("iris,3,")

    def test_model_names_cover_table(self):
        assert MODEL_NAMES == ("pasb-mlr", "pasb-robit", "pasb-msvm",
                               "msr-1-1", "msr-1-3", "msr-5-1", "msr-5-3",
                               "dt-msr")
