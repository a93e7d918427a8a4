"""Classification: label construction, logistic regression, random
forest, AUC, and the train/test report."""

import itertools
from datetime import date, timedelta

import numpy as np
import pytest

from epicast.classify import (LabeledTable, auc, build_labels, fit_forest,
                              fit_logistic, logistic_loss_grad, predict_proba,
                              predict_proba_standardized, stratified_split,
                              weather_report)
from epicast.errors import ContractError, DataError
from epicast.ingest import JoinedRow


def _rows(new_cases, temps=None, lat=40.0):
    start = date(2020, 2, 1)
    temps = temps if temps is not None else [10.0] * len(new_cases)
    return [JoinedRow(start + timedelta(days=i), i, temps[i], lat, c)
            for i, c in enumerate(new_cases)]


def _table(X, y):
    return LabeledTable(np.asarray(X, dtype=float),
                        np.asarray(y, dtype=float),
                        (0.0, 0.0, 0.0), (1.0, 1.0, 1.0))


def _random_table(seed, n=200, signal=0.0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 3))
    z = signal * X[:, 0] + rng.normal(size=n)
    y = (z > np.median(z)).astype(float)
    return _table(X, y)


class TestBuildLabels:
    def test_median_rule_hand_example(self):
        table = build_labels(_rows([1.0, 2.0, 3.0, 4.0, 100.0] * 2))
        # median of the duplicated set is 3.5
        expect = [0, 0, 0, 1, 1] * 2
        assert list(table.labels) == expect

    def test_standardization(self):
        table = build_labels(_rows([1, 2, 3, 4, 100] * 2,
                                   temps=list(range(10))))
        assert table.features[:, 0].mean() == pytest.approx(0.0, abs=1e-12)
        assert table.features[:, 0].std() == pytest.approx(1.0, abs=1e-12)
        # constant latitude column maps to zeros, not NaN
        assert np.allclose(table.features[:, 1], 0.0)

    def test_per_region_median(self):
        lo = _rows([1, 2, 3, 4, 5, 6], lat=10.0)
        hi = _rows([100, 200, 300, 400, 500, 600], lat=50.0)
        table = build_labels([lo, hi])
        # each region is split against its own median
        assert list(table.labels) == [0, 0, 0, 1, 1, 1] * 2

    def test_degenerate_labels_rejected(self):
        rows = _rows([5.0] * 12)
        with pytest.raises(DataError, match="degenerate"):
            build_labels(rows)

    def test_too_few_rows(self):
        with pytest.raises(ContractError):
            build_labels(_rows([1, 2, 3]))


class TestLogistic:
    def test_separable_points(self):
        X = np.array([[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]] * 6)
        y = np.array([0.0, 1.0] * 6)
        m = fit_logistic(_table(X, y), max_iters=20000, tol=1e-14)
        p = predict_proba_standardized(m, X)
        assert (p[y == 1] > 0.9).all()
        assert (p[y == 0] < 0.1).all()

    def test_loss_non_increasing(self):
        m = fit_logistic(_random_table(0, signal=1.0))
        losses = np.asarray(m.losses)
        assert (np.diff(losses) <= 0.0).all()

    def test_gradient_matches_central_differences(self):
        table = _random_table(1, n=60, signal=0.5)
        rng = np.random.default_rng(2)
        w = rng.normal(size=3)
        b = 0.3
        _, gw, gb = logistic_loss_grad(w, b, table.features, table.labels)
        eps = 1e-6
        for j in range(3):
            wp, wm = w.copy(), w.copy()
            wp[j] += eps
            wm[j] -= eps
            lp, _, _ = logistic_loss_grad(wp, b, table.features, table.labels)
            lm, _, _ = logistic_loss_grad(wm, b, table.features, table.labels)
            assert gw[j] == pytest.approx((lp - lm) / (2 * eps), abs=1e-5)
        lp, _, _ = logistic_loss_grad(w, b + eps, table.features, table.labels)
        lm, _, _ = logistic_loss_grad(w, b - eps, table.features, table.labels)
        assert gb == pytest.approx((lp - lm) / (2 * eps), abs=1e-5)

    def test_gradient_small_at_convergence(self):
        table = _random_table(3, n=300, signal=0.8)
        m = fit_logistic(table, max_iters=200000, tol=1e-14)
        _, gw, gb = logistic_loss_grad(np.asarray(m.weights), m.bias,
                                       table.features, table.labels)
        assert max(np.max(np.abs(gw)), abs(gb)) < 1e-4

    def test_zero_weights_give_half(self):
        m = fit_logistic(_random_table(4))
        m0 = type(m)((0.0, 0.0, 0.0), 0.0, 0, 0.0, m.means, m.stds)
        assert np.allclose(predict_proba(m0, [[5.0, 1.0, 2.0]]), 0.5)

    def test_probabilities_in_unit_interval(self):
        m = fit_logistic(_random_table(5, signal=2.0))
        rng = np.random.default_rng(6)
        p = predict_proba_standardized(m, rng.normal(scale=50, size=(100, 3)))
        assert (p >= 0.0).all() and (p <= 1.0).all()

    def test_too_few_rows(self):
        with pytest.raises(ContractError):
            fit_logistic(_table(np.zeros((5, 3)), [0, 1, 0, 1, 0]))

    def test_feature_arity_checked(self):
        m = fit_logistic(_random_table(7))
        with pytest.raises(ContractError):
            predict_proba(m, [[1.0, 2.0]])


class TestForest:
    def test_step_function_learned(self):
        rng = np.random.default_rng(8)
        X = rng.uniform(-1, 1, size=(200, 3))
        y = (X[:, 0] > 0.2).astype(float)
        m = fit_forest(_table(X, y), n_trees=30, seed=0)
        p = predict_proba_standardized(m, X)
        assert auc(p, y) == pytest.approx(1.0, abs=1e-9)

    def test_single_stump_at_depth_zero_predicts_base_rate(self):
        table = _random_table(9)
        m = fit_forest(table, n_trees=1, max_depth=0, seed=3)
        p = predict_proba_standardized(m, table.features[:5])
        # depth 0: every tree is a leaf holding its bootstrap mean
        assert np.allclose(p, p[0])
        assert 0.3 < p[0] < 0.7

    def test_deterministic_across_runs_and_workers(self):
        table = _random_table(10, signal=1.0)
        a = fit_forest(table, n_trees=24, seed=7, n_jobs=1)
        b = fit_forest(table, n_trees=24, seed=7, n_jobs=4)
        c = fit_forest(table, n_trees=24, seed=7, n_jobs=1)
        assert a.to_json() == b.to_json() == c.to_json()

    def test_seed_changes_forest(self):
        table = _random_table(11, signal=1.0)
        a = fit_forest(table, n_trees=10, seed=0)
        b = fit_forest(table, n_trees=10, seed=1)
        assert a.to_json() != b.to_json()

    def test_xor_beats_logistic(self):
        rng = np.random.default_rng(12)
        X = rng.uniform(-1, 1, size=(400, 3))
        y = ((X[:, 0] > 0) ^ (X[:, 1] > 0)).astype(float)
        table = _table(X, y)
        lm = fit_logistic(table)
        fm = fit_forest(table, n_trees=40, seed=0)
        auc_lm = auc(predict_proba_standardized(lm, X), y)
        auc_fm = auc(predict_proba_standardized(fm, X), y)
        assert auc_fm > auc_lm + 0.3

    def test_probabilities_bounded(self):
        table = _random_table(13)
        m = fit_forest(table, n_trees=15, seed=0)
        p = predict_proba_standardized(m, table.features)
        assert (p >= 0.0).all() and (p <= 1.0).all()


class TestAuc:
    def test_perfect_and_inverted(self):
        assert auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0
        assert auc([0.9, 0.8, 0.2, 0.1], [0, 0, 1, 1]) == 0.0

    def test_all_tied_scores(self):
        assert auc([0.5] * 6, [0, 1, 0, 1, 0, 1]) == 0.5

    def test_hand_example(self):
        # pairs: (0.3 vs 0.2) concordant, (0.3 vs 0.4) discordant,
        # (0.9 vs both) concordant -> 3/4
        assert auc([0.2, 0.4, 0.3, 0.9], [0, 0, 1, 1]) == 0.75

    def test_exhaustive_pair_oracle(self):
        rng = np.random.default_rng(14)
        for n in range(2, 9):
            scores = rng.normal(size=n)
            scores[rng.integers(0, n)] = scores[0]  # inject a tie sometimes
            for labels in itertools.product((0, 1), repeat=n):
                y = np.array(labels, dtype=float)
                if y.min() == y.max():
                    continue
                pos = scores[y == 1]
                neg = scores[y == 0]
                pairs = [(0.5 if a == b else float(a > b))
                         for a in pos for b in neg]
                assert auc(scores, y) == pytest.approx(np.mean(pairs), abs=1e-12)

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(15)
        s = rng.normal(size=40)
        y = rng.integers(0, 2, 40).astype(float)
        assert auc(np.exp(s), y) == pytest.approx(auc(s, y), abs=1e-12)

    def test_label_flip_symmetry(self):
        rng = np.random.default_rng(16)
        s = rng.normal(size=30)
        y = rng.integers(0, 2, 30).astype(float)
        assert auc(s, y) + auc(s, 1 - y) == pytest.approx(1.0, abs=1e-12)

    def test_single_class_rejected(self):
        with pytest.raises(ContractError):
            auc([0.1, 0.2], [1, 1])


class TestSplitAndReport:
    def test_stratified_split_preserves_class_balance(self):
        table = _random_table(17)
        tr, te = stratified_split(table, 0.3, seed=0)
        assert len(tr) + len(te) == table.n
        assert set(tr) & set(te) == set()
        rate_all = table.labels.mean()
        assert abs(table.labels[te].mean() - rate_all) < 0.05

    def test_null_auc_centered(self):
        hits = 0
        for seed in range(50):
            rng = np.random.default_rng(seed)
            X = rng.normal(size=(400, 3))
            y = rng.integers(0, 2, 400).astype(float)
            table = _table(X, y)
            tr, te = stratified_split(table, 0.3, seed)
            train = LabeledTable(X[tr].copy(), y[tr].copy(),
                                 table.means, table.stds)
            m = fit_logistic(train)
            a = auc(predict_proba_standardized(m, X[te]), y[te])
            hits += (0.35 <= a <= 0.65)
        assert hits >= 45  # >= 90%

    def test_weather_report_fields_and_signal(self):
        table = _random_table(18, n=300, signal=2.0)
        rep = weather_report(table, seed=0, n_trees=20)
        for key in ("logistic_auc", "forest_auc", "n_train", "n_test",
                    "ablation_temperature_auc", "ablation_latitude_auc",
                    "ablation_day_index_auc"):
            assert key in rep
        assert rep["n_train"] + rep["n_test"] == table.n
        # feature 0 carries the signal
        assert rep["logistic_auc"] > 0.8
        assert rep["ablation_temperature_auc"] > 0.8
        assert rep["ablation_latitude_auc"] < rep["ablation_temperature_auc"]
