import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from uu_audit.eventlog import ParseError
from uu_audit.models import (
    ForestConfig,
    ModelError,
    Prediction,
    _gini,
    import_scores,
    load_forest,
    predict_proba,
    save_forest,
    train_forest,
    train_overconfident_baseline,
    write_scores,
)


def _separable(n=40, d=5, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.random((n, d))
    y = (X[:, 2] > 0.5).astype(int)
    if y.min() == y.max():  # force both classes
        y[0] = 1 - y[0]
    return X, y


class TestPrediction:
    @given(st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
    def test_invariants_for_any_p(self, p):
        pr = Prediction.from_p("u", p)
        assert pr.c == abs(p - 0.5)
        assert pr.y_hat == (1 if p >= 0.5 else 0)
        assert 0.0 <= pr.c <= 0.5

    def test_boundary_half_predicts_fail(self):
        pr = Prediction.from_p("u", 0.5)
        assert pr.y_hat == 1 and pr.c == 0.0

    def test_out_of_range_rejected(self):
        with pytest.raises(ModelError):
            Prediction.from_p("u", 1.2)


class TestForest:
    def test_pure_split_perfect_training_accuracy(self):
        X = np.array([[0.0], [0.1], [0.9], [1.0]])
        y = np.array([0, 0, 1, 1])
        model = train_forest(X, y, ForestConfig(n_trees=1, max_depth=1, features_per_split=1, seed=5))
        p = model.predict_proba(X)
        assert ((p >= 0.5).astype(int) == y).all()

    def test_vote_aggregation_is_mean_of_trees(self):
        X, y = _separable()
        model = train_forest(X, y, ForestConfig(n_trees=3, max_depth=4, features_per_split=2, seed=9))
        x = X[:1]
        per_tree = [t.predict_proba(x)[0] for t in model.trees]
        assert model.predict_proba(x)[0] == pytest.approx(np.mean(per_tree), abs=1e-15)

    def test_duplicating_every_tree_leaves_p_unchanged(self):
        X, y = _separable()
        model = train_forest(X, y, ForestConfig(n_trees=4, max_depth=3, features_per_split=2, seed=1))
        pure = model.predict_proba(X)
        model.trees = model.trees * 2
        np.testing.assert_allclose(model.predict_proba(X), pure, atol=1e-15)

    def test_same_seed_same_predictions(self):
        X, y = _separable(seed=3)
        cfg = ForestConfig(n_trees=10, max_depth=5, features_per_split=3, seed=42)
        p1 = train_forest(X, y, cfg).predict_proba(X)
        p2 = train_forest(X, y, cfg).predict_proba(X)
        np.testing.assert_array_equal(p1, p2)

    def test_different_seed_differs(self):
        X, y = _separable(n=60, seed=3)
        p1 = train_forest(X, y, ForestConfig(n_trees=5, seed=1, features_per_split=2)).predict_proba(X)
        p2 = train_forest(X, y, ForestConfig(n_trees=5, seed=2, features_per_split=2)).predict_proba(X)
        assert not np.array_equal(p1, p2)

    def test_single_class_rejected(self):
        X = np.random.default_rng(0).random((10, 3))
        with pytest.raises(ModelError, match="degenerate labels"):
            train_forest(X, np.zeros(10, dtype=int), ForestConfig(n_trees=2))

    def test_dimension_mismatch_rejected(self):
        X, y = _separable()
        model = train_forest(X, y, ForestConfig(n_trees=2, features_per_split=2, seed=0))
        with pytest.raises(ModelError, match="features"):
            model.predict_proba(np.zeros((1, 7)))

    def test_probabilities_in_unit_interval(self):
        X, y = _separable(n=80, seed=11)
        model = train_forest(X, y, ForestConfig(n_trees=20, max_depth=6, features_per_split=3, seed=2))
        p = model.predict_proba(np.random.default_rng(1).random((50, 5)))
        assert (p >= 0.0).all() and (p <= 1.0).all()

    def test_split_never_increases_impurity(self):
        X, y = _separable(n=100, seed=13)
        model = train_forest(X, y, ForestConfig(n_trees=5, max_depth=6, features_per_split=3, seed=4))
        for tree in model.trees:
            for node in range(len(tree.feature)):
                if tree.feature[node] < 0:
                    continue
                n0, n1 = tree.counts[node]
                l, r = tree.left[node], tree.right[node]
                parent = _gini(n0, n1)
                wl = tree.counts[l].sum() / (n0 + n1)
                child = wl * _gini(*tree.counts[l]) + (1 - wl) * _gini(*tree.counts[r])
                assert child <= parent + 1e-12

    def test_predict_proba_single_vector_helper(self):
        X, y = _separable()
        model = train_forest(X, y, ForestConfig(n_trees=3, features_per_split=2, seed=0))
        assert predict_proba(model, X[0]) == model.predict_proba(X[:1])[0]

    def test_save_load_roundtrip(self, tmp_path):
        X, y = _separable(n=50, seed=8)
        model = train_forest(X, y, ForestConfig(n_trees=4, max_depth=4, features_per_split=2, seed=3))
        path = tmp_path / "forest.json"
        save_forest(model, path)
        back = load_forest(path)
        np.testing.assert_array_equal(back.predict_proba(X), model.predict_proba(X))


class TestOverconfidentBaseline:
    def test_zero_epochs_gives_half(self):
        X, y = _separable()
        model = train_overconfident_baseline(X, y, epochs=0)
        np.testing.assert_array_equal(model.predict_proba(X), np.full(len(X), 0.5))

    def test_separable_data_yields_high_confidence(self):
        rng = np.random.default_rng(0)
        X = np.vstack([rng.normal(0.2, 0.05, (30, 4)), rng.normal(0.8, 0.05, (30, 4))])
        y = np.array([0] * 30 + [1] * 30)
        model = train_overconfident_baseline(X, y, epochs=5000)
        c = np.abs(model.predict_proba(X) - 0.5)
        assert c.mean() > 0.4

    def test_duplicating_data_leaves_fit_unchanged(self):
        X, y = _separable(n=30, seed=2)
        m1 = train_overconfident_baseline(X, y, epochs=200)
        m2 = train_overconfident_baseline(np.vstack([X, X]), np.concatenate([y, y]), epochs=200)
        np.testing.assert_allclose(m1.predict_proba(X), m2.predict_proba(X), atol=1e-12)

    def test_single_class_rejected(self):
        with pytest.raises(ModelError, match="degenerate labels"):
            train_overconfident_baseline(np.zeros((4, 2)), np.zeros(4, dtype=int))


class TestImportScores:
    def test_derivations_from_rows(self):
        text = "user_id,fold_id,p\ns1,0,0.9\ns2,3,0.5\n"
        preds = import_scores(io.StringIO(text))
        assert preds[0].y_hat == 1 and preds[0].c == pytest.approx(0.4)
        assert preds[1].y_hat == 1 and preds[1].c == 0.0

    def test_out_of_range_p_names_line(self):
        text = "user_id,fold_id,p\ns1,0,0.9\ns2,1,0.5\ns3,1,1.2\n"
        with pytest.raises(ParseError) as exc:
            import_scores(io.StringIO(text))
        assert exc.value.line == 4

    def test_roundtrip_with_write_scores(self, tmp_path):
        preds = [Prediction.from_p(f"s{i}", i / 10, fold_id=i % 3) for i in range(10)]
        path = tmp_path / "scores.csv"
        write_scores(preds, path)
        back = import_scores(path, model_id="")
        assert [(b.user_id, b.fold_id, b.p) for b in back] == [
            (p.user_id, p.fold_id, p.p) for p in preds
        ]
