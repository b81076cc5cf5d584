"""Entropy math, tree induction, and forest ensemble behavior."""

import math

import numpy as np
import pytest

from earlypd.errors import InconsistentCounts, SingleClassTraining
from earlypd.forest import (
    DecisionTree,
    ForestConfig,
    default_feature_subset,
    forest_score,
    forest_score_batch,
    forest_train,
    info_gain,
    load_model,
    save_model,
    tree_grow,
)
from earlypd.rng import SplitMix64

from conftest import make_dataset


def test_info_gain_hand_values():
    # parent (2,2): entropy 1 bit; perfect split removes all of it
    assert info_gain((2, 2), (2, 0), (0, 2)) == pytest.approx(1.0)
    # parent (3,1): H = 0.811278...; children (2,0) pure and (1,1) at 1 bit
    h31 = -(3 / 4) * math.log2(3 / 4) - (1 / 4) * math.log2(1 / 4)
    want = h31 - 0.5 * 0.0 - 0.5 * 1.0
    assert info_gain((3, 1), (2, 0), (1, 1)) == pytest.approx(want)
    assert h31 == pytest.approx(0.8112781244591328)


def test_info_gain_no_split_is_zero():
    assert info_gain((3, 5), (3, 5), (0, 0)) == pytest.approx(0.0)


def test_info_gain_inconsistent_counts():
    with pytest.raises(InconsistentCounts):
        info_gain((1, 1), (2, 0), (0, 2))


def test_tree_grow_one_dimensional_midpoint():
    X = np.array([[0.0], [1.0]])
    y = np.array([0, 1])
    tree = tree_grow(X, y, k=1, stream=SplitMix64(1))
    assert tree.feature[0] == 0
    assert tree.threshold[0] == 0.5  # midpoint between the two values
    assert tree.predict([0.2]) == 0
    assert tree.predict([0.8]) == 1


def test_tree_fits_training_data_exactly():
    rng = np.random.default_rng(0)
    X = rng.random((60, 5))
    y = rng.integers(0, 2, 60)
    tree = tree_grow(X, y, k=5, stream=SplitMix64(3))
    assert list(tree.predict_batch(X)) == list(y)


def test_tree_leaf_tie_predicts_healthy():
    leaf = DecisionTree(
        feature=np.array([-1]), threshold=np.zeros(1),
        left=np.zeros(1, dtype=np.int64), right=np.zeros(1, dtype=np.int64),
        counts=np.array([[3, 3]]))
    assert leaf.predict([0.0]) == 0
    assert list(leaf.predict_batch([[0.0], [1.0]])) == [0, 0]


def test_tree_serialization_round_trip():
    rng = np.random.default_rng(5)
    X = rng.random((40, 4))
    y = rng.integers(0, 2, 40)
    tree = tree_grow(X, y, k=4, stream=SplitMix64(9))
    again = DecisionTree.from_json_list(tree.to_json_list())
    assert np.array_equal(again.feature, tree.feature)
    assert np.array_equal(again.threshold, tree.threshold)
    assert np.array_equal(again.left, tree.left)
    assert np.array_equal(again.right, tree.right)
    assert np.array_equal(again.counts, tree.counts)


def test_tree_arrays_are_preorder():
    rng = np.random.default_rng(6)
    X = rng.random((50, 3))
    y = rng.integers(0, 2, 50)
    tree = tree_grow(X, y, k=3, stream=SplitMix64(2))
    # preorder: every internal node's left child is the next array slot
    for i in range(tree.n_nodes()):
        if tree.feature[i] >= 0:
            assert tree.left[i] == i + 1
            assert tree.right[i] > tree.left[i]


def test_predict_batch_matches_scalar():
    rng = np.random.default_rng(7)
    X = rng.random((30, 4))
    y = rng.integers(0, 2, 30)
    tree = tree_grow(X, y, k=4, stream=SplitMix64(11))
    probe = rng.random((100, 4))
    assert list(tree.predict_batch(probe)) == [tree.predict(row) for row in probe]


def test_default_feature_subset_formula():
    assert default_feature_subset(13) == 4  # floor(log2(13) + 1)
    assert default_feature_subset(1) == 1
    assert default_feature_subset(32) == 6


def test_forest_without_bootstrap_single_tree_equals_plain_tree():
    rng = np.random.default_rng(8)
    X = rng.random((50, 6))
    y = rng.integers(0, 2, 50)
    ds = make_dataset(X, y)
    cfg = ForestConfig(trees=1, feature_subset=6, bootstrap=False)
    model = forest_train(ds, cfg, seed=21)
    from earlypd.rng import derive_stream
    plain = tree_grow(X, y, k=6, stream=derive_stream(21, "tree/0"))
    probe = rng.random((200, 6))
    assert np.array_equal(model.trees[0].predict_batch(probe),
                          plain.predict_batch(probe))


def test_forest_training_is_deterministic(small_split):
    train, _ = small_split
    cfg = ForestConfig(trees=5)
    a = forest_train(train, cfg, seed=3)
    b = forest_train(train, cfg, seed=3)
    assert a.to_json_dict() == b.to_json_dict()
    c = forest_train(train, cfg, seed=4)
    assert a.to_json_dict() != c.to_json_dict()


def test_forest_score_is_vote_fraction(small_split):
    train, test = small_split
    model = forest_train(train, ForestConfig(trees=9), seed=2)
    x = test.features[0]
    votes = sum(tree.predict(x) for tree in model.trees)
    assert forest_score(model, x) == pytest.approx(votes / 9)
    batch = forest_score_batch(model, test.features)
    assert batch[0] == pytest.approx(votes / 9)
    assert np.all((batch >= 0) & (batch <= 1))


def test_forest_beats_chance(small_split):
    train, test = small_split
    model = forest_train(train, ForestConfig(trees=25), seed=6)
    scores = forest_score_batch(model, test.features)
    acc = np.mean((scores > 0.5).astype(int) == test.labels)
    assert acc >= 0.85


def test_forest_single_class_raises():
    ds = make_dataset([[0.1], [0.6]], [1, 1])
    with pytest.raises(SingleClassTraining):
        forest_train(ds, ForestConfig(trees=1))


def test_forest_json_round_trip(tmp_path, small_split):
    train, test = small_split
    model = forest_train(train, ForestConfig(trees=4), seed=13)
    path = tmp_path / "forest.json"
    save_model(model, path)
    again = load_model(path)
    assert again.config == model.config
    assert again.n_features == model.n_features
    assert np.array_equal(forest_score_batch(again, test.features),
                          forest_score_batch(model, test.features))
