"""Random forest of fully grown binary decision trees.

Each tree trains on a bootstrap resample (same size as the training set,
drawn from the stream for (seed, "tree/<index>")) and considers a fresh
random draw of k features without replacement at every node. Candidate
thresholds are midpoints between consecutive distinct sorted values; the
split maximizing information gain (entropy in bits) wins, with ties going to
the earliest drawn feature and then the lowest threshold. Nodes stop at
purity, fewer than two records, or no positive gain. Leaves keep their class
counts. The forest votes: score = fraction of trees predicting PD.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .data import HEALTHY, PD, Dataset
from .errors import InconsistentCounts, SingleClassTraining
from .rng import SplitMix64, derive_stream


def _entropy(pd_count, n):
    """Binary entropy in bits, vectorized over numpy arrays. 0 log 0 is 0."""
    pd_count = np.asarray(pd_count, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(n > 0, pd_count / np.where(n > 0, n, 1.0), 0.0)
        q = 1.0 - p
        term_p = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
        term_q = np.where(q > 0, -q * np.log2(np.where(q > 0, q, 1.0)), 0.0)
    return term_p + term_q


def info_gain(parent, left, right) -> float:
    """Entropy reduction for splitting parent counts into left and right.

    Counts are (healthy, pd) pairs; children must add up to the parent.
    """
    ph, pp = parent
    lh, lp = left
    rh, rp = right
    if lh + rh != ph or lp + rp != pp:
        raise InconsistentCounts("child counts do not sum to the parent counts")
    n = ph + pp
    nl = lh + lp
    nr = rh + rp
    if n == 0:
        return 0.0
    gain = _entropy(pp, n)
    if nl:
        gain = gain - (nl / n) * _entropy(lp, nl)
    if nr:
        gain = gain - (nr / n) * _entropy(rp, nr)
    return float(gain)


@dataclass(frozen=True, eq=False)
class DecisionTree:
    """Flat preorder node arrays. feature[i] == -1 marks a leaf; internal
    nodes route records with value < threshold to the left child."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray  # (n_nodes, 2) healthy / pd record counts

    def n_nodes(self) -> int:
        return len(self.feature)

    def predict(self, x) -> int:
        i = 0
        while self.feature[i] >= 0:
            i = self.left[i] if x[self.feature[i]] < self.threshold[i] else self.right[i]
        h, p = self.counts[i]
        return PD if p > h else HEALTHY

    def predict_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        node = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            feats = self.feature[node]
            active = feats >= 0
            if not active.any():
                break
            rows = np.nonzero(active)[0]
            f = feats[rows]
            go_left = X[rows, f] < self.threshold[node[rows]]
            node[rows] = np.where(go_left, self.left[node[rows]], self.right[node[rows]])
        leaf = self.counts[node]
        return np.where(leaf[:, 1] > leaf[:, 0], PD, HEALTHY)

    def to_json_list(self) -> list:
        nodes = []
        for i in range(self.n_nodes()):
            if self.feature[i] < 0:
                nodes.append({"leaf": [int(self.counts[i, 0]), int(self.counts[i, 1])]})
            else:
                nodes.append({
                    "split": [int(self.feature[i]), float(self.threshold[i])],
                    "left": int(self.left[i]),
                    "right": int(self.right[i]),
                    "counts": [int(self.counts[i, 0]), int(self.counts[i, 1])],
                })
        return nodes

    @classmethod
    def from_json_list(cls, nodes: list) -> "DecisionTree":
        n = len(nodes)
        feature = np.full(n, -1, dtype=np.int64)
        threshold = np.zeros(n)
        left = np.full(n, -1, dtype=np.int64)
        right = np.full(n, -1, dtype=np.int64)
        counts = np.zeros((n, 2), dtype=np.int64)
        for i, node in enumerate(nodes):
            if "leaf" in node:
                counts[i] = node["leaf"]
            else:
                feature[i], threshold[i] = node["split"]
                left[i] = node["left"]
                right[i] = node["right"]
                counts[i] = node["counts"]
        return cls(feature, threshold, left, right, counts)


def _draw_features(stream: SplitMix64, m: int, k: int) -> list:
    """k distinct feature indices via a partial Fisher-Yates draw."""
    pool = list(range(m))
    drawn = []
    for _ in range(min(k, m)):
        j = stream.below(len(pool))
        drawn.append(pool.pop(j))
    return drawn


def _best_split_for_feature(values, is_pd, parent_pd, parent_entropy):
    order = np.argsort(values, kind="stable")
    sv = values[order]
    sy = is_pd[order]
    change = np.nonzero(sv[1:] != sv[:-1])[0]
    if change.size == 0:
        return None
    n = len(sv)
    cum_pd = np.cumsum(sy)
    left_n = change + 1
    left_pd = cum_pd[change]
    right_n = n - left_n
    right_pd = parent_pd - left_pd
    gains = (parent_entropy
             - (left_n / n) * _entropy(left_pd, left_n)
             - (right_n / n) * _entropy(right_pd, right_n))
    j = int(np.argmax(gains))
    thr = 0.5 * (sv[change[j]] + sv[change[j] + 1])
    return float(gains[j]), float(thr)


def tree_grow(X, y, k: int, stream: SplitMix64) -> DecisionTree:
    """Grow one unpruned tree on (X, y) with k-feature draws per node."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    m = X.shape[1]
    feature, threshold, left, right, counts = [], [], [], [], []

    # explicit stack, nodes appended when visited: pushing the right work item
    # first makes the whole left subtree build before the right, so the flat
    # arrays come out in preorder
    stack = [(np.arange(len(y)), -1, False)]
    while stack:
        idx, parent, is_right = stack.pop()
        node = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        if parent >= 0:
            (right if is_right else left)[parent] = node
        is_pd = (y[idx] == PD).astype(np.int64)
        n = len(idx)
        pd_count = int(is_pd.sum())
        counts.append((n - pd_count, pd_count))
        if n < 2 or pd_count == 0 or pd_count == n:
            continue
        parent_entropy = float(_entropy(pd_count, n))
        best = None
        for f in _draw_features(stream, m, k):
            cand = _best_split_for_feature(X[idx, f], is_pd, pd_count, parent_entropy)
            if cand is None:
                continue
            gain, thr = cand
            if best is None or gain > best[0]:
                best = (gain, f, thr)
        if best is None or best[0] <= 0.0:
            continue
        _, f, thr = best
        go_left = X[idx, f] < thr
        feature[node] = f
        threshold[node] = thr
        stack.append((idx[~go_left], node, True))
        stack.append((idx[go_left], node, False))
    return DecisionTree(
        np.array(feature, dtype=np.int64),
        np.array(threshold),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(counts, dtype=np.int64),
    )


def default_feature_subset(m: int) -> int:
    return int(math.floor(math.log2(m) + 1))


@dataclass(frozen=True)
class ForestConfig:
    trees: int = 100
    feature_subset: int | None = None  # None means floor(log2(m) + 1)
    bootstrap: bool = True


@dataclass(frozen=True, eq=False)
class ForestModel:
    trees: tuple
    config: ForestConfig
    seed: int
    n_features: int

    def to_json_dict(self) -> dict:
        return {
            "kind": "forest",
            "trees": [t.to_json_list() for t in self.trees],
            "feature_subset": self.config.feature_subset,
            "bootstrap": self.config.bootstrap,
            "seed": self.seed,
            "n_features": self.n_features,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ForestModel":
        trees = tuple(DecisionTree.from_json_list(t) for t in obj["trees"])
        cfg = ForestConfig(len(trees), obj["feature_subset"], obj["bootstrap"])
        return cls(trees, cfg, obj["seed"], obj["n_features"])


def forest_train(train: Dataset, config: ForestConfig = ForestConfig(),
                 seed: int = 42) -> ForestModel:
    counts = train.class_counts()
    if counts[0] == 0 or counts[1] == 0:
        raise SingleClassTraining("forest training needs both classes")
    X = train.features
    y = train.labels
    n, m = X.shape
    k = config.feature_subset if config.feature_subset is not None else default_feature_subset(m)
    trees = []
    for t in range(config.trees):
        stream = derive_stream(seed, f"tree/{t}")
        if config.bootstrap:
            sample = [stream.below(n) for _ in range(n)]
            trees.append(tree_grow(X[sample], y[sample], k, stream))
        else:
            trees.append(tree_grow(X, y, k, stream))
    return ForestModel(tuple(trees), config, seed, m)


def forest_score(model: ForestModel, features) -> float:
    """Fraction of trees voting PD. A 0.5 tie is resolved to healthy by the
    caller's strict > 0.5 decision rule."""
    x = np.asarray(features, dtype=np.float64)
    votes = sum(t.predict(x) == PD for t in model.trees)
    return votes / len(model.trees)


def forest_score_batch(model: ForestModel, features) -> np.ndarray:
    X = np.asarray(features, dtype=np.float64)
    votes = np.zeros(X.shape[0])
    for tree in model.trees:
        votes += tree.predict_batch(X) == PD
    return votes / len(model.trees)


def save_model(model: ForestModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path) -> ForestModel:
    with open(path, encoding="utf-8") as fh:
        return ForestModel.from_json_dict(json.load(fh))
