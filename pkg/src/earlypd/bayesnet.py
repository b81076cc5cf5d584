"""Discrete Bayes net classifier: K2 structure search plus smoothed CPTs.

Node 0 is the class, followed by the 13 features in schema order, which fixes
the K2 topological ordering. The search starts from a naive-Bayes structure
(class as parent of every feature, when max_parents allows one) and greedily
adds the predecessor giving the largest score improvement until nothing
improves or max_parents is reached. Families are scored with the
Cooper-Herskovits log marginal likelihood, evaluated through log-gamma.

CPT cells use Laplace-style smoothing: P = (N_jk + alpha) / (N_j + alpha * r)
with alpha = 0.5 by default, so every probability is strictly positive and
unseen parent configurations fall back to the uniform prior.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .data import PD, Dataset
from .errors import SingleClassTraining
from .preprocess import DiscretizationMap, discretize_fit

CLASS_NODE = 0


def _config_codes(data: np.ndarray, parents, arities) -> np.ndarray:
    """Mixed-radix code of each row's parent configuration.

    Parents are taken in the given order; the last parent varies fastest.
    """
    codes = np.zeros(data.shape[0], dtype=np.int64)
    for p in parents:
        codes = codes * arities[p] + data[:, p]
    return codes


def _n_configs(parents, arities) -> int:
    out = 1
    for p in parents:
        out *= arities[p]
    return out


def family_counts(data: np.ndarray, node: int, parents, arities) -> np.ndarray:
    """(n_parent_configs, node_arity) table of joint counts."""
    r = arities[node]
    rows = _n_configs(parents, arities)
    if data.shape[0] == 0:
        return np.zeros((rows, r), dtype=np.int64)
    codes = _config_codes(data, parents, arities) * r + data[:, node]
    return np.bincount(codes, minlength=rows * r).reshape(rows, r)


def family_log_score(data: np.ndarray, node: int, parents, arities) -> float:
    """Cooper-Herskovits log marginal likelihood of one family.

    For each parent configuration j with row total N_j and per-value counts
    N_jk: log[(r-1)! / (N_j + r - 1)!] + sum_k log(N_jk!), summed over j.
    Configurations absent from the data contribute zero; an empty dataset
    scores zero.
    """
    counts = family_counts(data, node, parents, arities)
    r = arities[node]
    score = 0.0
    for row in counts:
        n_j = int(row.sum())
        if n_j == 0:
            continue
        score += math.lgamma(r) - math.lgamma(n_j + r)
        for n_jk in row:
            if n_jk:
                score += math.lgamma(n_jk + 1)
    return score


def k2_search(data: np.ndarray, arities, max_parents: int = 2,
              naive_start: bool = True) -> tuple:
    """Greedy parent selection per node in ordering index order.

    Returns a tuple of sorted parent tuples. Feature nodes start with the
    class as a fixed parent when naive_start is set and max_parents >= 1;
    candidate additions are all earlier nodes, ties broken toward the lowest
    node index, and only strictly positive score gains are accepted.
    """
    n_nodes = len(arities)
    all_parents = []
    for node in range(n_nodes):
        if node == CLASS_NODE:
            all_parents.append(())
            continue
        parents = [CLASS_NODE] if (naive_start and max_parents >= 1) else []
        score = family_log_score(data, node, parents, arities)
        while len(parents) < max_parents:
            best_gain, best_candidate, best_score = 0.0, None, None
            for candidate in range(node):
                if candidate in parents:
                    continue
                trial = sorted(parents + [candidate])
                trial_score = family_log_score(data, node, trial, arities)
                gain = trial_score - score
                if gain > best_gain:
                    best_gain, best_candidate, best_score = gain, candidate, trial_score
            if best_candidate is None:
                break
            parents = sorted(parents + [best_candidate])
            score = best_score
        all_parents.append(tuple(parents))
    return tuple(all_parents)


def cpt_estimate(data: np.ndarray, node: int, parents, arities,
                 alpha: float = 0.5) -> np.ndarray:
    """Smoothed conditional probability table, one row per parent config."""
    counts = family_counts(data, node, parents, arities).astype(np.float64)
    r = arities[node]
    totals = counts.sum(axis=1, keepdims=True)
    if alpha == 0.0:
        safe = np.where(totals == 0, 1.0, totals)
        with np.errstate(invalid="ignore"):
            table = np.where(totals == 0, 1.0 / r, counts / safe)
        return table
    return (counts + alpha) / (totals + alpha * r)


@dataclass(frozen=True, eq=False)
class DiscreteNet:
    """Structure plus CPTs over nodes 0..n-1 (node 0 is the query node)."""

    arities: tuple
    parents: tuple
    cpts: tuple

    def log_joint(self, values) -> float:
        """log P(values) as the sum of CPT lookups, -inf on a zero cell."""
        total = 0.0
        for node, cpt in enumerate(self.cpts):
            row = 0
            for p in self.parents[node]:
                row = row * self.arities[p] + int(values[p])
            prob = cpt[row, int(values[node])]
            if prob <= 0.0:
                return float("-inf")
            total += math.log(prob)
        return total

    def posterior(self, values) -> np.ndarray:
        """P(node 0 | all other nodes) from the factored joint.

        values[0] is ignored. Normalized over node 0's arity; if every
        branch has zero probability the posterior is uniform.
        """
        values = list(values)
        logs = np.empty(self.arities[CLASS_NODE])
        for c in range(self.arities[CLASS_NODE]):
            values[CLASS_NODE] = c
            logs[c] = self.log_joint(values)
        peak = logs.max()
        if peak == float("-inf"):
            return np.full(len(logs), 1.0 / len(logs))
        weights = np.exp(logs - peak)
        return weights / weights.sum()


def fit_net(data: np.ndarray, arities, max_parents: int = 2,
            alpha: float = 0.5, naive_start: bool = True) -> DiscreteNet:
    parents = k2_search(data, arities, max_parents, naive_start)
    cpts = tuple(cpt_estimate(data, node, parents[node], arities, alpha)
                 for node in range(len(arities)))
    return DiscreteNet(tuple(arities), parents, cpts)


@dataclass(frozen=True)
class BayesNetConfig:
    bins: int = 10
    strategy: str = "equal_frequency"
    max_parents: int = 2
    alpha: float = 0.5


@dataclass(frozen=True, eq=False)
class BayesNetModel:
    net: DiscreteNet
    dmap: DiscretizationMap
    config: BayesNetConfig

    def to_json_dict(self) -> dict:
        return {
            "kind": "bayesnet",
            "bins": self.config.bins,
            "strategy": self.config.strategy,
            "max_parents": self.config.max_parents,
            "alpha": self.config.alpha,
            "arities": list(self.net.arities),
            "parents": [list(p) for p in self.net.parents],
            "cpts": [[float(v) for v in cpt.ravel()] for cpt in self.net.cpts],
            "schema": list(self.dmap.schema),
            "discretization": self.dmap.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "BayesNetModel":
        arities = tuple(obj["arities"])
        parents = tuple(tuple(p) for p in obj["parents"])
        cpts = []
        for node, flat in enumerate(obj["cpts"]):
            r = arities[node]
            cpts.append(np.array(flat).reshape(-1, r))
        net = DiscreteNet(arities, parents, tuple(cpts))
        dmap = DiscretizationMap.from_json_dict(obj["discretization"], obj["schema"])
        cfg = BayesNetConfig(obj["bins"], obj["strategy"], obj["max_parents"],
                             obj["alpha"])
        return cls(net, dmap, cfg)


def _node_matrix(ds: Dataset, dmap: DiscretizationMap) -> np.ndarray:
    """(n, 14) int matrix: class values in column 0, bins after."""
    bins = dmap.bin_matrix(ds.features)
    cls = (ds.labels == PD).astype(np.int64)
    return np.hstack([cls[:, None], bins])


def bn_train(train: Dataset, config: BayesNetConfig = BayesNetConfig()) -> BayesNetModel:
    counts = train.class_counts()
    if counts[0] == 0 or counts[1] == 0:
        raise SingleClassTraining("Bayes net training needs both classes")
    dmap = discretize_fit(train, config.bins, config.strategy)
    data = _node_matrix(train, dmap)
    arities = (2,) + dmap.arities()
    net = fit_net(data, arities, config.max_parents, config.alpha)
    return BayesNetModel(net, dmap, config)


def bn_score(model: BayesNetModel, features) -> float:
    """Posterior probability of PD given all feature bins.

    Out-of-range values clamp to the first or last bin through the
    discretization map's searchsorted rule.
    """
    x = np.asarray(features, dtype=np.float64).reshape(1, -1)
    bins = model.dmap.bin_matrix(x)[0]
    values = [0, *bins.tolist()]
    return float(model.net.posterior(values)[1])


def bn_score_batch(model: BayesNetModel, features) -> np.ndarray:
    """Vectorized posterior of PD for many records."""
    X = np.asarray(features, dtype=np.float64)
    bins = model.dmap.bin_matrix(X)
    n = X.shape[0]
    net = model.net
    logs = np.zeros((n, 2))
    values = np.hstack([np.zeros((n, 1), dtype=np.int64), bins])
    for c in (0, 1):
        values[:, CLASS_NODE] = c
        total = np.zeros(n)
        for node, cpt in enumerate(net.cpts):
            rows = np.zeros(n, dtype=np.int64)
            for p in net.parents[node]:
                rows = rows * net.arities[p] + values[:, p]
            probs = cpt[rows, values[:, node]]
            with np.errstate(divide="ignore"):
                total += np.log(probs)
        logs[:, c] = total
    peak = logs.max(axis=1, keepdims=True)
    both_zero = np.isneginf(peak[:, 0])
    with np.errstate(invalid="ignore"):
        weights = np.exp(logs - np.where(both_zero[:, None], 0.0, peak))
    weights[both_zero] = 1.0
    return weights[:, 1] / weights.sum(axis=1)


def save_model(model: BayesNetModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path) -> BayesNetModel:
    with open(path, encoding="utf-8") as fh:
        return BayesNetModel.from_json_dict(json.load(fh))
