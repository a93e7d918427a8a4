"""Weather-vs-cases hypothesis testing: labeled-table construction,
from-scratch logistic regression and random forest, and rank-based AUC."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .errors import ContractError, DataError, NumericalError
from .ingest import JoinedRow

FEATURE_NAMES = ("temperature", "latitude", "day_index")


@dataclass(frozen=True)
class LabeledTable:
    """Standardized n x 3 feature matrix with binary labels."""

    features: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)
    means: tuple
    stds: tuple

    def __post_init__(self):
        self.features.setflags(write=False)
        self.labels.setflags(write=False)
        if self.features.ndim != 2 or self.features.shape[1] != len(FEATURE_NAMES):
            raise ContractError("features must be n x 3")
        if not np.isin(self.labels, (0, 1)).all():
            raise ContractError("labels must be binary")

    @property
    def n(self) -> int:
        return self.features.shape[0]


def build_labels(rows, rule=None) -> LabeledTable:
    """Build a table from joined rows (one list per region, or a single
    flat list).  Default rule labels days whose new cases exceed the
    region's median."""
    if rows and isinstance(rows[0], JoinedRow):
        groups = [rows]
    else:
        groups = list(rows)
    if rule is None:
        def rule(new_cases):
            return (new_cases > np.median(new_cases)).astype(float)

    feats, labels = [], []
    for group in groups:
        if not group:
            continue
        cases = np.array([r.new_cases for r in group], dtype=float)
        labels.append(rule(cases))
        feats.append(np.array([[r.temperature, r.latitude, r.day_index]
                               for r in group], dtype=float))
    if not feats:
        raise ContractError("no rows to label")
    X = np.vstack(feats)
    y = np.concatenate(labels)
    if X.shape[0] < 10:
        raise ContractError("need at least 10 rows for training")
    if y.min() == y.max():
        raise DataError("degenerate labels: every row got the same class")

    means = X.mean(axis=0)
    stds = X.std(axis=0)
    stds[stds == 0.0] = 1.0  # constant column (single-region latitude) maps to 0
    Xs = (X - means) / stds
    return LabeledTable(Xs, y, tuple(means), tuple(stds))


# ---------------------------------------------------------------------------
# logistic regression

@dataclass(frozen=True)
class LogisticModel:
    weights: tuple
    bias: float
    n_iters_run: int
    final_loss: float
    means: tuple
    stds: tuple
    losses: tuple = field(default=(), repr=False, compare=False)

    def to_json(self) -> str:
        return json.dumps({"weights": list(self.weights), "bias": self.bias,
                           "n_iters_run": self.n_iters_run,
                           "final_loss": self.final_loss,
                           "means": list(self.means), "stds": list(self.stds)},
                          sort_keys=True)


def logistic_loss_grad(weights, bias, X, y):
    """Mean log-loss and its gradient, numerically stable."""
    z = X @ weights + bias
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    p = 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))
    gw = X.T @ (p - y) / y.size
    gb = float(np.mean(p - y))
    return loss, gw, gb


def fit_logistic(table: LabeledTable, lr: float = 0.1, max_iters: int = 5000,
                 tol: float = 1e-8) -> LogisticModel:
    """Full-batch gradient descent with backtracking step halving."""
    if table.n < 10:
        raise ContractError("need at least 10 rows for training")
    X, y = table.features, table.labels
    w = np.zeros(X.shape[1])
    b = 0.0
    step = lr
    loss, gw, gb = logistic_loss_grad(w, b, X, y)
    losses = [loss]
    iters = 0
    for iters in range(1, max_iters + 1):
        w_new, b_new = w - step * gw, b - step * gb
        new_loss, new_gw, new_gb = logistic_loss_grad(w_new, b_new, X, y)
        if not np.isfinite(new_loss):
            raise NumericalError("logistic loss diverged; try a smaller learning rate")
        if new_loss > loss:
            step *= 0.5
            if step < 1e-12:
                break
            continue
        improvement = loss - new_loss
        w, b, loss, gw, gb = w_new, b_new, new_loss, new_gw, new_gb
        losses.append(loss)
        if improvement < tol:
            break
    return LogisticModel(tuple(w), b, iters, loss, table.means, table.stds,
                         losses=tuple(losses))


# ---------------------------------------------------------------------------
# random forest

@dataclass(frozen=True)
class ForestModel:
    trees: tuple
    n_trees: int
    max_depth: int
    mtry: int
    min_leaf: int
    seed: int
    means: tuple
    stds: tuple

    def to_json(self) -> str:
        return json.dumps({"trees": list(self.trees), "n_trees": self.n_trees,
                           "max_depth": self.max_depth, "mtry": self.mtry,
                           "min_leaf": self.min_leaf, "seed": self.seed,
                           "means": list(self.means), "stds": list(self.stds)},
                          sort_keys=True)


def _gini(y):
    p = float(np.mean(y)) if y.size else 0.0
    return 2.0 * p * (1.0 - p)


def _best_split(X, y, feature_ids, min_leaf):
    """Lowest-cost Gini split; ties go to the lowest feature index and
    then the lowest threshold (enforced by scan order + strict improvement)."""
    best = None
    best_cost = np.inf
    n = y.size
    for f in sorted(feature_ids):
        col = X[:, f]
        uniq = np.unique(col)
        if uniq.size < 2:
            continue
        for thr in (uniq[:-1] + uniq[1:]) / 2.0:
            mask = col <= thr
            nl = int(mask.sum())
            nr = n - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            cost = (nl * _gini(y[mask]) + nr * _gini(y[~mask])) / n
            if cost < best_cost - 1e-15:
                best_cost = cost
                best = (f, float(thr), mask)
    return best, best_cost


def _grow_tree(X, y, depth, max_depth, mtry, min_leaf, rng):
    prob = float(np.mean(y))
    if depth >= max_depth or y.size < 2 * min_leaf or prob in (0.0, 1.0):
        return {"prob": prob}
    feature_ids = rng.choice(X.shape[1], size=min(mtry, X.shape[1]), replace=False)
    split, cost = _best_split(X, y, feature_ids, min_leaf)
    if split is None or cost >= _gini(y):
        return {"prob": prob}
    f, thr, mask = split
    return {
        "feature": int(f), "threshold": thr,
        "left": _grow_tree(X[mask], y[mask], depth + 1, max_depth, mtry, min_leaf, rng),
        "right": _grow_tree(X[~mask], y[~mask], depth + 1, max_depth, mtry, min_leaf, rng),
    }


def _build_one_tree(args):
    X, y, max_depth, mtry, min_leaf, tree_seed = args
    rng = np.random.default_rng(tree_seed)
    idx = rng.integers(0, y.size, size=y.size)
    return _grow_tree(X[idx], y[idx], 0, max_depth, mtry, min_leaf, rng)


def fit_forest(table: LabeledTable, n_trees: int = 100, max_depth: int = 8,
               mtry: int = 2, min_leaf: int = 5, seed: int = 0,
               n_jobs: int = 1) -> ForestModel:
    """Bagged Gini trees; per-tree seeds (seed + index) keep results
    identical for any worker count."""
    if table.n < 10:
        raise ContractError("need at least 10 rows for training")
    X, y = table.features, table.labels
    tasks = [(X, y, max_depth, mtry, min_leaf, seed + i) for i in range(n_trees)]
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            trees = list(pool.map(_build_one_tree, tasks))
    else:
        trees = [_build_one_tree(t) for t in tasks]
    return ForestModel(tuple(trees), n_trees, max_depth, mtry, min_leaf, seed,
                       table.means, table.stds)


def _tree_prob(node, x):
    while "prob" not in node:
        node = node["left"] if x[node["feature"]] <= node["threshold"] else node["right"]
    return node["prob"]


def predict_proba(model, features) -> np.ndarray:
    """Probability of the positive class for raw (unstandardized) features."""
    X = np.atleast_2d(np.asarray(features, dtype=float))
    if X.shape[1] != len(FEATURE_NAMES):
        raise ContractError(f"expected {len(FEATURE_NAMES)} features, got {X.shape[1]}")
    Xs = (X - np.asarray(model.means)) / np.asarray(model.stds)
    if isinstance(model, LogisticModel):
        z = Xs @ np.asarray(model.weights) + model.bias
        return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))
    if isinstance(model, ForestModel):
        return np.array([
            float(np.mean([_tree_prob(t, x) for t in model.trees])) for x in Xs
        ])
    raise ContractError(f"unknown model type {type(model).__name__}")


def predict_proba_standardized(model, Xs) -> np.ndarray:
    """Same as predict_proba for features that are already standardized."""
    raw = np.asarray(Xs) * np.asarray(model.stds) + np.asarray(model.means)
    return predict_proba(model, raw)


# ---------------------------------------------------------------------------
# evaluation

def auc(scores, labels) -> float:
    """Mann-Whitney AUC: (concordant + 0.5 * ties) / (n_pos * n_neg)."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=float)
    if s.shape != y.shape or s.ndim != 1:
        raise ContractError("scores and labels must be 1-D and equal length")
    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y == 0))
    if n_pos == 0 or n_neg == 0:
        raise ContractError("AUC needs at least one positive and one negative")
    ranks = rankdata(s)
    return float((ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def stratified_split(table: LabeledTable, test_frac: float = 0.3, seed: int = 0):
    """Deterministic stratified split; returns (train_idx, test_idx)."""
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for cls in (0, 1):
        idx = np.flatnonzero(table.labels == cls)
        idx = rng.permutation(idx)
        n_test = int(round(test_frac * idx.size))
        test_idx.extend(idx[:n_test])
        train_idx.extend(idx[n_test:])
    return np.sort(np.array(train_idx)), np.sort(np.array(test_idx))


def _subtable(table: LabeledTable, idx) -> LabeledTable:
    return LabeledTable(table.features[idx].copy(), table.labels[idx].copy(),
                        table.means, table.stds)


def weather_report(table: LabeledTable, seed: int = 0, n_trees: int = 100):
    """Train/test both classifiers (70/30 stratified) and report test AUC,
    plus single-feature ablations for the logistic model."""
    train_idx, test_idx = stratified_split(table, 0.3, seed)
    train, test = _subtable(table, train_idx), _subtable(table, test_idx)

    out = {"n_train": train.n, "n_test": test.n, "seed": seed}
    logit = fit_logistic(train)
    out["logistic_auc"] = auc(predict_proba_standardized(logit, test.features),
                              test.labels)
    forest = fit_forest(train, n_trees=n_trees, seed=seed)
    out["forest_auc"] = auc(predict_proba_standardized(forest, test.features),
                            test.labels)

    for j, name in enumerate(FEATURE_NAMES):
        masked_train = train.features.copy()
        masked_test = test.features.copy()
        keep = np.zeros(len(FEATURE_NAMES), dtype=bool)
        keep[j] = True
        masked_train[:, ~keep] = 0.0
        masked_test[:, ~keep] = 0.0
        m = fit_logistic(LabeledTable(masked_train, train.labels.copy(),
                                      train.means, train.stds))
        z = masked_test @ np.asarray(m.weights) + m.bias
        out[f"ablation_{name}_auc"] = auc(z, test.labels)
    return out
