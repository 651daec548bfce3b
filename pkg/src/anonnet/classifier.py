"""Gini decision trees, random forests and stratified cross-validation.

Labels are integers: 1 = positive, 0 = negative.  A sample goes left at a
split when ``x[feature] <= threshold``.  Thresholds are midpoints between
consecutive distinct feature values; equally good splits are resolved by
lowest feature index, then lowest threshold.  A leaf predicts positive when
its positive count is at least its negative count.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .features import N_FEATURES

MODEL_FORMAT = "anonnet-model"
MODEL_VERSION = 1


class ClassifierError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledExample:
    features: np.ndarray
    label: int
    account_id: str = ""

    def __post_init__(self):
        if len(self.features) != N_FEATURES:
            raise ClassifierError(f"expected {N_FEATURES} features, got {len(self.features)}")


@dataclass(frozen=True)
class TreeParams:
    max_depth: int | None = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features: int | None = None  # None = all features


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    features_per_split: int = int(math.isqrt(N_FEATURES))
    bootstrap: bool = True
    max_depth: int | None = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1

    def tree_params(self) -> TreeParams:
        return TreeParams(self.max_depth, self.min_samples_split, self.min_samples_leaf, self.features_per_split)


def gini(class_counts) -> float:
    counts = np.asarray(class_counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise ClassifierError("gini of an empty node")
    p = counts / total
    return float(1.0 - np.sum(p * p))


@dataclass
class Node:
    # Leaf when feature is None.
    feature: int | None = None
    threshold: float = 0.0
    left: "Node | None" = None
    right: "Node | None" = None
    counts: tuple[int, int] = (0, 0)  # (negative, positive)

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def positive_fraction(self) -> float:
        neg, pos = self.counts
        return pos / (neg + pos)


@dataclass
class DecisionTree:
    root: Node
    params: TreeParams = field(default_factory=TreeParams)
    n_features: int = N_FEATURES

    def leaf_for(self, x) -> Node:
        node = self.root
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node

    def score(self, x) -> float:
        return self.leaf_for(x).positive_fraction()

    def vote(self, x) -> int:
        neg, pos = self.leaf_for(x).counts
        return int(pos >= neg)

    def preorder(self) -> list:
        out = []

        def walk(node):
            if node.is_leaf:
                out.append(["leaf", int(node.counts[0]), int(node.counts[1])])
            else:
                out.append(["split", int(node.feature), float(node.threshold)])
                walk(node.left)
                walk(node.right)

        walk(self.root)
        return out

    @classmethod
    def from_preorder(cls, items, params=None, n_features=N_FEATURES) -> "DecisionTree":
        it = iter(items)

        def build():
            kind, a, b = next(it)
            if kind == "leaf":
                return Node(counts=(int(a), int(b)))
            if not 0 <= int(a) < n_features:
                raise ClassifierError(f"split feature {a} out of range")
            node = Node(feature=int(a), threshold=float(b))
            node.left = build()
            node.right = build()
            return node

        return cls(build(), params or TreeParams(), n_features)

    def depth(self) -> int:
        def d(node):
            return 0 if node.is_leaf else 1 + max(d(node.left), d(node.right))

        return d(self.root)


@dataclass
class RandomForest:
    trees: list[DecisionTree]
    params: ForestParams = field(default_factory=ForestParams)
    rng_seed: int = 0

    def score(self, x) -> float:
        return sum(t.vote(x) for t in self.trees) / len(self.trees)


def _best_split(X, y, idx, features, min_leaf):
    """Best (impurity, feature, threshold) over the given features, or None."""
    best = None
    n = len(idx)
    ys = y[idx]
    for f in features:
        xs = X[idx, f]
        order = np.argsort(xs, kind="stable")
        xs = xs[order]
        pos = np.cumsum(ys[order], dtype=np.float64)
        # candidate split after position i (left = first i+1 samples)
        valid = xs[:-1] < xs[1:]
        if min_leaf > 1:
            i = np.arange(n - 1)
            valid &= (i + 1 >= min_leaf) & (n - i - 1 >= min_leaf)
        if not valid.any():
            continue
        n_left = np.arange(1, n, dtype=np.float64)
        n_right = n - n_left
        pos_left = pos[:-1]
        pos_right = pos[-1] - pos_left
        p_l = pos_left / n_left
        p_r = pos_right / n_right
        gini_l = 1.0 - p_l * p_l - (1.0 - p_l) ** 2
        gini_r = 1.0 - p_r * p_r - (1.0 - p_r) ** 2
        weighted = (n_left / n) * gini_l + (n_right / n) * gini_r
        weighted = np.where(valid, weighted, np.inf)
        i = int(np.argmin(weighted))
        imp = float(weighted[i])
        if best is None or imp < best[0]:
            thr = (xs[i] + xs[i + 1]) / 2.0
            if thr >= xs[i + 1]:  # adjacent floats
                thr = xs[i]
            best = (imp, int(f), float(thr))
    return best


def _grow(X, y, idx, depth, params: TreeParams, rng, n_features) -> Node:
    pos = int(y[idx].sum())
    node = Node(counts=(len(idx) - pos, pos))
    if pos == 0 or pos == len(idx):
        return node
    if params.max_depth is not None and depth >= params.max_depth:
        return node
    if len(idx) < params.min_samples_split:
        return node

    if params.max_features is None or params.max_features >= n_features:
        best = _best_split(X, y, idx, range(n_features), params.min_samples_leaf)
    else:
        # Draw features in random order; keep drawing past max_features only
        # while nothing splittable has been found.
        perm = rng.permutation(n_features)
        k = params.max_features
        best = _best_split(X, y, idx, sorted(perm[:k]), params.min_samples_leaf)
        while best is None and k < n_features:
            best = _best_split(X, y, idx, [int(perm[k])], params.min_samples_leaf)
            k += 1
    if best is None:
        return node

    _, f, thr = best
    go_left = X[idx, f] <= thr
    node.feature, node.threshold = f, thr
    node.left = _grow(X, y, idx[go_left], depth + 1, params, rng, n_features)
    node.right = _grow(X, y, idx[~go_left], depth + 1, params, rng, n_features)
    return node


def _as_arrays(data):
    if isinstance(data, tuple):
        X, y = data
        return np.asarray(X, dtype=np.float64), np.asarray(y, dtype=np.int64)
    if not data:
        raise ClassifierError("empty dataset")
    X = np.vstack([np.asarray(e.features, dtype=np.float64) for e in data])
    y = np.array([int(e.label) for e in data], dtype=np.int64)
    return X, y


def train_tree(data, params: TreeParams = TreeParams(), rng=None) -> DecisionTree:
    """Fit a tree on a list of LabeledExample or an (X, y) pair."""
    X, y = _as_arrays(data)
    if len(y) == 0:
        raise ClassifierError("empty dataset")
    if rng is None:
        rng = np.random.default_rng(0)
    root = _grow(X, y, np.arange(len(y)), 0, params, rng, X.shape[1])
    return DecisionTree(root, params, X.shape[1])


def tree_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def _train_one(args):
    X, y, params, seed, index = args
    rng = tree_rng(seed, index)
    if params.bootstrap:
        sample = rng.integers(0, len(y), size=len(y))
        Xb, yb = X[sample], y[sample]
    else:
        Xb, yb = X, y
    return train_tree((Xb, yb), params.tree_params(), rng)


def train_forest(data, params: ForestParams = ForestParams(), seed: int = 0, workers: int = 1) -> RandomForest:
    X, y = _as_arrays(data)
    if len(y) == 0:
        raise ClassifierError("empty dataset")
    if params.n_trees < 1:
        raise ClassifierError("forest needs at least one tree")
    jobs = [(X, y, params, seed, i) for i in range(params.n_trees)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            trees = list(pool.map(_train_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        trees = [_train_one(j) for j in jobs]
    return RandomForest(trees, params, seed)


@dataclass(frozen=True)
class Prediction:
    label: int
    score: float


def predict(model, features) -> Prediction:
    x = np.asarray(features.values if hasattr(features, "values") else features, dtype=np.float64)
    expected = model.trees[0].n_features if isinstance(model, RandomForest) else model.n_features
    if x.shape != (expected,):
        raise ClassifierError(f"feature length mismatch: expected {expected}, got {x.shape[0] if x.ndim else 0}")
    s = model.score(x)
    return Prediction(int(s >= 0.5), float(s))


def predict_many(model, X) -> tuple[np.ndarray, np.ndarray]:
    scores = np.array([predict(model, row).score for row in np.asarray(X, dtype=np.float64)])
    return (scores >= 0.5).astype(np.int64), scores


# ---------------------------------------------------------------- evaluation


@dataclass(frozen=True)
class ModelSpec:
    kind: str = "forest"  # forest | tree
    forest: ForestParams = ForestParams()
    tree: TreeParams = TreeParams()

    def fit(self, X, y, seed: int, workers: int = 1):
        if self.kind == "forest":
            return train_forest((X, y), self.forest, seed, workers)
        if self.kind == "tree":
            return train_tree((X, y), self.tree, np.random.default_rng(seed))
        raise ClassifierError(f"unknown model kind {self.kind!r}")


@dataclass
class EvalReport:
    precision: float
    recall: float
    f1: float
    accuracy: float
    per_class: dict
    folds: int
    confusion: list  # [[tn, fp], [fn, tp]]; rows = true class
    out_of_fold: list = field(default_factory=list)

    def rows(self) -> list[dict]:
        out = [
            {"class": name, **{k: stats[k] for k in ("precision", "recall", "f1", "support")}}
            for name, stats in self.per_class.items()
        ]
        out.append({"class": "weighted", "precision": self.precision, "recall": self.recall, "f1": self.f1,
                    "support": sum(s["support"] for s in self.per_class.values())})
        return out


def _safe_div(a, b):
    return a / b if b else 0.0


def evaluate_predictions(y_true, y_pred, folds: int = 1) -> EvalReport:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    cm = np.zeros((2, 2), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        cm[t, p] += 1
    per_class = {}
    for c, name in ((0, "negative"), (1, "positive")):
        tp = cm[c, c]
        precision = _safe_div(tp, cm[:, c].sum())
        recall = _safe_div(tp, cm[c, :].sum())
        f1 = _safe_div(2 * precision * recall, precision + recall)
        per_class[name] = {"precision": float(precision), "recall": float(recall), "f1": float(f1),
                           "support": int(cm[c, :].sum())}
    n = int(cm.sum())
    weights = {name: _safe_div(s["support"], n) for name, s in per_class.items()}
    agg = {k: float(sum(weights[nm] * per_class[nm][k] for nm in per_class)) for k in ("precision", "recall", "f1")}
    return EvalReport(
        precision=agg["precision"],
        recall=agg["recall"],
        f1=agg["f1"],
        accuracy=_safe_div(int(np.trace(cm)), n),
        per_class=per_class,
        folds=folds,
        confusion=cm.tolist(),
    )


def stratified_folds(y, k: int, seed: int) -> np.ndarray:
    """Fold index per example; each class is shuffled and dealt round-robin."""
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    fold = np.empty(len(y), dtype=np.int64)
    for c in np.unique(y):
        members = np.flatnonzero(y == c)
        if len(members) < k:
            raise ClassifierError(f"class {int(c)} has {len(members)} members, fewer than k={k}")
        members = rng.permutation(members)
        fold[members] = np.arange(len(members)) % k
    return fold


def cross_validate(data, model_spec: ModelSpec = ModelSpec(), k: int = 5, seed: int = 0, workers: int = 1) -> EvalReport:
    X, y = _as_arrays(data)
    fold = stratified_folds(y, k, seed)
    pred = np.full(len(y), -1, dtype=np.int64)
    for i in range(k):
        test = fold == i
        model = model_spec.fit(X[~test], y[~test], seed + i, workers)
        pred[test] = predict_many(model, X[test])[0]
    report = evaluate_predictions(y, pred, folds=k)
    report.out_of_fold = pred.tolist()
    return report


# ------------------------------------------------------------- serialization


def model_to_dict(model) -> dict:
    if isinstance(model, RandomForest):
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "kind": "forest",
            "seed": model.rng_seed,
            "params": model.params.__dict__,
            "n_features": model.trees[0].n_features,
            "trees": [t.preorder() for t in model.trees],
        }
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "kind": "tree",
        "params": model.params.__dict__,
        "n_features": model.n_features,
        "trees": [model.preorder()],
    }


def model_from_dict(d: dict):
    if d.get("format") != MODEL_FORMAT:
        raise ClassifierError("not a model file")
    if d.get("version") != MODEL_VERSION:
        raise ClassifierError(f"unsupported model version {d.get('version')}")
    n_features = int(d["n_features"])
    if d["kind"] == "forest":
        params = ForestParams(**d["params"])
        trees = [DecisionTree.from_preorder(t, params.tree_params(), n_features) for t in d["trees"]]
        return RandomForest(trees, params, int(d["seed"]))
    params = TreeParams(**d["params"])
    return DecisionTree.from_preorder(d["trees"][0], params, n_features)


def save_model(model, path) -> str:
    """Write the model as JSON; returns its SHA-256 digest."""
    text = json.dumps(model_to_dict(model), sort_keys=True, separators=(",", ":")) + "\n"
    Path(path).write_text(text, encoding="utf-8")
    return hashlib.sha256(text.encode()).hexdigest()


def load_model(path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"model file not found: {path}")
    return model_from_dict(json.loads(path.read_text(encoding="utf-8")))

