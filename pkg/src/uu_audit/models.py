"""Failure-probability models: a from-scratch random forest, a deliberately
overconfident logistic baseline, and an import path for external scores.

Every emitted prediction satisfies: p in [0, 1], y_hat = 1 iff p >= 0.5,
c = |p - 0.5|.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np
from scipy.special import expit

from .eventlog import ParseError, _open_text
from .util import derive_seed, worker_count

DECISION_THRESHOLD = 0.5
SCORES_HEADER = ("user_id", "fold_id", "p")
FOREST_FORMAT = "uu-audit-forest"
FOREST_VERSION = 1

_MIN_GAIN = 1e-12


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class Prediction:
    user_id: str
    p: float
    y_hat: int
    c: float
    fold_id: int
    model_id: str

    @classmethod
    def from_p(
        cls,
        user_id: str,
        p: float,
        fold_id: int = 0,
        model_id: str = "",
        threshold: float = DECISION_THRESHOLD,
    ) -> "Prediction":
        if not 0.0 <= p <= 1.0:
            raise ModelError(f"probability {p} outside [0, 1]")
        return cls(
            user_id=user_id,
            p=float(p),
            y_hat=int(p >= threshold),
            c=abs(float(p) - threshold),
            fold_id=fold_id,
            model_id=model_id,
        )


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_split: int = 2
    features_per_split: int = 7
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1 or self.min_samples_split < 2 or self.features_per_split < 1:
            raise ModelError("forest hyper-parameters must be positive")
        if self.max_depth is not None and self.max_depth < 1:
            raise ModelError("max_depth must be positive or None")
        if self.features_per_split > 45:
            raise ModelError("features_per_split cannot exceed 45")

    def params(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "features_per_split": self.features_per_split,
        }


@dataclass
class _Tree:
    """Flat-array decision tree; feature == -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    p_fail: np.ndarray
    counts: np.ndarray  # (n_nodes, 2) class counts

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(X.shape[0])
        stack = [(0, np.arange(X.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            if self.feature[node] < 0:
                out[idx] = self.p_fail[node]
                continue
            mask = X[idx, self.feature[node]] <= self.threshold[node]
            stack.append((self.left[node], idx[mask]))
            stack.append((self.right[node], idx[~mask]))
        return out


def _gini(n0: float, n1: float) -> float:
    n = n0 + n1
    return 1.0 - (n0 / n) ** 2 - (n1 / n) ** 2


def _best_split(
    Xsub: np.ndarray, ysub: np.ndarray, feats: np.ndarray, parent_gini: float
) -> tuple[int, float] | None:
    """Lowest-impurity (feature, threshold) among candidates, or None.

    Ties resolve to the lowest feature index then the lowest threshold:
    `feats` is sorted ascending, thresholds scan ascending, and only strict
    improvements replace the incumbent.
    """
    n = Xsub.shape[0]
    order = np.argsort(Xsub, axis=0, kind="stable")
    xs = np.take_along_axis(Xsub, order, axis=0)
    ys = ysub[order]
    pos = np.cumsum(ys, axis=0, dtype=float)
    total_pos = float(ysub.sum())

    ln = np.arange(1, n, dtype=float)[:, None]
    rn = n - ln
    lp = pos[:-1, :]
    rp = total_pos - lp
    gl = 1.0 - (lp / ln) ** 2 - ((ln - lp) / ln) ** 2
    gr = 1.0 - (rp / rn) ** 2 - ((rn - rp) / rn) ** 2
    weighted = (ln * gl + rn * gr) / n
    weighted[xs[1:, :] <= xs[:-1, :]] = np.inf

    col_best_pos = np.argmin(weighted, axis=0)
    col_best = weighted[col_best_pos, np.arange(weighted.shape[1])]
    j = int(np.argmin(col_best))
    best = col_best[j]
    if not np.isfinite(best) or parent_gini - best <= _MIN_GAIN:
        return None
    i = int(col_best_pos[j])
    threshold = (xs[i, j] + xs[i + 1, j]) / 2.0
    if threshold >= xs[i + 1, j]:  # midpoint of adjacent floats rounds up
        threshold = xs[i, j]
    return int(feats[j]), float(threshold)


def _grow_tree(X: np.ndarray, y: np.ndarray, cfg: ForestConfig, rng: np.random.Generator) -> _Tree:
    n, d = X.shape
    m = min(cfg.features_per_split, d)
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    p_fail: list[float] = []
    counts: list[tuple[int, int]] = []

    # iterative growth; children appended after their parent
    boot = rng.integers(0, n, size=n)
    stack: list[tuple[np.ndarray, int, int, int]] = []  # (idx, depth, parent, side)

    def new_node(idx: np.ndarray) -> int:
        n1 = int(y[idx].sum())
        n0 = idx.size - n1
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        p_fail.append(n1 / idx.size)
        counts.append((n0, n1))
        return len(feature) - 1

    stack.append((boot, 0, -1, 0))
    while stack:
        idx, depth, parent, side = stack.pop()
        node = new_node(idx)
        if parent >= 0:
            if side == 0:
                left[parent] = node
            else:
                right[parent] = node
        n0, n1 = counts[node]
        if (
            n0 == 0
            or n1 == 0
            or idx.size < cfg.min_samples_split
            or (cfg.max_depth is not None and depth >= cfg.max_depth)
        ):
            continue
        feats = np.sort(rng.choice(d, size=m, replace=False))
        split = _best_split(X[np.ix_(idx, feats)], y[idx], feats, _gini(n0, n1))
        if split is None:
            continue
        f, t = split
        feature[node] = f
        threshold[node] = t
        mask = X[idx, f] <= t
        # right pushed first so the left child is materialized first
        stack.append((idx[~mask], depth + 1, node, 1))
        stack.append((idx[mask], depth + 1, node, 0))

    return _Tree(
        feature=np.array(feature, dtype=np.int32),
        threshold=np.array(threshold),
        left=np.array(left, dtype=np.int32),
        right=np.array(right, dtype=np.int32),
        p_fail=np.array(p_fail),
        counts=np.array(counts, dtype=np.int64),
    )


@dataclass
class RandomForest:
    config: ForestConfig
    trees: list[_Tree] = field(default_factory=list)
    n_features: int = 0

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Mean over trees of the leaf fail-frequency."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise ModelError(f"expected {self.n_features} features, got {X.shape[1]}")
        acc = np.zeros(X.shape[0])
        for tree in self.trees:
            acc += tree.predict_proba(X)
        return acc / len(self.trees)


def _check_training_inputs(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ModelError("X and y row counts differ")
    if X.shape[0] < 2:
        raise ModelError("need at least 2 training rows")
    if len(np.unique(y)) < 2:
        raise ModelError("degenerate labels")
    return X, y


def train_forest(X: np.ndarray, y: np.ndarray, cfg: ForestConfig) -> RandomForest:
    """Seeded bootstrap + Gini-split trees; deterministic given cfg.seed.

    Per-tree seeds derive from cfg.seed, so any parallel schedule produces
    identical forests. UU_AUDIT_THREADS caps the tree-training workers.
    """
    X, y = _check_training_inputs(X, y)

    def grow(t: int) -> _Tree:
        rng = np.random.default_rng(derive_seed(cfg.seed, "tree", t))
        return _grow_tree(X, y, cfg, rng)

    workers = min(worker_count(), cfg.n_trees)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trees = list(pool.map(grow, range(cfg.n_trees)))
    else:
        trees = [grow(t) for t in range(cfg.n_trees)]
    return RandomForest(config=cfg, trees=trees, n_features=X.shape[1])


def predict_proba(model, x: np.ndarray) -> float:
    """Failure probability for one 45-entry vector in registry order."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ModelError("expected a single feature vector")
    return float(model.predict_proba(x[None, :])[0])


@dataclass
class LogisticModel:
    weights: np.ndarray
    bias: float
    n_features: int

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise ModelError(f"expected {self.n_features} features, got {X.shape[1]}")
        return expit(X @ self.weights + self.bias)


def train_overconfident_baseline(
    X: np.ndarray,
    y: np.ndarray,
    epochs: int = 4000,
    seed: int = 0,
    lr: float = 0.1,
) -> LogisticModel:
    """Unregularized full-batch logistic regression pushed to near-convergence.

    Zero initialization and a fixed step count make the fit deterministic
    (the seed is accepted for interface symmetry only) and reproduce the
    probabilities-piled-at-the-extremes confidence pathology on separable
    data. The mean gradient absorbs dataset duplication.
    """
    if epochs < 0:
        raise ModelError("epochs must be >= 0")
    X, y = _check_training_inputs(X, y)
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    yf = y.astype(float)
    for _ in range(epochs):
        p = expit(X @ w + b)
        err = p - yf
        w -= lr * (X.T @ err) / n
        b -= lr * float(err.mean())
    return LogisticModel(weights=w, bias=b, n_features=d)


# ---------------------------------------------------------------------------
# external scores and persistence


def import_scores(
    source: str | Path | IO[str] | IO[bytes], model_id: str = "imported"
) -> list[Prediction]:
    """Read a scores CSV (``user_id,fold_id,p``) into Predictions."""
    fh = _open_text(source)
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(1, "header", "empty file") from None
    if tuple(h.strip() for h in header) != SCORES_HEADER:
        raise ParseError(1, "header", f"expected {','.join(SCORES_HEADER)}")
    preds: list[Prediction] = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ParseError(line_no, "row", f"expected 3 fields, got {len(row)}")
        user_id, fold_raw, p_raw = (f.strip() for f in row)
        if not user_id:
            raise ParseError(line_no, "user_id", "empty value")
        try:
            fold_id = int(fold_raw)
        except ValueError:
            raise ParseError(line_no, "fold_id", f"not an integer: {fold_raw!r}") from None
        try:
            p = float(p_raw)
        except ValueError:
            raise ParseError(line_no, "p", f"not a number: {p_raw!r}") from None
        if not 0.0 <= p <= 1.0:
            raise ParseError(line_no, "p", f"probability {p} outside [0, 1]")
        preds.append(Prediction.from_p(user_id, p, fold_id=fold_id, model_id=model_id))
    return preds


def write_scores(predictions: Iterable[Prediction], dest: str | Path | IO[str]) -> None:
    own = isinstance(dest, (str, Path))
    fh = open(dest, "w", encoding="utf-8", newline="") if own else dest
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SCORES_HEADER)
        for pr in predictions:
            writer.writerow([pr.user_id, pr.fold_id, repr(pr.p)])
    finally:
        if own:
            fh.close()


def _node_to_dict(tree: _Tree, node: int) -> dict:
    if tree.feature[node] < 0:
        return {"n0": int(tree.counts[node, 0]), "n1": int(tree.counts[node, 1])}
    return {
        "f": int(tree.feature[node]),
        "t": float(tree.threshold[node]),
        "l": _node_to_dict(tree, int(tree.left[node])),
        "r": _node_to_dict(tree, int(tree.right[node])),
    }


def _node_from_dict(raw: dict, store: dict[str, list]) -> int:
    node = len(store["feature"])
    for key in store:
        store[key].append(None)
    if "f" in raw:
        store["feature"][node] = raw["f"]
        store["threshold"][node] = raw["t"]
        store["counts"][node] = (0, 0)
        store["p_fail"][node] = 0.0
        store["left"][node] = _node_from_dict(raw["l"], store)
        store["right"][node] = _node_from_dict(raw["r"], store)
        n0 = store["counts"][store["left"][node]][0] + store["counts"][store["right"][node]][0]
        n1 = store["counts"][store["left"][node]][1] + store["counts"][store["right"][node]][1]
        store["counts"][node] = (n0, n1)
        store["p_fail"][node] = n1 / (n0 + n1) if n0 + n1 else 0.0
    else:
        store["feature"][node] = -1
        store["threshold"][node] = 0.0
        store["left"][node] = -1
        store["right"][node] = -1
        n0, n1 = raw["n0"], raw["n1"]
        store["counts"][node] = (n0, n1)
        store["p_fail"][node] = n1 / (n0 + n1) if n0 + n1 else 0.0
    return node


def save_forest(model: RandomForest, dest: str | Path) -> None:
    payload = {
        "format": FOREST_FORMAT,
        "version": FOREST_VERSION,
        "n_features": model.n_features,
        "config": {**model.config.params(), "seed": model.config.seed},
        "trees": [_node_to_dict(t, 0) for t in model.trees],
    }
    with open(dest, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_forest(source: str | Path) -> RandomForest:
    with open(source, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != FOREST_FORMAT or payload.get("version") != FOREST_VERSION:
        raise ModelError(f"not a {FOREST_FORMAT} v{FOREST_VERSION} file")
    cfg = ForestConfig(**payload["config"])
    trees = []
    for raw in payload["trees"]:
        store: dict[str, list] = {
            "feature": [], "threshold": [], "left": [], "right": [], "p_fail": [], "counts": [],
        }
        _node_from_dict(raw, store)
        trees.append(
            _Tree(
                feature=np.array(store["feature"], dtype=np.int32),
                threshold=np.array(store["threshold"]),
                left=np.array(store["left"], dtype=np.int32),
                right=np.array(store["right"], dtype=np.int32),
                p_fail=np.array(store["p_fail"]),
                counts=np.array(store["counts"], dtype=np.int64),
            )
        )
    return RandomForest(config=cfg, trees=trees, n_features=payload["n_features"])
