"""Nested student-stratified 10-fold cross-validation with grid search.

Fold boundaries are drawn on students: no student ever appears in both the
train and test side of any outer or inner split, and out-of-fold test
predictions cover every student exactly once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .models import Prediction
from .util import derive_seed

DEFAULT_K = 10

Trainer = Callable[[Mapping, np.ndarray, np.ndarray, int], object]


class EvalError(ValueError):
    pass


def balanced_accuracy(y: Sequence[int], y_hat: Sequence[int]) -> float:
    """(TPR + TNR) / 2 with fail (label 1) as the positive class."""
    y = np.asarray(y, dtype=int)
    y_hat = np.asarray(y_hat, dtype=int)
    if y.shape != y_hat.shape:
        raise EvalError("label vectors differ in length")
    pos = y == 1
    neg = y == 0
    if not pos.any() or not neg.any():
        raise EvalError("undefined balanced accuracy: single-class labels")
    tpr = float((y_hat[pos] == 1).sum()) / pos.sum()
    tnr = float((y_hat[neg] == 0).sum()) / neg.sum()
    return (tpr + tnr) / 2.0


def _stratified_folds(
    students: Sequence[str], labels: Mapping[str, int], k: int, rng: np.random.Generator
) -> list[list[str]]:
    """Round-robin deal of shuffled per-class lists; class counts per fold
    differ by at most one."""
    by_class: dict[int, list[str]] = {}
    for s in sorted(students):
        by_class.setdefault(labels[s], []).append(s)
    folds: list[list[str]] = [[] for _ in range(k)]
    cursor = 0
    for cls in sorted(by_class):
        ids = by_class[cls]
        perm = rng.permutation(len(ids))
        for j in perm:
            folds[cursor % k].append(ids[j])
            cursor += 1
    return [sorted(f) for f in folds]


@dataclass
class FoldPlan:
    outer: list[list[str]]
    inner: list[list[list[str]]]  # inner[i][j]: inner fold j over outer fold i's training students
    seed: int

    @property
    def k(self) -> int:
        return len(self.outer)

    def students(self) -> list[str]:
        return sorted(s for fold in self.outer for s in fold)

    def validate(self, labels: Mapping[str, int] | None = None) -> None:
        """Check the no-leakage and stratification invariants."""
        seen: set[str] = set()
        for fold in self.outer:
            for s in fold:
                if s in seen:
                    raise EvalError(f"student {s} appears in two outer folds")
                seen.add(s)
        for i, plans in enumerate(self.inner):
            train = seen - set(self.outer[i])
            inner_seen: set[str] = set()
            for fold in plans:
                for s in fold:
                    if s in set(self.outer[i]):
                        raise EvalError(f"student {s} leaks from outer test fold {i}")
                    if s in inner_seen:
                        raise EvalError(f"student {s} appears in two inner folds (outer {i})")
                    inner_seen.add(s)
            if inner_seen != train:
                raise EvalError(f"inner folds of outer fold {i} do not cover its training set")
        if labels is not None:
            n_fail = sum(labels[s] for s in seen)
            global_rate = n_fail / len(seen)
            for i, fold in enumerate(self.outer):
                fold_fail = sum(labels[s] for s in fold)
                if abs(fold_fail - global_rate * len(fold)) > 1.0 + 1e-9:
                    raise EvalError(f"outer fold {i} fail-rate off by more than one student")


def make_folds(
    students: Sequence[str],
    labels: Sequence[int],
    k: int = DEFAULT_K,
    seed: int = 0,
) -> FoldPlan:
    """Label-stratified outer folds plus per-outer-fold inner plans."""
    if len(students) != len(labels):
        raise EvalError("students and labels differ in length")
    if len(set(students)) != len(students):
        raise EvalError("duplicate student ids")
    if len(students) < k:
        raise EvalError(f"need at least {k} students, got {len(students)}")
    label_of = dict(zip(students, (int(v) for v in labels)))
    outer = _stratified_folds(students, label_of, k, np.random.default_rng(derive_seed(seed, "outer")))
    inner: list[list[list[str]]] = []
    for i in range(k):
        train = sorted(set(students) - set(outer[i]))
        rng = np.random.default_rng(derive_seed(seed, "inner", i))
        inner.append(_stratified_folds(train, label_of, k, rng))
    return FoldPlan(outer=outer, inner=inner, seed=seed)


@dataclass
class FoldResult:
    fold_id: int
    params: dict
    bacc_train: float
    bacc_valid: float
    bacc_test: float


@dataclass
class EvalReport:
    model_id: str
    seed: int
    folds: list[FoldResult] = field(default_factory=list)
    test_predictions: list[Prediction] = field(default_factory=list)
    train_predictions: list[Prediction] = field(default_factory=list)
    validation_predictions: list[Prediction] = field(default_factory=list)

    def split_predictions(self) -> dict[str, list[Prediction]]:
        return {
            "train": self.train_predictions,
            "validation": self.validation_predictions,
            "test": self.test_predictions,
        }

    def summary(self) -> dict[str, dict[str, float]]:
        out = {}
        for split, attr in (("train", "bacc_train"), ("validation", "bacc_valid"), ("test", "bacc_test")):
            vals = [getattr(f, attr) for f in self.folds]
            out[split] = {
                "mean": float(np.mean(vals)),
                "min": float(np.min(vals)),
                "max": float(np.max(vals)),
            }
        return out

    def to_dict(self) -> dict:
        def pred_row(pr: Prediction) -> dict:
            return {"user_id": pr.user_id, "fold_id": pr.fold_id, "p": pr.p}

        return {
            "model_id": self.model_id,
            "seed": self.seed,
            "folds": [
                {
                    "fold_id": f.fold_id,
                    "params": f.params,
                    "bacc_train": f.bacc_train,
                    "bacc_valid": f.bacc_valid,
                    "bacc_test": f.bacc_test,
                }
                for f in self.folds
            ],
            "predictions": {
                split: [pred_row(pr) for pr in preds]
                for split, preds in self.split_predictions().items()
            },
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "EvalReport":
        model_id = raw["model_id"]

        def preds(split: str) -> list[Prediction]:
            return [
                Prediction.from_p(r["user_id"], r["p"], fold_id=r["fold_id"], model_id=model_id)
                for r in raw["predictions"][split]
            ]

        return cls(
            model_id=model_id,
            seed=raw["seed"],
            folds=[FoldResult(**f) for f in raw["folds"]],
            test_predictions=preds("test"),
            train_predictions=preds("train"),
            validation_predictions=preds("validation"),
        )

    def save(self, dest: str | Path) -> None:
        with open(dest, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, source: str | Path) -> "EvalReport":
        with open(source, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def nested_cv(
    features: Mapping[str, np.ndarray] | np.ndarray,
    labels: Mapping[str, int] | Sequence[int],
    plan: FoldPlan,
    grid: Sequence[Mapping],
    trainer: Trainer,
    model_id: str = "model",
    students: Sequence[str] | None = None,
) -> EvalReport:
    """Grid search on inner folds, refit on the outer training set, score on
    the outer test fold. Ties between grid points go to the first in grid
    order. Trainer seeds derive from plan.seed.
    """
    if isinstance(features, Mapping):
        users = plan.students()
        X = np.vstack([features[u] for u in users])
        y = np.array([labels[u] for u in users], dtype=int)
    else:
        if students is None:
            raise EvalError("students required when features is an array")
        users = list(students)
        X = np.asarray(features, dtype=float)
        y = np.asarray(labels, dtype=int)
    if not grid:
        raise EvalError("empty hyper-parameter grid")
    row_of = {u: i for i, u in enumerate(users)}
    if set(row_of) != set(plan.students()):
        raise EvalError("fold plan does not match the student set")

    report = EvalReport(model_id=model_id, seed=plan.seed)
    for i, test_ids in enumerate(plan.outer):
        train_ids = sorted(set(users) - set(test_ids))
        tr_rows = np.array([row_of[u] for u in train_ids])
        te_rows = np.array([row_of[u] for u in test_ids])

        mean_bacc = np.empty(len(grid))
        val_preds_by_grid: list[list[Prediction]] = []
        for g, params in enumerate(grid):
            fold_baccs = []
            val_preds: list[Prediction] = []
            for j, val_ids in enumerate(plan.inner[i]):
                if not val_ids:
                    continue
                fit_ids = sorted(set(train_ids) - set(val_ids))
                fit_rows = np.array([row_of[u] for u in fit_ids])
                val_rows = np.array([row_of[u] for u in val_ids])
                try:
                    model = trainer(
                        params, X[fit_rows], y[fit_rows], derive_seed(plan.seed, "cv", i, g, j)
                    )
                except ValueError as exc:
                    raise EvalError(f"outer fold {i}, inner fold {j}: {exc}") from exc
                p = np.asarray(model.predict_proba(X[val_rows]))
                fold_baccs.append(balanced_accuracy(y[val_rows], (p >= 0.5).astype(int)))
                val_preds.extend(
                    Prediction.from_p(u, float(pv), fold_id=i, model_id=model_id)
                    for u, pv in zip(val_ids, p)
                )
            mean_bacc[g] = float(np.mean(fold_baccs))
            val_preds_by_grid.append(val_preds)

        best = int(np.argmax(mean_bacc))
        try:
            final = trainer(grid[best], X[tr_rows], y[tr_rows], derive_seed(plan.seed, "final", i))
        except ValueError as exc:
            raise EvalError(f"outer fold {i}: {exc}") from exc

        p_train = np.asarray(final.predict_proba(X[tr_rows]))
        p_test = np.asarray(final.predict_proba(X[te_rows]))
        report.folds.append(
            FoldResult(
                fold_id=i,
                params=dict(grid[best]),
                bacc_train=balanced_accuracy(y[tr_rows], (p_train >= 0.5).astype(int)),
                bacc_valid=float(mean_bacc[best]),
                bacc_test=balanced_accuracy(y[te_rows], (p_test >= 0.5).astype(int)),
            )
        )
        report.train_predictions.extend(
            Prediction.from_p(u, float(pv), fold_id=i, model_id=model_id)
            for u, pv in zip(train_ids, p_train)
        )
        report.validation_predictions.extend(val_preds_by_grid[best])
        report.test_predictions.extend(
            Prediction.from_p(u, float(pv), fold_id=i, model_id=model_id)
            for u, pv in zip(test_ids, p_test)
        )
    return report
