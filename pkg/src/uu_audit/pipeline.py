"""End-to-end stages wiring the modules together over their file formats.

Every stage reads the previous stage's artifacts from an output directory
and writes its own, so each is rerunnable and the whole chain is
deterministic given a seed.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import grouping
from .characterize import (
    DegenerateTargetError,
    characterize_uu,
    write_characterization_csv,
    write_characterization_json,
)
from .eventlog import load_outcomes, load_schedule, parse_events
from .evalcv import EvalReport, make_folds, nested_cv
from .features import (
    build_student_vectors,
    load_demographics,
    read_vectors_csv,
    write_norm_stats,
    write_vectors_csv,
    write_weekly_csv,
)
from .models import (
    ForestConfig,
    import_scores,
    train_forest,
    train_overconfident_baseline,
    write_scores,
)
from .synth import SynthConfig, generate_course, load_preset
from .util import canonical_json, derive_seed

MODEL_CHOICES = ("forest", "overconfident", "import")

ARTIFACTS = {
    "events": "events.csv",
    "schedule": "schedule.json",
    "outcomes": "outcomes.csv",
    "latent": "latent.csv",
    "demographics": "demographics.csv",
    "features_weekly": "features_weekly.csv",
    "features_avg": "features_avg.csv",
    "norm_stats": "norm_stats.json",
    "feature_diagnostics": "feature_diagnostics.json",
    "eval_report": "eval_report.json",
    "scores": "scores.csv",
    "assignments": "assignments.csv",
    "prevalence": "prevalence.json",
    "characterization": "characterization.json",
    "characterization_csv": "characterization.csv",
    "fig_accuracy": "fig_accuracy.svg",
    "fig_probabilities": "fig_probabilities.svg",
    "fig_prevalence": "fig_prevalence.svg",
    "fig_coefficients": "fig_coefficients.svg",
}


class PipelineError(RuntimeError):
    pass


def artifact(out_dir: str | Path, key: str) -> Path:
    return Path(out_dir) / ARTIFACTS[key]


def _require(path: Path, produced_by: str) -> Path:
    if not path.exists():
        raise PipelineError(f"missing {path.name}; run `uu-audit {produced_by}` first")
    return path


def default_forest_grid() -> list[dict]:
    """Inner-CV grid: n_trees x max_depth x features_per_split."""
    return [
        {"n_trees": nt, "max_depth": md, "features_per_split": fps}
        for nt, md, fps in itertools.product((50, 100, 200), (4, 8, None), (7, 15))
    ]


def fast_forest_grid() -> list[dict]:
    """Single-point grid for desk-scale runs; the CV protocol is unchanged."""
    return [{"n_trees": 30, "max_depth": 6, "features_per_split": 7}]


def default_baseline_grid() -> list[dict]:
    return [{"epochs": 4000, "lr": 0.1}]


def forest_trainer(params: Mapping, X: np.ndarray, y: np.ndarray, seed: int):
    return train_forest(X, y, ForestConfig(**dict(params), seed=seed))


def overconfident_trainer(params: Mapping, X: np.ndarray, y: np.ndarray, seed: int):
    return train_overconfident_baseline(
        X, y, epochs=params.get("epochs", 4000), seed=seed, lr=params.get("lr", 0.1)
    )


def grid_for(model: str, grid_name: str = "default") -> list[dict]:
    if model == "forest":
        return default_forest_grid() if grid_name == "default" else fast_forest_grid()
    if model == "overconfident":
        return default_baseline_grid()
    raise PipelineError(f"no grid for model {model!r}")


def trainer_for(model: str):
    if model == "forest":
        return forest_trainer
    if model == "overconfident":
        return overconfident_trainer
    raise PipelineError(f"no trainer for model {model!r}")


def stage_synth(preset: str | SynthConfig, out_dir: str | Path, seed: int | None = None) -> dict:
    cfg = preset if isinstance(preset, SynthConfig) else load_preset(preset)
    if seed is not None:
        cfg = cfg.replace(seed=seed)
    paths = generate_course(cfg, out_dir)
    return {k: str(v) for k, v in paths.items()}


def stage_features(
    out_dir: str | Path,
    events_path: str | Path | None = None,
    schedule_path: str | Path | None = None,
    outcomes_path: str | Path | None = None,
    demographics_path: str | Path | None = None,
) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    events_path = Path(events_path) if events_path else _require(artifact(out, "events"), "synth")
    schedule_path = Path(schedule_path) if schedule_path else _require(artifact(out, "schedule"), "synth")
    outcomes_path = Path(outcomes_path) if outcomes_path else _require(artifact(out, "outcomes"), "synth")
    if demographics_path is None and artifact(out, "demographics").exists():
        demographics_path = artifact(out, "demographics")

    schedule = load_schedule(schedule_path)
    events = parse_events(events_path)
    outcomes = load_outcomes(outcomes_path, schedule.pass_rule)
    demo = load_demographics(demographics_path) if demographics_path else None
    users = [o.user_id for o in outcomes]
    vectors, stats, diag = build_student_vectors(events, schedule, users, demo)

    write_weekly_csv({v.user_id: v.weekly for v in vectors}, artifact(out, "features_weekly"))
    write_vectors_csv(vectors, artifact(out, "features_avg"))
    write_norm_stats(stats, artifact(out, "norm_stats"))
    artifact(out, "feature_diagnostics").write_text(
        canonical_json(
            {
                "unknown_object_events": diag.unknown_object_events,
                "unknown_object_ids": diag.unknown_object_ids,
                "out_of_range_events": diag.out_of_range_events,
            }
        ),
        encoding="utf-8",
    )


def _load_labels(out_dir: Path, outcomes_path: Path | None, schedule_path: Path | None) -> dict[str, int]:
    schedule = load_schedule(schedule_path or _require(artifact(out_dir, "schedule"), "synth"))
    outcomes = load_outcomes(
        outcomes_path or _require(artifact(out_dir, "outcomes"), "synth"), schedule.pass_rule
    )
    return {o.user_id: o.y for o in outcomes}


def stage_train(
    out_dir: str | Path,
    model: str = "forest",
    seed: int = 0,
    grid: Sequence[Mapping] | str = "default",
    k: int = 10,
    outcomes_path: str | Path | None = None,
    schedule_path: str | Path | None = None,
) -> EvalReport:
    out = Path(out_dir)
    if model not in ("forest", "overconfident"):
        raise PipelineError("stage_train handles models 'forest' and 'overconfident'")
    vectors = read_vectors_csv(_require(artifact(out, "features_avg"), "features"))
    labels = _load_labels(out, Path(outcomes_path) if outcomes_path else None,
                          Path(schedule_path) if schedule_path else None)
    missing = [v.user_id for v in vectors if v.user_id not in labels]
    if missing:
        raise PipelineError(f"no outcome for students: {missing[:5]}")
    features = {v.user_id: v.values for v in vectors}
    users = sorted(features)
    plan = make_folds(users, [labels[u] for u in users], k=k, seed=derive_seed(seed, "folds"))
    grid_points = grid_for(model, grid) if isinstance(grid, str) else [dict(g) for g in grid]
    report = nested_cv(features, labels, plan, grid_points, trainer_for(model), model_id=model)
    report.save(artifact(out, "eval_report"))
    write_scores(report.test_predictions, artifact(out, "scores"))
    return report


def stage_audit(
    out_dir: str | Path,
    delta: float = grouping.DEFAULT_DELTA,
    scores_path: str | Path | None = None,
    outcomes_path: str | Path | None = None,
    schedule_path: str | Path | None = None,
) -> grouping.PrevalenceSummary:
    """Group every prediction at the trust level; imported scores audit the
    test split only, trained reports audit train/validation/test."""
    out = Path(out_dir)
    labels = _load_labels(out, Path(outcomes_path) if outcomes_path else None,
                          Path(schedule_path) if schedule_path else None)
    if scores_path is not None:
        split_preds = {"test": import_scores(scores_path)}
    elif artifact(out, "eval_report").exists():
        split_preds = EvalReport.load(artifact(out, "eval_report")).split_predictions()
    elif artifact(out, "scores").exists():
        split_preds = {"test": import_scores(artifact(out, "scores"))}
    else:
        raise PipelineError("missing scores; run `uu-audit train` first or pass --scores")

    assignments: list[grouping.GroupAssignment] = []
    split_labels: list[str] = []
    for split in sorted(split_preds):
        for pr in split_preds[split]:
            if pr.user_id not in labels:
                raise PipelineError(f"no outcome for student {pr.user_id!r}")
            assignments.append(
                grouping.assign_group(
                    labels[pr.user_id], pr.y_hat, pr.c, delta, user_id=pr.user_id, p=pr.p
                )
            )
            split_labels.append(split)
    summary = grouping.prevalence(assignments, split_labels)
    grouping.write_assignments(assignments, split_labels, artifact(out, "assignments"))
    artifact(out, "prevalence").write_text(
        canonical_json({"delta": delta, "splits": summary.to_dict()}), encoding="utf-8"
    )
    return summary


def stage_characterize(out_dir: str | Path, target_mode: str = "binary"):
    out = Path(out_dir)
    vectors = read_vectors_csv(_require(artifact(out, "features_avg"), "features"))
    rows, splits = grouping.read_assignments(_require(artifact(out, "assignments"), "audit"))
    test_rows = [a for a, s in zip(rows, splits) if s == "test"]
    if not test_rows:
        raise PipelineError("no test-split assignments; run `uu-audit audit` first")
    fit = characterize_uu(vectors, test_rows, target_mode=target_mode)
    write_characterization_json(fit, artifact(out, "characterization"))
    write_characterization_csv(fit, artifact(out, "characterization_csv"))
    return fit


def stage_report(out_dir: str | Path) -> list[Path]:
    from . import svgfig  # local import keeps figure code out of hot paths

    out = Path(out_dir)
    written: list[Path] = []

    prevalence_path = _require(artifact(out, "prevalence"), "audit")
    assignments_path = _require(artifact(out, "assignments"), "audit")
    prev = json.loads(prevalence_path.read_text(encoding="utf-8"))
    rows, splits = grouping.read_assignments(assignments_path)

    if artifact(out, "eval_report").exists():
        report = EvalReport.load(artifact(out, "eval_report"))
        path = artifact(out, "fig_accuracy")
        path.write_text(svgfig.fig_accuracy(report.summary(), report.model_id), encoding="utf-8")
        written.append(path)

    by_split: dict[str, list[float]] = {}
    for a, s in zip(rows, splits):
        if a.p is not None:
            by_split.setdefault(s, []).append(a.p)
    path = artifact(out, "fig_probabilities")
    path.write_text(svgfig.fig_probabilities(by_split), encoding="utf-8")
    written.append(path)

    path = artifact(out, "fig_prevalence")
    path.write_text(svgfig.fig_prevalence(prev["splits"]), encoding="utf-8")
    written.append(path)

    if artifact(out, "characterization").exists():
        chara = json.loads(artifact(out, "characterization").read_text(encoding="utf-8"))
        path = artifact(out, "fig_coefficients")
        path.write_text(svgfig.fig_coefficients(chara), encoding="utf-8")
        written.append(path)
    return written


@dataclass
class PipelineResult:
    out_dir: Path
    report: EvalReport | None
    prevalence: grouping.PrevalenceSummary
    characterization_ok: bool


def run_pipeline(
    out_dir: str | Path,
    preset: str | SynthConfig = "flipped",
    model: str = "forest",
    delta: float = grouping.DEFAULT_DELTA,
    seed: int = 0,
    grid: Sequence[Mapping] | str = "default",
    target_mode: str = "binary",
    characterize: bool = True,
    report_figs: bool = False,
) -> PipelineResult:
    """synth -> features -> train -> audit (-> characterize -> report)."""
    out = Path(out_dir)
    stage_synth(preset, out, seed=seed)
    stage_features(out)
    report = stage_train(out, model=model, seed=seed, grid=grid)
    summary = stage_audit(out, delta=delta)
    chara_ok = False
    if characterize:
        try:
            stage_characterize(out, target_mode=target_mode)
            chara_ok = True
        except DegenerateTargetError:
            chara_ok = False
    if report_figs:
        stage_report(out)
    return PipelineResult(out, report, summary, chara_ok)
