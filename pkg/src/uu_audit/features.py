"""Weekly behavioral indicators and per-student averaged feature vectors.

The registry holds 45 indicators in fixed order: control F01-F22, effort
F23-F35, proactivity F36-F42, regularity F43-F45. Raw weekly values are
averaged across course weeks and min-max normalized per feature; the
normalization statistics are persisted so held-out students can be scaled
with training statistics (clipped into [0, 1]).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import pandas as pd

from .eventlog import (
    DEFAULT_SESSION_TIMEOUT_S,
    Action,
    ClickEvent,
    CourseSchedule,
    EventLogError,
    VIDEO_ACTIONS,
)

DIMENSIONS = ("Control", "Effort", "Proactivity", "Regularity")
DIMENSION_COUNTS = {"Control": 22, "Effort": 13, "Proactivity": 7, "Regularity": 3}

DEMOGRAPHIC_FIELDS = ("gender", "provenience")


@dataclass(frozen=True)
class IndicatorDef:
    id: str
    name: str
    dimension: str
    description: str


def _defs() -> tuple[IndicatorDef, ...]:
    C, E, P, R = DIMENSIONS
    rows = [
        # -- control: in-video and cross-video behavior -------------------
        ("F01", "DistinctVideosInteracted", C, "distinct videos with any video action this week"),
        ("F02", "AvgWatchedWeeklyProp", C,
         "distinct scheduled-this-week videos played this week over videos scheduled this week"),
        ("F03", "RewatchedWeeklyProp", C,
         "distinct scheduled-this-week videos with two or more plays this week over videos scheduled this week"),
        ("F04", "InterruptedWeeklyProp", C,
         "distinct scheduled-this-week videos with a pause or stop this week over videos scheduled this week"),
        ("F05", "PausesPerVideo", C, "pause events over distinct videos interacted this week"),
        ("F06", "SeekBackwardsPerVideo", C, "seek-backward events over distinct videos interacted"),
        ("F07", "SeekForwardsPerVideo", C, "seek-forward events over distinct videos interacted"),
        ("F08", "SpeedChangesPerVideo", C, "speed-change events over distinct videos interacted"),
        ("F09", "LoadsPerVideo", C, "load events over distinct videos interacted"),
        ("F10", "FrequencyEventPlay", C, "plays over total video actions this week"),
        ("F11", "FrequencyEventPause", C, "pauses over total video actions this week"),
        ("F12", "FrequencyEventStop", C, "stops over total video actions this week"),
        ("F13", "FrequencyEventSeekBackward", C, "seek-backwards over total video actions this week"),
        ("F14", "FrequencyEventSeekForward", C, "seek-forwards over total video actions this week"),
        ("F15", "FrequencyEventSpeedChange", C, "speed-changes over total video actions this week"),
        ("F16", "RewatchedVideos", C, "distinct videos with two or more plays this week"),
        ("F17", "SeekToPlayRatio", C, "seek events (both directions) over plays this week"),
        ("F18", "PauseToPlayRatio", C, "pauses over plays this week"),
        ("F19", "MeanEventsPerVideo", C, "video actions over distinct videos interacted"),
        ("F20", "MaxEventsSingleVideo", C, "most video actions spent on a single video this week"),
        ("F21", "DistinctVideoActionTypes", C, "distinct video action types used this week"),
        ("F22", "BackwardSeekShare", C, "seek-backwards over all seeks this week"),
        # -- effort: engagement volume ------------------------------------
        ("F23", "MeanEventGap", E, "mean gap (s) between consecutive in-session events this week"),
        ("F24", "TotalClicksWeekend", E, "events on Saturday or Sunday this week"),
        ("F25", "TotalClicksEvening", E, "events between 18:00 and 23:59 UTC this week"),
        ("F26", "TotalSessions", E, "sessions starting this week"),
        ("F27", "TotalSessionDuration", E, "summed duration (s) of sessions starting this week"),
        ("F28", "MeanSessionDuration", E, "mean session duration (s) this week"),
        ("F29", "TotalClicksProblem", E, "problem-check events this week"),
        ("F30", "TotalClicksVideo", E, "video-action events this week"),
        ("F31", "MaxSessionDuration", E, "longest session (s) starting this week"),
        ("F32", "ClicksPerSession", E, "events this week over sessions starting this week"),
        ("F33", "ActiveDays", E, "distinct UTC days with at least one event this week"),
        ("F34", "MeanClicksPerActiveDay", E, "events this week over active days"),
        ("F35", "ChecksPerProblem", E, "problem checks over distinct quizzes checked this week"),
        # -- proactivity: schedule alignment and anticipation --------------
        ("F36", "CompetencyAlignment", P,
         "scheduled-this-week quizzes the student completed (checked) this week"),
        ("F37", "CompetencyAnticipation", P,
         "distinct quizzes scheduled in later weeks checked this week"),
        ("F38", "ContentAlignment", P, "scheduled-this-week videos played this week"),
        ("F39", "ContentAnticipation", P, "distinct videos scheduled in later weeks played this week"),
        ("F40", "ContentCatchup", P, "distinct videos scheduled in earlier weeks played this week"),
        ("F41", "CompetencyCatchup", P, "distinct quizzes scheduled in earlier weeks checked this week"),
        ("F42", "OnScheduleShare", P,
         "events on scheduled-this-week objects over events on any scheduled object this week"),
        # -- regularity: intra-week and intra-day time management ----------
        ("F43", "WeekdayEntropy", R, "entropy of the weekday event histogram, normalized by ln 7"),
        ("F44", "HourEntropy", R, "entropy of the hour-of-day event histogram, normalized by ln 24"),
        ("F45", "WeekdayProfileSim", R,
         "cosine similarity of this week's and last week's weekday histograms"),
    ]
    return tuple(IndicatorDef(*row) for row in rows)


REGISTRY: tuple[IndicatorDef, ...] = _defs()
REGISTRY_IDS: tuple[str, ...] = tuple(d.id for d in REGISTRY)
N_INDICATORS = len(REGISTRY)


def _check_registry() -> None:
    assert N_INDICATORS == 45
    assert len(set(REGISTRY_IDS)) == 45
    counts = {dim: sum(1 for d in REGISTRY if d.dimension == dim) for dim in DIMENSIONS}
    assert counts == DIMENSION_COUNTS, counts


_check_registry()


@dataclass
class StudentFeatureVector:
    """Weekly raw matrix plus the averaged (and normalized) 45-value vector."""

    user_id: str
    weekly: np.ndarray  # (n_weeks, 45) raw
    values: np.ndarray  # (45,) averaged, min-max normalized
    demographics: dict[str, str] | None = None


@dataclass
class FeatureDiagnostics:
    """Events whose object id is absent from the schedule for its kind."""

    unknown_object_events: int = 0
    unknown_object_ids: list[str] = field(default_factory=list)
    out_of_range_events: int = 0

    def summary(self) -> str:
        return (
            f"{self.unknown_object_events} events on {len(self.unknown_object_ids)} "
            f"unknown object ids; {self.out_of_range_events} events outside course weeks"
        )


@dataclass
class NormStats:
    """Per-feature (min, max) from the normalization pass."""

    mins: np.ndarray
    maxs: np.ndarray

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Normalize held-out rows with stored statistics, clipped into [0, 1]."""
        X = np.asarray(X, dtype=float)
        span = self.maxs - self.mins
        out = np.zeros_like(X, dtype=float)
        nz = span > 0
        out[..., nz] = (X[..., nz] - self.mins[nz]) / span[nz]
        return np.clip(out, 0.0, 1.0)

    def to_dict(self) -> dict:
        return {
            ind.id: {"min": float(self.mins[j]), "max": float(self.maxs[j])}
            for j, ind in enumerate(REGISTRY)
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Mapping[str, float]]) -> "NormStats":
        mins = np.array([raw[i]["min"] for i in REGISTRY_IDS], dtype=float)
        maxs = np.array([raw[i]["max"] for i in REGISTRY_IDS], dtype=float)
        return cls(mins, maxs)


def normalize_minmax(X: np.ndarray) -> tuple[np.ndarray, NormStats]:
    """Column-wise min-max normalization; constant columns map to 0."""
    X = np.asarray(X, dtype=float)
    if X.size == 0:
        raise ValueError("need at least one value per feature")
    mins = X.min(axis=0)
    maxs = X.max(axis=0)
    stats = NormStats(mins, maxs)
    span = maxs - mins
    out = np.zeros_like(X, dtype=float)
    nz = span > 0
    out[:, nz] = (X[:, nz] - mins[nz]) / span[nz]
    return out, stats


def average_over_weeks(weekly: np.ndarray) -> np.ndarray:
    """Column mean over all course weeks; inactive weeks count as zeros."""
    weekly = np.asarray(weekly, dtype=float)
    if weekly.ndim != 2 or weekly.shape[0] < 1:
        raise ValueError("weekly matrix must be (n_weeks, n_features) with n_weeks >= 1")
    return weekly.mean(axis=0)


def _safe_div(num: pd.Series | np.ndarray, den: pd.Series | np.ndarray) -> np.ndarray:
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    out = np.zeros_like(num, dtype=float)
    np.divide(num, den, out=out, where=den > 0)
    return out


def _entropy(counts: np.ndarray, n_bins: int) -> np.ndarray:
    """Normalized Shannon entropy per row; all-zero rows give 0."""
    totals = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(totals > 0, counts / np.where(totals > 0, totals, 1), 0.0)
        h = -np.where(p > 0, p * np.log(p), 0.0).sum(axis=1)
    return h / math.log(n_bins)


def compute_indicators(
    events: Sequence[ClickEvent],
    schedule: CourseSchedule,
    registry: Sequence[IndicatorDef] = REGISTRY,
    users: Sequence[str] | None = None,
    session_timeout_s: int = DEFAULT_SESSION_TIMEOUT_S,
) -> tuple[dict[str, np.ndarray], FeatureDiagnostics]:
    """Raw weekly indicator matrices for all users.

    Returns ``{user_id: (n_weeks, 45) array}`` plus diagnostics about events
    on unknown object ids (counted in totals, excluded from alignment and
    anticipation indicators). Users given in `users` but absent from the
    events get all-zero matrices.
    """
    if tuple(d.id for d in registry) != REGISTRY_IDS:
        raise ValueError("unknown registry; expected the built-in 45-indicator registry")
    n_weeks = schedule.n_weeks
    diag = FeatureDiagnostics()

    all_users = sorted(set(users or ()) | {e.user_id for e in events})
    empty = {u: np.zeros((n_weeks, N_INDICATORS)) for u in all_users}
    if not events:
        return empty, diag

    week0 = np.array(
        [(e.timestamp - schedule.start).total_seconds() for e in events]
    ) // (7 * 24 * 3600)
    df = pd.DataFrame(
        {
            "user": [e.user_id for e in events],
            "action": [e.action.value for e in events],
            "object": [e.object_id for e in events],
            "ts": [e.timestamp.timestamp() for e in events],
            "week": week0.astype(int) + 1,
        }
    )
    in_range = (df["week"] >= 1) & (df["week"] <= n_weeks)
    diag.out_of_range_events = int((~in_range).sum())
    df = df[in_range].reset_index(drop=True)
    if df.empty:
        return empty, diag

    # calendar fields (UTC): weekday 0=Mon, hour, date ordinal
    days = np.floor_divide(df["ts"].to_numpy(), 86400).astype(int)
    df["weekday"] = (days + 3) % 7  # 1970-01-01 was a Thursday
    df["hour"] = (df["ts"].to_numpy() % 86400 // 3600).astype(int)
    df["day"] = days

    df["is_video"] = df["action"].isin([a.value for a in VIDEO_ACTIONS])
    df["is_check"] = df["action"] == Action.PROBLEM_CHECK.value

    video_weeks = schedule.video_weeks()
    quiz_weeks = schedule.quiz_weeks()
    videos_per_week = np.array([len(w.videos) for w in schedule.weeks], dtype=float)
    quizzes_per_week = np.array([len(w.quizzes) for w in schedule.weeks], dtype=float)

    sched_week = np.full(len(df), np.nan)
    vid_mask = df["is_video"].to_numpy()
    chk_mask = df["is_check"].to_numpy()
    objs = df["object"].to_numpy()
    unknown_ids: set[str] = set()
    for mask, table in ((vid_mask, video_weeks), (chk_mask, quiz_weeks)):
        idx = np.nonzero(mask)[0]
        for i in idx:
            w = table.get(objs[i])
            if w is None:
                unknown_ids.add(objs[i])
                diag.unknown_object_events += 1
            else:
                sched_week[i] = w
    diag.unknown_object_ids = sorted(unknown_ids)
    df["sched_week"] = sched_week

    grid = pd.MultiIndex.from_product([all_users, range(1, n_weeks + 1)], names=["user", "week"])
    agg = pd.DataFrame(index=grid)

    gb = df.groupby(["user", "week"], sort=True)

    def put(name: str, series: pd.Series) -> None:
        agg[name] = series.reindex(grid).fillna(0.0).to_numpy(dtype=float)

    action_counts = df.pivot_table(
        index=["user", "week"], columns="action", aggfunc="size", fill_value=0
    )
    for a in Action:
        col = action_counts[a.value] if a.value in action_counts else None
        if col is None:
            agg[a.value] = 0.0
        else:
            put(a.value, col)

    put("total", gb.size())
    put("weekend", df[df["weekday"] >= 5].groupby(["user", "week"]).size())
    put("evening", df[df["hour"] >= 18].groupby(["user", "week"]).size())
    put("active_days", gb["day"].nunique())

    vid = df[df["is_video"]]
    put("videos_interacted", vid.groupby(["user", "week"])["object"].nunique())
    put("video_total", vid.groupby(["user", "week"]).size())
    per_video = vid.groupby(["user", "week", "object"]).size()
    put("max_video_events", per_video.groupby(["user", "week"]).max())
    put("video_action_types", vid.groupby(["user", "week"])["action"].nunique())

    plays = df[df["action"] == Action.VIDEO_PLAY.value]
    play_counts = plays.groupby(["user", "week", "object"], as_index=False).agg(
        n=("ts", "size"), sched_week=("sched_week", "first")
    )
    put(
        "rewatched_any",
        play_counts[play_counts["n"] >= 2].groupby(["user", "week"])["object"].nunique(),
    )
    aligned_plays = play_counts[play_counts["sched_week"] == play_counts["week"]]
    put("watched_sched", aligned_plays.groupby(["user", "week"])["object"].nunique())
    put(
        "rewatched_sched",
        aligned_plays[aligned_plays["n"] >= 2].groupby(["user", "week"])["object"].nunique(),
    )
    put(
        "videos_future",
        play_counts[play_counts["sched_week"] > play_counts["week"]]
        .groupby(["user", "week"])["object"].nunique(),
    )
    put(
        "videos_past",
        play_counts[play_counts["sched_week"] < play_counts["week"]]
        .groupby(["user", "week"])["object"].nunique(),
    )

    pauses_stops = df[df["action"].isin([Action.VIDEO_PAUSE.value, Action.VIDEO_STOP.value])]
    put(
        "interrupted_sched",
        pauses_stops[pauses_stops["sched_week"] == pauses_stops["week"]]
        .groupby(["user", "week"])["object"].nunique(),
    )

    checks = df[df["is_check"]]
    put("problems_distinct", checks.groupby(["user", "week"])["object"].nunique())
    put(
        "quizzes_aligned",
        checks[checks["sched_week"] == checks["week"]]
        .groupby(["user", "week"])["object"].nunique(),
    )
    put(
        "quizzes_future",
        checks[checks["sched_week"] > checks["week"]]
        .groupby(["user", "week"])["object"].nunique(),
    )
    put(
        "quizzes_past",
        checks[checks["sched_week"] < checks["week"]]
        .groupby(["user", "week"])["object"].nunique(),
    )

    on_sched = df[df["sched_week"].notna()]
    put("on_any_sched", on_sched.groupby(["user", "week"]).size())
    put(
        "on_this_week",
        on_sched[on_sched["sched_week"] == on_sched["week"]].groupby(["user", "week"]).size(),
    )

    # sessions: new session at user change or gap >= timeout; assigned to start week
    sdf = df.sort_values(["user", "ts"], kind="stable")
    gap = sdf["ts"].diff()
    new = (sdf["user"] != sdf["user"].shift()) | (gap >= session_timeout_s)
    sdf = sdf.assign(sid=new.cumsum())
    sess = sdf.groupby("sid").agg(
        user=("user", "first"), week=("week", "first"),
        start=("ts", "min"), end=("ts", "max"), n_events=("ts", "size"),
    )
    sess["dur"] = sess["end"] - sess["start"]
    sgb = sess.groupby(["user", "week"])
    put("n_sessions", sgb.size())
    put("sess_total", sgb["dur"].sum())
    put("sess_mean", sgb["dur"].mean())
    put("sess_max", sgb["dur"].max())
    put("sess_events", sgb["n_events"].sum())

    # weekday / hour histograms on the full grid
    wd_counts = np.zeros((len(grid), 7))
    wd_tab = df.groupby(["user", "week", "weekday"]).size()
    wd_frame = wd_tab.unstack(fill_value=0).reindex(grid, fill_value=0)
    wd_counts[:, wd_frame.columns.to_numpy()] = wd_frame.to_numpy()
    hr_counts = np.zeros((len(grid), 24))
    hr_tab = df.groupby(["user", "week", "hour"]).size()
    hr_frame = hr_tab.unstack(fill_value=0).reindex(grid, fill_value=0)
    hr_counts[:, hr_frame.columns.to_numpy()] = hr_frame.to_numpy()

    wd_by_user = wd_counts.reshape(len(all_users), n_weeks, 7)
    cos = np.zeros((len(all_users), n_weeks))
    if n_weeks > 1:
        cur, prev = wd_by_user[:, 1:, :], wd_by_user[:, :-1, :]
        dot = (cur * prev).sum(axis=2)
        norms = np.linalg.norm(cur, axis=2) * np.linalg.norm(prev, axis=2)
        cos[:, 1:] = np.divide(dot, norms, out=np.zeros_like(dot), where=norms > 0)

    a = {name: agg[name].to_numpy() for name in agg.columns}
    sched_vids = np.tile(videos_per_week, len(all_users))
    sched_quiz = np.tile(quizzes_per_week, len(all_users))

    cols: dict[str, np.ndarray] = {}
    cols["F01"] = a["videos_interacted"]
    cols["F02"] = _safe_div(a["watched_sched"], sched_vids)
    cols["F03"] = _safe_div(a["rewatched_sched"], sched_vids)
    cols["F04"] = _safe_div(a["interrupted_sched"], sched_vids)
    cols["F05"] = _safe_div(a[Action.VIDEO_PAUSE.value], a["videos_interacted"])
    cols["F06"] = _safe_div(a[Action.VIDEO_SEEK_BACKWARD.value], a["videos_interacted"])
    cols["F07"] = _safe_div(a[Action.VIDEO_SEEK_FORWARD.value], a["videos_interacted"])
    cols["F08"] = _safe_div(a[Action.VIDEO_SPEED_CHANGE.value], a["videos_interacted"])
    cols["F09"] = _safe_div(a[Action.VIDEO_LOAD.value], a["videos_interacted"])
    cols["F10"] = _safe_div(a[Action.VIDEO_PLAY.value], a["video_total"])
    cols["F11"] = _safe_div(a[Action.VIDEO_PAUSE.value], a["video_total"])
    cols["F12"] = _safe_div(a[Action.VIDEO_STOP.value], a["video_total"])
    cols["F13"] = _safe_div(a[Action.VIDEO_SEEK_BACKWARD.value], a["video_total"])
    cols["F14"] = _safe_div(a[Action.VIDEO_SEEK_FORWARD.value], a["video_total"])
    cols["F15"] = _safe_div(a[Action.VIDEO_SPEED_CHANGE.value], a["video_total"])
    cols["F16"] = a["rewatched_any"]
    seeks = a[Action.VIDEO_SEEK_BACKWARD.value] + a[Action.VIDEO_SEEK_FORWARD.value]
    cols["F17"] = _safe_div(seeks, a[Action.VIDEO_PLAY.value])
    cols["F18"] = _safe_div(a[Action.VIDEO_PAUSE.value], a[Action.VIDEO_PLAY.value])
    cols["F19"] = _safe_div(a["video_total"], a["videos_interacted"])
    cols["F20"] = a["max_video_events"]
    cols["F21"] = a["video_action_types"]
    cols["F22"] = _safe_div(a[Action.VIDEO_SEEK_BACKWARD.value], seeks)
    cols["F23"] = _safe_div(a["sess_total"], a["sess_events"] - a["n_sessions"])
    cols["F24"] = a["weekend"]
    cols["F25"] = a["evening"]
    cols["F26"] = a["n_sessions"]
    cols["F27"] = a["sess_total"]
    cols["F28"] = a["sess_mean"]
    cols["F29"] = a[Action.PROBLEM_CHECK.value]
    cols["F30"] = a["video_total"]
    cols["F31"] = a["sess_max"]
    cols["F32"] = _safe_div(a["total"], a["n_sessions"])
    cols["F33"] = a["active_days"]
    cols["F34"] = _safe_div(a["total"], a["active_days"])
    cols["F35"] = _safe_div(a[Action.PROBLEM_CHECK.value], a["problems_distinct"])
    cols["F36"] = a["quizzes_aligned"]
    cols["F37"] = a["quizzes_future"]
    cols["F38"] = a["watched_sched"]
    cols["F39"] = a["videos_future"]
    cols["F40"] = a["videos_past"]
    cols["F41"] = a["quizzes_past"]
    cols["F42"] = _safe_div(a["on_this_week"], a["on_any_sched"])
    cols["F43"] = _entropy(wd_counts, 7)
    cols["F44"] = _entropy(hr_counts, 24)
    cols["F45"] = cos.reshape(-1)

    flat = np.column_stack([cols[i] for i in REGISTRY_IDS])
    matrices: dict[str, np.ndarray] = {}
    for ui, user in enumerate(all_users):
        matrices[user] = flat[ui * n_weeks : (ui + 1) * n_weeks, :].copy()
    return matrices, diag


def build_student_vectors(
    events: Sequence[ClickEvent],
    schedule: CourseSchedule,
    users: Sequence[str],
    demographics: Mapping[str, Mapping[str, str]] | None = None,
    session_timeout_s: int = DEFAULT_SESSION_TIMEOUT_S,
) -> tuple[list[StudentFeatureVector], NormStats, FeatureDiagnostics]:
    """Full feature pass: weekly raw matrices, averaging, then normalization.

    Averaging happens on raw weekly values; the averaged columns are then
    min-max normalized across the given students.
    """
    matrices, diag = compute_indicators(
        events, schedule, users=users, session_timeout_s=session_timeout_s
    )
    order = sorted(users)
    raw = np.vstack([average_over_weeks(matrices[u]) for u in order])
    normed, stats = normalize_minmax(raw)
    vectors = [
        StudentFeatureVector(
            user_id=u,
            weekly=matrices[u],
            values=normed[i],
            demographics=dict(demographics[u]) if demographics and u in demographics else None,
        )
        for i, u in enumerate(order)
    ]
    return vectors, stats, diag


# ---------------------------------------------------------------------------
# file formats


def weekly_csv_header() -> list[str]:
    return ["user_id", "week", *REGISTRY_IDS]


def vectors_csv_header() -> list[str]:
    return ["user_id", *REGISTRY_IDS, *DEMOGRAPHIC_FIELDS]


def write_weekly_csv(matrices: Mapping[str, np.ndarray], dest: str | Path) -> None:
    with open(dest, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(weekly_csv_header())
        for user in sorted(matrices):
            W = matrices[user]
            for w in range(W.shape[0]):
                writer.writerow([user, w + 1, *[repr(float(x)) for x in W[w]]])


def write_vectors_csv(vectors: Iterable[StudentFeatureVector], dest: str | Path) -> None:
    with open(dest, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(vectors_csv_header())
        for v in sorted(vectors, key=lambda s: s.user_id):
            demo = v.demographics or {}
            writer.writerow(
                [v.user_id, *[repr(float(x)) for x in v.values]]
                + [demo.get(f, "") for f in DEMOGRAPHIC_FIELDS]
            )


def read_vectors_csv(source: str | Path) -> list[StudentFeatureVector]:
    with open(source, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != vectors_csv_header():
            raise EventLogError(f"unexpected feature CSV header in {source}")
        out = []
        for row in reader:
            user = row[0]
            values = np.array([float(x) for x in row[1 : 1 + N_INDICATORS]])
            demo_vals = row[1 + N_INDICATORS :]
            demo = {
                f: val for f, val in zip(DEMOGRAPHIC_FIELDS, demo_vals) if val
            } or None
            out.append(
                StudentFeatureVector(user, np.zeros((0, N_INDICATORS)), values, demo)
            )
    return out


def write_norm_stats(stats: NormStats, dest: str | Path) -> None:
    with open(dest, "w", encoding="utf-8") as fh:
        json.dump(stats.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_norm_stats(source: str | Path) -> NormStats:
    with open(source, "r", encoding="utf-8") as fh:
        return NormStats.from_dict(json.load(fh))


def load_demographics(source: str | Path) -> dict[str, dict[str, str]]:
    """Optional sidecar CSV ``user_id,gender,provenience``."""
    with open(source, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["user_id", *DEMOGRAPHIC_FIELDS]:
            raise EventLogError(f"unexpected demographics header in {source}")
        return {
            row[0]: dict(zip(DEMOGRAPHIC_FIELDS, row[1:]))
            for row in reader
            if row
        }


def write_demographics(demo: Mapping[str, Mapping[str, str]], dest: str | Path) -> None:
    with open(dest, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["user_id", *DEMOGRAPHIC_FIELDS])
        for user in sorted(demo):
            writer.writerow([user, *[demo[user].get(f, "") for f in DEMOGRAPHIC_FIELDS]])
