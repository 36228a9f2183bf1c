"""Synthetic course generation with a latent "prior knowledge" confounder.

Each student draws a hidden confounder bit; behavior is sampled from a
passing-style or failing-style archetype, and confounded students get the
outcome opposite to what their behavior suggests (a failing-style student
with high prior knowledge passes, and vice versa). The latent trait file is
written separately and is never consumed by the feature or model code.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from datetime import datetime
from importlib import resources
from pathlib import Path

import numpy as np

from .eventlog import (
    Action,
    ClickEvent,
    CourseSchedule,
    Outcome,
    PassRule,
    WeekPlan,
    dump_outcomes,
    dump_schedule,
    parse_timestamp,
    serialize_events,
)
from .features import write_demographics
from .util import derive_seed

LATENT_HEADER = ("user_id", "prior_knowledge")

# weekly schedule density cycles around the configured mean
_WEEK_PATTERN = (0, 1, -1)

# within-session mix over video actions (Problem.Check is drawn separately)
_VIDEO_MIX = (
    (Action.VIDEO_PLAY, 0.40),
    (Action.VIDEO_PAUSE, 0.15),
    (Action.VIDEO_LOAD, 0.15),
    (Action.VIDEO_SEEK_FORWARD, 0.10),
    (Action.VIDEO_SEEK_BACKWARD, 0.08),
    (Action.VIDEO_SPEED_CHANGE, 0.06),
    (Action.VIDEO_STOP, 0.06),
)
_MIX_ACTIONS = [a for a, _ in _VIDEO_MIX]
_MIX_P = np.array([p for _, p in _VIDEO_MIX])

_GENDERS = (("female", 0.46), ("male", 0.46), ("nonbinary", 0.08))
_PROVENIENCES = (("alpine", 0.30), ("coastal", 0.30), ("inland", 0.25), ("abroad", 0.15))


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class BehaviorArchetype:
    """Two-component behavior model: Poisson session counts, categorical
    within-session action mix, plus schedule-affinity knobs."""

    sessions_per_week: float
    events_per_session: float
    align_prob: float
    anticipate_prob: float
    quiz_prob: float
    weekday_bias: float
    hour_lo: int
    hour_hi: int

    def __post_init__(self):
        for name in ("align_prob", "anticipate_prob", "quiz_prob", "weekday_bias"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise SynthError(f"{name} must be in [0, 1], got {v}")
        if self.align_prob + self.anticipate_prob > 1.0:
            raise SynthError("align_prob + anticipate_prob must be <= 1")
        if self.sessions_per_week <= 0 or self.events_per_session < 1:
            raise SynthError("archetype rates must be positive")
        if not 0 <= self.hour_lo < self.hour_hi <= 24:
            raise SynthError("need 0 <= hour_lo < hour_hi <= 24")

    def blend(self, other: "BehaviorArchetype", weight: float) -> "BehaviorArchetype":
        """weight 1.0 gives self, 0.0 gives other."""

        def mix(a: float, b: float) -> float:
            return weight * a + (1.0 - weight) * b

        return BehaviorArchetype(
            sessions_per_week=mix(self.sessions_per_week, other.sessions_per_week),
            events_per_session=mix(self.events_per_session, other.events_per_session),
            align_prob=mix(self.align_prob, other.align_prob),
            anticipate_prob=mix(self.anticipate_prob, other.anticipate_prob),
            quiz_prob=mix(self.quiz_prob, other.quiz_prob),
            weekday_bias=mix(self.weekday_bias, other.weekday_bias),
            hour_lo=round(mix(self.hour_lo, other.hour_lo)),
            hour_hi=round(mix(self.hour_hi, other.hour_hi)),
        )


@dataclass(frozen=True)
class SynthConfig:
    course_id: str
    n_students: int
    n_weeks: int
    videos_per_week: int
    quizzes_per_week: int
    scale: str
    failing_rate: float
    confounder_fraction: float
    confounder_strength: float
    pass_archetype: BehaviorArchetype
    fail_archetype: BehaviorArchetype
    start: str = "2024-02-19T00:00:00Z"
    student_noise: float = 0.45
    seed: int = 0

    def __post_init__(self):
        if self.n_students < 20:
            raise SynthError("need at least 20 students")
        if self.n_weeks < 1 or self.videos_per_week < 1 or self.quizzes_per_week < 1:
            raise SynthError("schedule density must be positive")
        for name in ("failing_rate", "confounder_fraction", "confounder_strength"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise SynthError(f"{name} must be in [0, 1], got {v}")
        self.behavior_fail_rate()  # feasibility check

    def behavior_fail_rate(self) -> float:
        """Failing-style behavior probability that keeps the marginal failing
        rate on target once confounded students' outcomes are flipped."""
        pi, f = self.confounder_fraction, self.failing_rate
        if pi == 0.0:
            return f
        if pi >= 0.5:
            raise SynthError("confounder_fraction must be below 0.5")
        q = (f - pi) / (1.0 - 2.0 * pi)
        if not 0.0 <= q <= 1.0:
            raise SynthError(
                f"failing_rate {f} unreachable with confounder_fraction {pi}"
            )
        return q

    def replace(self, **kwargs) -> "SynthConfig":
        raw = asdict(self)
        raw.update(kwargs)
        return from_dict(raw)

    def to_dict(self) -> dict:
        return asdict(self)


def from_dict(raw: dict) -> SynthConfig:
    raw = dict(raw)
    raw["pass_archetype"] = BehaviorArchetype(**dict(raw["pass_archetype"]))
    raw["fail_archetype"] = BehaviorArchetype(**dict(raw["fail_archetype"]))
    return SynthConfig(**raw)


def load_preset(name: str, **overrides) -> SynthConfig:
    """Built-in presets: ``flipped`` (300 students, 14 weeks, 40% failing)
    and ``mooc`` (2400 students, 6 weeks, 47% failing)."""
    ref = resources.files("uu_audit").joinpath(f"presets/{name}.json")
    try:
        raw = json.loads(ref.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise SynthError(f"unknown preset {name!r}") from None
    raw.update(overrides)
    return from_dict(raw)


def build_schedule(cfg: SynthConfig) -> CourseSchedule:
    weeks = []
    for w in range(1, cfg.n_weeks + 1):
        nv = max(1, cfg.videos_per_week + _WEEK_PATTERN[(w - 1) % len(_WEEK_PATTERN)])
        nq = max(1, cfg.quizzes_per_week + _WEEK_PATTERN[w % len(_WEEK_PATTERN)])
        weeks.append(
            WeekPlan(
                videos=tuple(f"v{w:02d}_{i}" for i in range(nv)),
                quizzes=tuple(f"q{w:02d}_{i}" for i in range(nq)),
            )
        )
    return CourseSchedule(
        course_id=cfg.course_id,
        start=parse_timestamp(cfg.start),
        weeks=tuple(weeks),
        pass_rule=PassRule(cfg.scale, {"1-6": 4.0, "0-100": 60.0}[cfg.scale]),
    )


@dataclass
class GeneratedCourse:
    config: SynthConfig
    schedule: CourseSchedule
    events: list[ClickEvent]
    outcomes: list[Outcome]
    demographics: dict[str, dict[str, str]]
    latent: dict[str, int]  # user -> 1 when the confounder flipped the outcome


def _pick_week(rng: np.random.Generator, w: int, n_weeks: int, arche: BehaviorArchetype) -> int:
    r = rng.random()
    if r < arche.align_prob or n_weeks == 1:
        return w
    future = w < n_weeks
    past = w > 1
    if r < arche.align_prob + arche.anticipate_prob:
        if future:
            return int(rng.integers(w + 1, n_weeks + 1))
        return int(rng.integers(1, w)) if past else w
    if past:
        return int(rng.integers(1, w))
    return int(rng.integers(w + 1, n_weeks + 1)) if future else w


def _student_events(
    rng: np.random.Generator,
    user: str,
    arche: BehaviorArchetype,
    cfg: SynthConfig,
    schedule: CourseSchedule,
) -> list[ClickEvent]:
    start_epoch = int(schedule.start.timestamp())
    videos = [list(w.videos) for w in schedule.weeks]
    quizzes = [list(w.quizzes) for w in schedule.weeks]

    # per-student heterogeneity: bounded rate multiplier (an unbounded tail
    # would let one student dominate the min-max normalization) and
    # schedule-affinity jitter
    mult = float(np.exp(np.clip(rng.normal(0.0, 1.0), -2.0, 2.0) * cfg.student_noise))
    align = float(np.clip(arche.align_prob + rng.normal(0.0, cfg.student_noise / 2), 0.05, 0.9))
    arche = BehaviorArchetype(
        sessions_per_week=arche.sessions_per_week * mult,
        events_per_session=max(1.0, arche.events_per_session * mult),
        align_prob=align,
        anticipate_prob=min(arche.anticipate_prob, 1.0 - align),
        quiz_prob=arche.quiz_prob,
        weekday_bias=arche.weekday_bias,
        hour_lo=arche.hour_lo,
        hour_hi=arche.hour_hi,
    )

    events: list[ClickEvent] = []
    for w in range(1, cfg.n_weeks + 1):
        week_start = start_epoch + (w - 1) * 7 * 86400
        week_end = week_start + 7 * 86400
        for _ in range(int(rng.poisson(arche.sessions_per_week))):
            day = int(rng.integers(0, 5)) if rng.random() < arche.weekday_bias else int(rng.integers(0, 7))
            hour = int(rng.integers(arche.hour_lo, arche.hour_hi))
            ts = week_start + day * 86400 + hour * 3600 + int(rng.integers(0, 3600))
            n_ev = 1 + int(rng.poisson(max(0.0, arche.events_per_session - 1.0)))
            gaps = rng.integers(5, 300, size=n_ev)
            is_quiz = rng.random(n_ev) < arche.quiz_prob
            mix_draws = rng.choice(len(_MIX_ACTIONS), size=n_ev, p=_MIX_P)
            vid_week = _pick_week(rng, w, cfg.n_weeks, arche)
            video = videos[vid_week - 1][int(rng.integers(len(videos[vid_week - 1])))]
            first = True
            for m in range(n_ev):
                if ts >= week_end:
                    break
                when = datetime.fromtimestamp(ts, tz=schedule.start.tzinfo)
                if is_quiz[m] and not first:
                    qw = _pick_week(rng, w, cfg.n_weeks, arche)
                    quiz = quizzes[qw - 1][int(rng.integers(len(quizzes[qw - 1])))]
                    events.append(ClickEvent(user, Action.PROBLEM_CHECK, quiz, when))
                else:
                    action = Action.VIDEO_LOAD if first else _MIX_ACTIONS[mix_draws[m]]
                    if action is Action.VIDEO_LOAD and not first:
                        vid_week = _pick_week(rng, w, cfg.n_weeks, arche)
                        video = videos[vid_week - 1][int(rng.integers(len(videos[vid_week - 1])))]
                    events.append(ClickEvent(user, action, video, when))
                first = False
                ts += int(gaps[m])
    events.sort(key=lambda e: e.timestamp)
    return events


def generate_course_data(cfg: SynthConfig) -> GeneratedCourse:
    """Deterministic generation: per-student seeds derive from cfg.seed."""
    schedule = build_schedule(cfg)
    q_b = cfg.behavior_fail_rate()
    width = len(str(cfg.n_students))
    users = [f"s{i:0{width}d}" for i in range(1, cfg.n_students + 1)]

    events: list[ClickEvent] = []
    outcomes: list[Outcome] = []
    demographics: dict[str, dict[str, str]] = {}
    latent: dict[str, int] = {}
    lo, hi = schedule.pass_rule.grade_range
    pass_at = schedule.pass_rule.pass_at

    for user in users:
        rng = np.random.default_rng(derive_seed(cfg.seed, "student", user))
        confounded = rng.random() < cfg.confounder_fraction
        fail_style = rng.random() < q_b
        y = int(fail_style) ^ int(confounded)

        base = cfg.fail_archetype if fail_style else cfg.pass_archetype
        if confounded and cfg.confounder_strength < 1.0:
            actual = cfg.fail_archetype if y == 1 else cfg.pass_archetype
            base = base.blend(actual, cfg.confounder_strength)
        events.extend(_student_events(rng, user, base, cfg, schedule))

        if y == 1:
            grade = round(float(rng.uniform(lo, pass_at - 0.1)), 1)
        else:
            grade = round(float(rng.uniform(pass_at, hi)), 1)
        outcomes.append(Outcome(user, grade, y))
        demographics[user] = {
            "gender": str(rng.choice([g for g, _ in _GENDERS], p=[p for _, p in _GENDERS])),
            "provenience": str(
                rng.choice([r for r, _ in _PROVENIENCES], p=[p for _, p in _PROVENIENCES])
            ),
        }
        latent[user] = int(confounded)

    events.sort(key=lambda e: (e.user_id, e.timestamp))
    return GeneratedCourse(cfg, schedule, events, outcomes, demographics, latent)


def write_latent(latent: dict[str, int], dest: str | Path) -> None:
    with open(dest, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LATENT_HEADER)
        for user in sorted(latent):
            writer.writerow([user, latent[user]])


def read_latent(source: str | Path) -> dict[str, int]:
    with open(source, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != LATENT_HEADER:
            raise SynthError(f"unexpected latent header in {source}")
        return {row[0]: int(row[1]) for row in reader if row}


def describe_ground_truth(latent: dict[str, int] | str | Path) -> list[str]:
    """Designed unknown-unknown candidates: the confounded students."""
    table = read_latent(latent) if isinstance(latent, (str, Path)) else latent
    return sorted(u for u, bit in table.items() if bit == 1)


def generate_course(cfg: SynthConfig, out_dir: str | Path) -> dict[str, Path]:
    """Write events.csv, schedule.json, outcomes.csv, latent.csv and the
    demographics.csv sidecar; returns the path map."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    course = generate_course_data(cfg)
    paths = {
        "events": out / "events.csv",
        "schedule": out / "schedule.json",
        "outcomes": out / "outcomes.csv",
        "latent": out / "latent.csv",
        "demographics": out / "demographics.csv",
    }
    serialize_events(course.events, paths["events"])
    dump_schedule(course.schedule, paths["schedule"])
    dump_outcomes(course.outcomes, paths["outcomes"])
    write_latent(course.latent, paths["latent"])
    write_demographics(course.demographics, paths["demographics"])
    return paths
