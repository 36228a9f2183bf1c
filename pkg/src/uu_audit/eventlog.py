"""Clickstream log parsing, course metadata, and sessionization.

Wire formats handled here:
  events CSV    header ``user_id,action,object_id,timestamp`` (ISO-8601, Z suffix)
  schedule JSON ``{course_id, start, weeks: [{videos, quizzes}], pass_rule}``
  outcomes CSV  header ``user_id,grade``
"""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import IO, Iterable, Sequence

EVENTS_HEADER = ("user_id", "action", "object_id", "timestamp")
OUTCOMES_HEADER = ("user_id", "grade")

DEFAULT_SESSION_TIMEOUT_S = 1800  # conventional 30-minute web-analytics cutoff

PASS_RULES = {
    # scale -> (grade_min, grade_max, pass_at)
    "1-6": (1.0, 6.0, 4.0),
    "0-100": (0.0, 100.0, 60.0),
}


class Action(enum.Enum):
    """Closed enumeration of learner actions appearing in the logs."""

    VIDEO_PLAY = "Video.Play"
    VIDEO_PAUSE = "Video.Pause"
    VIDEO_STOP = "Video.Stop"
    VIDEO_SEEK_BACKWARD = "Video.SeekBackward"
    VIDEO_SEEK_FORWARD = "Video.SeekForward"
    VIDEO_SPEED_CHANGE = "Video.SpeedChange"
    VIDEO_LOAD = "Video.Load"
    PROBLEM_CHECK = "Problem.Check"


VIDEO_ACTIONS = frozenset(a for a in Action if a.value.startswith("Video."))
ACTION_VALUES = frozenset(a.value for a in Action)
_ACTION_BY_VALUE = {a.value: a for a in Action}


class EventLogError(ValueError):
    """Base class for log/metadata validation failures."""


class ParseError(EventLogError):
    """A malformed row; carries the 1-based line number and offending field."""

    def __init__(self, line: int, field_name: str, message: str):
        super().__init__(f"line {line}, field '{field_name}': {message}")
        self.line = line
        self.field_name = field_name


@dataclass(frozen=True)
class ClickEvent:
    """One timestamped learner action."""

    user_id: str
    action: Action
    object_id: str
    timestamp: datetime


@dataclass(frozen=True)
class PassRule:
    scale: str
    pass_at: float

    def __post_init__(self):
        if self.scale not in PASS_RULES:
            raise EventLogError(f"unknown grade scale {self.scale!r}")
        lo, hi, canonical = PASS_RULES[self.scale]
        if float(self.pass_at) != canonical:
            raise EventLogError(
                f"scale {self.scale!r} requires pass threshold {canonical}, got {self.pass_at}"
            )

    @property
    def grade_range(self) -> tuple[float, float]:
        lo, hi, _ = PASS_RULES[self.scale]
        return lo, hi

    def label(self, grade: float) -> int:
        """Binary outcome from a grade: 1 = fail, 0 = pass."""
        lo, hi = self.grade_range
        if not lo <= grade <= hi:
            raise EventLogError(f"grade {grade} outside scale {self.scale}")
        return 0 if grade >= self.pass_at else 1


@dataclass(frozen=True)
class WeekPlan:
    videos: tuple[str, ...]
    quizzes: tuple[str, ...]


@dataclass(frozen=True)
class CourseSchedule:
    course_id: str
    start: datetime
    weeks: tuple[WeekPlan, ...]
    pass_rule: PassRule

    def __post_init__(self):
        if not self.weeks:
            raise EventLogError("schedule needs at least one week")
        if self.start.tzinfo is None:
            raise EventLogError("schedule start must be timezone-aware")
        for kind in ("videos", "quizzes"):
            seen: set[str] = set()
            for w, plan in enumerate(self.weeks, start=1):
                for oid in getattr(plan, kind):
                    if oid in seen:
                        raise EventLogError(f"duplicate {kind[:-1]} id {oid!r} (week {w})")
                    seen.add(oid)

    @property
    def n_weeks(self) -> int:
        return len(self.weeks)

    def video_weeks(self) -> dict[str, int]:
        """Map video id -> the week (1-based) it is scheduled in."""
        return {v: w for w, plan in enumerate(self.weeks, 1) for v in plan.videos}

    def quiz_weeks(self) -> dict[str, int]:
        return {q: w for w, plan in enumerate(self.weeks, 1) for q in plan.quizzes}


@dataclass(frozen=True)
class Outcome:
    """True label derived deterministically from the grade and pass rule."""

    user_id: str
    grade: float
    y: int  # 1 = fail, 0 = pass


@dataclass(frozen=True)
class Session:
    user_id: str
    events: tuple[ClickEvent, ...]
    start: datetime = field(init=False)
    end: datetime = field(init=False)

    def __post_init__(self):
        if not self.events:
            raise EventLogError("session cannot be empty")
        object.__setattr__(self, "start", self.events[0].timestamp)
        object.__setattr__(self, "end", self.events[-1].timestamp)

    @property
    def duration_s(self) -> float:
        return (self.end - self.start).total_seconds()


def parse_timestamp(text: str) -> datetime:
    """ISO-8601 instant, normalized to UTC. Naive inputs are treated as UTC."""
    raw = text.strip()
    if raw.endswith("Z"):
        raw = raw[:-1] + "+00:00"
    ts = datetime.fromisoformat(raw)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    ts = ts.astimezone(timezone.utc)
    return (
        f"{ts.year:04d}-{ts.month:02d}-{ts.day:02d}"
        f"T{ts.hour:02d}:{ts.minute:02d}:{ts.second:02d}Z"
    )


def _open_text(source: str | Path | IO[str] | IO[bytes]) -> IO[str]:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline="")
    if isinstance(source, io.TextIOBase):
        return source
    if hasattr(source, "read"):
        return io.TextIOWrapper(source, encoding="utf-8", newline="")
    raise TypeError(f"cannot read events from {type(source)!r}")


def parse_events(
    source: str | Path | IO[str] | IO[bytes],
    expected_header: Sequence[str] = EVENTS_HEADER,
) -> list[ClickEvent]:
    """Parse an events CSV into ClickEvents, preserving input order.

    Malformed rows raise :class:`ParseError` with the 1-based line number
    (the header is line 1) and the offending field.
    """
    fh = _open_text(source)
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(1, "header", "empty file") from None
    if tuple(h.strip() for h in header) != tuple(expected_header):
        raise ParseError(1, "header", f"expected {','.join(expected_header)}")
    events: list[ClickEvent] = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 4:
            raise ParseError(line_no, "row", f"expected 4 fields, got {len(row)}")
        user_id, action_raw, object_id, ts_raw = (f.strip() for f in row)
        if not user_id:
            raise ParseError(line_no, "user_id", "empty value")
        action = _ACTION_BY_VALUE.get(action_raw)
        if action is None:
            raise ParseError(
                line_no,
                "action",
                f"unknown action {action_raw!r}; expected one of {sorted(ACTION_VALUES)}",
            )
        if not object_id:
            raise ParseError(line_no, "object_id", "empty value")
        try:
            ts = parse_timestamp(ts_raw)
        except ValueError as exc:
            raise ParseError(line_no, "timestamp", f"bad timestamp {ts_raw!r}: {exc}") from None
        events.append(ClickEvent(user_id, action, object_id, ts))
    return events


def serialize_events(events: Iterable[ClickEvent], dest: str | Path | IO[str]) -> None:
    own = isinstance(dest, (str, Path))
    fh = open(dest, "w", encoding="utf-8", newline="") if own else dest
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EVENTS_HEADER)
        for e in events:
            writer.writerow([e.user_id, e.action.value, e.object_id, format_timestamp(e.timestamp)])
    finally:
        if own:
            fh.close()


def sessionize(
    events: Sequence[ClickEvent], timeout_s: int = DEFAULT_SESSION_TIMEOUT_S
) -> list[Session]:
    """Partition each user's time-sorted events into sessions.

    A new session starts whenever the gap to the previous event reaches
    ``timeout_s``. Users may be interleaved in the input; order within each
    user must be chronological. Output is sorted by (user, session start).
    """
    if timeout_s <= 0:
        raise EventLogError("session timeout must be positive")
    per_user: dict[str, list[ClickEvent]] = {}
    for e in events:
        per_user.setdefault(e.user_id, []).append(e)
    sessions: list[Session] = []
    for user_id in sorted(per_user):
        run: list[ClickEvent] = []
        for e in per_user[user_id]:
            if run and (e.timestamp - run[-1].timestamp).total_seconds() >= timeout_s:
                sessions.append(Session(user_id, tuple(run)))
                run = []
            run.append(e)
        if run:
            sessions.append(Session(user_id, tuple(run)))
    return sessions


def week_of(event: ClickEvent, schedule: CourseSchedule) -> int | None:
    """1-based course week of an event; None when outside weeks 1..n_weeks."""
    delta_s = (event.timestamp - schedule.start).total_seconds()
    if delta_s < 0:
        return None
    week = int(delta_s // (7 * 24 * 3600)) + 1
    return week if week <= schedule.n_weeks else None


def load_schedule(source: str | Path | IO[str]) -> CourseSchedule:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    else:
        raw = json.load(source)
    try:
        weeks = tuple(
            WeekPlan(tuple(w.get("videos", ())), tuple(w.get("quizzes", ())))
            for w in raw["weeks"]
        )
        rule = PassRule(raw["pass_rule"]["scale"], float(raw["pass_rule"]["pass_at"]))
        return CourseSchedule(
            course_id=str(raw["course_id"]),
            start=parse_timestamp(raw["start"]),
            weeks=weeks,
            pass_rule=rule,
        )
    except KeyError as exc:
        raise EventLogError(f"schedule JSON missing field {exc}") from None


def dump_schedule(schedule: CourseSchedule, dest: str | Path) -> None:
    payload = {
        "course_id": schedule.course_id,
        "start": format_timestamp(schedule.start),
        "weeks": [
            {"videos": list(w.videos), "quizzes": list(w.quizzes)} for w in schedule.weeks
        ],
        "pass_rule": {"scale": schedule.pass_rule.scale, "pass_at": schedule.pass_rule.pass_at},
    }
    with open(dest, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_outcomes(source: str | Path | IO[str], pass_rule: PassRule) -> list[Outcome]:
    fh = _open_text(source)
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(1, "header", "empty file") from None
    if tuple(h.strip() for h in header) != OUTCOMES_HEADER:
        raise ParseError(1, "header", f"expected {','.join(OUTCOMES_HEADER)}")
    outcomes: list[Outcome] = []
    seen: set[str] = set()
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2:
            raise ParseError(line_no, "row", f"expected 2 fields, got {len(row)}")
        user_id, grade_raw = (f.strip() for f in row)
        if not user_id:
            raise ParseError(line_no, "user_id", "empty value")
        if user_id in seen:
            raise ParseError(line_no, "user_id", f"duplicate outcome for {user_id!r}")
        seen.add(user_id)
        try:
            grade = float(grade_raw)
        except ValueError:
            raise ParseError(line_no, "grade", f"not a number: {grade_raw!r}") from None
        try:
            y = pass_rule.label(grade)
        except EventLogError as exc:
            raise ParseError(line_no, "grade", str(exc)) from None
        outcomes.append(Outcome(user_id, grade, y))
    return outcomes


def dump_outcomes(outcomes: Iterable[Outcome], dest: str | Path) -> None:
    with open(dest, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(OUTCOMES_HEADER)
        for o in outcomes:
            writer.writerow([o.user_id, f"{o.grade:g}"])
