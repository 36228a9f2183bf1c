"""Shared fixture builders: a hand-checkable 3-student, 2-week course."""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

from uu_audit.eventlog import Action, ClickEvent, CourseSchedule, PassRule, WeekPlan

COURSE_START = datetime(2024, 3, 4, 0, 0, 0, tzinfo=timezone.utc)  # a Monday


def fixture_schedule() -> CourseSchedule:
    return CourseSchedule(
        course_id="fixture",
        start=COURSE_START,
        weeks=(
            WeekPlan(videos=("va", "vb", "vc", "vd"), quizzes=("qa", "qb")),
            WeekPlan(videos=("ve", "vf"), quizzes=("qc", "qd")),
        ),
        pass_rule=PassRule("1-6", 4.0),
    )


def _run(user: str, day: int, hour: int, actions: list[tuple[Action, str]]) -> list[ClickEvent]:
    t = COURSE_START + timedelta(days=day, hours=hour)
    out = []
    for action, obj in actions:
        out.append(ClickEvent(user, action, obj, t))
        t += timedelta(seconds=10)
    return out


def fixture_events() -> list[ClickEvent]:
    """Three students, two weeks; every value below is hand-computable.

    s1 week 1: plays va,vb,vc + replay va, pause va, seek-fwd vb,
               checks qa (this week) and qc (next week).
    s1 week 2: plays ve, checks qc.
    s2 week 1: 5 plays on va, 5 pauses on va, 5 stops on vb, 5 seek-backs
               on vb (20 video actions, 5 plays -> 0.25 play share).
    s2 week 2: inactive.
    s3 week 1: checks qc (future), plays vf (future video), plays vd,
               stops vd, speed-changes vd.
    s3 week 2: plays vf.
    """
    A = Action
    events: list[ClickEvent] = []
    events += _run(
        "s1", 0, 10,
        [
            (A.VIDEO_PLAY, "va"), (A.VIDEO_PLAY, "vb"), (A.VIDEO_PLAY, "vc"),
            (A.VIDEO_PLAY, "va"), (A.VIDEO_PAUSE, "va"), (A.VIDEO_SEEK_FORWARD, "vb"),
            (A.PROBLEM_CHECK, "qa"), (A.PROBLEM_CHECK, "qc"),
        ],
    )
    events += _run("s1", 7, 9, [(A.VIDEO_PLAY, "ve"), (A.PROBLEM_CHECK, "qc")])
    events += _run(
        "s2", 1, 14,
        [(A.VIDEO_PLAY, "va")] * 5
        + [(A.VIDEO_PAUSE, "va")] * 5
        + [(A.VIDEO_STOP, "vb")] * 5
        + [(A.VIDEO_SEEK_BACKWARD, "vb")] * 5,
    )
    events += _run(
        "s3", 2, 20,
        [
            (A.PROBLEM_CHECK, "qc"), (A.VIDEO_PLAY, "vf"), (A.VIDEO_PLAY, "vd"),
            (A.VIDEO_STOP, "vd"), (A.VIDEO_SPEED_CHANGE, "vd"),
        ],
    )
    events += _run("s3", 8, 11, [(A.VIDEO_PLAY, "vf")])
    return events


# hand-computed raw values for the 13 paper-named indicators, per (user, week)
NAMED_EXPECTED: dict[tuple[str, int], dict[str, float]] = {
    ("s1", 1): {
        "F02": 3 / 4, "F10": 4 / 6, "F11": 1 / 6, "F12": 0.0, "F13": 0.0,
        "F14": 1 / 6, "F15": 0.0, "F29": 2.0, "F30": 6.0,
        "F36": 1.0, "F37": 1.0, "F38": 3.0, "F39": 0.0,
    },
    ("s1", 2): {
        "F02": 1 / 2, "F10": 1.0, "F11": 0.0, "F12": 0.0, "F13": 0.0,
        "F14": 0.0, "F15": 0.0, "F29": 1.0, "F30": 1.0,
        "F36": 1.0, "F37": 0.0, "F38": 1.0, "F39": 0.0,
    },
    ("s2", 1): {
        "F02": 1 / 4, "F10": 5 / 20, "F11": 5 / 20, "F12": 5 / 20, "F13": 5 / 20,
        "F14": 0.0, "F15": 0.0, "F29": 0.0, "F30": 20.0,
        "F36": 0.0, "F37": 0.0, "F38": 1.0, "F39": 0.0,
    },
    ("s2", 2): {
        "F02": 0.0, "F10": 0.0, "F11": 0.0, "F12": 0.0, "F13": 0.0,
        "F14": 0.0, "F15": 0.0, "F29": 0.0, "F30": 0.0,
        "F36": 0.0, "F37": 0.0, "F38": 0.0, "F39": 0.0,
    },
    ("s3", 1): {
        "F02": 1 / 4, "F10": 2 / 4, "F11": 0.0, "F12": 1 / 4, "F13": 0.0,
        "F14": 0.0, "F15": 1 / 4, "F29": 1.0, "F30": 4.0,
        "F36": 0.0, "F37": 1.0, "F38": 1.0, "F39": 1.0,
    },
    ("s3", 2): {
        "F02": 1 / 2, "F10": 1.0, "F11": 0.0, "F12": 0.0, "F13": 0.0,
        "F14": 0.0, "F15": 0.0, "F29": 0.0, "F30": 1.0,
        "F36": 0.0, "F37": 0.0, "F38": 1.0, "F39": 0.0,
    },
}
