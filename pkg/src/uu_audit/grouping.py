"""Known-known / known-unknown / unknown-unknown partitioning at a trust level.

Group rules for a prediction with confidence c at trust level delta:
  g = 0 (known known)      c >= delta and the predicted label is correct
  g = 1 (known unknown)    c < delta, whatever the predicted label
  g = 2 (unknown unknown)  c >= delta and the predicted label is wrong
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

KNOWN_KNOWN = 0
KNOWN_UNKNOWN = 1
UNKNOWN_UNKNOWN = 2
GROUP_NAMES = {KNOWN_KNOWN: "known_known", KNOWN_UNKNOWN: "known_unknown", UNKNOWN_UNKNOWN: "unknown_unknown"}

FALSE_FAIL = "false_fail"  # passed (y=0) but predicted failing (y_hat=1)
FALSE_PASS = "false_pass"  # failed (y=1) but predicted passing (y_hat=0)

DEFAULT_DELTA = 0.25

ASSIGNMENTS_HEADER = ("user_id", "split", "y", "p", "c", "group", "direction")


class GroupingError(ValueError):
    pass


def check_delta(delta: float) -> float:
    if not 0.0 < delta < 0.5:
        raise GroupingError(f"trust level {delta} outside (0, 0.5)")
    return float(delta)


@dataclass(frozen=True)
class GroupAssignment:
    user_id: str
    y: int
    y_hat: int
    c: float
    delta: float
    group: int
    direction: str | None  # set for wrong predictions only
    p: float | None = None


def assign_group(
    y: int,
    y_hat: int,
    c: float,
    delta: float,
    user_id: str = "",
    p: float | None = None,
) -> GroupAssignment:
    """Exactly one of the three group predicates holds; boundary c == delta
    counts as confident."""
    check_delta(delta)
    if not 0.0 <= c <= 0.5:
        raise GroupingError(f"confidence {c} outside [0, 0.5]")
    y = int(y)
    y_hat = int(y_hat)
    if y not in (0, 1) or y_hat not in (0, 1):
        raise GroupingError("labels must be binary")
    if c < delta:
        group = KNOWN_UNKNOWN
    elif y_hat == y:
        group = KNOWN_KNOWN
    else:
        group = UNKNOWN_UNKNOWN
    direction = None
    if y_hat != y:
        direction = FALSE_FAIL if y == 0 else FALSE_PASS
    return GroupAssignment(
        user_id=user_id, y=y, y_hat=y_hat, c=float(c), delta=float(delta),
        group=group, direction=direction, p=p,
    )


@dataclass
class SplitPrevalence:
    n: int
    counts: dict[int, int]
    fractions: dict[int, float]
    direction_fractions: dict[int, dict[str, float]]  # for groups 1 and 2

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "groups": {
                GROUP_NAMES[g]: {
                    "count": self.counts[g],
                    "fraction": self.fractions[g],
                    **(
                        {"by_direction": self.direction_fractions[g]}
                        if g in self.direction_fractions
                        else {}
                    ),
                }
                for g in sorted(GROUP_NAMES)
            },
        }


@dataclass
class PrevalenceSummary:
    splits: dict[str, SplitPrevalence]

    def to_dict(self) -> dict:
        return {split: sp.to_dict() for split, sp in sorted(self.splits.items())}


def prevalence(
    assignments: Sequence[GroupAssignment], split_labels: Sequence[str] | None = None
) -> PrevalenceSummary:
    """Group counts and fractions per split; wrong-prediction groups are
    additionally split by error direction. Fractions per split sum to 1."""
    if not assignments:
        raise GroupingError("no assignments")
    if split_labels is None:
        split_labels = ["all"] * len(assignments)
    if len(split_labels) != len(assignments):
        raise GroupingError("split labels and assignments differ in length")
    out: dict[str, SplitPrevalence] = {}
    by_split: dict[str, list[GroupAssignment]] = {}
    for a, s in zip(assignments, split_labels):
        by_split.setdefault(s, []).append(a)
    for split, rows in by_split.items():
        n = len(rows)
        counts = {g: 0 for g in GROUP_NAMES}
        dirs = {
            KNOWN_UNKNOWN: {FALSE_FAIL: 0, FALSE_PASS: 0},
            UNKNOWN_UNKNOWN: {FALSE_FAIL: 0, FALSE_PASS: 0},
        }
        for a in rows:
            counts[a.group] += 1
            if a.group in dirs and a.direction is not None:
                dirs[a.group][a.direction] += 1
        out[split] = SplitPrevalence(
            n=n,
            counts=counts,
            fractions={g: counts[g] / n for g in counts},
            direction_fractions={
                g: {d: dirs[g][d] / n for d in dirs[g]} for g in dirs
            },
        )
    return PrevalenceSummary(splits=out)


def write_assignments(
    assignments: Sequence[GroupAssignment],
    split_labels: Sequence[str],
    dest: str | Path,
) -> None:
    with open(dest, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ASSIGNMENTS_HEADER)
        rows = sorted(
            zip(assignments, split_labels), key=lambda r: (r[1], r[0].user_id)
        )
        for a, split in rows:
            writer.writerow(
                [
                    a.user_id,
                    split,
                    a.y,
                    "" if a.p is None else repr(a.p),
                    repr(a.c),
                    a.group,
                    a.direction or "",
                ]
            )


def read_assignments(source: str | Path) -> tuple[list[GroupAssignment], list[str]]:
    with open(source, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != ASSIGNMENTS_HEADER:
            raise GroupingError(f"unexpected assignments header in {source}")
        assignments: list[GroupAssignment] = []
        splits: list[str] = []
        for row in reader:
            user_id, split, y, p_raw, c, group, direction = row
            p = float(p_raw) if p_raw else None
            y_hat = (1 - int(y)) if direction else int(y)
            assignments.append(
                GroupAssignment(
                    user_id=user_id,
                    y=int(y),
                    y_hat=y_hat,
                    c=float(c),
                    delta=float("nan"),
                    group=int(group),
                    direction=direction or None,
                    p=p,
                )
            )
            splits.append(split)
    return assignments, splits
