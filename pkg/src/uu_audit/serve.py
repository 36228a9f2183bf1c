"""HTTP API exposing audit results to the triage dashboard.

Groups are recomputed server-side at the requested trust level (what-if
semantics), through the same grouping code the batch audit uses. Instructor
intervention marks persist in an append-only JSONL journal next to the
artifacts; replaying the journal reconstructs the current marks exactly.

The UU-risk flag is a non-paper heuristic, documented as such: a student is
flagged when confident (c >= delta) and their explanation score (dot product
of indicator values with significant positive coefficients from the
characterization fit) exceeds the roster's 90th percentile.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .characterize import DEFAULT_ALPHA
from .eventlog import load_outcomes, load_schedule
from .features import REGISTRY_IDS, read_vectors_csv
from .grouping import assign_group
from .models import import_scores
from .pipeline import artifact

JOURNAL_NAME = "interventions.jsonl"
EXPLANATION_TOP_K = 5
RISK_PERCENTILE = 90.0


class InterventionBody(BaseModel):
    user_id: str
    marked: bool
    note: str = ""
    author: str = Field(default="instructor")


@dataclass
class _Student:
    user_id: str
    y: int
    p: float
    values: np.ndarray


class ArtifactStore:
    """Loads audit artifacts lazily and owns the intervention journal."""

    def __init__(self, artifacts_dir: str | Path):
        self.dir = Path(artifacts_dir)
        self.journal_path = self.dir / JOURNAL_NAME
        self._lock = threading.Lock()
        self._students: dict[str, _Student] | None = None
        self._characterization: dict | None = None
        self._marks: dict[str, dict] = {}
        self._replay_journal()

    # -- artifacts ---------------------------------------------------------

    def students(self) -> dict[str, _Student]:
        if self._students is None:
            scores = artifact(self.dir, "scores")
            schedule_p = artifact(self.dir, "schedule")
            outcomes_p = artifact(self.dir, "outcomes")
            vectors_p = artifact(self.dir, "features_avg")
            if not (scores.exists() and schedule_p.exists() and outcomes_p.exists() and vectors_p.exists()):
                raise HTTPException(status_code=409, detail="audit artifacts not loaded")
            schedule = load_schedule(schedule_p)
            y = {o.user_id: o.y for o in load_outcomes(outcomes_p, schedule.pass_rule)}
            vectors = {v.user_id: v.values for v in read_vectors_csv(vectors_p)}
            students = {}
            for pr in import_scores(scores):
                if pr.user_id not in y or pr.user_id not in vectors:
                    continue
                students[pr.user_id] = _Student(pr.user_id, y[pr.user_id], pr.p, vectors[pr.user_id])
            if not students:
                raise HTTPException(status_code=409, detail="audit artifacts empty")
            self._students = students
        return self._students

    def characterization(self) -> dict | None:
        if self._characterization is None:
            path = artifact(self.dir, "characterization")
            if path.exists():
                self._characterization = json.loads(path.read_text(encoding="utf-8"))
        return self._characterization

    def indicator_coefficients(self) -> list[dict]:
        """Registry-indicator coefficients from the fit, |gamma| descending."""
        chara = self.characterization()
        if chara is None:
            return []
        rows = [c for c in chara["coefficients"] if c["id"] in REGISTRY_IDS]
        return sorted(rows, key=lambda c: (-abs(c["gamma"]), c["id"]))

    def risk_basis(self) -> list[dict]:
        """Significant positive coefficients backing the UU-risk score."""
        return [
            c
            for c in self.indicator_coefficients()
            if c["p"] == c["p"] and c["p"] < DEFAULT_ALPHA and c["gamma"] > 0
        ]

    # -- journal -----------------------------------------------------------

    def _replay_journal(self) -> None:
        if not self.journal_path.exists():
            return
        with open(self.journal_path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    entry = json.loads(line)
                    self._marks[entry["user_id"]] = entry

    def record_mark(self, body: InterventionBody) -> dict:
        entry = {
            "user_id": body.user_id,
            "marked": body.marked,
            "note": body.note,
            "author": body.author,
            "marked_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }
        with self._lock:
            with open(self.journal_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
                fh.flush()
            self._marks[body.user_id] = entry
        return entry

    def marks(self) -> dict[str, dict]:
        return dict(self._marks)


def _roster_payload(store: ArtifactStore, delta: float) -> dict:
    students = store.students()
    explain = store.indicator_coefficients()[:EXPLANATION_TOP_K]
    basis = store.risk_basis()
    gamma = np.array([c["gamma"] for c in basis])
    idx = [REGISTRY_IDS.index(c["id"]) for c in basis]

    scores = {}
    for u, st in students.items():
        scores[u] = float(st.values[idx] @ gamma) if basis else 0.0
    cutoff = float(np.percentile(list(scores.values()), RISK_PERCENTILE)) if scores else 0.0

    rows = []
    counts = {0: 0, 1: 0, 2: 0}
    for u in sorted(students):
        st = students[u]
        pr_y_hat = int(st.p >= 0.5)
        c = abs(st.p - 0.5)
        a = assign_group(st.y, pr_y_hat, c, delta, user_id=u, p=st.p)
        counts[a.group] += 1
        risk = bool(c >= delta and scores[u] > cutoff)
        explanation = [
            {"id": b["id"], "gamma": b["gamma"], "value": float(st.values[REGISTRY_IDS.index(b["id"])])}
            for b in explain
        ]
        rows.append(
            {
                "user_id": u,
                "p": st.p,
                "c": c,
                "y_hat": pr_y_hat,
                "group": a.group,
                "uu_risk": risk,
                "explanation": explanation,
            }
        )
    rows.sort(key=lambda r: (-int(r["uu_risk"]), r["user_id"]))
    return {"delta": delta, "counts": {str(g): n for g, n in counts.items()}, "rows": rows}


def create_app(artifacts_dir: str | Path, static_dir: str | Path | None = None) -> FastAPI:
    store = ArtifactStore(artifacts_dir)
    app = FastAPI(title="uu-audit triage API")
    app.state.store = store

    @app.get("/api/roster")
    def roster(delta: float = Query(default=0.25)):
        if not 0.0 < delta < 0.5:
            raise HTTPException(status_code=400, detail="delta must be in (0, 0.5)")
        return _roster_payload(store, delta)

    @app.get("/api/characterization")
    def characterization():
        chara = store.characterization()
        if chara is None:
            raise HTTPException(status_code=409, detail="characterization not available")
        return chara

    @app.post("/api/interventions")
    def post_intervention(body: InterventionBody):
        students = store.students()
        if body.user_id not in students:
            raise HTTPException(status_code=404, detail=f"unknown student {body.user_id!r}")
        return store.record_mark(body)

    @app.get("/api/interventions")
    def get_interventions():
        return store.marks()

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="dashboard")
    return app


def run_server(
    artifacts_dir: str | Path,
    port: int = 8008,
    host: str = "127.0.0.1",
    static_dir: str | Path | None = None,
) -> None:
    import uvicorn

    uvicorn.run(create_app(artifacts_dir, static_dir), host=host, port=port, log_level="warning")
