"""Session-oriented HTTP API for interactive plan building.

Each session holds one parsed regulation, a horizon, and the user's
assumptions.  Consequences (forced/possible assignments per semester) are
recomputed synchronously on every mutation, so every response reflects the
stored assumptions.  Sessions live in memory; mutations on one session are
serialized by a per-session lock.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .dsl import ParseError, parse_instance
from .model import (
    Assumption, ConsequenceReport, ExamSpec, Regulation, StudyPlan,
    check_wellformed,
)
from .solver import SolveRequest, SolveSession, consequences


class CreateSessionRequest(BaseModel):
    instance: str
    horizon: int


class AssumptionRequest(BaseModel):
    module: str
    semester: int


@dataclass
class Session:
    id: str
    regulation: Regulation
    exam: ExamSpec | None
    horizon: int
    assumptions: list[Assumption] = field(default_factory=list)
    report: ConsequenceReport | None = None
    browsing: bool = False
    current_plan: StudyPlan | None = None
    cursor: SolveSession | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    def request(self) -> SolveRequest:
        return SolveRequest(self.regulation, self.horizon, exam=self.exam,
                            assumptions=tuple(self.assumptions))

    def recompute(self) -> None:
        self.report = consequences(self.request())
        self.cursor = None

    def stop_browsing(self) -> None:
        self.browsing = False
        self.current_plan = None

    def state(self) -> dict:
        rep = self.report
        assumed = {(a.module, a.semester) for a in self.assumptions
                   if a.polarity == "assigned"}
        semesters = []
        for i in range(1, self.horizon + 1):
            forced = sorted(rep.forced[i - 1])
            possible = sorted(rep.possible[i - 1])
            unknown = sorted(rep.unknown[i - 1]) if rep.unknown else []
            assigned = [
                {"module": m,
                 "credits": self.regulation.credits.get(m),
                 "source": "user" if (m, i) in assumed else "inferred"}
                for m in forced
            ]
            semesters.append({
                "index": i,
                "forced": forced,
                "possible": possible,
                "options": [m for m in possible if m not in rep.forced[i - 1]],
                "assigned": assigned,
                "unknown": unknown,
            })
        return {
            "id": self.id,
            "horizon": self.horizon,
            "satisfiable": rep.satisfiable,
            "complete": rep.complete,
            "browsing": self.browsing,
            "current_plan": ([sorted(sem) for sem in self.current_plan.semesters]
                             if self.current_plan is not None else None),
            "assumptions": [{"module": a.module, "semester": a.semester,
                             "polarity": a.polarity}
                            for a in self.assumptions],
            "modules": [{"name": m,
                         "credits": self.regulation.credits.get(m),
                         "turnus": (self.regulation.turnus[m].value
                                    if m in self.regulation.turnus else None)}
                        for m in sorted(self.regulation.modules)],
            "semesters": semesters,
        }


def create_app(snapshot_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="regula", version="0.1.0")
    # The browser front end is served as static files from a different
    # origin, so the API answers preflight requests permissively.
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    sessions: dict[str, Session] = {}

    def snapshot(session: Session) -> None:
        if snapshot_dir is None:
            return
        path = Path(snapshot_dir) / f"{session.id}.json"
        path.write_text(json.dumps(session.state(), indent=2) + "\n")

    def lookup(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(404, detail=f"unknown session {session_id!r}")
        return session

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionRequest) -> dict:
        if body.horizon < 1:
            raise HTTPException(400, detail="horizon must be at least 1")
        try:
            reg, exam = parse_instance(body.instance)
        except ParseError as exc:
            raise HTTPException(400, detail={
                "error": "parse", "message": exc.msg,
                "line": exc.line, "col": exc.col,
            }) from None
        report = check_wellformed(reg, exam)
        if not report.admissible:
            raise HTTPException(400, detail={
                "error": "wellformedness",
                "violations": [{"where": v.constraint, "reason": v.reason}
                               for v in report.violations],
            })
        session = Session(str(uuid.uuid4()), reg, exam, body.horizon)
        session.recompute()
        sessions[session.id] = session
        snapshot(session)
        return session.state()

    @app.get("/sessions/{session_id}")
    def get_state(session_id: str) -> dict:
        session = lookup(session_id)
        with session.lock:
            return session.state()

    @app.post("/sessions/{session_id}/assumptions")
    def add_assumption(session_id: str, body: AssumptionRequest) -> dict:
        session = lookup(session_id)
        with session.lock:
            if not 1 <= body.semester <= session.horizon:
                raise HTTPException(
                    422, detail=f"semester {body.semester} outside 1..{session.horizon}")
            if body.module not in session.regulation.modules:
                raise HTTPException(422, detail=f"unknown module {body.module!r}")
            if body.module not in session.report.possible[body.semester - 1]:
                raise HTTPException(
                    422,
                    detail=f"{body.module} is not possible in semester {body.semester}")
            extra = Assumption(body.module, body.semester)
            if extra in session.assumptions:
                raise HTTPException(422, detail="assumption already present")
            candidate = consequences(SolveRequest(
                session.regulation, session.horizon, exam=session.exam,
                assumptions=tuple(session.assumptions) + (extra,)))
            if not candidate.satisfiable:
                raise HTTPException(
                    409,
                    detail=f"assuming {body.module}@{body.semester} leaves no "
                           f"admissible plan")
            session.assumptions.append(extra)
            session.report = candidate
            session.cursor = None
            session.stop_browsing()
            snapshot(session)
            return session.state()

    @app.delete("/sessions/{session_id}/assumptions/{module}/{semester}")
    def remove_assumption(session_id: str, module: str, semester: int) -> dict:
        session = lookup(session_id)
        with session.lock:
            target = Assumption(module, semester)
            if target not in session.assumptions:
                raise HTTPException(
                    422,
                    detail=f"{module}@{semester} is not a user assumption")
            session.assumptions.remove(target)
            session.recompute()
            session.stop_browsing()
            snapshot(session)
            return session.state()

    @app.post("/sessions/{session_id}/next")
    def next_plan(session_id: str) -> dict:
        session = lookup(session_id)
        with session.lock:
            if not session.report.satisfiable:
                raise HTTPException(409, detail="no admissible plan under the "
                                                "current assumptions")
            if session.cursor is None:
                session.cursor = SolveSession(session.request())
            plan = session.cursor.next()
            if plan is None:  # wrap around after exhausting the enumeration
                session.cursor.reset()
                plan = session.cursor.next()
            session.browsing = True
            session.current_plan = plan
            snapshot(session)
            return session.state()

    @app.post("/sessions/{session_id}/reset")
    def reset(session_id: str) -> dict:
        session = lookup(session_id)
        with session.lock:
            session.assumptions.clear()
            session.recompute()
            session.stop_browsing()
            snapshot(session)
            return session.state()

    return app


app = create_app()
