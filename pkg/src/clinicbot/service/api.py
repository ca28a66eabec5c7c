"""HTTP + server-push API hosting sessions for the operator console.

Endpoints::

    POST /sessions                     create from domain/problem/config
    GET  /sessions/{id}                summary
    GET  /sessions/{id}/events         server-sent event stream, log order
    GET  /sessions/{id}/prompts        pending operator questions
    POST /sessions/{id}/prompts/{pid}  answer a prompt
    POST /sessions/{id}/stop           stop the robot
    GET  /sessions/{id}/plan           branched-plan serialization

The server owns the turn loop: a turn advances only on an answered prompt,
a (simulated) observation, or a timeout default.  Prompt answers are
accepted at most once; late or repeated answers get 409.
"""

from __future__ import annotations

import asyncio
import itertools
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from clinicbot.executive.config import SessionConfig, parse_fluent
from clinicbot.executive.errors import (
    BadConfig,
    ExecutiveError,
    NoApplicableRule,
    SessionStopped,
    WrongPhase,
)
from clinicbot.executive.events import event_line
from clinicbot.executive.session import (
    ActionRequest,
    ObservationBundle,
    Phase,
    Reading,
    Session,
)
from clinicbot.pddl import ground, parse_domain, parse_problem
from clinicbot.pddl.model import ActionGroup, PddlError
from clinicbot.planning import PlanningError, Unsolvable
from clinicbot.service.persist import SessionInputs, SessionStore

ANXIETY_OPTIONS = ("low", "medium", "high")


@dataclass
class Prompt:
    id: str
    turn: int
    kind: str  # "initial-anxiety" | "anxiety" | "confirm-step" | "outcome"
    question: str
    schema: dict
    fluents: list[str]
    answered: bool = False
    expired: bool = False

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "turn": self.turn,
            "kind": self.kind,
            "question": self.question,
            "schema": self.schema,
            "fluents": self.fluents,
        }


@dataclass
class ApiSession:
    session: Session
    prompts: dict[str, Prompt] = field(default_factory=dict)
    subscribers: list[asyncio.Queue] = field(default_factory=list)
    prompt_seq: itertools.count = field(default_factory=itertools.count)
    timer: asyncio.Task | None = None
    awaiting_initial: bool = False

    def pending_prompts(self) -> list[Prompt]:
        return [p for p in self.prompts.values() if not p.answered and not p.expired]

    def expire_prompts(self) -> None:
        for prompt in self.prompts.values():
            if prompt.answered or prompt.expired:
                continue
            if prompt.kind == "initial-anxiety":
                if self.session.turn > 0 or self.session.phase is not Phase.AWAITING_ACTION:
                    prompt.expired = True
            elif prompt.turn != self.session.turn or self.session.phase is not Phase.AWAITING_OBSERVATION:
                prompt.expired = True


def _json_error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(store: SessionStore | None = None, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="clinicbot")
    sessions: dict[str, ApiSession] = {}
    app.state.sessions = sessions
    app.state.store = store

    def fanout(api: ApiSession, event: dict) -> None:
        line = event_line(event)
        for queue in list(api.subscribers):
            queue.put_nowait(line)
        if event["kind"] in ("stop", "done"):
            for queue in list(api.subscribers):
                queue.put_nowait(None)  # close streams

    # -- turn pump --------------------------------------------------------

    def make_prompts(api: ApiSession, request: ActionRequest) -> None:
        session = api.session
        group = request.group
        if group == ActionGroup.EXPLICIT_QUERY.value:
            anxiety_fluents = _anxiety_fluents(session, request)
            if anxiety_fluents:
                _add_prompt(
                    api,
                    kind="anxiety",
                    question=f"Patient anxiety during '{request.action}'?",
                    schema={"type": "choice", "options": list(ANXIETY_OPTIONS)},
                    fluents=anxiety_fluents,
                )
            else:
                # generic explicit query: pick the matching outcome
                _add_prompt(
                    api,
                    kind="outcome",
                    question=f"Which outcome did '{request.action}' produce?",
                    schema={
                        "type": "choice",
                        "options": [str(k) for k in range(request.outcome_count)],
                    },
                    fluents=[],
                )
        elif group == ActionGroup.PROCEDURE_UPDATE.value:
            world = [f for f, _ in request.expected[0]["world"]]
            if world:
                _add_prompt(
                    api,
                    kind="confirm-step",
                    question=f"Confirm clinical step '{request.action}' is complete?",
                    schema={"type": "boolean"},
                    fluents=world,
                )

    def _add_prompt(api: ApiSession, kind: str, question: str, schema: dict, fluents: list[str]) -> None:
        pid = f"p{next(api.prompt_seq)}"
        api.prompts[pid] = Prompt(
            id=pid,
            turn=api.session.turn,
            kind=kind,
            question=question,
            schema=schema,
            fluents=fluents,
        )

    def _anxiety_fluents(session: Session, request: ActionRequest) -> list[str]:
        pattern = None
        for output in session.config.affect.outputs:
            if output.value == "anxiety-ok":
                pattern = parse_fluent(output.fluent)
        if pattern is None:
            return []
        out = []
        for outcome in request.expected:
            for fluent, _ in outcome["world"]:
                atom = parse_fluent(fluent)
                if atom.pred == pattern.pred and fluent not in out:
                    out.append(fluent)
        return out

    def arm_timer(api: ApiSession, deadline: float) -> None:
        session = api.session

        async def fire():
            delay = max(0.0, deadline - session.clock())
            await asyncio.sleep(delay + 0.005)
            bundle = session.handle_timeout()
            if bundle is not None:
                pump(api)

        api.timer = asyncio.get_running_loop().create_task(fire())

    def pump(api: ApiSession) -> None:
        """Advance the loop as far as it can go without operator input."""
        session = api.session
        api.expire_prompts()
        while True:
            if session.phase is Phase.RECONCILING:
                try:
                    session.reconcile()
                except NoApplicableRule:
                    return
                continue
            if session.phase is not Phase.AWAITING_ACTION:
                return
            if api.awaiting_initial:
                return
            try:
                request = session.next_action()
            except (SessionStopped, PlanningError):
                return
            if request is None:
                return
            make_prompts(api, request)
            arm_timer(api, request.deadline)
            return

    # -- endpoints ----------------------------------------------------------

    @app.exception_handler(Exception)
    async def on_error(request: Request, exc: Exception):
        if isinstance(exc, (PddlError, BadConfig, ValueError)):
            return _json_error(400, str(exc))
        if isinstance(exc, Unsolvable):
            return _json_error(400, f"unsolvable: {exc}")
        if isinstance(exc, (WrongPhase, SessionStopped)):
            return _json_error(409, str(exc))
        if isinstance(exc, (ExecutiveError, PlanningError)):
            return _json_error(400, str(exc))
        raise exc

    @app.post("/sessions")
    async def create_session(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _json_error(400, "body must be JSON")
        for key in ("domain", "problem"):
            if key not in body or not isinstance(body[key], str):
                return _json_error(400, f"missing PDDL text field {key!r}")
        config_doc = body.get("config", {})
        if isinstance(config_doc, str):
            import json as _json

            config_doc = _json.loads(config_doc)
        domain = parse_domain(body["domain"])
        problem = parse_problem(body["problem"])
        task = ground(domain, problem)
        config = SessionConfig.from_dict(config_doc)
        session_id = body.get("session_id") or uuid.uuid4().hex[:12]
        session = Session(task, config, session_id=session_id)
        api = ApiSession(session=session)
        session.log.subscribe(lambda event: fanout(api, event))
        if store is not None:
            store.create(
                SessionInputs(
                    session_id=session_id,
                    domain_text=body["domain"],
                    problem_text=body["problem"],
                    config=config_doc,
                )
            )
            store.attach(session)
        session.start()
        sessions[session_id] = api
        if config.initial_prompts:
            initial = [
                f
                for f, _, channel in session.initial_world_fluents()
                if channel == "operator" and parse_fluent(f).pred in _anxiety_preds(session)
            ]
            if initial:
                api.awaiting_initial = True
                _add_prompt(
                    api,
                    kind="initial-anxiety",
                    question="Initial patient anxiety?",
                    schema={"type": "choice", "options": list(ANXIETY_OPTIONS)},
                    fluents=initial,
                )
                arm_initial_timer(api)
        pump(api)
        return {
            "id": session_id,
            "solution_class": session.policy.solution_class.value if session.policy else None,
            "summary": session.summary(),
        }

    def _anxiety_preds(session: Session) -> set[str]:
        return {
            parse_fluent(o.fluent).pred
            for o in session.config.affect.outputs
            if o.value == "anxiety-ok"
        }

    def arm_initial_timer(api: ApiSession) -> None:
        session = api.session
        window = session.config.timeouts[ActionGroup.EXPLICIT_QUERY.value].seconds

        async def fire():
            await asyncio.sleep(window)
            if api.awaiting_initial:
                api.awaiting_initial = False
                pump(api)

        api.timer = asyncio.get_running_loop().create_task(fire())

    def _get(session_id: str) -> ApiSession | None:
        api = sessions.get(session_id)
        if api is None and store is not None:
            try:
                result = store.load(session_id)
            except (KeyError, ValueError):
                return None
            session = result.session
            _resume_clock(session)
            api = ApiSession(session=session)
            session.log.subscribe(lambda event: fanout(api, event))
            store.attach(session)
            sessions[session_id] = api
            pump(api)
        return api

    def _resume_clock(session: Session) -> None:
        """Continue the monotonic timeline from the last replayed event."""
        import time as _time

        last = session.log.events[-1]["ts"] if session.log.events else 0.0
        t0 = _time.monotonic()
        session.set_clock(lambda: last + (_time.monotonic() - t0))

    @app.get("/sessions")
    async def list_sessions():
        return {
            "sessions": [api.session.summary() for api in sessions.values()]
        }

    @app.get("/sessions/{session_id}")
    async def summary(session_id: str):
        api = _get(session_id)
        if api is None:
            return _json_error(404, "unknown session")
        return api.session.summary()

    @app.get("/sessions/{session_id}/events")
    async def events(session_id: str):
        api = _get(session_id)
        if api is None:
            return _json_error(404, "unknown session")
        queue: asyncio.Queue = asyncio.Queue()
        history = [event_line(e) for e in api.session.log.events]
        terminal = api.session.phase in (Phase.STOPPED, Phase.DONE)
        api.subscribers.append(queue)

        async def stream():
            try:
                for line in history:
                    yield f"data: {line}\n\n"
                if terminal:
                    return
                while True:
                    line = await queue.get()
                    if line is None:
                        return
                    yield f"data: {line}\n\n"
            finally:
                if queue in api.subscribers:
                    api.subscribers.remove(queue)

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.get("/sessions/{session_id}/prompts")
    async def prompts(session_id: str):
        api = _get(session_id)
        if api is None:
            return _json_error(404, "unknown session")
        api.expire_prompts()
        return {"prompts": [p.to_dict() for p in api.pending_prompts()]}

    @app.post("/sessions/{session_id}/prompts/{prompt_id}")
    async def answer_prompt(session_id: str, prompt_id: str, request: Request):
        api = _get(session_id)
        if api is None:
            return _json_error(404, "unknown session")
        prompt = api.prompts.get(prompt_id)
        if prompt is None:
            return _json_error(404, "unknown prompt")
        try:
            body = await request.json()
        except Exception:
            return _json_error(400, "body must be JSON")
        if "answer" not in body:
            return _json_error(400, "missing 'answer'")
        answer = body["answer"]
        api.expire_prompts()
        if prompt.answered:
            return _json_error(409, "prompt already answered")
        if prompt.expired:
            return _json_error(409, "prompt expired: the turn has moved on")

        session = api.session
        try:
            if prompt.kind in ("anxiety", "initial-anxiety"):
                if answer not in ANXIETY_OPTIONS:
                    return _json_error(400, f"answer must be one of {ANXIETY_OPTIONS}")
                ok = answer != "high"
                readings = tuple(
                    Reading(f, ok, "operator") for f in prompt.fluents
                )
                bundle = ObservationBundle(source="operator", readings=readings)
                if prompt.kind == "initial-anxiety":
                    session.observe_initial(bundle)
                    api.awaiting_initial = False
                else:
                    session.apply_outcome(bundle)
                session.note_anxiety(answer)
            elif prompt.kind == "confirm-step":
                if not isinstance(answer, bool):
                    return _json_error(400, "answer must be true or false")
                pending = session.task.actions[
                    session.task.action_index(_pending_action(api, prompt))
                ]
                post = pending.apply(session.state, 0)
                readings = []
                for fluent in prompt.fluents:
                    idx = session.task.fluent_index(parse_fluent(fluent))
                    value = bool(post >> idx & 1) if answer else bool(session.state >> idx & 1)
                    readings.append(Reading(fluent, value, "operator"))
                session.apply_outcome(
                    ObservationBundle(source="operator", readings=tuple(readings))
                )
            elif prompt.kind == "outcome":
                try:
                    k = int(answer)
                except (TypeError, ValueError):
                    return _json_error(400, "answer must be an outcome index")
                pending = session.task.actions[
                    session.task.action_index(_pending_action(api, prompt))
                ]
                if not 0 <= k < len(pending.outcomes):
                    return _json_error(400, "outcome index out of range")
                post = pending.apply(session.state, k)
                touched = pending.touched_mask() & session.world_mask
                readings = []
                for i in range(len(session.task.fluents)):
                    if touched >> i & 1:
                        readings.append(
                            Reading(
                                session.task.fluent_names[i],
                                bool(post >> i & 1),
                                session.channels[i].value,
                            )
                        )
                session.apply_outcome(
                    ObservationBundle(source="operator", readings=tuple(readings))
                )
            else:
                return _json_error(400, f"unanswerable prompt kind {prompt.kind!r}")
        except WrongPhase:
            prompt.expired = True
            return _json_error(409, "wrong phase: the turn has moved on")
        prompt.answered = True
        if api.timer is not None:
            api.timer.cancel()
        pump(api)
        return {"accepted": True, "prompt": prompt.to_dict(), "summary": session.summary()}

    def _pending_action(api: ApiSession, prompt: Prompt) -> str:
        for event in reversed(api.session.log.events):
            if event["kind"] == "action-request" and event["turn"] == prompt.turn:
                return event["action"]
        raise WrongPhase("no action pending for this prompt")

    @app.post("/sessions/{session_id}/stop")
    async def stop(session_id: str):
        api = _get(session_id)
        if api is None:
            return _json_error(404, "unknown session")
        if api.timer is not None:
            api.timer.cancel()
        phase = api.session.stop()
        api.expire_prompts()
        return {"phase": phase.value}

    @app.get("/sessions/{session_id}/plan")
    async def plan(session_id: str):
        api = _get(session_id)
        if api is None:
            return _json_error(404, "unknown session")
        return api.session.plan_view()

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="console")

    return app
