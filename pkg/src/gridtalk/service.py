"""HTTP play service: live human-vs-agent sessions.

Sessions live in an in-memory store; finished games can be appended to a
JSONL file that feeds straight into the evaluator. Board views reveal only
the human's private symbols until the game ends. Agent replies are sampled
from its policy with a per-session seed (argmax mode available for demos).
"""
from __future__ import annotations

import json
import random
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Any

from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse

from gridtalk.agents import Agent, make_agent
from gridtalk.core import (
    Action,
    Click,
    History,
    Message,
    Role,
    Scenario,
    action_to_json,
    active_player,
    apply_action,
    is_terminal,
    parse_message,
    utility,
)
from gridtalk.errors import GameError, RuleViolationError
from gridtalk.evaluation import Outcome, Transcript
from gridtalk.planning import FULL_CONFIG, PipConfig
from gridtalk.scenario_gen import generate

EVENT_WAIT_TICK = 0.05


class ServiceError(Exception):
    """Maps onto the wire error body {"error": {"rule", "message"}}."""

    def __init__(self, status: int, rule: str, message: str):
        super().__init__(message)
        self.status = status
        self.rule = rule

    def response(self) -> JSONResponse:
        return JSONResponse(
            status_code=self.status,
            content={"error": {"rule": self.rule, "message": str(self)}},
        )


@dataclass
class Session:
    id: str
    scenario: Scenario
    human_role: Role
    agent: Agent
    agent_name: str
    config: PipConfig
    debug: bool
    argmax: bool
    seed: int
    rng: random.Random
    history: History = ()
    events: list[dict] = field(default_factory=list)
    correct_clicks: int = 0
    wrong_clicks: int = 0
    words_sent: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def agent_role(self) -> Role:
        return self.human_role.other

    @property
    def status(self) -> str:
        if is_terminal(self.history):
            return "finished"
        mover = active_player(len(self.history) + 1, self.scenario.first_player)
        return "awaiting_human" if mover is self.human_role else "awaiting_agent"

    # ------------------------------------------------------- game moves --

    def push_event(self, kind: str, payload: dict) -> None:
        self.events.append({"id": len(self.events) + 1, "type": kind, **payload})

    def record_action(self, player: Role, action: Action) -> None:
        if isinstance(action, Message):
            self.words_sent += len(action.words)
        turn = self.history[-1]
        self.push_event("action", {"t": turn.t, "player": player.value,
                                   "action": action_to_json(action)})
        if is_terminal(self.history):
            click = self.history[-1].action
            correct = (click.row, click.col) == self.scenario.goal_cell
            if correct:
                self.correct_clicks += 1
            else:
                self.wrong_clicks += 1
            self.push_event("outcome", {
                "correct": correct,
                "clicked": [click.row, click.col],
                "utility": utility(self.scenario, self.history,
                                   action_cost=self.config.action_cost,
                                   reward=self.config.reward,
                                   penalty=self.config.penalty),
            })

    def apply(self, player: Role, action: Action) -> None:
        self.history = apply_action(self.scenario, self.history, action, player)
        self.record_action(player, action)

    def agent_reply(self) -> Action | None:
        """Let the agent move while it is its turn (at most once, since turns
        alternate). Returns the action taken, if any."""
        if self.status != "awaiting_agent":
            return None
        dist = self.agent.distribution(self.scenario, self.history, self.agent_role)
        action = dist.argmax() if self.argmax else dist.sample(self.rng)
        self.apply(self.agent_role, action)
        return action

    # ------------------------------------------------------------ views --

    def board_json(self, reveal: bool) -> list[dict]:
        cells = []
        for o in self.scenario.objects:
            cell: dict[str, Any] = {"row": o.row, "col": o.col,
                                    "color": o.color, "shape": o.shape}
            if reveal or self.human_role is Role.LETTERS:
                cell["letter"] = o.letter
            if reveal or self.human_role is Role.DIGITS:
                cell["digit"] = o.digit
            cells.append(cell)
        return cells

    def view(self) -> dict:
        finished = self.status == "finished"
        data: dict[str, Any] = {
            "id": self.id,
            "status": self.status,
            "human_role": self.human_role.value,
            "agent": self.agent_name,
            "config": self.config.to_json(),
            "seed": self.seed,
            "debug": self.debug,
            "rows": self.scenario.rows,
            "cols": self.scenario.cols,
            "goal": {"letter": self.scenario.goal_letter,
                     "digit": self.scenario.goal_digit},
            "first_player": self.scenario.first_player.value,
            "board": self.board_json(reveal=finished),
            "history": [
                {"t": t.t, "player": t.player.value, **action_to_json(t.action)}
                for t in self.history
            ],
            "scoreboard": {
                "correct_clicks": self.correct_clicks,
                "wrong_clicks": self.wrong_clicks,
                "words_sent": self.words_sent,
            },
        }
        if finished:
            click = self.history[-1].action
            correct = (click.row, click.col) == self.scenario.goal_cell
            data["outcome"] = {"correct": correct,
                               "clicked": [click.row, click.col]}
            data["utility"] = utility(self.scenario, self.history,
                                      action_cost=self.config.action_cost,
                                      reward=self.config.reward,
                                      penalty=self.config.penalty)
        return data

    def transcript(self) -> Transcript:
        outcome = None
        if is_terminal(self.history):
            click = self.history[-1].action
            outcome = Outcome(
                correct=(click.row, click.col) == self.scenario.goal_cell,
                clicked=(click.row, click.col),
            )
        return Transcript(scenario=self.scenario, actions=self.history,
                          outcome=outcome, abandoned=not is_terminal(self.history))


class SessionStore:
    def __init__(self) -> None:
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def add(self, session: Session) -> None:
        with self._lock:
            self._sessions[session.id] = session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ServiceError(404, "not_found", f"no session {session_id!r}")
        return session


# --------------------------------------------------------------- parsing --

def _parse_role(value: Any, default: Role = Role.LETTERS) -> Role:
    if value is None:
        return default
    try:
        return Role(value)
    except ValueError:
        raise ServiceError(400, "invalid_request",
                           f"human_role must be 'letters' or 'digits', got {value!r}") from None


def _parse_config(data: Any) -> PipConfig:
    if data is None:
        return FULL_CONFIG
    if not isinstance(data, dict):
        raise ServiceError(400, "invalid_config", "config: expected an object")
    try:
        return PipConfig.from_json(data)
    except (TypeError, ValueError) as exc:
        raise ServiceError(400, "invalid_config", f"config: {exc}") from None


def _parse_scenario(body: dict) -> Scenario:
    if body.get("scenario") is not None:
        try:
            return Scenario.from_json(body["scenario"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ServiceError(400, "invalid_request", f"scenario: {exc}") from None
    seed = body.get("seed")
    if seed is None:
        raise ServiceError(400, "invalid_request",
                           "request needs either a scenario object or a seed")
    return generate(int(seed))


def _parse_action(body: dict) -> Action:
    kind = body.get("type")
    if kind == "click":
        try:
            return Click(int(body["row"]), int(body["col"]))
        except (KeyError, TypeError, ValueError):
            raise ServiceError(400, "invalid_request",
                               "clicks need integer row and col") from None
    if kind == "message":
        raw = body.get("raw")
        words = body.get("words")
        if raw is None and words is None:
            raise ServiceError(400, "invalid_request", "messages need words or raw text")
        try:
            return parse_message(raw if raw is not None else " ".join(words))
        except RuleViolationError as exc:
            raise ServiceError(400, exc.rule, str(exc)) from None
    raise ServiceError(400, "invalid_request", f"unknown action type {body.get('type')!r}")


# ------------------------------------------------------------------ app --

def create_app(export_path: str | None = None) -> FastAPI:
    """Build the service; `export_path` appends finished games as JSONL."""
    app = FastAPI(title="gridtalk play service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore()
    export_lock = threading.Lock()

    @app.exception_handler(ServiceError)
    async def service_error_handler(_: Request, exc: ServiceError):
        return exc.response()

    def export(session: Session) -> None:
        if export_path is None or session.status != "finished":
            return
        with export_lock, open(export_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(session.transcript().to_json()) + "\n")

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        try:
            body = await request.json()
        except Exception:
            raise ServiceError(400, "invalid_request", "body must be JSON") from None
        if not isinstance(body, dict):
            raise ServiceError(400, "invalid_request", "body must be a JSON object")
        scenario = _parse_scenario(body)
        human_role = _parse_role(body.get("human_role"))
        config = _parse_config(body.get("config"))
        agent_name = body.get("agent", "pip")
        try:
            agent = make_agent(agent_name, config)
        except ValueError as exc:
            raise ServiceError(400, "unknown_policy", str(exc)) from None
        seed = int(body.get("agent_seed", body.get("seed", 0) or 0))
        session = Session(
            id=uuid.uuid4().hex,
            scenario=scenario,
            human_role=human_role,
            agent=agent,
            agent_name=agent_name,
            config=config,
            debug=bool(body.get("debug", False)),
            argmax=body.get("mode", "sample") == "argmax",
            seed=seed,
            rng=random.Random(seed),
        )
        store.add(session)
        with session.lock:
            agent_action = session.agent_reply()  # agent may open the game
            export(session)
            view = session.view()
        return {"session": view,
                "agent_action": action_to_json(agent_action) if agent_action else None}

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        session = store.get(session_id)
        with session.lock:
            return {"session": session.view()}

    @app.post("/sessions/{session_id}/actions")
    async def post_action(session_id: str, request: Request):
        session = store.get(session_id)
        try:
            body = await request.json()
        except Exception:
            raise ServiceError(400, "invalid_request", "body must be JSON") from None
        action = _parse_action(body if isinstance(body, dict) else {})
        with session.lock:
            status = session.status
            if status == "finished":
                raise ServiceError(409, "game_over", "the game is already over")
            if status != "awaiting_human":
                raise ServiceError(409, "not_your_turn", "waiting for the agent to move")
            try:
                session.apply(session.human_role, action)
            except RuleViolationError as exc:
                raise ServiceError(400, exc.rule, str(exc)) from None
            except GameError as exc:
                raise ServiceError(400, "illegal_action", str(exc)) from None
            agent_action = session.agent_reply()
            export(session)
            view = session.view()
        return {"session": view,
                "agent_action": action_to_json(agent_action) if agent_action else None}

    @app.get("/sessions/{session_id}/events")
    async def stream_events(
        session_id: str,
        cursor: int = Query(default=0, ge=0),
        wait: float = Query(default=0.0, ge=0.0, le=30.0),
    ):
        session = store.get(session_id)

        def sse() -> Any:
            sent = cursor
            deadline = time.monotonic() + wait
            while True:
                with session.lock:
                    fresh = [e for e in session.events if e["id"] > sent]
                    finished = session.status == "finished"
                for event in fresh:
                    sent = event["id"]
                    payload = {k: v for k, v in event.items() if k not in ("id", "type")}
                    yield (f"id: {event['id']}\n"
                           f"event: {event['type']}\n"
                           f"data: {json.dumps(payload)}\n\n")
                if finished or time.monotonic() >= deadline:
                    return
                time.sleep(EVENT_WAIT_TICK)

        return StreamingResponse(sse(), media_type="text/event-stream")

    @app.get("/sessions/{session_id}/beliefs")
    async def debug_beliefs(session_id: str):
        session = store.get(session_id)
        if not session.debug:
            raise ServiceError(403, "debug_disabled",
                               "session was created without debug=true")
        with session.lock:
            matrix = session.agent.partner_marginals(
                session.scenario, session.history, session.agent_role)
            return {
                "viewer": session.agent_role.value,
                "about": session.human_role.value,
                "marginals": [[float(x) for x in row] for row in matrix],
            }

    return app
