"""Append-only session persistence.

Layout under the store directory::

    <id>/inputs.json   domain text, problem text, config, creation record
    <id>/log.jsonl     one event per line, flushed on every append

Loading replays the log against freshly rebuilt inputs; a torn final line
(from a crash mid-write) is tolerated and dropped with a warning.
"""

from __future__ import annotations

import json
import logging
import os
import re
from dataclasses import dataclass
from pathlib import Path

from clinicbot.executive.config import SessionConfig
from clinicbot.executive.events import event_line
from clinicbot.executive.session import Session
from clinicbot.pddl import ground, parse_domain, parse_problem
from clinicbot.service.replay import ReplayResult, replay_events

log = logging.getLogger(__name__)

_ID_RE = re.compile(r"^[a-zA-Z0-9_-]+$")


class CorruptLog(Exception):
    pass


@dataclass
class SessionInputs:
    session_id: str
    domain_text: str
    problem_text: str
    config: dict

    def build(self) -> tuple:
        domain = parse_domain(self.domain_text)
        problem = parse_problem(self.problem_text)
        task = ground(domain, problem)
        return task, SessionConfig.from_dict(self.config)


class SessionStore:
    def __init__(self, base_dir: str | Path):
        self.base = Path(base_dir)
        self.base.mkdir(parents=True, exist_ok=True)
        self._files: dict[str, object] = {}

    def _dir(self, session_id: str) -> Path:
        if not _ID_RE.match(session_id):
            raise ValueError(f"bad session id {session_id!r}")
        return self.base / session_id

    def create(self, inputs: SessionInputs) -> None:
        d = self._dir(inputs.session_id)
        d.mkdir(parents=True, exist_ok=True)
        (d / "inputs.json").write_text(
            json.dumps(
                {
                    "session_id": inputs.session_id,
                    "domain": inputs.domain_text,
                    "problem": inputs.problem_text,
                    "config": inputs.config,
                },
                indent=2,
            )
        )

    def attach(self, session: Session) -> None:
        """Persist every event the session logs from now on, flushed."""
        d = self._dir(session.id)
        d.mkdir(parents=True, exist_ok=True)
        path = d / "log.jsonl"
        fh = open(path, "a", encoding="utf-8")
        self._files[session.id] = fh

        def writer(event: dict) -> None:
            fh.write(event_line(event) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

        session.log.subscribe(writer)

    def close(self, session_id: str) -> None:
        fh = self._files.pop(session_id, None)
        if fh is not None:
            fh.close()  # type: ignore[union-attr]

    def list_ids(self) -> list[str]:
        return sorted(
            p.name for p in self.base.iterdir() if (p / "inputs.json").exists()
        )

    def read_inputs(self, session_id: str) -> SessionInputs:
        path = self._dir(session_id) / "inputs.json"
        if not path.exists():
            raise KeyError(session_id)
        doc = json.loads(path.read_text())
        return SessionInputs(
            session_id=doc["session_id"],
            domain_text=doc["domain"],
            problem_text=doc["problem"],
            config=doc["config"],
        )

    def read_events(self, session_id: str) -> list[dict]:
        """Parse the log, tolerating a torn final line."""
        path = self._dir(session_id) / "log.jsonl"
        if not path.exists():
            return []
        events = []
        lines = path.read_text(encoding="utf-8", errors="replace").split("\n")
        for i, line in enumerate(lines):
            if not line:
                continue
            try:
                events.append(json.loads(line))
            except json.JSONDecodeError:
                if i == len(lines) - 1 or all(not l for l in lines[i + 1 :]):
                    log.warning(
                        "session %s: discarding torn final log line", session_id
                    )
                    break
                raise CorruptLog(f"unparseable line {i} in {path}") from None
        return events

    def load(self, session_id: str) -> ReplayResult:
        """Rebuild the session by replaying its persisted prefix."""
        inputs = self.read_inputs(session_id)
        events = self.read_events(session_id)
        task, config = inputs.build()
        if not events:
            session = Session(task, config, session_id=session_id)
            session.start()
            return ReplayResult(session, [])
        result = replay_events(task, config, events, session_id=session_id)
        if result.diffs:
            raise CorruptLog(
                f"replay of {session_id} diverged: {result.diffs[:3]}"
            )
        return result
