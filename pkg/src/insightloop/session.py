"""Exploration provenance: rounds, steps, snapshots, persistence.

A session is the m x n matrix of analysis rounds and steps. Records are
append-only; persisted sessions carry a checksum so truncated or edited files
surface as :class:`CorruptSession` instead of silently wrong history.
"""

from __future__ import annotations

import hashlib
import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from insightloop.errors import (
    CorruptSession,
    IoError,
    NoOpenRound,
    RoundStillOpen,
    SchemaError,
    UnknownRound,
    UnknownView,
)
from insightloop.spec import SystemSpec, system_spec_from_document, validate_spec
from insightloop.tabular import Table


@dataclass
class StepSnapshot:
    """Headless stand-in for a screenshot: the focused view's data slice plus
    an optional client-uploaded PNG stored under the same reference."""

    data: dict = field(default_factory=dict)
    image_png: bytes | None = None


@dataclass
class StepRecord:
    step_index: int
    focused_view: str
    insights: list[dict]            # serialized scored insights
    interaction: dict | None        # self-motivated interaction descriptor
    snapshot_ref: str
    snapshot_data: dict
    has_image: bool
    timestamp: str

    def to_payload(self) -> dict:
        return {
            "stepIndex": self.step_index,
            "focusedView": self.focused_view,
            "insights": self.insights,
            "interaction": self.interaction,
            "snapshotRef": self.snapshot_ref,
            "hasImage": self.has_image,
            "timestamp": self.timestamp,
        }


@dataclass
class Round:
    index: int
    steps: list[StepRecord] = field(default_factory=list)
    open: bool = True

    def to_payload(self) -> dict:
        return {"index": self.index, "open": self.open,
                "steps": [s.to_payload() for s in self.steps]}


class SessionMatrix:
    """One exploration session; operations on it are serialized by a lock."""

    def __init__(self, spec: SystemSpec, dataset_ref: str, task: str,
                 session_id: str | None = None):
        self.session_id = session_id or uuid.uuid4().hex[:12]
        self.spec = spec
        self.dataset_ref = dataset_ref
        self.task = task
        self.rounds: list[Round] = [Round(1)]
        self.images: dict[str, bytes] = {}
        self._lock = threading.Lock()

    @property
    def m(self) -> int:
        return len(self.rounds)

    def open_round(self) -> Round | None:
        for r in self.rounds:
            if r.open:
                return r
        return None

    def to_payload(self) -> dict:
        return {
            "sessionId": self.session_id,
            "task": self.task,
            "datasetRef": self.dataset_ref,
            "specDocument": self.spec.to_document(),
            "rounds": [r.to_payload() for r in self.rounds],
        }

    def structural_equal(self, other: "SessionMatrix") -> bool:
        return self.to_payload() == other.to_payload()


def start_session(spec: SystemSpec, table: Table, task: str,
                  session_id: str | None = None) -> SessionMatrix:
    """Open a session with round 1 ready for steps.

    The spec must validate against the dataset's columns.
    """
    findings = validate_spec(spec, table.column_names)
    errors = [f for f in findings if f.severity == "error"]
    if errors:
        first = errors[0]
        raise SchemaError(first.message, path=first.path,
                          detail=[f.to_payload() for f in errors])
    return SessionMatrix(spec, table.name, task, session_id)


def record_step(session: SessionMatrix, focused_view: str, *,
                insights: list[dict] | None = None,
                interaction: dict | None = None,
                snapshot: StepSnapshot | None = None) -> StepRecord:
    """Append a step to the open round (opening the next round after an end).

    ``snapshot_ref`` follows the "{round}_{step}_{viewName}" naming scheme and
    is unique session-wide.
    """
    if not session.spec.has_view(focused_view):
        raise UnknownView(f"no view named {focused_view!r}")
    snapshot = snapshot or StepSnapshot()
    with session._lock:
        current = session.open_round()
        if current is None:
            current = Round(session.m + 1)
            session.rounds.append(current)
        index = len(current.steps) + 1
        record = StepRecord(
            step_index=index,
            focused_view=focused_view,
            insights=list(insights or []),
            interaction=interaction,
            snapshot_ref=f"{current.index}_{index}_{focused_view}",
            snapshot_data=dict(snapshot.data),
            has_image=snapshot.image_png is not None,
            timestamp=datetime.now(timezone.utc).isoformat(),
        )
        current.steps.append(record)
        if snapshot.image_png is not None:
            session.images[record.snapshot_ref] = snapshot.image_png
    return record


def end_round(session: SessionMatrix) -> dict:
    """Close the open round; the next record_step opens round m+1."""
    with session._lock:
        current = session.open_round()
        if current is None:
            raise NoOpenRound("no analysis round is open")
        current.open = False
        return {"round": current.index, "steps": len(current.steps)}


def select_path(session: SessionMatrix, round_index: int) -> list[StepRecord]:
    """The curated step sequence of a closed round — the report input."""
    for r in session.rounds:
        if r.index == round_index:
            if r.open:
                raise RoundStillOpen(f"round {round_index} is still open")
            return list(r.steps)
    raise UnknownRound(f"no round {round_index} in session {session.session_id}")


# --- persistence -----------------------------------------------------------------

def _session_dir(base, session_id: str) -> Path:
    return Path(base) / session_id


def _checksum(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def persist(session: SessionMatrix, base_dir) -> Path:
    """Write ``{base}/{id}/session.json`` plus per-step snapshot sidecars."""
    directory = _session_dir(base_dir, session.session_id)
    snapshots = directory / "snapshots"
    try:
        snapshots.mkdir(parents=True, exist_ok=True)
        payload = session.to_payload()
        payload["checksum"] = _checksum(session.to_payload())
        (directory / "session.json").write_text(
            json.dumps(payload, indent=2, ensure_ascii=False), encoding="utf-8")
        for r in session.rounds:
            for step in r.steps:
                (snapshots / f"{step.snapshot_ref}.json").write_text(
                    json.dumps(step.snapshot_data, indent=2, ensure_ascii=False),
                    encoding="utf-8")
        for ref, png in session.images.items():
            (snapshots / f"{ref}.png").write_bytes(png)
    except OSError as exc:
        raise IoError(f"cannot persist session: {exc}") from exc
    return directory


def load(base_dir, session_id: str) -> SessionMatrix:
    """Rebuild a persisted session; checksum mismatches raise CorruptSession."""
    directory = _session_dir(base_dir, session_id)
    path = directory / "session.json"
    if not path.exists():
        raise IoError(f"no persisted session {session_id!r} under {base_dir}")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptSession(f"session file is not valid JSON: {exc}") from exc
    stored = payload.pop("checksum", None)
    if stored != _checksum(payload):
        raise CorruptSession("session checksum mismatch")

    spec = system_spec_from_document(payload["specDocument"])
    session = SessionMatrix(spec, payload["datasetRef"], payload["task"],
                            session_id=payload["sessionId"])
    session.rounds = []
    snapshots = directory / "snapshots"
    for rdoc in payload["rounds"]:
        steps = []
        for sdoc in rdoc["steps"]:
            data_path = snapshots / f"{sdoc['snapshotRef']}.json"
            data = {}
            if data_path.exists():
                data = json.loads(data_path.read_text(encoding="utf-8"))
            steps.append(StepRecord(
                step_index=sdoc["stepIndex"],
                focused_view=sdoc["focusedView"],
                insights=sdoc.get("insights", []),
                interaction=sdoc.get("interaction"),
                snapshot_ref=sdoc["snapshotRef"],
                snapshot_data=data,
                has_image=sdoc.get("hasImage", False),
                timestamp=sdoc["timestamp"],
            ))
        session.rounds.append(Round(rdoc["index"], steps, rdoc["open"]))
    if snapshots.exists():
        for png in snapshots.glob("*.png"):
            session.images[png.stem] = png.read_bytes()
    return session
