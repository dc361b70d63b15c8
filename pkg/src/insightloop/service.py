"""HTTP API binding specs, datasets, sessions, recommendations, and reports.

Ask-before-compute is the default interaction: posting a selection returns
proposed questions only; answering one runs execute/assess/annotate for that
plan. ``?mode=eager`` computes every plan immediately. All module errors map
to stable wire codes; provider failures surface as chat-channel messages.
"""

from __future__ import annotations

import base64
import csv as csv_mod
import json
import re
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from insightloop import recommend, report as report_mod, session as session_mod
from insightloop.errors import (
    CorruptSession,
    EmptyBase,
    EmptyFile,
    EmptyRound,
    InsightLoopError,
    IoError,
    KeyNotFound,
    MalformedTutorial,
    MissingImage,
    MissingInput,
    NoOpenRound,
    PlanParseError,
    ProviderError,
    RaggedRow,
    RoundStillOpen,
    SchemaError,
    SpecSyntaxError,
    SubjectResolutionError,
    TooFewPoints,
    TypeMismatch,
    UnknownDim,
    UnknownMeasure,
    UnknownRound,
    UnknownView,
    ZeroTotal,
    ZeroVariance,
)
from insightloop.provider import MockProvider, build_prompt
from insightloop.recommend import FunctionDescriptor, Selection, Triple
from insightloop.spec import SystemSpec, render_tutorial, system_spec_from_document
from insightloop.tabular import Table, apply_subspace, group_aggregate, table_from_rows
from insightloop.superstore import function_registry

_STATUS_BY_ERROR = {
    SpecSyntaxError: 400,
    SchemaError: 400,
    MissingInput: 400,
    UnknownView: 422,
    UnknownDim: 422,
    UnknownMeasure: 422,
    TypeMismatch: 422,
    SubjectResolutionError: 422,
    TooFewPoints: 422,
    ZeroVariance: 422,
    ZeroTotal: 422,
    EmptyBase: 422,
    EmptyRound: 422,
    EmptyFile: 422,
    RaggedRow: 422,
    MalformedTutorial: 422,
    PlanParseError: 422,
    KeyNotFound: 404,
    UnknownRound: 404,
    NoOpenRound: 409,
    RoundStillOpen: 409,
    MissingImage: 409,
    ProviderError: 502,
    IoError: 500,
    CorruptSession: 500,
}


class ApiError(InsightLoopError):
    """Service-level error with an explicit status code."""

    def __init__(self, status: int, code: str, message: str, detail=None):
        super().__init__(message, detail)
        self.status = status
        self.code = code


@dataclass
class SessionState:
    matrix: session_mod.SessionMatrix
    spec_id: str
    dataset_id: str
    selection: Selection = field(default_factory=Selection)
    plans: list = field(default_factory=list)
    questions: list[str] = field(default_factory=list)
    answered: dict[str, dict] = field(default_factory=dict)
    adopted: set = field(default_factory=set)
    counter: int = 0


class EngineState:
    """Everything the endpoints share; one per served process."""

    def __init__(self, root, provider=None, registry=None):
        self.root = Path(root)
        self.provider = provider or MockProvider()
        self.registry: list[FunctionDescriptor] = registry or function_registry()
        self.specs: dict[str, SystemSpec] = {}
        self.datasets: dict[str, Table] = {}
        self.sessions: dict[str, SessionState] = {}

    def new_id(self, prefix: str) -> str:
        return f"{prefix}-{uuid.uuid4().hex[:10]}"

    def spec(self, spec_id: str) -> SystemSpec:
        if spec_id not in self.specs:
            raise ApiError(404, "unknown_spec", f"no spec {spec_id!r}")
        return self.specs[spec_id]

    def dataset(self, dataset_id: str) -> Table:
        if dataset_id not in self.datasets:
            raise ApiError(404, "unknown_dataset", f"no dataset {dataset_id!r}")
        return self.datasets[dataset_id]

    def session(self, session_id: str) -> SessionState:
        if session_id not in self.sessions:
            raise ApiError(404, "unknown_session", f"no session {session_id!r}")
        return self.sessions[session_id]


def _error_payload(code: str, message: str, detail=None) -> dict:
    body = {"error": {"code": code, "message": message}}
    if detail is not None:
        body["error"]["detail"] = detail
    return body


def create_app(state: EngineState | None = None) -> FastAPI:
    app = FastAPI(title="insightloop", version="0.1.0")
    engine = state or EngineState(Path("."))
    app.state.engine = engine

    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content=_error_payload(exc.code, exc.message, exc.detail))

    @app.exception_handler(InsightLoopError)
    async def _module_error(_req: Request, exc: InsightLoopError):
        status = _STATUS_BY_ERROR.get(type(exc), 500)
        detail = exc.detail
        if isinstance(exc, SchemaError) and exc.path:
            detail = {"path": exc.path}
        return JSONResponse(status_code=status,
                            content=_error_payload(exc.code, exc.message, detail))

    # --- specs -------------------------------------------------------------

    @app.post("/specs", status_code=201)
    async def register_spec(body: dict):
        document = body.get("spec", body)
        spec = system_spec_from_document(document)
        spec_id = engine.new_id("spec")
        engine.specs[spec_id] = spec
        return {"specId": spec_id, "viewCount": spec.view_count}

    @app.get("/specs/{spec_id}/tutorial")
    async def tutorial(spec_id: str):
        spec = engine.spec(spec_id)
        steps = render_tutorial(spec, engine.provider)
        return {"steps": [s.to_payload() for s in steps]}

    # --- datasets ----------------------------------------------------------

    @app.post("/datasets", status_code=201)
    async def register_dataset(body: dict):
        name = body.get("name") or "dataset"
        csv_text = body.get("csv")
        if not isinstance(csv_text, str) or not csv_text.strip():
            raise ApiError(422, "invalid_dataset", "body needs a non-empty 'csv' field")
        parsed = list(csv_mod.reader(csv_text.splitlines()))
        if not parsed:
            raise EmptyFile("dataset has no header row")
        table = table_from_rows(name, parsed[0], parsed[1:],
                                hints=body.get("schema"))
        dataset_id = engine.new_id("data")
        engine.datasets[dataset_id] = table
        return {"datasetId": dataset_id, "rowCount": table.row_count,
                "schema": table.schema()}

    # --- sessions ----------------------------------------------------------

    @app.post("/sessions", status_code=201)
    async def create_session(body: dict):
        spec = engine.spec(str(body.get("specId")))
        table = engine.dataset(str(body.get("datasetId")))
        task = body.get("task")
        proposed = False
        if not task:
            task = _propose_task(engine, spec)
            proposed = True
        matrix = session_mod.start_session(spec, table, task)
        engine.sessions[matrix.session_id] = SessionState(
            matrix, str(body.get("specId")), str(body.get("datasetId")))
        return {"sessionId": matrix.session_id, "task": task, "taskProposed": proposed}

    @app.post("/sessions/{session_id}/selections")
    async def post_selection(session_id: str, body: dict, mode: str = "ask"):
        st = engine.session(session_id)
        triples = body.get("triples", [])
        if not isinstance(triples, list):
            raise ApiError(422, "invalid_selection", "'triples' must be a list")
        parsed = []
        for doc in triples:
            try:
                parsed.append(Triple.from_payload(doc))
            except (KeyError, TypeError):
                raise ApiError(422, "invalid_selection",
                               f"triple needs viewName/dimName/value: {doc!r}")
        retained = [t for t in st.selection.triples if body.get("retain", True)]
        st.selection = Selection(_merge_triples(retained, parsed))
        notes: list[str] = []
        spec = engine.spec(st.spec_id)
        provider = engine.provider
        try:
            plans = recommend.plan(spec, st.selection, st.matrix.task,
                                   engine.registry, provider, notes=notes)
        except (ProviderError, PlanParseError) as exc:
            notes.append(f"provider planning unavailable ({exc}); mock planning used")
            plans = recommend.plan(spec, st.selection, st.matrix.task,
                                   engine.registry, MockProvider(), notes=notes)
        st.plans = plans
        st.questions = recommend.propose_questions(plans)
        if body.get("record"):
            for t in parsed:
                session_mod.record_step(
                    st.matrix, t.view_name, interaction=t.to_payload(),
                    snapshot=session_mod.StepSnapshot(
                        data=_snapshot_for_selection(engine, st, t)))
        response = {
            "questions": st.questions,
            "plans": [p.to_payload() for p in plans],
            "notes": notes,
        }
        if mode == "eager":
            response["insights"] = _answer_plans(engine, st, plans, notes)
        return response

    @app.post("/sessions/{session_id}/questions/{index}/answer")
    async def answer_question(session_id: str, index: int):
        st = engine.session(session_id)
        if index < 0 or index >= len(st.plans):
            raise ApiError(404, "unknown_question",
                           f"no proposed question {index}")
        notes: list[str] = []
        insights = _answer_plans(engine, st, [st.plans[index]], notes)
        return {"insights": insights, "warnings": notes}

    @app.get("/sessions/{session_id}/views/{view_name}/data")
    async def view_data(session_id: str, view_name: str):
        st = engine.session(session_id)
        spec = engine.spec(st.spec_id)
        if not spec.has_view(view_name):
            raise UnknownView(f"no view named {view_name!r}")
        view = spec.view(view_name)
        dim_ref = view.dimension_ref()
        measures = view.measure_refs()
        if dim_ref is None or not measures:
            return {"viewName": view_name, "series": None}
        series, _ = recommend.view_aggregate(
            spec, engine.dataset(st.dataset_id), st.selection, view_name,
            measures[0].field, dim_ref.field)
        payload = series.to_payload()
        payload["kind"] = "line" if dim_ref.field_type == "temporal" else "bar"
        return {"viewName": view_name, "series": payload}

    @app.post("/sessions/{session_id}/ask")
    async def ask(session_id: str, body: dict):
        st = engine.session(session_id)
        text = body.get("text", "")
        if not isinstance(text, str) or not text.strip():
            raise ApiError(422, "empty_question", "ask body needs non-empty 'text'")
        latest = [entry["scored"] for entry in st.answered.values()]
        latest.sort(key=lambda p: -p.get("combined", 0.0))
        prompt = build_prompt(
            "open_question",
            question=text,
            state={"selection": st.selection.to_payload(),
                   "insights": [{"description": p["insight"]["description"],
                                 "annotation": p["annotation"]} for p in latest[:5]]},
        )
        reply = engine.provider.complete(prompt)  # ProviderError -> 502 handler
        answer, highlights = _split_ask_reply(reply)
        spec = engine.spec(st.spec_id)
        valid = [h for h in highlights
                 if spec.has_view(h.get("viewName", ""))
                 and h.get("dimName") in spec.view(h["viewName"]).field_names()]
        return {"answer": answer, "highlights": valid}

    @app.post("/sessions/{session_id}/adopt", status_code=201)
    async def adopt(session_id: str, body: dict):
        st = engine.session(session_id)
        insight_id = str(body.get("insightId", ""))
        if insight_id not in st.answered:
            raise ApiError(404, "unknown_insight", f"no insight {insight_id!r}")
        if insight_id in st.adopted:
            raise ApiError(409, "already_adopted",
                           f"insight {insight_id!r} is already recorded")
        entry = st.answered[insight_id]
        image = None
        if isinstance(body.get("image"), str):
            try:
                image = base64.b64decode(body["image"], validate=True)
            except (ValueError, TypeError):
                raise ApiError(422, "invalid_image", "image must be base64 PNG")
        record = session_mod.record_step(
            st.matrix, entry["view"], insights=[entry["scored"]],
            snapshot=session_mod.StepSnapshot(data=entry["snapshot"], image_png=image))
        st.adopted.add(insight_id)
        session_mod.persist(st.matrix, engine.root / "sessions")
        return {"step": record.to_payload(), "round": st.matrix.open_round().index}

    @app.post("/sessions/{session_id}/rounds/end")
    async def end_round(session_id: str):
        st = engine.session(session_id)
        summary = session_mod.end_round(st.matrix)
        session_mod.persist(st.matrix, engine.root / "sessions")
        return summary

    @app.get("/sessions/{session_id}/stream")
    async def stream(session_id: str):
        st = engine.session(session_id)
        return st.matrix.to_payload()

    @app.post("/sessions/{session_id}/rounds/{round_index}/report")
    async def round_report(session_id: str, round_index: int):
        st = engine.session(session_id)
        records = session_mod.select_path(st.matrix, round_index)
        notes: list[str] = []
        doc = report_mod.summarize(records, engine.provider, task=st.matrix.task,
                                   notes=notes)
        session_dir = session_mod.persist(st.matrix, engine.root / "sessions")
        snapshot_dir = session_dir / "snapshots"
        report_mod.ensure_snapshot_images(records, snapshot_dir)
        tex = report_mod.emit_latex(doc, image_dir="../sessions/"
                                    f"{st.matrix.session_id}/snapshots")
        findings = report_mod.check_latex(tex, snapshot_dir=snapshot_dir)
        name = f"{st.matrix.session_id}_{round_index}"
        reports_dir = engine.root / "reports"
        reports_dir.mkdir(parents=True, exist_ok=True)
        (reports_dir / f"{name}.tex").write_text(tex, encoding="utf-8")
        return {"name": name, "frames": report_mod.frame_count(tex),
                "findings": [f.to_payload() for f in findings], "tex": tex,
                "notes": notes}

    @app.get("/reports/{name}.tex")
    async def get_report(name: str):
        if not re.fullmatch(r"[A-Za-z0-9_-]+", name):
            raise ApiError(404, "unknown_report", "no such report")
        path = engine.root / "reports" / f"{name}.tex"
        if not path.exists():
            raise ApiError(404, "unknown_report", f"no report {name!r}")
        return PlainTextResponse(path.read_text(encoding="utf-8"))

    return app


def _merge_triples(retained: list[Triple], new: list[Triple]) -> list[Triple]:
    merged: dict[tuple[str, str], Triple] = {}
    for t in retained + new:
        key = (t.view_name, t.dim_name)
        if key in merged:
            values = merged[key].values + tuple(
                v for v in t.values if v not in merged[key].values)
            merged[key] = Triple(t.view_name, t.dim_name, values)
        else:
            merged[key] = t
    return list(merged.values())


def _propose_task(engine: EngineState, spec: SystemSpec) -> str:
    measures = []
    for view in spec.views_info:
        for ref in view.measure_refs():
            if ref.field not in measures:
                measures.append(ref.field)
    prompt = build_prompt(
        "open_question",
        question="Propose a concise analysis task for this system in one sentence.",
        state={"system": spec.name, "views": spec.view_names},
        propose_task=True,
        measures=measures,
    )
    try:
        reply = engine.provider.complete(prompt)
    except ProviderError:
        reply = f"Analyze the {measures[0] if measures else 'data'} situation."
    return reply.strip().splitlines()[0].strip()


def _snapshot_for_insight(engine: EngineState, st: SessionState, scored) -> dict:
    insight = scored.insight
    if insight.subject is None or not insight.subject.dimension:
        return {}
    table = engine.dataset(st.dataset_id)
    spec = engine.spec(st.spec_id)
    try:
        sliced = apply_subspace(table, insight.subject.subspace)
        series = group_aggregate(sliced, insight.subject.dimension,
                                 insight.subject.measure or "", "sum")
    except InsightLoopError:
        return {}
    view = spec.view(insight.views[0])
    dim_ref = view.dimension_ref()
    kind = "line" if dim_ref is not None and dim_ref.field_type == "temporal" else "bar"
    payload = series.to_payload()
    payload["kind"] = kind
    return payload


def _snapshot_for_selection(engine: EngineState, st: SessionState, triple: Triple) -> dict:
    return {"dimension": triple.dim_name, "keys": list(triple.values),
            "values": [1.0] * len(triple.values), "kind": "bar",
            "measure": "selection"}


def _answer_plans(engine: EngineState, st: SessionState, plans, notes: list[str]) -> list[dict]:
    spec = engine.spec(st.spec_id)
    table = engine.dataset(st.dataset_id)
    result = recommend.execute(plans, table, st.selection, spec, engine.provider)
    for failure in result.failures:
        notes.append(f"{failure.plan.function_name} on {failure.plan.view_name}: "
                     f"{failure.message}")
    scored = recommend.assess(result.insights, st.matrix.task, table,
                              engine.provider, notes=notes)
    scored = recommend.annotate(scored, spec)
    payloads = []
    for s in scored:
        st.counter += 1
        insight_id = f"i{st.counter}"
        payload = s.to_payload()
        payload["insightId"] = insight_id
        st.answered[insight_id] = {
            "scored": payload,
            "view": s.insight.views[0],
            "snapshot": _snapshot_for_insight(engine, st, s),
        }
        payloads.append(payload)
    return payloads


def _split_ask_reply(reply: str) -> tuple[str, list[dict]]:
    highlights: list[dict] = []
    answer_lines = []
    decoder = json.JSONDecoder()
    for line in reply.splitlines():
        stripped = line.strip()
        if stripped.startswith("{"):
            try:
                doc, _ = decoder.raw_decode(stripped)
            except json.JSONDecodeError:
                answer_lines.append(line)
                continue
            if isinstance(doc, dict) and isinstance(doc.get("highlights"), list):
                highlights = [h for h in doc["highlights"] if isinstance(h, dict)]
                continue
        answer_lines.append(line)
    return "\n".join(answer_lines).strip(), highlights
