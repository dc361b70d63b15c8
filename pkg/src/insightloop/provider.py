"""The language-model boundary.

Builds the five fixed prompt templates, parses structured replies defensively
(every parser is total: typed errors or skip-with-note, never a crash), and
ships two interchangeable providers: a deterministic rule-based mock and an
OpenAI-compatible HTTP client. Everything upstream talks to ``Provider`` only,
so the whole pipeline runs offline with the mock.
"""

from __future__ import annotations

import json
import math
import os
import re
import threading
from dataclasses import dataclass, field
from typing import Protocol

import httpx

from insightloop.errors import MissingInput, PlanParseError, ProviderError

DEFAULT_MAX_TOKENS = 1024
DEFAULT_TIMEOUT_MS = 30_000

PROMPT_KINDS = ("onboarding", "type_selection", "assessment", "report", "latex",
                "open_question")

_FORMAT_REQUIREMENTS = {
    "onboarding": (
        'Return a JSON array of steps, one object per step: '
        '[{"title": "<viewName>", "description": "<HTML>"}]. '
        "The first step introduces the whole system and its title is the system name; "
        "then one step per view, in order. Keep each description under 60 words. "
        "Output JSON only."
    ),
    "type_selection": (
        'Return a JSON array of quadruples: [{"functionName": "<registered function>", '
        '"viewName": "<view>", "variableName": "<measure column>", '
        '"dimName": "<dimension column>", "relevance": <number in [0,1]>}]. '
        "Use JSON arrays for viewName and variableName on cross-view insights. "
        "Output JSON only."
    ),
    "assessment": (
        'Return a JSON array with one object per insight: [{"insightRef": <index>, '
        '"impact": <number in [0,1]>, "relevance": <number in [0,1]>, '
        '"explanation": "<one sentence>", "viewsName": "<view>", '
        '"fieldName": "<dimension>", "value": [<data values>]}]. Output JSON only.'
    ),
    "report": (
        'Return a JSON object: {"title": "<report title>", "items": [{"heading": '
        '"<step heading>", "bullets": ["<finding>", ...], "imageName": "<imageName>"}], '
        '"conclusion": "<closing paragraph>"}. One item per step, in step order. '
        "Keep every bullet under 30 words. Output JSON only."
    ),
    "open_question": (
        "Answer in one short paragraph, then a final JSON line "
        '{"highlights": [{"viewName": "...", "dimName": "...", "value": [...]}]} '
        "locating the source data."
    ),
}


@dataclass(frozen=True)
class PromptDoc:
    """A rendered-deterministic prompt plus the structured inputs it came from.

    ``sections`` hold the template scaffolding and filled slots in order;
    ``payload`` keeps the raw inputs so the mock provider can answer from
    structure instead of scraping its own prompt text.
    """

    kind: str
    sections: tuple[tuple[str, str], ...]
    format_requirements: str
    payload: dict = field(default_factory=dict, hash=False, compare=False)

    def render(self) -> str:
        parts = []
        for label, body in self.sections:
            parts.append(f"{label}:\n{body}" if label else body)
        return "\n\n".join(parts)


class Provider(Protocol):
    def complete(self, prompt: PromptDoc, *, max_tokens: int = DEFAULT_MAX_TOKENS,
                 timeout_ms: int = DEFAULT_TIMEOUT_MS) -> str:
        ...


def _dump(value) -> str:
    return json.dumps(value, indent=2, ensure_ascii=False, sort_keys=False)


def _need(inputs: dict, key: str, block: str):
    if key not in inputs or inputs[key] is None:
        raise MissingInput(block)
    return inputs[key]


def build_prompt(kind: str, **inputs) -> PromptDoc:
    """Assemble one of the fixed prompt templates; pure in its inputs.

    Raises :class:`MissingInput` naming the absent block.
    """
    if kind not in PROMPT_KINDS:
        raise MissingInput(f"unknown prompt kind {kind!r}")
    fmt = inputs.get("format_requirements") or _FORMAT_REQUIREMENTS.get(kind, "")
    sections: list[tuple[str, str]]

    if kind == "onboarding":
        spec_doc = _need(inputs, "spec_document", "specification data")
        sections = [
            ("", "Here are the specifications of a visual analytics system."),
            ("specification data", _dump(spec_doc)),
            ("", "The specification includes the system-level, view-level, and views' "
                 "coordination information. You need to introduce each view's style "
                 "(data meaning, visual mapping) and the relationship between views."),
            ("", "Please give your answer in the following format:"),
            ("format requirements", fmt),
        ]
        payload = {"spec": spec_doc,
                   "templateSteps": inputs.get("template_steps")}

    elif kind == "type_selection":
        selection = _need(inputs, "selection", "current selection")
        views = _need(inputs, "view_style_info", "view style info")
        coords = _need(inputs, "coordination_info", "views coordination info")
        task = _need(inputs, "task", "analytical task")
        functions = _need(inputs, "function_apis", "insight function APIs")
        sections = [
            ("", "When the user makes an action, the system changes. You should analyze "
                 "data types of connected views based on the coordination information "
                 "between views."),
            ("current selection", _dump(selection)),
            ("view style info", _dump(views)),
            ("views coordination info", _dump(coords)),
            ("", "According to the data info in each view and the analytical task, you "
                 "should select all suitable analytical functions related to the user's "
                 "task. You also need to give a relevance score to assess how closely "
                 "related the insight is to the task."),
            ("analytical task", task),
            ("insight function APIs", _dump(functions)),
            ("", "Please give your answer in the following format:"),
            ("format requirements", fmt),
        ]
        payload = {"selection": selection, "views": inputs.get("view_summaries", []),
                   "coordinations": coords, "task": task, "functions": functions}

    elif kind == "assessment":
        results = _need(inputs, "insight_results", "insight calculation results")
        sections = [
            ("", "The selected insights are implemented, and the result is returned, "
                 "including the value and significance score. You also need to give an "
                 "impact score. You can consider combining your data analysis experience "
                 "to evaluate from the following aspects: potential consequences, urgency "
                 "and timeliness, and influence on decision-making."),
            ("insight calculation results", _dump(results)),
            ("", "Please give your answer in the following format:"),
            ("format requirements", fmt),
        ]
        payload = {"results": results, "task": inputs.get("task", "")}

    elif kind == "report":
        history = _need(inputs, "history", "historical analysis data")
        other = inputs.get("other_requirements", "")
        sections = [
            ("", "Here is a historical analysis of the system data. The data contains "
                 "insights that need to be reported:"),
            ("historical analysis data", _dump(history)),
            ("", "Your task is to write an insight report to present these findings. "
                 "The amount of insight should be equal to the number of steps for given "
                 "data. Ensure you include both a cover(report title) and a conclusion."),
            ("other requirements", other or fmt),
        ]
        payload = {"steps": history, "task": inputs.get("task", ""),
                   "requirements": other}

    elif kind == "latex":
        report_doc = _need(inputs, "report_doc", "summarized report")
        style = inputs.get("setting_requirements", "")
        sections = [
            ("", "Transform the summarized report into LaTeX slides. For each slide, if "
                 "an insight exhibits a clear hierarchy, segment it using bullet points. "
                 "Accompany each insight with a screenshot from the system. The filenames "
                 "for these screenshots can be found in the historical analysis data. "
                 "Please integrate the following commands for style configuration."),
            ("summarized report", _dump(report_doc)),
            ("setting requirements", style),
        ]
        fmt = style
        payload = {"report": report_doc, "style": style,
                   "imageDir": inputs.get("image_dir", "snapshots")}

    else:  # open_question
        question = _need(inputs, "question", "question")
        state = inputs.get("state", {})
        sections = [
            ("", "You are assisting a data analyst inside a visual analytics system. "
                 "Answer the follow-up question using the current analysis state, and "
                 "point at the source data that supports the answer."),
            ("current analysis state", _dump(state)),
            ("question", question),
            ("", "Please give your answer in the following format:"),
            ("format requirements", fmt),
        ]
        payload = {"question": question, "state": state}
        payload.update({k: v for k, v in inputs.items()
                        if k not in ("question", "state", "format_requirements")})

    return PromptDoc(kind, tuple(sections), fmt, payload)


# --- reply parsing ----------------------------------------------------------------

_NUMERIC_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


def parse_braced_answers(text: str) -> list:
    """Every maximal ``{...}`` span in order; numeric spans become numbers.

    Total: unbalanced braces are skipped, absence yields an empty list.
    """
    out: list = []
    i, n = 0, len(text)
    while i < n:
        if text[i] != "{":
            i += 1
            continue
        depth, j = 1, i + 1
        while j < n and depth:
            if text[j] == "{":
                depth += 1
            elif text[j] == "}":
                depth -= 1
            j += 1
        if depth:
            i += 1  # unmatched open brace: treat as plain text
            continue
        out.append(_coerce_span(text[i + 1:j - 1]))
        i = j
    return out


def _coerce_span(span: str):
    s = span.strip()
    if _NUMERIC_RE.match(s):
        try:
            return int(s)
        except ValueError:
            try:
                return float(s)
            except ValueError:  # pragma: no cover - regex guards this
                return s
    return s


def format_braced(values) -> str:
    """Canonical inverse of :func:`parse_braced_answers` for scalar answers."""
    return ", ".join("{" + (repr(v) if isinstance(v, float) else str(v)) + "}"
                     for v in values)


def _first_json_value(text: str, opener: str):
    closer = {"[": list, "{": dict}[opener]
    stripped = text.strip()
    try:
        doc = json.loads(stripped)
        if isinstance(doc, closer):
            return doc
    except (json.JSONDecodeError, RecursionError):
        pass
    decoder = json.JSONDecoder()
    for i, ch in enumerate(text):
        if ch == opener:
            try:
                doc, _ = decoder.raw_decode(text[i:])
            except (json.JSONDecodeError, RecursionError):
                continue
            if isinstance(doc, closer):
                return doc
    return None


def _reply_entries(text: str, what: str) -> list:
    """The first parseable top-level JSON value in a reply, normalized to a list.

    Scans left to right so a leading object is not shadowed by an array nested
    inside it; raises :class:`PlanParseError` when nothing parses.
    """
    stripped = text.strip()
    try:
        doc = json.loads(stripped)
        if isinstance(doc, list):
            return doc
        if isinstance(doc, dict):
            return [doc]
    except (json.JSONDecodeError, RecursionError):
        pass
    decoder = json.JSONDecoder()
    for i, ch in enumerate(text):
        if ch in "[{":
            try:
                doc, _ = decoder.raw_decode(text[i:])
            except (json.JSONDecodeError, RecursionError):
                continue
            if isinstance(doc, list):
                return doc
            if isinstance(doc, dict):
                return [doc]
    raise PlanParseError(f"no JSON {what} found in the reply")


def _note(notes, message: str):
    if notes is not None:
        notes.append(message)


def _as_name_tuple(value) -> tuple[str, ...] | None:
    if isinstance(value, str) and value:
        return (value,)
    if isinstance(value, list) and value and all(isinstance(v, str) and v for v in value):
        return tuple(value)
    return None


def _clamp_score(value, default: float, label: str, notes) -> float:
    if value is None:
        _note(notes, f"{label} missing, defaulted to {default}")
        return default
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        _note(notes, f"{label} not a number, defaulted to {default}")
        return default
    if value < 0.0 or value > 1.0:
        _note(notes, f"{label} {value} clamped to [0,1]")
        return min(1.0, max(0.0, float(value)))
    return float(value)


def parse_plan_reply(text: str, notes: list[str] | None = None) -> list:
    """Quadruples + relevance out of a Step-1 reply.

    Malformed entries are skipped (reported through ``notes``); raises
    :class:`PlanParseError` only when no JSON array is present at all.
    """
    from insightloop.recommend import PlannedInsight  # deferred: avoids an import cycle

    doc = _reply_entries(text, "plan array")
    plans = []
    for i, entry in enumerate(doc):
        if not isinstance(entry, dict):
            _note(notes, f"plan entry {i} is not an object, skipped")
            continue
        fn = entry.get("functionName")
        views = _as_name_tuple(entry.get("viewName"))
        variables = _as_name_tuple(entry.get("variableName"))
        dim = entry.get("dimName")
        if not isinstance(fn, str) or not fn or views is None or variables is None \
                or not isinstance(dim, str) or not dim:
            _note(notes, f"plan entry {i} missing quadruple fields, skipped")
            continue
        relevance = _clamp_score(entry.get("relevance"), 0.5,
                                 f"plan entry {i} relevance", notes)
        plans.append(PlannedInsight(fn, views, variables, dim, relevance))
    return plans


def parse_assessment_reply(text: str, notes: list[str] | None = None) -> list[dict]:
    """Impact/relevance/explanation/annotation entries out of a Step-2 reply.

    Accepts a JSON array or a single object; scores are clamped to [0,1] with
    defaults of 0.5 when absent.
    """
    doc = _reply_entries(text, "assessment")
    entries = []
    for i, entry in enumerate(doc):
        if not isinstance(entry, dict):
            _note(notes, f"assessment entry {i} is not an object, skipped")
            continue
        ref = entry.get("insightRef")
        if not isinstance(ref, int) or isinstance(ref, bool):
            ref = i
        impact = _clamp_score(entry.get("impact"), 0.5, f"assessment entry {i} impact",
                              notes)
        relevance = _clamp_score(entry.get("relevance"), 0.5,
                                 f"assessment entry {i} relevance", notes)
        explanation = entry.get("explanation")
        if not isinstance(explanation, str):
            explanation = None
        triples = _annotation_triples(entry)
        scoring = entry.get("scoring") if entry.get("scoring") in ("mock", "provider") \
            else "provider"
        entries.append({
            "insightRef": ref,
            "impact": impact,
            "relevance": relevance,
            "explanation": explanation,
            "annotationTriples": triples,
            "scoring": scoring,
        })
    return entries


def _annotation_triples(entry: dict) -> list[dict]:
    triples = []
    raw = entry.get("annotationTriples")
    if isinstance(raw, list):
        candidates = raw
    else:
        candidates = [entry]
    for cand in candidates:
        if not isinstance(cand, dict):
            continue
        view = cand.get("viewsName") or cand.get("viewName")
        dim = cand.get("fieldName") or cand.get("dimName")
        values = cand.get("value") if isinstance(cand.get("value"), list) \
            else cand.get("values")
        if isinstance(view, list):
            views = [v for v in view if isinstance(v, str)]
        elif isinstance(view, str):
            views = [view]
        else:
            views = []
        if not views or not isinstance(dim, str) or not isinstance(values, list):
            continue
        for v in views:
            triples.append({"viewName": v, "dimName": dim, "value": values})
    return triples


# --- token heuristics shared by the mock and the offline fallback ------------------

_WORD_RE = re.compile(r"[a-z0-9]+")


def word_tokens(text: str) -> set[str]:
    return set(_WORD_RE.findall(text.lower()))


def jaccard_overlap(a: str, b: str) -> float:
    ta, tb = word_tokens(a), word_tokens(b)
    if not ta or not tb:
        return 0.0
    union = ta | tb
    return len(ta & tb) / len(union)


def overlap_coefficient(a: str, b: str) -> float:
    ta, tb = word_tokens(a), word_tokens(b)
    if not ta or not tb:
        return 0.0
    return len(ta & tb) / min(len(ta), len(tb))


def mock_explanation(result: dict) -> str:
    """Deterministic one-sentence explanation for an executed insight."""
    typ = result.get("type", "")
    params = result.get("parameters", {})
    measure = result.get("measure") or "the measure"
    dim = result.get("dimension") or "the dimension"
    if typ == "correlation":
        a, b = (result.get("measures") or [measure, measure])[:2]
        direction = "the same" if params.get("direction", 0) >= 0 else "the opposite"
        return (f"As {a} moves, {b} tends to move in {direction} direction "
                f"(r={params.get('r', 0.0):+.2f}), so {a} and {b} are linked.")
    if typ == "change_point":
        return (f"The level of {measure} shifts at {params.get('key')}; whatever "
                f"changed around then deserves a closer look.")
    if typ == "trend":
        word = {1: "upward", -1: "downward", 0: "flat"}[params.get("direction", 0)]
        return f"The {word} movement of {measure} over {dim} frames the next questions."
    if typ in ("outstanding_no1", "outstanding_last", "attribution"):
        return (f"{params.get('key')} dominates this slice of {measure}; it is the "
                f"natural place to focus.")
    if typ == "outstanding_top2":
        keys = params.get("keys", [])
        joined = " and ".join(str(k) for k in keys[:2])
        return f"{joined} stand clearly above the rest of {measure}."
    return f"This {typ.replace('_', ' ')} finding on {measure} scores highest right now."


# --- providers ----------------------------------------------------------------------

class MockProvider:
    """Deterministic rule engine standing in for a language model.

    Works off ``PromptDoc.payload`` so its replies are byte-identical for
    identical prompts.
    """

    def complete(self, prompt: PromptDoc, *, max_tokens: int = DEFAULT_MAX_TOKENS,
                 timeout_ms: int = DEFAULT_TIMEOUT_MS) -> str:
        handler = getattr(self, f"_{prompt.kind}", None)
        if handler is None:
            raise ProviderError(f"mock cannot answer prompt kind {prompt.kind!r}")
        return handler(prompt.payload)

    # onboarding: echo the deterministic template steps.
    def _onboarding(self, payload: dict) -> str:
        steps = payload.get("templateSteps")
        if not steps:
            from insightloop.spec import system_spec_from_document, template_tutorial
            spec = system_spec_from_document(payload.get("spec") or {})
            steps = [s.to_payload() for s in template_tutorial(spec)]
        return json.dumps(steps, ensure_ascii=False)

    # Step 1: pick functions by encoding type, score by task-token overlap.
    def _type_selection(self, payload: dict) -> str:
        task = payload.get("task", "")
        registered = {f.get("name") for f in payload.get("functions", [])}
        views = payload.get("views", [])
        quads: list[dict] = []

        temporal = [v for v in views
                    if v.get("dimension", {}).get("fieldType") == "temporal"
                    and v.get("measures")]
        categorical = [v for v in views
                       if v.get("dimension", {}).get("fieldType") in ("nominal", "ordinal")
                       and v.get("measures")]

        for fn in ("change_point", "trend", "seasonality"):
            if fn not in registered:
                continue
            for v in temporal:
                quads.append(self._quad(fn, v["viewName"], v["measures"][0]["field"],
                                        v["dimension"]["field"], task))
        if "correlation" in registered:
            for i in range(len(temporal)):
                for j in range(i + 1, len(temporal)):
                    a, b = temporal[i], temporal[j]
                    if a["dimension"]["field"] != b["dimension"]["field"]:
                        continue
                    quads.append(self._quad(
                        "correlation",
                        [a["viewName"], b["viewName"]],
                        [a["measures"][0]["field"], b["measures"][0]["field"]],
                        a["dimension"]["field"], task))
        for fn in ("outstanding_no1", "outstanding_top2", "outstanding_last",
                   "attribution", "evenness"):
            if fn not in registered:
                continue
            for v in categorical:
                quads.append(self._quad(fn, v["viewName"], v["measures"][0]["field"],
                                        v["dimension"]["field"], task))
        return json.dumps(quads, ensure_ascii=False)

    @staticmethod
    def _quad(fn: str, view, variable, dim: str, task: str) -> dict:
        names = " ".join(view) if isinstance(view, list) else view
        variables = " ".join(variable) if isinstance(variable, list) else variable
        words = f"{fn.replace('_', ' ')} {names} {variables} {dim}"
        return {
            "functionName": fn,
            "viewName": view,
            "variableName": variable,
            "dimName": dim,
            "relevance": round(overlap_coefficient(task, words), 6),
        }

    # Step 2: impact echoes subspace coverage, relevance is task Jaccard.
    def _assessment(self, payload: dict) -> str:
        task = payload.get("task", "")
        entries = []
        for result in payload.get("results", []):
            words = " ".join([
                str(result.get("type", "")).replace("_", " "),
                str(result.get("dimension") or ""),
                str(result.get("measure") or ""),
            ])
            triple = (result.get("annotation") or [{}])[0]
            entries.append({
                "insightRef": result.get("index", 0),
                "impact": round(float(result.get("coverage", 0.5)), 9),
                "relevance": round(jaccard_overlap(task, words), 6),
                "explanation": mock_explanation(result),
                "viewsName": triple.get("viewName", (result.get("views") or [""])[0]),
                "fieldName": triple.get("dimName", result.get("dimension") or ""),
                "value": triple.get("value", []),
                "scoring": "mock",
            })
        return json.dumps(entries, ensure_ascii=False, sort_keys=True)

    def _report(self, payload: dict) -> str:
        steps = payload.get("steps", [])
        task = payload.get("task") or "the recorded exploration"
        items = []
        for i, step in enumerate(steps, start=1):
            insight_text = step.get("insight") or "a self-motivated interaction"
            typ = str(step.get("type") or "interaction").replace("_", " ")
            bullets = [insight_text]
            if step.get("value") not in (None, ""):
                bullets.append(f"Key value: {step.get('value')}")
            items.append({
                "heading": f"Step {i}: {typ.title()} on {step.get('viewName', '?')}",
                "bullets": bullets,
                "imageName": step.get("imageName", ""),
            })
        doc = {
            "title": f"Insight Report: {task}",
            "items": items,
            "conclusion": (
                f"Across {len(steps)} steps, the analysis of {task} surfaced the "
                "findings above; the flagged views and values are the place to act."
            ),
        }
        return json.dumps(doc, ensure_ascii=False, sort_keys=True)

    def _latex(self, payload: dict) -> str:
        from insightloop.report import emit_latex, report_doc_from_payload
        doc = report_doc_from_payload(payload.get("report") or {})
        return emit_latex(doc, style=payload.get("style", ""),
                          image_dir=payload.get("imageDir", "snapshots"))

    def _open_question(self, payload: dict) -> str:
        state = payload.get("state", {})
        question = payload.get("question", "")
        if payload.get("propose_task"):
            measures = payload.get("measures") or ["data"]
            return (f"Analyze the {measures[0]} situation across the system views "
                    "from multiple perspectives.")
        insights = state.get("insights") or []
        if insights:
            top = insights[0]
            answer = (f"Regarding '{question}': the strongest current finding is "
                      f"{top.get('description', 'the top-ranked insight')} ")
            highlights = top.get("annotation", [])
        else:
            answer = (f"Regarding '{question}': no insights are computed yet; select "
                      "elements in a view to get recommendations first. ")
            highlights = []
        return answer + "\n" + json.dumps({"highlights": highlights}, ensure_ascii=False,
                                          sort_keys=True)


@dataclass
class HttpConfig:
    base_url: str
    api_key: str = ""
    model: str = "gpt-4"
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    max_tokens: int = DEFAULT_MAX_TOKENS
    temperature: float = 0.0
    parallelism: int = 2

    @classmethod
    def from_env(cls) -> "HttpConfig":
        base = os.environ.get("PROVIDER_BASE_URL", "")
        if not base:
            raise ProviderError("PROVIDER_BASE_URL is not set")
        return cls(
            base_url=base,
            api_key=os.environ.get("PROVIDER_API_KEY", ""),
            model=os.environ.get("PROVIDER_MODEL", "gpt-4"),
            timeout_ms=int(os.environ.get("PROVIDER_TIMEOUT_MS", DEFAULT_TIMEOUT_MS)),
            temperature=float(os.environ.get("PROVIDER_TEMPERATURE", "0")),
        )


class HttpProvider:
    """Chat-completions client: one retry on transport failure, none on format."""

    def __init__(self, config: HttpConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        self._semaphore = threading.BoundedSemaphore(max(1, config.parallelism))
        headers = {"Content-Type": "application/json"}
        if config.api_key:
            headers["Authorization"] = f"Bearer {config.api_key}"
        self._client = httpx.Client(headers=headers, transport=transport)

    def complete(self, prompt: PromptDoc, *, max_tokens: int | None = None,
                 timeout_ms: int | None = None) -> str:
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        body = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt.render()}],
            "max_tokens": max_tokens or self.config.max_tokens,
            "temperature": self.config.temperature,
        }
        timeout = (timeout_ms or self.config.timeout_ms) / 1000.0
        last_exc: Exception | None = None
        for attempt in range(2):
            try:
                with self._semaphore:
                    response = self._client.post(url, json=body, timeout=timeout)
            except httpx.HTTPError as exc:
                last_exc = exc
                continue  # one retry on transport failure
            if response.status_code >= 500 and attempt == 0:
                last_exc = ProviderError(f"server error {response.status_code}")
                continue
            if response.status_code != 200:
                raise ProviderError(
                    f"completion endpoint returned {response.status_code}",
                    detail=response.text[:500])
            try:
                doc = response.json()
                return doc["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise ProviderError(f"malformed completion response: {exc}") from exc
        raise ProviderError(f"transport failure after retry: {last_exc}")


def provider_from_id(provider_id: str) -> Provider:
    """CLI/service helper: ``mock`` or ``http`` (configured from env vars)."""
    if provider_id == "mock":
        return MockProvider()
    if provider_id == "http":
        return HttpProvider(HttpConfig.from_env())
    raise ProviderError(f"unknown provider id {provider_id!r}")
