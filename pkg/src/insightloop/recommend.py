"""Two-step recommendation pipeline.

Step 1 (:func:`plan`) asks the provider which insight functions fit the live
selection and task; Step 2 (:func:`execute` then :func:`assess`) runs the
native statistics and folds significance, impact and relevance into one
ranked score. :func:`annotate` finally pins each scored insight to concrete
view elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from insightloop import insights as insights_mod
from insightloop import provider as provider_mod
from insightloop.errors import (
    AnnotationTargetMissing,
    InsightLoopError,
    PlanParseError,
    ProviderError,
    SubjectResolutionError,
    UnknownView,
)
from insightloop.insights import (
    PROVIDER_DEFAULT_SIGNIFICANCE,
    PROVIDER_ROUTED,
    Insight,
    InsightType,
    SignificanceDetail,
    Subject,
)
from insightloop.spec import SystemSpec, ViewStyleInfo
from insightloop.tabular import SubspaceFilter, Table, apply_subspace, coverage, group_aggregate

STEP1_RELEVANCE_CUTOFF = 0.2
CROSS_VIEW_CAP = 2
SCORED_CAP = 5


@dataclass(frozen=True)
class Triple:
    """⟨viewName, dimName, value⟩ — the selection/annotation currency."""

    view_name: str
    dim_name: str
    values: tuple

    def to_payload(self) -> dict:
        return {"viewName": self.view_name, "dimName": self.dim_name,
                "value": list(self.values)}

    @classmethod
    def from_payload(cls, doc: dict) -> "Triple":
        values = doc.get("value", doc.get("values", []))
        if not isinstance(values, list):
            values = [values]
        return cls(doc["viewName"], doc["dimName"], tuple(values))


@dataclass
class Selection:
    """Live selection triples, including retained context from prior steps."""

    triples: list[Triple] = field(default_factory=list)

    def validate(self, spec: SystemSpec) -> None:
        for t in self.triples:
            if not spec.has_view(t.view_name):
                raise UnknownView(f"selection references unknown view {t.view_name!r}")
            if not t.values:
                raise SubjectResolutionError(
                    f"selection on {t.view_name!r}/{t.dim_name!r} has no values")

    def to_payload(self) -> list[dict]:
        return [t.to_payload() for t in self.triples]

    @property
    def view_names(self) -> list[str]:
        seen: list[str] = []
        for t in self.triples:
            if t.view_name not in seen:
                seen.append(t.view_name)
        return seen


@dataclass(frozen=True)
class PlannedInsight:
    """Step-1 quadruple plus the provider's relevance score."""

    function_name: str
    view_names: tuple[str, ...]
    variable_names: tuple[str, ...]
    dim_name: str
    relevance: float

    @property
    def view_name(self) -> str:
        return self.view_names[0]

    @property
    def variable_name(self) -> str:
        return self.variable_names[0]

    @property
    def cross_view(self) -> bool:
        return len(self.view_names) > 1

    def to_payload(self) -> dict:
        view = list(self.view_names) if self.cross_view else self.view_names[0]
        variable = (list(self.variable_names) if len(self.variable_names) > 1
                    else self.variable_names[0])
        return {"functionName": self.function_name, "viewName": view,
                "variableName": variable, "dimName": self.dim_name,
                "relevance": self.relevance}


@dataclass(frozen=True)
class ScoreWeights:
    """Weights of the combined insight score; they must sum to 1."""

    significance: float = 0.5
    impact: float = 0.2
    relevance: float = 0.3

    def __post_init__(self):
        total = self.significance + self.impact + self.relevance
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {total}")
        if min(self.significance, self.impact, self.relevance) < 0:
            raise ValueError("weights must be non-negative")

    def combine(self, significance: float, impact: float, relevance: float) -> float:
        return (self.significance * significance + self.impact * impact
                + self.relevance * relevance)


@dataclass(frozen=True)
class FunctionDescriptor:
    name: str
    description: str

    def to_payload(self) -> dict:
        return {"name": self.name, "description": self.description}


@dataclass
class ScoredInsight:
    insight: Insight
    impact: float
    relevance: float
    combined: float
    annotation: list[Triple] = field(default_factory=list)
    explanation: str | None = None
    scoring_source: str = "provider"  # "provider" | "mock"

    def to_payload(self) -> dict:
        return {
            "insight": self.insight.to_payload(),
            "impact": self.impact,
            "relevance": self.relevance,
            "combined": self.combined,
            "annotation": [t.to_payload() for t in self.annotation],
            "explanation": self.explanation,
            "scoringSource": self.scoring_source,
        }


@dataclass
class ExecutionFailure:
    plan: PlannedInsight
    error: str
    message: str


@dataclass
class ExecuteResult:
    insights: list[Insight]
    failures: list[ExecutionFailure]


# --- step 1: planning ---------------------------------------------------------

def _view_summary(view: ViewStyleInfo, selected: bool) -> dict:
    dim = view.dimension_ref()
    return {
        "viewName": view.view_name,
        "selected": selected,
        "dimension": {"field": dim.field, "fieldType": dim.field_type} if dim else None,
        "measures": [{"field": m.field, "fieldType": m.field_type}
                     for m in view.measure_refs()],
    }


def reachable_views(spec: SystemSpec, selection: Selection) -> list[str]:
    """Selected views plus everything their coordinations point at, in order."""
    names: list[str] = []
    for view_name in selection.view_names:
        if view_name not in names:
            names.append(view_name)
        for c in spec.coordinations:
            if c.source_view_name == view_name and c.target_view_name not in names:
                names.append(c.target_view_name)
    if not names:
        names = list(spec.view_names)
    return names


def plan(spec: SystemSpec, selection: Selection, task: str,
         registry: list[FunctionDescriptor], provider, *,
         threshold: float = STEP1_RELEVANCE_CUTOFF,
         cross_view_cap: int = CROSS_VIEW_CAP,
         notes: list[str] | None = None) -> list[PlannedInsight]:
    """Step 1: select insight types for the current selection and task.

    Plans referencing unregistered functions or unreachable views are dropped
    with a note; survivors are sorted by relevance (descending, stable) after
    the low-relevance cutoff, with cross-view plans capped.
    """
    selection.validate(spec)
    reachable = reachable_views(spec, selection)
    selected = set(selection.view_names)
    summaries = [_view_summary(spec.view(name), name in selected) for name in reachable]
    coords = [c.to_document() for c in spec.coordinations
              if c.source_view_name in reachable or c.target_view_name in reachable]

    prompt = provider_mod.build_prompt(
        "type_selection",
        selection=selection.to_payload(),
        view_style_info=[spec.view(name).to_document() for name in reachable],
        coordination_info=coords,
        task=task,
        function_apis=[f.to_payload() for f in registry],
        view_summaries=summaries,
    )
    reply = provider.complete(prompt)
    raw_plans = provider_mod.parse_plan_reply(reply, notes)

    registered = {f.name for f in registry}
    reachable_set = set(reachable)
    kept: list[PlannedInsight] = []
    cross_count = 0
    for p in raw_plans:
        if p.function_name not in registered:
            _append_note(notes, f"plan for unregistered function "
                                f"{p.function_name!r} dropped")
            continue
        if any(v not in reachable_set for v in p.view_names):
            _append_note(notes, f"plan on unreachable view(s) {p.view_names} dropped")
            continue
        if p.relevance < threshold:
            continue
        if p.cross_view:
            if cross_count >= cross_view_cap:
                _append_note(notes, f"cross-view plan {p.function_name} beyond the "
                                    f"per-step cap dropped")
                continue
            cross_count += 1
        kept.append(p)
    kept.sort(key=lambda p: -p.relevance)  # stable: emission order breaks ties
    return kept


def _append_note(notes, message: str):
    if notes is not None:
        notes.append(message)


QUESTION_TEMPLATES = {
    "change_point": "Is there a significant change point in {measure} over {dim}?",
    "trend": "What is the trend of {measure} over {dim}?",
    "seasonality": "Does {measure} repeat periodically over {dim}?",
    "correlation": "Is there a correlation between {measure} and {measure2}?",
    "outstanding_no1": "What is the outstanding No.1 {measure} by {dim}?",
    "outstanding_top2": "What are the outstanding top 2 {measure} values by {dim}?",
    "outstanding_last": "What is the outstanding last {measure} by {dim}?",
    "outlier": "Are there outlier {measure} values by {dim}?",
    "attribution": "Which {dim} contributes most of {measure}?",
    "evenness": "Is {measure} spread evenly across {dim}?",
    "value_retrieval": "What is the {measure} value for a chosen {dim}?",
}


def propose_questions(plans: list[PlannedInsight]) -> list[str]:
    """One human-readable question per plan, order preserved."""
    questions = []
    for p in plans:
        template = QUESTION_TEMPLATES.get(
            p.function_name, "What is the {type} of {measure} by {dim}?")
        questions.append(template.format(
            type=p.function_name.replace("_", " "),
            measure=p.variable_names[0],
            measure2=p.variable_names[-1],
            dim=p.dim_name,
        ))
    return questions


# --- step 2: execution ----------------------------------------------------------

def subspace_for_view(spec: SystemSpec, selection: Selection, view_name: str) -> SubspaceFilter:
    """Selection triples that filter into a view via its incoming coordinations."""
    pairs = []
    for t in selection.triples:
        if t.view_name == view_name:
            continue
        for c in spec.coordinations:
            if (c.source_view_name == t.view_name
                    and c.target_view_name == view_name
                    and c.coordination_type in ("filter", "brush")):
                pairs.append((t.dim_name, t.values))
                break
    return SubspaceFilter.from_pairs(pairs)


def view_aggregate(spec: SystemSpec, table: Table, selection: Selection,
                    view_name: str, measure: str, dim: str):
    view = spec.view(view_name)
    agg = "sum"
    for _, ref in view.fields():
        if ref.field == measure and isinstance(ref.extra.get("aggregate"), str):
            agg = ref.extra["aggregate"]
    subspace = subspace_for_view(spec, selection, view_name)
    sliced = apply_subspace(table, subspace)
    series = group_aggregate(sliced, dim, measure, agg)
    return series, subspace


def execute(plans: list[PlannedInsight], table: Table, selection: Selection,
            spec: SystemSpec, provider=None,
            context: list[Insight] | None = None) -> ExecuteResult:
    """Step 2a: run each plan; failures are collected, never fatal."""
    done: list[Insight] = []
    failures: list[ExecutionFailure] = []
    for p in plans:
        try:
            done.append(_execute_one(p, table, selection, spec, provider, context))
        except InsightLoopError as exc:
            failures.append(ExecutionFailure(p, exc.code, str(exc)))
    return ExecuteResult(done, failures)


def _execute_one(p: PlannedInsight, table: Table, selection: Selection,
                 spec: SystemSpec, provider, context) -> Insight:
    if not spec.has_view(p.view_name):
        raise SubjectResolutionError(f"plan names unknown view {p.view_name!r}")
    for col in (p.dim_name, *p.variable_names):
        if col not in table.column_names:
            raise SubjectResolutionError(f"column {col!r} not in dataset {table.name!r}")

    if p.function_name in {t.value for t in PROVIDER_ROUTED}:
        return _execute_provider_routed(p, table, selection, spec, provider, context)

    correlation_names = (InsightType.CORRELATION.value,
                         InsightType.CROSS_VIEW_CORRELATION.value)
    if p.function_name in correlation_names or p.cross_view:
        if len(p.view_names) != 2 or len(p.variable_names) != 2:
            raise SubjectResolutionError(
                f"{p.function_name} needs exactly two views and two measures, "
                f"got {len(p.view_names)} and {len(p.variable_names)}")
        series = []
        subspaces = []
        for view_name, measure in zip(p.view_names, p.variable_names):
            s, sub = view_aggregate(spec, table, selection, view_name, measure,
                                     p.dim_name)
            series.append(s)
            subspaces.append(sub)
        subject = Subject(subspaces[0], p.dim_name, p.variable_names[0],
                          _context_payload(context))
        insight = insights_mod.correlation(series[0], series[1], subject=subject,
                                           views=list(p.view_names))
        return insight

    fn = insights_mod.SERIES_FUNCTIONS.get(p.function_name)
    if fn is None:
        raise SubjectResolutionError(f"no native function {p.function_name!r}")
    series, subspace = view_aggregate(spec, table, selection, p.view_name,
                                       p.variable_name, p.dim_name)
    subject = Subject(subspace, p.dim_name, p.variable_name, _context_payload(context))
    return fn(series, subject=subject, views=[p.view_name])


def _context_payload(context) -> list | None:
    if not context:
        return None
    return [c.description if isinstance(c, Insight) else str(c) for c in context]


def _execute_provider_routed(p, table, selection, spec, provider, context) -> Insight:
    if provider is None:
        raise SubjectResolutionError(
            f"{p.function_name} is provider-routed and no provider was given")
    subspace = subspace_for_view(spec, selection, p.view_name)
    sliced = apply_subspace(table, subspace)
    sample_cols = {c.name: (list(c.values[:50]) if c.kind == "number"
                            else c.values[:50])
                   for c in sliced.columns}
    prompt = provider_mod.build_prompt(
        "open_question",
        question=f"Provide a {p.function_name.replace('_', ' ')} of "
                 f"{p.variable_name} in view {p.view_name}.",
        state={"subspace": subspace.to_payload(), "columns": sample_cols},
    )
    reply = provider.complete(prompt)
    braces = provider_mod.parse_braced_answers(reply)
    significance = PROVIDER_DEFAULT_SIGNIFICANCE
    for value in braces:
        if isinstance(value, (int, float)) and 0.0 <= float(value) <= 1.0:
            significance = float(value)
            break
    subject = Subject(subspace, p.dim_name, p.variable_name, _context_payload(context))
    detail = SignificanceDetail(1.0 - significance, 0.0, "provider-asserted")
    return Insight(InsightType(p.function_name), {"reply": reply.strip()}, subject,
                   significance, reply.strip().splitlines()[0] if reply.strip() else "",
                   [p.view_name], detail)


# --- step 2b: assessment ----------------------------------------------------------

def _result_payload(i: int, insight: Insight, base: Table) -> dict:
    cov = 1.0
    if insight.subject is not None and base.row_count > 0:
        cov = coverage(apply_subspace(base, insight.subject.subspace), base)
    measures = [insight.subject.measure] if insight.subject and insight.subject.measure \
        else []
    if insight.type == InsightType.CORRELATION and insight.views:
        measures = list(insight.views)
    return {
        "index": i,
        "type": insight.type.value,
        "description": insight.description,
        "significance": insight.significance,
        "parameters": _plain(insight.parameters),
        "dimension": insight.subject.dimension if insight.subject else None,
        "measure": insight.subject.measure if insight.subject else None,
        "measures": measures,
        "views": list(insight.views),
        "coverage": cov,
        "annotation": [t.to_payload() for t in derive_annotation(insight)],
    }


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "item"):  # numpy scalar
        return value.item()
    return value


def _mock_entry(result: dict, task: str) -> dict:
    words = " ".join([
        str(result.get("type", "")).replace("_", " "),
        str(result.get("dimension") or ""),
        str(result.get("measure") or ""),
    ])
    return {
        "insightRef": result["index"],
        "impact": float(result.get("coverage", 0.5)),
        "relevance": provider_mod.jaccard_overlap(task, words),
        "explanation": provider_mod.mock_explanation(result),
        "annotationTriples": result.get("annotation", []),
        "scoring": "mock",
    }


def assess(insights: list[Insight], task: str, base: Table, provider,
           weights: ScoreWeights = ScoreWeights(), *,
           cap: int = SCORED_CAP, notes: list[str] | None = None) -> list[ScoredInsight]:
    """Step 2b: attach impact/relevance and rank by the combined score.

    Provider failures fall back to the deterministic offline formulas
    (impact = subspace coverage, relevance = task-token Jaccard), flagged via
    ``scoring_source = "mock"``.
    """
    if not insights:
        return []
    results = [_result_payload(i, ins, base) for i, ins in enumerate(insights)]
    prompt = provider_mod.build_prompt("assessment", insight_results=results, task=task)
    try:
        reply = provider.complete(prompt)
        entries = provider_mod.parse_assessment_reply(reply, notes)
    except (ProviderError, PlanParseError) as exc:
        _append_note(notes, f"provider assessment unavailable ({exc}); "
                            "deterministic mock scoring used")
        entries = [_mock_entry(r, task) for r in results]

    by_ref = {}
    for entry in entries:
        by_ref.setdefault(entry.get("insightRef"), entry)
    scored: list[ScoredInsight] = []
    for i, insight in enumerate(insights):
        entry = by_ref.get(i)
        if entry is None:
            _append_note(notes, f"no assessment entry for insight {i}; "
                                "mock scoring used")
            entry = _mock_entry(results[i], task)
        combined = weights.combine(insight.significance, entry["impact"],
                                   entry["relevance"])
        scored.append(ScoredInsight(
            insight=insight,
            impact=entry["impact"],
            relevance=entry["relevance"],
            combined=combined,
            annotation=[Triple.from_payload(t)
                        for t in entry.get("annotationTriples", [])],
            explanation=entry.get("explanation") or insight.description,
            scoring_source=entry.get("scoring", "provider"),
        ))
    scored.sort(key=lambda s: -s.combined)  # stable on ties
    return scored[:cap]


# --- annotation --------------------------------------------------------------------

def derive_annotation(insight: Insight) -> list[Triple]:
    """Native annotation triples for an insight's evidence."""
    params = insight.parameters
    dim = insight.subject.dimension if insight.subject else None
    if dim is None:
        return []
    triples: list[Triple] = []
    keys = None
    if insight.type in (InsightType.OUTSTANDING_NO1, InsightType.OUTSTANDING_LAST,
                        InsightType.ATTRIBUTION, InsightType.VALUE_RETRIEVAL):
        keys = [params.get("key")]
    elif insight.type == InsightType.OUTSTANDING_TOP2:
        keys = list(params.get("keys", []))
    elif insight.type == InsightType.OUTLIER:
        keys = list(params.get("keys", []))
    elif insight.type == InsightType.CHANGE_POINT:
        keys = [params.get("key")]
    if keys is not None:
        keys = [k for k in keys if k is not None]
        if keys:
            triples.append(Triple(insight.views[0], dim, tuple(keys)))
        return triples
    # Range-shaped insights annotate the dimension extent on every view.
    extent = params.get("extent")
    for view in insight.views:
        triples.append(Triple(view, dim, tuple(extent) if extent else ("*",)))
    return triples


def annotate(scored: list[ScoredInsight], spec: SystemSpec) -> list[ScoredInsight]:
    """Fill validated annotation triples on each scored insight.

    Raises :class:`AnnotationTargetMissing` when an insight references a view
    or dimension the spec does not know.
    """
    for s in scored:
        triples = derive_annotation(s.insight) or s.annotation
        for t in triples:
            if not spec.has_view(t.view_name):
                raise AnnotationTargetMissing(
                    f"insight references unknown view {t.view_name!r}")
            view = spec.view(t.view_name)
            if t.dim_name not in view.field_names():
                raise AnnotationTargetMissing(
                    f"view {t.view_name!r} does not encode {t.dim_name!r}")
        s.annotation = triples
    return scored
