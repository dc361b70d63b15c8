"""Declarative VA-system specification: parsing, validation, queries, tutorials.

The concrete encoding is JSON (``*.vaspec.json``). The grammar is open:
unknown keys at any level are preserved verbatim and round-trip through
:func:`serialize_spec`. Channel names inside encodings are free-form.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from insightloop.errors import MalformedTutorial, ProviderError, SchemaError, SpecSyntaxError, UnknownView

FIELD_TYPES = ("quantitative", "temporal", "nominal", "ordinal")
COORDINATION_TYPES = ("filter", "brush", "highlight", "navigate")


@dataclass
class FieldRef:
    field: str
    field_type: str
    extra: dict = field(default_factory=dict)

    def to_document(self) -> dict:
        return {"field": self.field, "fieldType": self.field_type, **self.extra}


@dataclass
class Layer:
    mark: str
    encoding: dict[str, FieldRef]
    extra: dict = field(default_factory=dict)

    def to_document(self) -> dict:
        return {
            "mark": self.mark,
            "encoding": {ch: ref.to_document() for ch, ref in self.encoding.items()},
            **self.extra,
        }


@dataclass
class ViewStyleInfo:
    view_name: str
    layers: list[Layer]
    tooltip: list | None = None
    extra: dict = field(default_factory=dict)

    def to_document(self) -> dict:
        doc = {"viewName": self.view_name, "layers": [l.to_document() for l in self.layers]}
        if self.tooltip is not None:
            doc["tooltip"] = self.tooltip
        doc.update(self.extra)
        return doc

    def fields(self) -> list[tuple[str, FieldRef]]:
        """Every (channel, field ref) across layers, in declaration order."""
        out = []
        for layer in self.layers:
            out.extend(layer.encoding.items())
        return out

    def field_names(self) -> list[str]:
        names = [ref.field for _, ref in self.fields()]
        for item in self.tooltip or []:
            if isinstance(item, str):
                names.append(item)
            elif isinstance(item, dict) and "field" in item:
                names.append(item["field"])
        return names

    def dimension_ref(self) -> FieldRef | None:
        """First temporal/nominal/ordinal channel, the grouping axis."""
        for _, ref in self.fields():
            if ref.field_type in ("temporal", "nominal", "ordinal"):
                return ref
        return None

    def measure_refs(self) -> list[FieldRef]:
        return [ref for _, ref in self.fields() if ref.field_type == "quantitative"]


@dataclass
class ViewCoordinationInfo:
    source_view_name: str
    target_view_name: str
    coordination_type: str
    interaction: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_document(self) -> dict:
        return {
            "sourceViewName": self.source_view_name,
            "targetViewName": self.target_view_name,
            "coordinationType": self.coordination_type,
            "interaction": self.interaction,
            **self.extra,
        }


@dataclass
class SystemSpec:
    name: str
    view_count: int
    views_info: list[ViewStyleInfo]
    coordinations: list[ViewCoordinationInfo]
    system_extra: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def to_document(self) -> dict:
        return {
            "systemInfo": {"name": self.name, "viewCount": self.view_count,
                           **self.system_extra},
            "viewsInfo": [v.to_document() for v in self.views_info],
            "coordinations": [c.to_document() for c in self.coordinations],
            **self.extra,
        }

    @property
    def view_names(self) -> list[str]:
        return [v.view_name for v in self.views_info]

    def view(self, name: str) -> ViewStyleInfo:
        for v in self.views_info:
            if v.view_name == name:
                return v
        raise UnknownView(f"no view named {name!r}")

    def has_view(self, name: str) -> bool:
        return any(v.view_name == name for v in self.views_info)


@dataclass(frozen=True)
class CoordinationTarget:
    target_view_name: str
    coordination_type: str


@dataclass(frozen=True)
class ValidationFinding:
    severity: str  # "error" | "warning"
    path: str
    message: str

    def to_payload(self) -> dict:
        return {"severity": self.severity, "path": self.path, "message": self.message}


@dataclass
class TutorialStep:
    title: str
    description_html: str

    def to_payload(self) -> dict:
        return {"title": self.title, "description": self.description_html}


# --- parsing -------------------------------------------------------------------

def _expect(value, kind, path: str):
    if not isinstance(value, kind):
        names = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise SchemaError(f"expected {names}, got {type(value).__name__}", path=path)
    return value


def _field_ref(doc, path: str) -> FieldRef:
    _expect(doc, dict, path)
    if "field" not in doc:
        raise SchemaError("missing field", path=f"{path}.field")
    fname = _expect(doc["field"], str, f"{path}.field")
    ftype = doc.get("fieldType", "nominal")
    _expect(ftype, str, f"{path}.fieldType")
    if ftype not in FIELD_TYPES:
        raise SchemaError(f"fieldType must be one of {FIELD_TYPES}", path=f"{path}.fieldType")
    extra = {k: v for k, v in doc.items() if k not in ("field", "fieldType")}
    return FieldRef(fname, ftype, extra)


def parse_spec(text: str) -> SystemSpec:
    """Parse and structurally validate a spec document.

    Raises :class:`SpecSyntaxError` for malformed JSON and
    :class:`SchemaError` (naming the offending path) for structural
    violations. Unknown keys are preserved as opaque extension data.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecSyntaxError(f"not valid JSON: {exc}") from exc
    return system_spec_from_document(doc)


def system_spec_from_document(doc: dict) -> SystemSpec:
    _expect(doc, dict, "$")
    if "systemInfo" not in doc:
        raise SchemaError("missing systemInfo", path="systemInfo")
    info = _expect(doc["systemInfo"], dict, "systemInfo")
    name = _expect(info.get("name", ""), str, "systemInfo.name")
    view_count = _expect(info.get("viewCount", 0), int, "systemInfo.viewCount")
    system_extra = {k: v for k, v in info.items() if k not in ("name", "viewCount")}

    if "viewsInfo" not in doc:
        raise SchemaError("missing viewsInfo", path="viewsInfo")
    views_doc = _expect(doc["viewsInfo"], list, "viewsInfo")
    views: list[ViewStyleInfo] = []
    for i, vdoc in enumerate(views_doc):
        path = f"viewsInfo[{i}]"
        _expect(vdoc, dict, path)
        if "viewName" not in vdoc:
            raise SchemaError("missing viewName", path=f"{path}.viewName")
        vname = _expect(vdoc["viewName"], str, f"{path}.viewName")
        layers_doc = _expect(vdoc.get("layers", []), list, f"{path}.layers")
        if not layers_doc:
            raise SchemaError("view needs at least one layer", path=f"{path}.layers")
        layers = []
        for j, ldoc in enumerate(layers_doc):
            lpath = f"{path}.layers[{j}]"
            _expect(ldoc, dict, lpath)
            mark = _expect(ldoc.get("mark", ""), str, f"{lpath}.mark")
            enc_doc = _expect(ldoc.get("encoding", {}), dict, f"{lpath}.encoding")
            if not enc_doc:
                raise SchemaError("layer needs at least one encoding channel",
                                  path=f"{lpath}.encoding")
            encoding = {ch: _field_ref(ref, f"{lpath}.encoding.{ch}")
                        for ch, ref in enc_doc.items()}
            extra = {k: v for k, v in ldoc.items() if k not in ("mark", "encoding")}
            layers.append(Layer(mark, encoding, extra))
        tooltip = vdoc.get("tooltip")
        if tooltip is not None:
            _expect(tooltip, list, f"{path}.tooltip")
        extra = {k: v for k, v in vdoc.items()
                 if k not in ("viewName", "layers", "tooltip")}
        views.append(ViewStyleInfo(vname, layers, tooltip, extra))

    if view_count != len(views):
        raise SchemaError(
            f"viewCount is {view_count} but viewsInfo has {len(views)} entries",
            path="systemInfo.viewCount")
    seen = set()
    for i, v in enumerate(views):
        if v.view_name in seen:
            raise SchemaError(f"duplicate viewName {v.view_name!r}",
                              path=f"viewsInfo[{i}].viewName")
        seen.add(v.view_name)

    coords_doc = _expect(doc.get("coordinations", []), list, "coordinations")
    coordinations = []
    for i, cdoc in enumerate(coords_doc):
        path = f"coordinations[{i}]"
        _expect(cdoc, dict, path)
        source = _expect(cdoc.get("sourceViewName", ""), str, f"{path}.sourceViewName")
        target = _expect(cdoc.get("targetViewName", ""), str, f"{path}.targetViewName")
        ctype = _expect(cdoc.get("coordinationType", ""), str, f"{path}.coordinationType")
        if ctype not in COORDINATION_TYPES:
            raise SchemaError(f"coordinationType must be one of {COORDINATION_TYPES}",
                              path=f"{path}.coordinationType")
        if source not in seen:
            raise SchemaError(f"unknown view {source!r}", path=f"{path}.sourceViewName")
        if target not in seen:
            raise SchemaError(f"unknown view {target!r}", path=f"{path}.targetViewName")
        if source == target and ctype != "highlight":
            raise SchemaError("self-coordination is only allowed for highlight",
                              path=f"{path}.targetViewName")
        interaction = cdoc.get("interaction", [])
        _expect(interaction, list, f"{path}.interaction")
        extra = {k: v for k, v in cdoc.items()
                 if k not in ("sourceViewName", "targetViewName", "coordinationType",
                              "interaction")}
        coordinations.append(ViewCoordinationInfo(source, target, ctype, interaction, extra))

    extra = {k: v for k, v in doc.items()
             if k not in ("systemInfo", "viewsInfo", "coordinations")}
    return SystemSpec(name, view_count, views, coordinations, system_extra, extra)


def serialize_spec(spec: SystemSpec) -> str:
    return json.dumps(spec.to_document(), indent=2, ensure_ascii=False)


# --- validation ------------------------------------------------------------------

def validate_spec(spec: SystemSpec, schema: list[str] | None = None) -> list[ValidationFinding]:
    """Non-fatal invariant audit; optionally checks field refs against columns.

    Pure: identical inputs produce an identical report.
    """
    findings: list[ValidationFinding] = []

    def err(path, message):
        findings.append(ValidationFinding("error", path, message))

    if spec.view_count != len(spec.views_info):
        err("systemInfo.viewCount",
            f"viewCount is {spec.view_count} but viewsInfo has {len(spec.views_info)} entries")
    seen: dict[str, int] = {}
    for i, v in enumerate(spec.views_info):
        if v.view_name in seen:
            err(f"viewsInfo[{i}].viewName", f"duplicate viewName {v.view_name!r}")
        seen.setdefault(v.view_name, i)
        if not v.layers:
            err(f"viewsInfo[{i}].layers", "view needs at least one layer")
        for j, layer in enumerate(v.layers):
            if not layer.encoding:
                err(f"viewsInfo[{i}].layers[{j}].encoding",
                    "layer needs at least one encoding channel")
            for ch, ref in layer.encoding.items():
                if ref.field_type not in FIELD_TYPES:
                    err(f"viewsInfo[{i}].layers[{j}].encoding.{ch}.fieldType",
                        f"fieldType must be one of {FIELD_TYPES}")
                if schema is not None and ref.field not in schema:
                    err(f"viewsInfo[{i}].layers[{j}].encoding.{ch}.field",
                        f"field {ref.field!r} not present in the dataset")

    names = set(seen)
    for i, c in enumerate(spec.coordinations):
        if c.source_view_name not in names:
            err(f"coordinations[{i}].sourceViewName",
                f"unknown view {c.source_view_name!r}")
        if c.target_view_name not in names:
            err(f"coordinations[{i}].targetViewName",
                f"unknown view {c.target_view_name!r}")
        if c.coordination_type not in COORDINATION_TYPES:
            err(f"coordinations[{i}].coordinationType",
                f"coordinationType must be one of {COORDINATION_TYPES}")
        elif (c.source_view_name == c.target_view_name
              and c.coordination_type != "highlight"):
            err(f"coordinations[{i}].targetViewName",
                "self-coordination is only allowed for highlight")
    return findings


def coordination_targets(spec: SystemSpec, source_view: str) -> list[CoordinationTarget]:
    """Outgoing coordinations of a view, in declaration order."""
    if not spec.has_view(source_view):
        raise UnknownView(f"no view named {source_view!r}")
    return [CoordinationTarget(c.target_view_name, c.coordination_type)
            for c in spec.coordinations if c.source_view_name == source_view]


# --- tutorials -------------------------------------------------------------------

def template_tutorial(spec: SystemSpec) -> list[TutorialStep]:
    """Deterministic offline tutorial: system overview, then one step per view."""
    view_list = ", ".join(f"<i>{v}</i>" for v in spec.view_names)
    overview = (
        f"<b>{spec.name}</b> is a visual analytics system with "
        f"{spec.view_count} coordinated views"
        + (f": {view_list}." if view_list else ".")
        + " This tour introduces each view in turn, from the system level down."
    )
    steps = [TutorialStep(spec.name, overview)]
    for view in spec.views_info:
        parts = []
        for layer in view.layers:
            enc = " ".join(
                f"{channel} encodes <i>{ref.field}</i> ({ref.field_type})."
                for channel, ref in layer.encoding.items()
            )
            parts.append(f"<b>{layer.mark}</b> chart; {enc}")
        for c in spec.coordinations:
            if c.source_view_name == view.view_name:
                parts.append(
                    f"Interacting here {_effect_word(c.coordination_type)} "
                    f"<i>{c.target_view_name}</i>."
                )
        for c in spec.coordinations:
            if c.target_view_name == view.view_name and c.source_view_name != view.view_name:
                parts.append(
                    f"Selections in <i>{c.source_view_name}</i> "
                    f"{_effect_word(c.coordination_type)} this view."
                )
        steps.append(TutorialStep(view.view_name, " ".join(parts)))
    return steps


def _effect_word(coordination_type: str) -> str:
    return {
        "filter": "filters",
        "brush": "brushes",
        "highlight": "highlights",
        "navigate": "navigates",
    }.get(coordination_type, "updates")


_TAG_RE = re.compile(r"<(/?)([a-zA-Z][a-zA-Z0-9]*)[^<>]*?(/?)>")
_VOID_TAGS = {"br", "img", "hr", "input", "meta"}


def html_balanced(text: str) -> bool:
    """True when the markup's open/close tags nest properly."""
    stack: list[str] = []
    for closing, tag, selfclosed in _TAG_RE.findall(text):
        tag = tag.lower()
        if tag in _VOID_TAGS or selfclosed:
            continue
        if closing:
            if not stack or stack.pop() != tag:
                return False
        else:
            stack.append(tag)
    return not stack


def parse_tutorial_reply(text: str) -> list[TutorialStep]:
    """Extract tutorial steps from a provider reply.

    Expects a JSON array of ``{"title", "description"}`` objects; raises
    :class:`MalformedTutorial` otherwise.
    """
    candidate = _first_json_array(text)
    if candidate is None:
        raise MalformedTutorial("no step list found in the reply")
    steps = []
    for entry in candidate:
        if not isinstance(entry, dict) or "title" not in entry:
            raise MalformedTutorial("step entries need title and description")
        desc = entry.get("description") or entry.get("descriptionHtml") or ""
        if not isinstance(desc, str) or not desc.strip():
            raise MalformedTutorial(f"step {entry.get('title')!r} has no description")
        if not html_balanced(desc):
            raise MalformedTutorial(f"step {entry.get('title')!r} has unbalanced markup")
        steps.append(TutorialStep(str(entry["title"]), desc))
    if not steps:
        raise MalformedTutorial("the reply contained no steps")
    return steps


def _first_json_array(text: str):
    stripped = text.strip()
    try:
        doc = json.loads(stripped)
        if isinstance(doc, list):
            return doc
    except json.JSONDecodeError:
        pass
    decoder = json.JSONDecoder()
    for i, ch in enumerate(text):
        if ch == "[":
            try:
                doc, _ = decoder.raw_decode(text[i:])
            except json.JSONDecodeError:
                continue
            if isinstance(doc, list):
                return doc
    return None


def render_tutorial(spec: SystemSpec, provider, *, fallback: bool = True) -> list[TutorialStep]:
    """Top-down onboarding tour: overview first, then one step per view.

    Provider or parse failures fall back to :func:`template_tutorial` unless
    ``fallback`` is False. The mock provider reproduces the template, so the
    output is deterministic offline.
    """
    from insightloop.provider import build_prompt  # deferred: provider imports spec types

    prompt = build_prompt(
        "onboarding",
        spec_document=spec.to_document(),
        template_steps=[s.to_payload() for s in template_tutorial(spec)],
    )
    try:
        reply = provider.complete(prompt)
        return parse_tutorial_reply(reply)
    except (ProviderError, MalformedTutorial):
        if fallback:
            return template_tutorial(spec)
        raise
