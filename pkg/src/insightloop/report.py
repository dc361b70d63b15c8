"""Selective reporting: step records -> textual report -> beamer slides.

Provider-generated output is never trusted blind: replies are validated
against the step count and image names, and emitted LaTeX goes through
:func:`check_latex` before it is served.
"""

from __future__ import annotations

import io
import json
import re
from dataclasses import dataclass
from pathlib import Path

from PIL import Image, ImageDraw

from insightloop.errors import EmptyRound, MissingImage, PlanParseError, ProviderError
from insightloop.provider import build_prompt
from insightloop.session import StepRecord

DEFAULT_STYLE = "\\usetheme{default}\n\\setbeamertemplate{navigation symbols}{}"

PLACEHOLDER_SIZE = (800, 450)


@dataclass
class ReportItem:
    heading: str
    bullets: list[str]
    image_name: str

    def to_payload(self) -> dict:
        return {"heading": self.heading, "bullets": list(self.bullets),
                "imageName": self.image_name}


@dataclass
class ReportDoc:
    title: str
    items: list[ReportItem]
    conclusion: str

    def to_payload(self) -> dict:
        return {"title": self.title, "items": [i.to_payload() for i in self.items],
                "conclusion": self.conclusion}


def report_doc_from_payload(doc: dict) -> ReportDoc:
    items = [ReportItem(str(i.get("heading", "")),
                        [str(b) for b in i.get("bullets", [])],
                        str(i.get("imageName", "")))
             for i in doc.get("items", [])]
    return ReportDoc(str(doc.get("title", "")), items, str(doc.get("conclusion", "")))


@dataclass(frozen=True)
class LatexFinding:
    line: int
    message: str

    def to_payload(self) -> dict:
        return {"line": self.line, "message": self.message}


# --- step records -> textual report ------------------------------------------------

def step_tuples(records: list[StepRecord]) -> list[dict]:
    """The per-step 5-tuple source records feeding the report prompt."""
    tuples = []
    for record in records:
        if record.insights:
            top = record.insights[0].get("insight", record.insights[0])
            insight_text = top.get("description", "")
            typ = top.get("type", "insight")
            params = top.get("parameters", {})
            value = params.get("key") or params.get("keys") or params.get("value") \
                or params.get("r") or params.get("direction")
        else:
            insight_text = _describe_interaction(record.interaction)
            typ = "interaction"
            value = None
        tuples.append({
            "insight": insight_text,
            "type": typ,
            "value": value,
            "viewName": record.focused_view,
            "imageName": record.snapshot_ref,
        })
    return tuples


def _describe_interaction(interaction: dict | None) -> str:
    if not interaction:
        return "a self-motivated interaction"
    dim = interaction.get("dimName", "?")
    values = interaction.get("value", interaction.get("values", []))
    return f"the analyst selected {dim} = {', '.join(str(v) for v in values)}"


def template_report(records: list[StepRecord], task: str = "") -> ReportDoc:
    """Deterministic offline report, one item per step in step order."""
    steps = step_tuples(records)
    task = task or "the recorded exploration"
    items = []
    for i, step in enumerate(steps, start=1):
        bullets = [step["insight"] or "A step without textual findings."]
        if step["value"] not in (None, ""):
            bullets.append(f"Key value: {step['value']}")
        items.append(ReportItem(
            heading=f"Step {i}: {str(step['type']).replace('_', ' ').title()} "
                    f"on {step['viewName']}",
            bullets=bullets,
            image_name=step["imageName"],
        ))
    conclusion = (f"Across {len(steps)} steps, the analysis of {task} surfaced the "
                  "findings above; the flagged views and values are the place to act.")
    return ReportDoc(f"Insight Report: {task}", items, conclusion)


def summarize(records: list[StepRecord], provider, *, task: str = "",
              notes: list[str] | None = None) -> ReportDoc:
    """Turn a closed round's records into a report document.

    One item per step, with a cover title and a conclusion. Provider output
    failing the structural contract falls back to the offline template.
    """
    if not records:
        raise EmptyRound("the selected round has no steps")
    prompt = build_prompt("report", history=step_tuples(records), task=task)
    try:
        reply = provider.complete(prompt)
        doc = _parse_report_reply(reply)
    except (ProviderError, PlanParseError) as exc:
        if notes is not None:
            notes.append(f"provider report unavailable ({exc}); template used")
        return template_report(records, task)
    refs = {r.snapshot_ref for r in records}
    if len(doc.items) != len(records) or not all(i.image_name in refs for i in doc.items):
        if notes is not None:
            notes.append("provider report failed the step contract; template used")
        return template_report(records, task)
    if not doc.title or not doc.conclusion:
        if notes is not None:
            notes.append("provider report missing title/conclusion; template used")
        return template_report(records, task)
    return doc


def _parse_report_reply(text: str) -> ReportDoc:
    decoder = json.JSONDecoder()
    stripped = text.strip()
    doc = None
    try:
        candidate = json.loads(stripped)
        if isinstance(candidate, dict):
            doc = candidate
    except json.JSONDecodeError:
        pass
    if doc is None:
        for i, ch in enumerate(text):
            if ch == "{":
                try:
                    candidate, _ = decoder.raw_decode(text[i:])
                except json.JSONDecodeError:
                    continue
                if isinstance(candidate, dict) and "items" in candidate:
                    doc = candidate
                    break
    if doc is None:
        raise PlanParseError("no JSON report object found in the reply")
    return report_doc_from_payload(doc)


# --- textual report -> beamer slides ------------------------------------------------

_LATEX_SPECIALS = {
    "\\": r"\textbackslash{}",
    "&": r"\&", "%": r"\%", "$": r"\$", "#": r"\#", "_": r"\_",
    "{": r"\{", "}": r"\}", "~": r"\textasciitilde{}", "^": r"\textasciicircum{}",
}


def latex_escape(text: str) -> str:
    return "".join(_LATEX_SPECIALS.get(ch, ch) for ch in str(text))


def emit_latex(doc: ReportDoc, style: str = DEFAULT_STYLE, *,
               image_dir: str = "snapshots", strict: bool = False,
               snapshot_dir=None) -> str:
    """Beamer source: title frame, one frame per item, conclusion frame.

    ``style`` is injected verbatim after the documentclass. With ``strict``
    every referenced image must already exist under ``snapshot_dir``.
    """
    lines = ["\\documentclass{beamer}"]
    if style:
        lines.append(style)
    lines += [
        f"\\title{{{latex_escape(doc.title)}}}",
        "\\date{}",
        "\\begin{document}",
        "",
        "\\begin{frame}",
        "\\titlepage",
        "\\end{frame}",
    ]
    for item in doc.items:
        image_path = f"{image_dir}/{item.image_name}.png"
        if strict and snapshot_dir is not None:
            if not (Path(snapshot_dir) / f"{item.image_name}.png").exists():
                raise MissingImage(f"no snapshot image for {item.image_name!r}")
        lines += ["", f"\\begin{{frame}}{{{latex_escape(item.heading)}}}"]
        if item.bullets:
            lines.append("\\begin{itemize}")
            lines += [f"    \\item {latex_escape(b)}" for b in item.bullets]
            lines.append("\\end{itemize}")
        lines += [
            "\\centering",
            f"\\includegraphics[width=0.8\\textwidth]{{\"{image_path}\"}}",
            "\\end{frame}",
        ]
    lines += [
        "",
        "\\begin{frame}{Conclusion}",
        "\\begin{itemize}",
        f"    \\item {latex_escape(doc.conclusion)}",
        "\\end{itemize}",
        "\\end{frame}",
        "",
        "\\end{document}",
        "",
    ]
    return "\n".join(lines)


_BEGIN_RE = re.compile(r"\\begin\{(document|frame|itemize)\}")
_END_RE = re.compile(r"\\end\{(document|frame|itemize)\}")
_GRAPHICS_RE = re.compile(r"\\includegraphics(?:\[[^\]]*\])?\{\"?([^\"}]+)\"?\}")
_PREAMBLE_OK = ("\\documentclass", "\\title", "\\date", "%")


def check_latex(src: str, snapshot_dir=None, style: str = DEFAULT_STYLE) -> list[LatexFinding]:
    """Structural audit of (possibly provider-generated) beamer source.

    Checks balanced document/frame/itemize pairs, image references against the
    snapshot directory if one is given, and preamble commands against the
    injected style block.
    """
    findings: list[LatexFinding] = []
    stack: list[tuple[str, int]] = []
    style_lines = {line.strip() for line in style.splitlines() if line.strip()}
    in_document = False
    for lineno, line in enumerate(src.splitlines(), start=1):
        for match in _BEGIN_RE.finditer(line):
            if match.group(1) == "document":
                in_document = True
            stack.append((match.group(1), lineno))
        for match in _END_RE.finditer(line):
            env = match.group(1)
            if not stack or stack[-1][0] != env:
                findings.append(LatexFinding(lineno, f"unbalanced \\end{{{env}}}"))
            else:
                stack.pop()
        for match in _GRAPHICS_RE.finditer(line):
            if snapshot_dir is None:
                continue
            target = Path(snapshot_dir) / Path(match.group(1)).name
            if not target.exists():
                findings.append(LatexFinding(
                    lineno, f"image {match.group(1)!r} not found"))
        stripped = line.strip()
        if (not in_document and stripped.startswith("\\")
                and not stripped.startswith(_PREAMBLE_OK)
                and stripped not in style_lines
                and not _BEGIN_RE.search(stripped)):
            findings.append(LatexFinding(
                lineno, f"preamble command outside the style block: {stripped[:40]}"))
    for env, lineno in stack:
        findings.append(LatexFinding(lineno, f"\\begin{{{env}}} never closed"))
    return findings


def frame_count(src: str) -> int:
    return len(re.findall(r"\\begin\{frame\}", src))


# --- placeholder snapshots ------------------------------------------------------------

def render_placeholder(data: dict) -> bytes:
    """Deterministic 800x450 bar/line rendering of a step's data snapshot."""
    width, height = PLACEHOLDER_SIZE
    img = Image.new("RGB", (width, height), "white")
    draw = ImageDraw.Draw(img)
    margin = 60
    plot_w, plot_h = width - 2 * margin, height - 2 * margin
    draw.rectangle([margin, margin, width - margin, height - margin],
                   outline=(60, 60, 60))
    values = [float(v) for v in (data.get("values") or [])]
    keys = data.get("keys") or list(range(len(values)))
    title = f"{data.get('measure', '')} by {data.get('dimension', '')}"
    draw.text((margin, margin - 30), title.strip() or "data snapshot",
              fill=(20, 20, 20))
    if values:
        lo, hi = min(values), max(values)
        span = (hi - lo) or 1.0
        n = len(values)
        if data.get("kind") == "line" or n > 24:
            points = []
            for i, v in enumerate(values):
                x = margin + (plot_w * i / max(n - 1, 1))
                y = height - margin - plot_h * (v - lo) / span
                points.append((x, y))
            if len(points) > 1:
                draw.line(points, fill=(31, 119, 180), width=3)
            else:
                draw.ellipse([points[0][0] - 3, points[0][1] - 3,
                              points[0][0] + 3, points[0][1] + 3],
                             fill=(31, 119, 180))
        else:
            slot = plot_w / n
            for i, v in enumerate(values):
                bar_h = plot_h * (v - lo + 0.05 * span) / (1.05 * span)
                x0 = margin + i * slot + slot * 0.15
                x1 = margin + (i + 1) * slot - slot * 0.15
                draw.rectangle([x0, height - margin - bar_h, x1, height - margin],
                               fill=(31, 119, 180))
        if keys:
            draw.text((margin, height - margin + 8), str(keys[0]), fill=(90, 90, 90))
            draw.text((width - margin - 60, height - margin + 8), str(keys[-1]),
                      fill=(90, 90, 90))
    buffer = io.BytesIO()
    img.save(buffer, format="PNG")
    return buffer.getvalue()


def ensure_snapshot_images(records: list[StepRecord], snapshot_dir) -> list[Path]:
    """Guarantee a PNG per snapshot ref, rendering placeholders where needed."""
    snapshot_dir = Path(snapshot_dir)
    snapshot_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for record in records:
        target = snapshot_dir / f"{record.snapshot_ref}.png"
        if not target.exists():
            target.write_bytes(render_placeholder(record.snapshot_data))
            written.append(target)
    return written
