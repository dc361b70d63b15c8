"""Command-line surface: serve, validate-spec, explore, bench, report."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from insightloop import bench as bench_mod
from insightloop import recommend, report as report_mod, session as session_mod
from insightloop.errors import InsightLoopError
from insightloop.provider import MockProvider, provider_from_id
from insightloop.recommend import FunctionDescriptor, Selection, Triple
from insightloop.spec import parse_spec, validate_spec
from insightloop.superstore import function_registry
from insightloop.tabular import load_csv


@click.group()
def main():
    """Insight recommendation engine for coordinated visual-analytics systems."""


@main.command("validate-spec")
@click.argument("spec_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--data", "data_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="CSV dataset to check encoding fields against.")
def validate_spec_cmd(spec_path, data_path):
    """Parse a spec file and audit its invariants; exit 1 on findings."""
    try:
        spec = parse_spec(Path(spec_path).read_text(encoding="utf-8"))
    except InsightLoopError as exc:
        click.echo(f"error: {exc}")
        sys.exit(1)
    schema = None
    if data_path:
        schema = load_csv(data_path).column_names
    findings = validate_spec(spec, schema)
    for f in findings:
        click.echo(f"{f.severity}: {f.path}: {f.message}")
    if findings:
        sys.exit(1)
    click.echo(f"ok: {spec.name} ({spec.view_count} views)")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--root", type=click.Path(file_okay=False), default="./insightloop-data",
              show_default=True, help="Storage root for sessions and reports.")
@click.option("--provider", "provider_id", default="mock", show_default=True,
              type=click.Choice(["mock", "http"]))
@click.option("--spec", "spec_paths", multiple=True,
              type=click.Path(exists=True, dir_okay=False), help="Preload spec files.")
@click.option("--data", "data_paths", multiple=True,
              type=click.Path(exists=True, dir_okay=False), help="Preload CSV datasets.")
def serve(host, port, root, provider_id, spec_paths, data_paths):
    """Run the HTTP API."""
    import uvicorn

    from insightloop.service import EngineState, create_app

    state = EngineState(Path(root), provider=provider_from_id(provider_id))
    for path in spec_paths:
        spec = parse_spec(Path(path).read_text(encoding="utf-8"))
        state.specs[Path(path).stem.replace(".vaspec", "")] = spec
        click.echo(f"loaded spec {Path(path).name}")
    for path in data_paths:
        table = load_csv(path)
        state.datasets[table.name] = table
        click.echo(f"loaded dataset {table.name} ({table.row_count} rows)")
    uvicorn.run(create_app(state), host=host, port=port)


@main.command()
@click.option("--tasks", default=",".join(bench_mod.SUPPORTED_TASKS), show_default=True)
@click.option("--rows", default=",".join(str(n) for n in bench_mod.DEFAULT_ROW_COUNTS),
              show_default=True)
@click.option("--trials", default=50, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--provider", "provider_id", default="mock", show_default=True,
              type=click.Choice(["mock", "http"]),
              help="mock = the native statistical oracle answering offline.")
@click.option("--error-rate", default=0.0, show_default=True,
              help="Corrupt this fraction of mock answers (self-validation).")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
def bench(tasks, rows, trials, seed, provider_id, error_rate, out_dir):
    """Run the accuracy benchmark grid and emit CSV + plot data."""
    config = bench_mod.BenchConfig(
        tasks=tuple(t.strip() for t in tasks.split(",") if t.strip()),
        row_counts=tuple(int(n) for n in rows.split(",") if n.strip()),
        trials=trials,
        seed=seed,
        provider_id=provider_id,
    )
    if provider_id == "mock":
        provider = bench_mod.OracleProvider(error_rate=error_rate, seed=seed)
    else:
        provider = provider_from_id(provider_id)
    result = bench_mod.run_suite(config, provider, out_dir=out_dir)
    csv_path, json_path = bench_mod.emit_results(result, out_dir)
    total = sum(c.correct_count for c in result.cells)
    trials_total = sum(c.trials for c in result.cells)
    click.echo(f"wrote {csv_path} and {json_path}")
    click.echo(f"accuracy: {total}/{trials_total}")


@main.command()
@click.option("--sessions", "sessions_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--session", "session_id", required=True)
@click.option("--round", "round_index", default=1, show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="./reports",
              show_default=True)
def report(sessions_dir, session_id, round_index, out_dir):
    """Generate the LaTeX report for a closed round of a persisted session."""
    session = session_mod.load(sessions_dir, session_id)
    records = session_mod.select_path(session, round_index)
    provider = MockProvider()
    doc = report_mod.summarize(records, provider, task=session.task)
    snapshot_dir = Path(sessions_dir) / session_id / "snapshots"
    report_mod.ensure_snapshot_images(records, snapshot_dir)
    tex = report_mod.emit_latex(doc, image_dir=str(snapshot_dir))
    findings = report_mod.check_latex(tex, snapshot_dir=snapshot_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    target = out / f"{session_id}_{round_index}.tex"
    target.write_text(tex, encoding="utf-8")
    click.echo(f"wrote {target} ({report_mod.frame_count(tex)} frames, "
               f"{len(findings)} findings)")


@main.command()
@click.option("--spec", "spec_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--data", "data_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--task", default="analyze the data", show_default=True)
@click.option("--provider", "provider_id", default="mock", show_default=True,
              type=click.Choice(["mock", "http"]))
@click.option("--functions", "functions_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="functions.json registry; defaults to the built-in list.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              default="./insightloop-data", show_default=True)
def explore(spec_path, data_path, task, provider_id, functions_path, out_dir):
    """Interactive terminal exploration loop mirroring the HTTP API."""
    spec = parse_spec(Path(spec_path).read_text(encoding="utf-8"))
    table = load_csv(data_path)
    provider = provider_from_id(provider_id)
    if functions_path:
        raw = json.loads(Path(functions_path).read_text(encoding="utf-8"))
        registry = [FunctionDescriptor(f["name"], f["description"]) for f in raw]
    else:
        registry = function_registry()
    session = session_mod.start_session(spec, table, task, session_id="cli")
    state = _ExploreState(spec, table, task, provider, registry, session)
    click.echo(f"exploring {spec.name} with {table.row_count} rows; task: {task}")
    click.echo("commands: views | select <view> | <dim> | <v1,v2> | questions | "
               "answer <k> | adopt <j> | end | report <round> | quit")
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        if line in ("quit", "exit"):
            break
        try:
            _explore_dispatch(state, line, Path(out_dir))
        except InsightLoopError as exc:
            click.echo(f"error[{exc.code}]: {exc}")
    click.echo("bye")


class _ExploreState:
    def __init__(self, spec, table, task, provider, registry, session):
        self.spec = spec
        self.table = table
        self.task = task
        self.provider = provider
        self.registry = registry
        self.session = session
        self.selection = Selection()
        self.plans: list = []
        self.questions: list[str] = []
        self.last_scored: list = []


def _explore_dispatch(state: _ExploreState, line: str, out_dir: Path):
    if line == "views":
        for name in state.spec.view_names:
            click.echo(f"  {name}")
        return
    if line.startswith("select "):
        # Separator is a spaced pipe: view names may themselves contain '|'.
        parts = [p.strip() for p in line[len("select "):].split(" | ")]
        if len(parts) != 3:
            click.echo("usage: select <view> | <dim> | <v1,v2>")
            return
        values = tuple(v.strip() for v in parts[2].split(",") if v.strip())
        state.selection = Selection([Triple(parts[0], parts[1], values)])
        notes: list[str] = []
        state.plans = recommend.plan(state.spec, state.selection, state.task,
                                     state.registry, state.provider, notes=notes)
        state.questions = recommend.propose_questions(state.plans)
        for note in notes:
            click.echo(f"note: {note}")
        click.echo(f"{len(state.questions)} questions proposed; top 5:")
        for i, q in enumerate(state.questions[:5]):
            click.echo(f"  [{i}] {q}")
        return
    if line == "questions":
        for i, q in enumerate(state.questions):
            click.echo(f"  [{i}] {q}")
        return
    if line.startswith("answer "):
        index = int(line.split()[1])
        if index < 0 or index >= len(state.plans):
            click.echo("no such question")
            return
        notes = []
        result = recommend.execute([state.plans[index]], state.table, state.selection,
                                   state.spec, state.provider)
        for failure in result.failures:
            click.echo(f"failed[{failure.error}]: {failure.message}")
        scored = recommend.assess(result.insights, state.task, state.table,
                                  state.provider, notes=notes)
        state.last_scored = recommend.annotate(scored, state.spec)
        for j, s in enumerate(state.last_scored):
            click.echo(f"  ({j}) {s.insight.description} "
                       f"[sig={s.insight.significance:.4f} imp={s.impact:.4f} "
                       f"rel={s.relevance:.4f} score={s.combined:.4f}]")
        return
    if line.startswith("adopt"):
        parts = line.split()
        index = int(parts[1]) if len(parts) > 1 else 0
        if index < 0 or index >= len(state.last_scored):
            click.echo("no such insight")
            return
        scored = state.last_scored[index]
        record = session_mod.record_step(
            state.session, scored.insight.views[0],
            insights=[scored.to_payload()],
            snapshot=session_mod.StepSnapshot(data=_cli_snapshot(state, scored)))
        click.echo(f"recorded step {record.step_index} ({record.snapshot_ref})")
        return
    if line == "end":
        summary = session_mod.end_round(state.session)
        click.echo(f"round {summary['round']} closed with {summary['steps']} steps")
        return
    if line.startswith("report"):
        parts = line.split()
        round_index = int(parts[1]) if len(parts) > 1 else 1
        records = session_mod.select_path(state.session, round_index)
        doc = report_mod.summarize(records, state.provider, task=state.task)
        session_dir = session_mod.persist(state.session, out_dir / "sessions")
        snapshot_dir = session_dir / "snapshots"
        report_mod.ensure_snapshot_images(records, snapshot_dir)
        tex = report_mod.emit_latex(doc, image_dir=str(snapshot_dir))
        findings = report_mod.check_latex(tex, snapshot_dir=snapshot_dir)
        reports_dir = out_dir / "reports"
        reports_dir.mkdir(parents=True, exist_ok=True)
        target = reports_dir / f"{state.session.session_id}_{round_index}.tex"
        target.write_text(tex, encoding="utf-8")
        click.echo(f"report: {report_mod.frame_count(tex)} frames, "
                   f"{len(findings)} findings")
        return
    click.echo(f"unknown command: {line}")


def _cli_snapshot(state: _ExploreState, scored) -> dict:
    from insightloop.tabular import apply_subspace, group_aggregate

    insight = scored.insight
    if insight.subject is None or not insight.subject.dimension:
        return {}
    try:
        sliced = apply_subspace(state.table, insight.subject.subspace)
        series = group_aggregate(sliced, insight.subject.dimension,
                                 insight.subject.measure or "", "sum")
    except InsightLoopError:
        return {}
    view = state.spec.view(insight.views[0])
    dim_ref = view.dimension_ref()
    payload = series.to_payload()
    payload["kind"] = ("line" if dim_ref is not None
                       and dim_ref.field_type == "temporal" else "bar")
    return payload


if __name__ == "__main__":
    main()
