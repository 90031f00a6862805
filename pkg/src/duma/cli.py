"""Command line: serve the HTTP API, chat interactively, replay stored sessions,
and run the evaluation harness."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from .config import load_app_config
from .errors import DumaError
from .eval_harness import (
    aggregate,
    check_alignment,
    load_runs,
    load_scores,
    render_rubric_instructions,
    render_table,
)
from .grammar import serialize_slow_step
from .memory import SessionStore
from .orchestrator import Orchestrator
from .types import FastTurn, SlowTraceRecord, UserTurn


@click.group()
def main() -> None:
    """Dual-mind conversational agent runtime."""
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--port", default=8210, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(config_path: str, port: int, host: str) -> None:
    """Run the HTTP API."""
    import uvicorn

    from .service import create_app

    app_config = load_app_config(config_path)
    orchestrator = app_config.build_orchestrator()
    uvicorn.run(create_app(orchestrator), host=host, port=port, log_level="info")


def _print_trace_steps(steps) -> None:
    for step in steps:
        click.echo(click.style(f"  {serialize_slow_step(step)}", fg="cyan"))


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--session", "session_id", default=None, help="attach to an existing session")
@click.option("--show-slow", is_flag=True, help="print slow-mind steps as they happen")
def chat(config_path: str, session_id: str | None, show_slow: bool) -> None:
    """Interactive REPL: the holding reply prints immediately, the final reply
    when the slow mind is done."""
    app_config = load_app_config(config_path)
    orchestrator = app_config.build_orchestrator()
    if session_id is None:
        session_id = orchestrator.create_session_named("default")
    click.echo(f"session {session_id} (exit with ctrl-d or /quit)")

    def on_event(name: str, data: dict) -> None:
        if name == "fast_reply":
            click.echo(f"agent> {data['response']}")
            if data["invoke"]:
                click.echo(click.style("  …thinking…", dim=True))
        elif name == "slow_step" and show_slow:
            kind = data["kind"]
            if kind == "Act":
                click.echo(click.style(f"  Act[{data['tool_name']}]{{{data['tool_args']}}}", fg="cyan"))
            else:
                click.echo(click.style(f"  {kind}[{data['payload']}]", fg="cyan"))
        elif name == "final_reply":
            click.echo(f"agent> {data['response']}")

    while True:
        try:
            question = input("you> ").strip()
        except EOFError:
            click.echo()
            return
        if not question:
            continue
        if question in ("/quit", "/exit"):
            return
        try:
            orchestrator.run_turn(session_id, question, on_event=on_event)
        except DumaError as exc:
            click.echo(click.style(f"error: {type(exc).__name__}: {exc}", fg="red"), err=True)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--session", "session_id", required=True)
@click.option("--show-slow", is_flag=True, help="include slow-mind traces")
def replay(config_path: str, session_id: str, show_slow: bool) -> None:
    """Re-render a stored session from its persisted records."""
    app_config = load_app_config(config_path)
    store = SessionStore(app_config.data_dir)
    memory = store.load(session_id)
    for record in memory.records:
        entry = record.entry
        if isinstance(entry, UserTurn):
            click.echo(f"[{record.turn_index}] you> {entry.question}")
        elif isinstance(entry, FastTurn):
            flag = " (invoking)" if entry.output.invoke else ""
            click.echo(f"[{record.turn_index}] agent>{flag} {entry.output.response}")
        elif isinstance(entry, SlowTraceRecord) and show_slow:
            click.echo(f"[{record.turn_index}] slow trace ({entry.trace.terminated_by}):")
            _print_trace_steps(entry.trace.steps)


@main.group(invoke_without_command=True)
@click.option("--scores", "scores_path", default=None, type=click.Path(exists=True))
@click.option("--out", "out_path", default=None, type=click.Path())
@click.pass_context
def eval(ctx: click.Context, scores_path: str | None, out_path: str | None) -> None:
    """Aggregate rubric scores into the per-model metric table."""
    if ctx.invoked_subcommand is not None:
        return
    if scores_path is None:
        raise click.UsageError("--scores is required")
    table = render_table(aggregate(load_scores(scores_path)))
    if out_path:
        Path(out_path).write_text(table + "\n", encoding="utf-8")
        click.echo(f"wrote {out_path}")
    else:
        click.echo(table)


@eval.command()
@click.option("--runs", "runs_path", required=True, type=click.Path(exists=True))
@click.option("--threshold", default=0.8, show_default=True)
def align(runs_path: str, threshold: float) -> None:
    """Check that every model saw the same questions, dialogue by dialogue."""
    report = check_alignment(load_runs(runs_path), threshold=threshold)
    for entry in report.entries:
        marker = "FLAG" if entry.flagged else "ok  "
        click.echo(
            f"{marker} dialogue {entry.dialogue_index}: "
            f"{entry.model_a} vs {entry.model_b} similarity {entry.similarity:.3f}"
        )
    flagged = len(report.flagged)
    click.echo(f"{flagged} pair(s) below threshold {report.threshold}")
    if flagged:
        sys.exit(1)


@eval.command()
def rubric() -> None:
    """Print the annotator instructions rendered from the bundled rubric."""
    click.echo(render_rubric_instructions(), nl=False)


if __name__ == "__main__":
    main()
