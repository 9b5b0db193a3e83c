"""Command-line entry points.

``redpen serve`` runs the HTTP grading service; the remaining commands
are offline utilities over the same library code: scoring a corpus,
evaluating feedback quality, replaying event logs into analytics, and
warming the suggestion cache.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Any

import click

from ._native import BACKEND_NAME, available_backends
from .analytics import EventLog, corpus_adoption, summarize_log
from .domain import (
    Condition,
    load_assignment,
    load_assignment_catalog,
    load_draft_corpus,
)
from .errors import RedpenError
from .pipeline import prompt_version
from .providers import ChatProvider, HttpChatProvider, MockProvider, ProviderConfig
from .quality import (
    FeedbackMessage,
    aggregate,
    compare_conditions,
    evaluate_messages,
)
from .scoring import score_essay
from .service.config import ServiceConfig, load_config
from .service.core import GradingService
from .service.store import DocumentStore


def _provider(config: ProviderConfig) -> ChatProvider:
    if config.base_url:
        return HttpChatProvider(config)
    return MockProvider()


def _echo_json(payload: Any) -> None:
    click.echo(json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=True))


@click.group()
@click.version_option(package_name="redpen")
def main() -> None:
    """Rubric-anchored essay feedback tools."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="TOML config file.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(config_path: str | None, host: str, port: int) -> None:
    """Run the grading service."""
    import uvicorn

    from .service.app import create_app

    config = load_config(config_path) if config_path else ServiceConfig()
    if config.data_dir and Path(config.data_dir).exists():
        store = DocumentStore.load(config.data_dir)
    else:
        store = DocumentStore()
    service = GradingService(
        store, _provider(config.provider),
        seed=config.seed, parallelism=config.parallelism,
    )
    uvicorn.run(create_app(service), host=host, port=port)


@main.command()
@click.option("--assignment", "assignment_path", required=True,
              type=click.Path(exists=True), help="Assignment JSON.")
@click.option("--drafts", "drafts_path", required=True,
              type=click.Path(exists=True), help="Draft corpus (JSONL).")
@click.option("--seed", default=0, show_default=True, type=int)
def score(assignment_path: str, drafts_path: str, seed: int) -> None:
    """Score every draft in a corpus against its rubric."""
    assignment = load_assignment(assignment_path)
    drafts, rejected = load_draft_corpus(drafts_path)
    provider = MockProvider()
    results = [
        score_essay(draft, assignment, provider, seed=seed).to_dict()
        for draft in drafts
        if draft.assignment_id == assignment.id
    ]
    _echo_json({"scores": results, "rejected": rejected})


@main.command("eval-feedback")
@click.option("--assignment", "assignment_path", required=True,
              type=click.Path(exists=True))
@click.option("--messages", "messages_path", required=True,
              type=click.Path(exists=True),
              help="JSONL: {essay_id, text, condition, rubric_id?}.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--compare/--no-compare", default=False,
              help="Also run the two-condition Welch comparison.")
def eval_feedback(assignment_path: str, messages_path: str, seed: int,
                  compare: bool) -> None:
    """Segment, classify, and rate a feedback corpus; print aggregates."""
    assignment = load_assignment(assignment_path)
    messages = []
    with open(messages_path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            messages.append(
                FeedbackMessage(
                    essay_id=record["essay_id"],
                    text=record["text"],
                    condition=Condition(record["condition"]),
                    rubric_id=record.get("rubric_id"),
                )
            )
    provider = MockProvider()
    units = evaluate_messages(messages, assignment, provider, seed=seed)
    report = aggregate(messages, units, assignment)
    out: dict[str, Any] = {"aggregate": report.to_dict()}
    if compare:
        fw = report.conditions.get(Condition.FEEDBACK_WRITER.value)
        baseline = report.conditions.get(Condition.BASELINE.value)
        if fw is None or baseline is None:
            raise click.ClickException(
                "comparison needs messages from both conditions"
            )
        out["comparison"] = {
            name: result.to_dict()
            for name, result in compare_conditions(fw, baseline).items()
        }
    _echo_json(out)


@main.command()
@click.argument("events_path", type=click.Path(exists=True))
def analytics(events_path: str) -> None:
    """Replay a grading event log (JSONL) into usage/adoption reports."""
    log = EventLog.load_jsonl(events_path)
    _echo_json({
        "usage": summarize_log(log).to_dict(),
        "adoption": corpus_adoption(log).to_dict(),
    })


@main.command("import-drafts")
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--assignments", "assignments_path", required=True,
              type=click.Path(exists=True), help="Assignment catalog JSON.")
@click.argument("corpus_path", type=click.Path(exists=True))
def import_drafts(data_dir: str, assignments_path: str, corpus_path: str) -> None:
    """Load an assignment catalog plus a draft corpus into a data dir."""
    store = DocumentStore.load(data_dir) if Path(data_dir).exists() else DocumentStore()
    for assignment in load_assignment_catalog(assignments_path):
        store.add_assignment(assignment)
    service = GradingService(store, MockProvider())
    report = service.import_drafts(corpus_path)
    store.save(data_dir)
    _echo_json(report)


@main.command()
@click.option("--data-dir", required=True, type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True, type=int)
def precompute(data_dir: str, seed: int) -> None:
    """Warm the suggestion cache for every feedback-writer draft."""
    store = DocumentStore.load(data_dir)
    service = GradingService(store, MockProvider(), seed=seed)
    essay_ids = [draft.essay_id for draft in store.drafts()]
    _echo_json(service.precompute(essay_ids))


@main.command()
@click.option("--assignment", "assignment_path", required=True,
              type=click.Path(exists=True))
def reference(assignment_path: str) -> None:
    """Print the rubric + historic-feedback reference sheet."""
    assignment = load_assignment(assignment_path)
    store = DocumentStore()
    store.add_assignment(assignment)
    service = GradingService(store, MockProvider())
    _echo_json(service.reference_sheet(assignment.id))


@main.command()
def info() -> None:
    """Show runtime info: LCS backend and prompt version."""
    _echo_json({
        "lcs_backend": BACKEND_NAME,
        "backends_available": sorted(available_backends()),
        "prompt_version": prompt_version(),
    })


def run() -> None:  # pragma: no cover - thin wrapper
    try:
        main(standalone_mode=True)
    except RedpenError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":  # pragma: no cover
    run()
