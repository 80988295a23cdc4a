"""Command-line entry points: simulate, run, evaluate, report."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import orchestrator, simulator
from .corpus import TaskKind, load_corpus, load_taxonomy
from .prompting import RefinementMode

_MODE_CHOICES = [m.value for m in RefinementMode]
_TASK_CHOICES = [t.value for t in TaskKind]


@click.group()
def main():
    """Session analysis pipeline over pluggable model backends."""


@main.command()
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True,
              help="Output directory for corpus/ and fixtures.jsonl.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--n-sessions", type=int, default=20, show_default=True)
@click.option("--duration-s", type=float, default=320.0, show_default=True)
@click.option("--caption-flip-p", type=float, default=0.0, show_default=True)
@click.option("--transcript-drop-p", type=float, default=0.0, show_default=True)
@click.option("--reasoner-flip-p", type=float, default=0.0, show_default=True)
@click.option("--chunk-lens", default="16,64", show_default=True,
              help="Comma-separated transcript chunk lengths to cover.")
def simulate(out_dir, seed, n_sessions, duration_s, caption_flip_p,
             transcript_drop_p, reasoner_flip_p, chunk_lens):
    """Generate a synthetic corpus plus matching backend fixtures."""
    cfg = simulator.SimConfig(
        seed=seed,
        n_sessions=n_sessions,
        duration_s=duration_s,
        noise=simulator.NoiseSpec(
            caption_flip_p=caption_flip_p,
            transcript_drop_p=transcript_drop_p,
            reasoner_flip_p=reasoner_flip_p,
        ),
    )
    lens = tuple(int(x) for x in chunk_lens.split(","))
    out = simulator.generate_corpus(cfg, out_dir, chunk_lens=lens)
    click.echo(f"corpus:   {out.corpus_dir}")
    click.echo(f"taxonomy: {out.taxonomy_path}")
    click.echo(f"fixtures: {out.fixtures_path}")


def _parse_multi(value: str, choices: list[str], what: str) -> tuple[str, ...]:
    parts = tuple(p.strip() for p in value.split(",") if p.strip())
    for part in parts:
        if part not in choices:
            raise click.BadParameter(f"unknown {what} '{part}' (choices: {', '.join(choices)})")
    return parts


@main.command(name="run")
@click.option("--corpus", "corpus_dir", type=click.Path(path_type=Path), required=True)
@click.option("--taxonomy", "taxonomy_path", type=click.Path(path_type=Path), required=True)
@click.option("--report-dir", type=click.Path(path_type=Path), required=True)
@click.option("--cache-dir", type=click.Path(path_type=Path), default=None,
              help="Defaults to REPORT_DIR/cache.")
@click.option("--fixtures", "fixtures_path", type=click.Path(path_type=Path), default=None,
              help="Fixture JSONL for the deterministic mock backend.")
@click.option("--endpoint", default=None, help="Base URL of a chat-completions server.")
@click.option("--model", default="local-model", show_default=True)
@click.option("--api-key", default=None)
@click.option("--modes", default=",".join(_MODE_CHOICES), show_default=True)
@click.option("--tasks", default=",".join(_TASK_CHOICES), show_default=True)
@click.option("--chunk-lens", default="16", show_default=True)
@click.option("--concurrency", type=int, default=4, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--window-s", type=float, default=16.0, show_default=True)
@click.option("--fps", type=float, default=1.0, show_default=True)
@click.option("--min-activity-duration-s", type=float, default=90.0, show_default=True)
@click.option("--failure-threshold", type=float, default=0.1, show_default=True)
@click.option("--allow-partial", is_flag=True,
              help="Exit zero even when sessions were marked invalid.")
@click.option("--template-dir", type=click.Path(path_type=Path), default=None)
def run_command(corpus_dir, taxonomy_path, report_dir, cache_dir, fixtures_path, endpoint,
                model, api_key, modes, tasks, chunk_lens, concurrency, seed, window_s, fps,
                min_activity_duration_s, failure_threshold, allow_partial, template_dir):
    """Run extraction, refinement, aggregation, and evaluation."""
    cfg = orchestrator.RunConfig(
        corpus_dir=corpus_dir,
        taxonomy_path=taxonomy_path,
        report_dir=report_dir,
        cache_dir=cache_dir if cache_dir is not None else report_dir / "cache",
        fixtures_path=fixtures_path,
        endpoint=endpoint,
        model=model,
        api_key=api_key,
        modes=tuple(RefinementMode(m) for m in _parse_multi(modes, _MODE_CHOICES, "mode")),
        tasks=tuple(TaskKind(t) for t in _parse_multi(tasks, _TASK_CHOICES, "task")),
        chunk_lens=tuple(int(x) for x in chunk_lens.split(",")),
        concurrency=concurrency,
        seed=seed,
        window_s=window_s,
        fps=fps,
        min_activity_duration_s=min_activity_duration_s,
        failure_threshold=failure_threshold,
        template_dir=template_dir,
    )
    report = orchestrator.run(cfg)
    click.echo(f"report written to {report_dir}")
    if report.invalid_sessions:
        click.echo(f"invalid sessions: {', '.join(report.invalid_sessions)}", err=True)
        if not allow_partial:
            sys.exit(1)


@main.command()
@click.option("--corpus", "corpus_dir", type=click.Path(path_type=Path), required=True)
@click.option("--taxonomy", "taxonomy_path", type=click.Path(path_type=Path), required=True)
@click.option("--predictions", "predictions_path", type=click.Path(path_type=Path), required=True)
@click.option("--report-dir", type=click.Path(path_type=Path), required=True)
@click.option("--exclude-session", "excluded", multiple=True,
              help="Session ids to leave out of the metrics.")
@click.option("--min-activity-duration-s", type=float, default=90.0, show_default=True)
def evaluate(corpus_dir, taxonomy_path, predictions_path, report_dir, excluded,
             min_activity_duration_s):
    """Re-score previously cached predictions without touching any backend."""
    taxonomy = load_taxonomy(taxonomy_path)
    manifests = load_corpus(corpus_dir, taxonomy)
    predictions = orchestrator.load_predictions(predictions_path)
    modes = tuple(dict.fromkeys(p.mode for p in predictions))
    tasks = tuple(dict.fromkeys(p.task for p in predictions))
    chunk_lens = tuple(sorted({p.chunk_len_s for p in predictions if p.chunk_len_s is not None}))
    cfg = orchestrator.RunConfig(
        corpus_dir=corpus_dir,
        taxonomy_path=taxonomy_path,
        report_dir=report_dir,
        modes=modes or tuple(RefinementMode),
        tasks=tasks or tuple(TaskKind),
        chunk_lens=chunk_lens or (16,),
        min_activity_duration_s=min_activity_duration_s,
    )
    report = orchestrator.evaluate_predictions(
        manifests=manifests,
        taxonomy=taxonomy,
        predictions=predictions,
        cfg=cfg,
        backend_id="re-evaluation",
        invalid_sessions=tuple(excluded),
    )
    orchestrator.write_report_files(report, predictions, report_dir)
    click.echo(f"report written to {report_dir}")


@main.command(name="report")
@click.option("--report-json", type=click.Path(path_type=Path), required=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None,
              help="Markdown output path; defaults next to report.json.")
def report_command(report_json, out_path):
    """Re-render report.md from an existing report.json."""
    from .reporting import render_markdown

    doc = json.loads(Path(report_json).read_text(encoding="utf-8"))
    rows = [
        orchestrator.ReportRow(
            mode=RefinementMode(row["mode"]),
            chunk_len_s=row["chunk_len_s"],
            cells=row["metrics"],
            per_class=row["per_class"],
            n_sessions=row["n_sessions"],
            notes=row.get("notes", {}),
        )
        for row in doc["rows"]
    ]
    report = orchestrator.EvaluationReport(
        backend_id=doc["backend_id"],
        taxonomy_name=doc["taxonomy"],
        taxonomy_labels=doc["taxonomy_labels"],
        config=doc["config"],
        rows=rows,
        invalid_sessions=doc["invalid_sessions"],
        failures=doc["failures"],
    )
    out_path = out_path if out_path is not None else Path(report_json).with_name("report.md")
    Path(out_path).write_text(render_markdown(report), encoding="utf-8")
    click.echo(f"wrote {out_path}")


if __name__ == "__main__":
    main()
