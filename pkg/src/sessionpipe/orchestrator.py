"""Run engine: plan windows, query backends cache-first, parse, score, report.

A run walks every session through modality extraction (captions per segment,
one transcript per session), builds the per-mode refinement prompts, queries
the reasoner (or the captioner directly in zero-shot mode), parses the answers,
lifts them to session decisions, and evaluates each task. All backend traffic
goes through a content-addressed cache, so re-running a finished configuration
issues zero requests and reproduces the report byte for byte.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from . import aggregation, metrics, windowing
from .backends import (
    Backend,
    BackendError,
    BackendRequest,
    FixtureStore,
    GenerationParams,
    HttpBackendConfig,
    HttpChatBackend,
    MockBackend,
    Role,
    parse_utterances_json,
)
from .corpus import (
    ACTIVITY_TASKS,
    ActivityTaxonomy,
    SessionManifest,
    TaskKind,
    TimelineEntry,
    load_corpus,
    load_taxonomy,
)
from .parsing import MatchTier, ParsedBinary, ParsedLabel, parse_binary, parse_label
from .prompting import (
    RefinementMode,
    build_description_prompt,
    build_task_prompt,
    build_transcription_prompt,
    load_templates,
)
from .windowing import Segment

ALL_MODES = tuple(RefinementMode)
ALL_TASKS = tuple(TaskKind)

_ROLE_CACHE_FILES = {
    Role.CAPTIONER: "captions.jsonl",
    Role.TRANSCRIBER: "transcripts.jsonl",
    Role.REASONER: "reasoner.jsonl",
}


def cache_key(backend_id: str, role: Role, session_id: str, segment_index: int | None, prompt_hash: str) -> str:
    parts = "\x1f".join([backend_id, role.value, session_id, str(segment_index), prompt_hash])
    return hashlib.sha256(parts.encode("utf-8")).hexdigest()


@dataclass
class RunConfig:
    corpus_dir: Path
    taxonomy_path: Path
    report_dir: Path
    cache_dir: Path | None = None
    modes: tuple[RefinementMode, ...] = ALL_MODES
    tasks: tuple[TaskKind, ...] = ALL_TASKS
    chunk_lens: tuple[int, ...] = (16,)
    fixtures_path: Path | None = None
    endpoint: str | None = None
    model: str = "local-model"
    api_key: str | None = None
    backend_id: str | None = None
    concurrency: int = 4
    seed: int = 0
    window_s: float = 16.0
    fps: float = 1.0
    min_activity_duration_s: float = aggregation.DEFAULT_MIN_ACTIVITY_DURATION_S
    failure_threshold: float = 0.1
    template_dir: Path | None = None

    def __post_init__(self):
        self.corpus_dir = Path(self.corpus_dir)
        self.taxonomy_path = Path(self.taxonomy_path)
        self.report_dir = Path(self.report_dir)
        if self.cache_dir is not None:
            self.cache_dir = Path(self.cache_dir)
        # canonical ordering keeps reports byte-stable regardless of input order
        self.modes = tuple(m for m in RefinementMode if m in set(self.modes))
        self.tasks = tuple(t for t in TaskKind if t in set(self.tasks))
        self.chunk_lens = tuple(sorted(set(self.chunk_lens)))
        if not self.modes or not self.tasks:
            raise ValueError("need at least one mode and one task")
        needs_chunks = {RefinementMode.TRANSCRIPT_ONLY, RefinementMode.MULTIMODAL} & set(self.modes)
        if needs_chunks and not self.chunk_lens:
            raise ValueError("chunk_lens must be non-empty for transcript-using modes")
        if self.concurrency < 1:
            raise ValueError("concurrency must be >= 1")


@dataclass(frozen=True)
class UnitPrediction:
    """One parsed prediction, traceable to its cached backend response."""

    session_id: str
    task: TaskKind
    mode: RefinementMode
    chunk_len_s: int | None
    unit_index: int
    start_s: float
    end_s: float
    parsed: ParsedLabel | ParsedBinary
    cache_key: str

    def to_record(self) -> dict:
        record: dict[str, Any] = {
            "session_id": self.session_id,
            "task": self.task.value,
            "mode": self.mode.value,
            "chunk_len_s": self.chunk_len_s,
            "unit_index": self.unit_index,
            "start_s": self.start_s,
            "end_s": self.end_s,
            "raw": self.parsed.raw,
            "cache_key": self.cache_key,
        }
        if isinstance(self.parsed, ParsedLabel):
            record["label"] = self.parsed.label
            record["tier"] = self.parsed.tier.value
        else:
            record["presence"] = self.parsed.presence
        return record

    @classmethod
    def from_record(cls, record: Mapping[str, Any]) -> "UnitPrediction":
        task = TaskKind(record["task"])
        if task in ACTIVITY_TASKS:
            parsed: ParsedLabel | ParsedBinary = ParsedLabel(
                label=record["label"],
                tier=MatchTier(record["tier"]),
                raw=record["raw"],
            )
        else:
            parsed = ParsedBinary(presence=record["presence"], raw=record["raw"])
        chunk = record["chunk_len_s"]
        return cls(
            session_id=record["session_id"],
            task=task,
            mode=RefinementMode(record["mode"]),
            chunk_len_s=None if chunk is None else int(chunk),
            unit_index=int(record["unit_index"]),
            start_s=float(record["start_s"]),
            end_s=float(record["end_s"]),
            parsed=parsed,
            cache_key=str(record["cache_key"]),
        )


@dataclass
class ReportRow:
    mode: RefinementMode
    chunk_len_s: int | None
    cells: dict[str, float | None]
    per_class: dict[str, dict[str, float]]
    n_sessions: dict[str, int]
    notes: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "chunk_len_s": self.chunk_len_s,
            "metrics": self.cells,
            "per_class": self.per_class,
            "n_sessions": self.n_sessions,
            "notes": self.notes,
        }


@dataclass
class EvaluationReport:
    backend_id: str
    taxonomy_name: str
    taxonomy_labels: list[str]
    config: dict
    rows: list[ReportRow]
    invalid_sessions: list[str]
    failures: list[dict]

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "backend_id": self.backend_id,
            "taxonomy": self.taxonomy_name,
            "taxonomy_labels": self.taxonomy_labels,
            "config": self.config,
            "rows": [row.to_dict() for row in self.rows],
            "invalid_sessions": self.invalid_sessions,
            "failures": self.failures,
        }

    def row(self, mode: RefinementMode, chunk_len_s: int | None = None) -> ReportRow:
        for candidate in self.rows:
            if candidate.mode is mode and candidate.chunk_len_s == chunk_len_s:
                return candidate
        raise KeyError(f"no report row for mode={mode.value} chunk_len={chunk_len_s}")


class ResponseCache:
    """Content-addressed response store, persisted as per-role JSONL files."""

    def __init__(self, cache_dir: Path | None):
        self._dir = cache_dir
        self._records: dict[str, dict] = {}
        if cache_dir is not None and cache_dir.is_dir():
            for fname in _ROLE_CACHE_FILES.values():
                path = cache_dir / fname
                if path.exists():
                    with open(path, encoding="utf-8") as fh:
                        for line in fh:
                            line = line.strip()
                            if line:
                                record = json.loads(line)
                                self._records[record["key"]] = record

    def get(self, key: str) -> dict | None:
        return self._records.get(key)

    def put(self, record: dict) -> None:
        self._records[record["key"]] = record

    def flush(self) -> None:
        if self._dir is None:
            return
        self._dir.mkdir(parents=True, exist_ok=True)
        by_role: dict[str, list[dict]] = {role.value: [] for role in Role}
        for record in self._records.values():
            by_role[record["role"]].append(record)
        for role, fname in _ROLE_CACHE_FILES.items():
            records = sorted(by_role[role.value], key=lambda r: r["key"])
            with open(self._dir / fname, "w", encoding="utf-8") as fh:
                for record in records:
                    fh.write(json.dumps(record, sort_keys=True) + "\n")


@dataclass(frozen=True)
class _WorkItem:
    key: str
    request: BackendRequest


class _Executor:
    """Cache-first backend executor; results keyed by cache key."""

    def __init__(self, backend: Backend, cache: ResponseCache, concurrency: int):
        self._backend = backend
        self._cache = cache
        self._concurrency = concurrency
        self.results: dict[str, str] = {}
        self.errors: dict[str, BackendError] = {}

    def run(self, items: Sequence[_WorkItem]) -> None:
        todo: dict[str, _WorkItem] = {}
        for item in items:
            if item.key in self.results or item.key in self.errors:
                continue
            cached = self._cache.get(item.key)
            if cached is not None:
                self.results[item.key] = cached["text"]
            else:
                todo.setdefault(item.key, item)

        def call(item: _WorkItem) -> tuple[str, str | BackendError]:
            try:
                response = self._backend.complete(item.request)
                return item.key, response.text.strip()
            except BackendError as exc:
                return item.key, exc

        ordered = sorted(todo.values(), key=lambda it: it.key)
        if not ordered:
            return
        with ThreadPoolExecutor(max_workers=self._concurrency) as pool:
            for key, outcome in pool.map(call, ordered):
                item = todo[key]
                if isinstance(outcome, BackendError):
                    self.errors[key] = outcome
                    continue
                self.results[key] = outcome
                self._cache.put(
                    {
                        "key": key,
                        "role": item.request.role.value,
                        "session_id": item.request.session_id,
                        "segment_index": item.request.segment_index,
                        "prompt_hash": item.request.prompt_hash,
                        "backend_id": self._backend.backend_id,
                        "text": outcome,
                    }
                )


def build_backend(cfg: RunConfig) -> Backend:
    if cfg.fixtures_path is not None and cfg.endpoint is not None:
        raise ValueError("configure either fixtures_path or endpoint, not both")
    if cfg.fixtures_path is not None:
        store = FixtureStore.load_jsonl(cfg.fixtures_path)
        return MockBackend(store, backend_id=cfg.backend_id or "mock", max_concurrency=cfg.concurrency)
    if cfg.endpoint is not None:
        http_cfg = HttpBackendConfig(
            base_url=cfg.endpoint,
            model=cfg.model,
            api_key=cfg.api_key,
            max_concurrency=cfg.concurrency,
        )
        return HttpChatBackend(http_cfg, backend_id=cfg.backend_id)
    raise ValueError("RunConfig needs a fixtures_path or an endpoint")


@dataclass
class _SessionPlan:
    manifest: SessionManifest
    segments: list[Segment]
    chunks: dict[int, list[windowing.TranscriptChunk]] = field(default_factory=dict)
    captions: dict[int, str] = field(default_factory=dict)
    failed_segments: set[int] = field(default_factory=set)


def _segments_overlapping(plan: _SessionPlan, start_s: float, end_s: float) -> list[int]:
    return [s.index for s in plan.segments if s.start_s < end_s and s.end_s > start_s]


def run(cfg: RunConfig, backend: Backend | None = None) -> EvaluationReport:
    """Execute the full pipeline for one configuration and write report files."""
    taxonomy = load_taxonomy(cfg.taxonomy_path)
    manifests = load_corpus(cfg.corpus_dir, taxonomy)
    templates = load_templates(cfg.template_dir) if cfg.template_dir is not None else None
    if backend is None:
        backend = build_backend(cfg)
    cache = ResponseCache(cfg.cache_dir)
    executor = _Executor(backend, cache, cfg.concurrency)
    params = GenerationParams(seed=cfg.seed)

    needs_captions = bool(
        {RefinementMode.VIDEO_ONLY, RefinementMode.MULTIMODAL} & set(cfg.modes)
    )
    needs_transcripts = bool(
        {RefinementMode.TRANSCRIPT_ONLY, RefinementMode.MULTIMODAL} & set(cfg.modes)
    )

    plans = [
        _SessionPlan(
            manifest=m,
            segments=windowing.plan_segments(
                m.media_duration_s, cfg.window_s, cfg.fps, session_id=m.session_id
            ),
        )
        for m in manifests
    ]
    failures: list[dict] = []

    def record_failure(plan: _SessionPlan, role: Role, segment_index: int | None,
                       prompt_hash: str, error: Exception, failed_segments: Sequence[int]) -> None:
        failures.append(
            {
                "session_id": plan.manifest.session_id,
                "role": role.value,
                "segment_index": segment_index,
                "prompt_hash": prompt_hash,
                "error": f"{type(error).__name__}: {error}",
            }
        )
        plan.failed_segments.update(failed_segments)

    # phase 1: modality content extraction
    description = build_description_prompt()
    transcription = build_transcription_prompt()
    extraction: list[tuple[_SessionPlan, _WorkItem]] = []
    for plan in plans:
        m = plan.manifest
        if needs_captions:
            for seg in plan.segments:
                request = BackendRequest(
                    role=Role.CAPTIONER,
                    session_id=m.session_id,
                    prompt=description,
                    segment_index=seg.index,
                    media_ref=m.video_ref,
                    frame_timestamps_s=seg.frame_timestamps_s,
                    params=params,
                )
                extraction.append(
                    (plan, _WorkItem(cache_key(backend.backend_id, Role.CAPTIONER, m.session_id,
                                               seg.index, request.prompt_hash), request))
                )
        if needs_transcripts:
            request = BackendRequest(
                role=Role.TRANSCRIBER,
                session_id=m.session_id,
                prompt=transcription,
                segment_index=None,
                media_ref=m.audio_ref,
                params=params,
            )
            extraction.append(
                (plan, _WorkItem(cache_key(backend.backend_id, Role.TRANSCRIBER, m.session_id,
                                           None, request.prompt_hash), request))
            )
    executor.run([item for _, item in extraction])

    for plan, item in extraction:
        request = item.request
        if item.key in executor.errors:
            failed = (
                [request.segment_index]
                if request.segment_index is not None
                else [s.index for s in plan.segments]
            )
            record_failure(plan, request.role, request.segment_index,
                           request.prompt_hash, executor.errors[item.key], failed)
            continue
        text = executor.results[item.key]
        if request.role is Role.CAPTIONER:
            plan.captions[request.segment_index] = text
        else:
            try:
                utterances = parse_utterances_json(text)
            except BackendError as exc:
                record_failure(plan, request.role, None, request.prompt_hash, exc,
                               [s.index for s in plan.segments])
                continue
            for length in cfg.chunk_lens:
                planned = windowing.plan_transcript_chunks(
                    plan.manifest.media_duration_s, length, session_id=plan.manifest.session_id
                )
                plan.chunks[length] = windowing.fill_chunks(planned, utterances)

    # phase 2: task prompts per mode
    @dataclass(frozen=True)
    class _Unit:
        plan_index: int
        task: TaskKind
        mode: RefinementMode
        chunk_len_s: int | None
        unit_index: int
        start_s: float
        end_s: float
        item: _WorkItem

    units: list[_Unit] = []

    def reason_item(m: SessionManifest, prompt: str, unit_index: int) -> _WorkItem:
        request = BackendRequest(
            role=Role.REASONER, session_id=m.session_id, prompt=prompt,
            segment_index=unit_index, params=params,
        )
        return _WorkItem(cache_key(backend.backend_id, Role.REASONER, m.session_id,
                                   unit_index, request.prompt_hash), request)

    for plan_index, plan in enumerate(plans):
        m = plan.manifest
        for mode in cfg.modes:
            chunk_options: Sequence[int | None]
            if mode in (RefinementMode.TRANSCRIPT_ONLY, RefinementMode.MULTIMODAL):
                chunk_options = cfg.chunk_lens
            else:
                chunk_options = (None,)
            for chunk_len in chunk_options:
                for task in cfg.tasks:
                    if mode is RefinementMode.ZERO_SHOT:
                        prompt = build_task_prompt(mode, task, None, None, taxonomy, templates).rendered
                        for seg in plan.segments:
                            request = BackendRequest(
                                role=Role.CAPTIONER, session_id=m.session_id, prompt=prompt,
                                segment_index=seg.index, media_ref=m.video_ref,
                                frame_timestamps_s=seg.frame_timestamps_s, params=params,
                            )
                            item = _WorkItem(
                                cache_key(backend.backend_id, Role.CAPTIONER, m.session_id,
                                          seg.index, request.prompt_hash), request)
                            units.append(_Unit(plan_index, task, mode, None, seg.index,
                                               seg.start_s, seg.end_s, item))
                    elif mode is RefinementMode.VIDEO_ONLY:
                        for seg in plan.segments:
                            caption_text = plan.captions.get(seg.index)
                            if caption_text is None:
                                continue  # extraction already failed; counted there
                            prompt = build_task_prompt(mode, task, caption_text, None,
                                                       taxonomy, templates).rendered
                            units.append(_Unit(plan_index, task, mode, None, seg.index,
                                               seg.start_s, seg.end_s, reason_item(m, prompt, seg.index)))
                    elif mode is RefinementMode.TRANSCRIPT_ONLY:
                        for chunk in plan.chunks.get(chunk_len, []):
                            prompt = build_task_prompt(mode, task, None, chunk.text,
                                                       taxonomy, templates).rendered
                            units.append(_Unit(plan_index, task, mode, chunk_len, chunk.index,
                                               chunk.start_s, chunk.end_s, reason_item(m, prompt, chunk.index)))
                    else:  # multimodal
                        chunks = plan.chunks.get(chunk_len, [])
                        if not chunks and needs_transcripts:
                            continue  # transcript extraction failed for the session
                        for seg in plan.segments:
                            caption_text = plan.captions.get(seg.index)
                            if caption_text is None:
                                continue
                            chunk = windowing.chunk_covering(chunks, seg.midpoint_s)
                            chunk_text = chunk.text if chunk is not None else ""
                            prompt = build_task_prompt(mode, task, caption_text, chunk_text,
                                                       taxonomy, templates).rendered
                            units.append(_Unit(plan_index, task, mode, chunk_len, seg.index,
                                               seg.start_s, seg.end_s, reason_item(m, prompt, seg.index)))

    executor.run([u.item for u in units])

    predictions: list[UnitPrediction] = []
    for unit in units:
        plan = plans[unit.plan_index]
        if unit.item.key in executor.errors:
            record_failure(plan, unit.item.request.role, unit.item.request.segment_index,
                           unit.item.request.prompt_hash, executor.errors[unit.item.key],
                           _segments_overlapping(plan, unit.start_s, unit.end_s))
            continue
        text = executor.results[unit.item.key]
        parsed: ParsedLabel | ParsedBinary
        if unit.task in ACTIVITY_TASKS:
            parsed = parse_label(text, taxonomy)
        else:
            parsed = parse_binary(text)
        predictions.append(
            UnitPrediction(
                session_id=plan.manifest.session_id,
                task=unit.task,
                mode=unit.mode,
                chunk_len_s=unit.chunk_len_s,
                unit_index=unit.unit_index,
                start_s=unit.start_s,
                end_s=unit.end_s,
                parsed=parsed,
                cache_key=unit.item.key,
            )
        )

    invalid_sessions = sorted(
        plan.manifest.session_id
        for plan in plans
        if plan.segments and len(plan.failed_segments) / len(plan.segments) > cfg.failure_threshold
    )

    report = evaluate_predictions(
        manifests=manifests,
        taxonomy=taxonomy,
        predictions=predictions,
        cfg=cfg,
        backend_id=backend.backend_id,
        invalid_sessions=invalid_sessions,
        failures=sorted(failures, key=lambda f: (f["session_id"], str(f["segment_index"]), f["role"])),
    )
    write_report_files(report, predictions, cfg.report_dir)
    cache.flush()
    return report


def _config_echo(cfg: RunConfig) -> dict:
    return {
        "modes": [m.value for m in cfg.modes],
        "tasks": [t.value for t in cfg.tasks],
        "chunk_lens": list(cfg.chunk_lens),
        "window_s": cfg.window_s,
        "fps": cfg.fps,
        "min_activity_duration_s": cfg.min_activity_duration_s,
        "failure_threshold": cfg.failure_threshold,
        "seed": cfg.seed,
        "concurrency": cfg.concurrency,
    }


def evaluate_predictions(
    manifests: Sequence[SessionManifest],
    taxonomy: ActivityTaxonomy,
    predictions: Sequence[UnitPrediction],
    cfg: RunConfig,
    backend_id: str,
    invalid_sessions: Sequence[str] = (),
    failures: Sequence[dict] = (),
) -> EvaluationReport:
    """Score parsed predictions against corpus ground truth, one row per
    (mode, chunk length) configuration."""
    invalid = set(invalid_sessions)
    by_id = {m.session_id: m for m in manifests}
    grouped: dict[tuple[RefinementMode, int | None, TaskKind, str], list[UnitPrediction]] = {}
    for pred in predictions:
        if pred.session_id in invalid:
            continue
        grouped.setdefault((pred.mode, pred.chunk_len_s, pred.task, pred.session_id), []).append(pred)

    rows = []
    for mode in cfg.modes:
        chunk_options: Sequence[int | None]
        if mode in (RefinementMode.TRANSCRIPT_ONLY, RefinementMode.MULTIMODAL):
            chunk_options = cfg.chunk_lens
        else:
            chunk_options = (None,)
        for chunk_len in chunk_options:
            cells: dict[str, float | None] = {}
            per_class: dict[str, dict[str, float]] = {}
            n_sessions: dict[str, int] = {}
            notes: dict[str, str] = {}
            for task in cfg.tasks:
                sessions = [
                    m for m in manifests
                    if m.session_id not in invalid and _has_gold(m, task)
                ]
                n_sessions[task.value] = len(sessions)
                if not sessions:
                    cells[task.value] = None
                    notes[task.value] = "no sessions with gold labels"
                    continue
                if task is TaskKind.ACTIVITY_RECOGNITION:
                    preds_map = {}
                    gold_map = {}
                    for m in sessions:
                        units = grouped.get((mode, chunk_len, task, m.session_id), [])
                        if units:
                            lifted = aggregation.lift_session(
                                _to_segment_predictions(units), cfg.min_activity_duration_s
                            )
                            preds_map[m.session_id] = lifted.activity_set
                        else:
                            preds_map[m.session_id] = frozenset()
                        gold_map[m.session_id] = m.ground_truth.session_activities
                    macro, classes = metrics.macro_f1_multilabel(preds_map, gold_map, taxonomy)
                    cells[task.value] = macro
                    per_class[task.value] = classes
                elif task is TaskKind.ACTIVITY_SEGMENTATION:
                    pairs = []
                    timelines: dict[str, Sequence[TimelineEntry]] = {}
                    for m in sessions:
                        timelines[m.session_id] = m.ground_truth.activity_timeline
                        for pred in grouped.get((mode, chunk_len, task, m.session_id), []):
                            segment = Segment(
                                session_id=pred.session_id, index=pred.unit_index,
                                start_s=pred.start_s, end_s=pred.end_s, frame_timestamps_s=(),
                            )
                            assert isinstance(pred.parsed, ParsedLabel)
                            pairs.append((segment, pred.parsed.label))
                    macro, classes = metrics.macro_f1_multiclass(pairs, timelines, taxonomy)
                    cells[task.value] = macro
                    per_class[task.value] = classes
                else:
                    ranked = []
                    for m in sessions:
                        units = grouped.get((mode, chunk_len, task, m.session_id), [])
                        if not units:
                            continue
                        lifted = aggregation.lift_session(_to_segment_predictions(units))
                        ranked.append(
                            metrics.RankedScore(
                                session_id=m.session_id,
                                score=lifted.score,
                                gold_presence=bool(m.ground_truth.e_flag(task)),
                            )
                        )
                    n_sessions[task.value] = len(ranked)
                    try:
                        cells[task.value] = metrics.pr_auc(ranked)
                    except metrics.NoPositivesError:
                        cells[task.value] = None
                        notes[task.value] = "no Presence sessions in gold"
            rows.append(ReportRow(mode=mode, chunk_len_s=chunk_len, cells=cells,
                                  per_class=per_class, n_sessions=n_sessions, notes=notes))

    return EvaluationReport(
        backend_id=backend_id,
        taxonomy_name=taxonomy.name,
        taxonomy_labels=list(taxonomy.labels),
        config=_config_echo(cfg),
        rows=rows,
        invalid_sessions=sorted(invalid & set(by_id)),
        failures=list(failures),
    )


def _has_gold(manifest: SessionManifest, task: TaskKind) -> bool:
    gt = manifest.ground_truth
    if task is TaskKind.ACTIVITY_RECOGNITION:
        return gt.session_activities is not None
    if task is TaskKind.ACTIVITY_SEGMENTATION:
        return gt.activity_timeline is not None
    return gt.e_flag(task) is not None


def _to_segment_predictions(units: Sequence[UnitPrediction]) -> list[aggregation.SegmentPrediction]:
    return [
        aggregation.SegmentPrediction(
            session_id=u.session_id, task=u.task, mode=u.mode, unit_index=u.unit_index,
            start_s=u.start_s, end_s=u.end_s, label=u.parsed,
        )
        for u in units
    ]


def write_report_files(
    report: EvaluationReport,
    predictions: Sequence[UnitPrediction],
    report_dir: Path,
) -> None:
    from .reporting import render_markdown

    report_dir = Path(report_dir)
    report_dir.mkdir(parents=True, exist_ok=True)
    (report_dir / "report.json").write_text(
        json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (report_dir / "report.md").write_text(render_markdown(report), encoding="utf-8")
    ordered = sorted(
        predictions,
        key=lambda p: (p.mode.value, str(p.chunk_len_s), p.task.value, p.session_id, p.unit_index),
    )
    with open(report_dir / "predictions.jsonl", "w", encoding="utf-8") as fh:
        for pred in ordered:
            fh.write(json.dumps(pred.to_record(), sort_keys=True) + "\n")


def load_predictions(path: str | Path) -> list[UnitPrediction]:
    preds = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                preds.append(UnitPrediction.from_record(json.loads(line)))
    return preds
