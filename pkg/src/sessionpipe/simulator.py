"""Synthetic corpora with matching backend fixtures.

Each generated session gets a piecewise-constant activity timeline, binary
behavior flags drawn at the configured base rates, and fixture texts (captions,
transcripts, reasoner answers) that embed the relevant label strings verbatim,
so the full parse/aggregate/score path is exercised without any real model.
Everything is a pure function of the seed: noise draws are keyed per record,
not per call order, so regenerating with different coverage arguments never
shifts the noise applied elsewhere.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from . import aggregation, corpus, metrics, prompting, windowing
from .backends import Role, parse_utterances_json, prompt_sha256, utterances_to_json
from .corpus import (
    ACTIVITY_TASKS,
    E_TASKS,
    ActivityTaxonomy,
    DatasetKind,
    GroundTruth,
    SessionManifest,
    TaskKind,
    TimelineEntry,
)
from .parsing import MatchTier, ParsedLabel
from .prompting import RefinementMode
from .windowing import Segment, TimedUtterance, TranscriptChunk


class InvalidConfigError(ValueError):
    pass


DEFAULT_SIM_TAXONOMY = ActivityTaxonomy(
    name="synthetic-play-6",
    labels=(
        "puzzle solving",
        "toy play",
        "shared book reading",
        "drawing",
        "singing",
        "conversation",
    ),
)

# Presence base rates follow the reported class skew of the diagnostic corpus.
DEFAULT_E_BASE_RATES: Mapping[TaskKind, float] = {
    TaskKind.E1_OVERACTIVITY: 34 / 82,
    TaskKind.E2_TANTRUMS: 7 / 83,
    TaskKind.E3_ANXIETY: 10 / 83,
}

# Phrases that mark a behavior in caption/transcript text. They must not
# contain any taxonomy label as a substring.
CUE_MARKERS: Mapping[TaskKind, str] = {
    TaskKind.E1_OVERACTIVITY: "getting up and moving around the room",
    TaskKind.E2_TANTRUMS: "yelling and throwing objects in anger",
    TaskKind.E3_ANXIETY: "visibly worried and trembling",
}

NO_SIGNAL_ANSWER = "It is unclear from the evidence provided."

ALL_MODES = tuple(RefinementMode)
ALL_TASKS = tuple(TaskKind)


@dataclass(frozen=True)
class NoiseSpec:
    """Independent corruption rates for the three content channels."""

    caption_flip_p: float = 0.0
    transcript_drop_p: float = 0.0
    reasoner_flip_p: float = 0.0

    def __post_init__(self):
        for name in ("caption_flip_p", "transcript_drop_p", "reasoner_flip_p"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise InvalidConfigError(f"{name} must be in [0, 1], got {p}")


@dataclass(frozen=True)
class SimConfig:
    """Corpus generation parameters.

    Taxonomy labels must not occur inside the generator's scaffold sentences
    or cue phrases (e.g. a label "child" would leak into every caption); the
    default taxonomy satisfies this.
    """

    seed: int
    n_sessions: int = 20
    duration_s: float = 320.0
    taxonomy: ActivityTaxonomy = DEFAULT_SIM_TAXONOMY
    activity_dwell_s: tuple[float, float] = (40.0, 120.0)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    e_base_rates: Mapping[TaskKind, float] = field(
        default_factory=lambda: dict(DEFAULT_E_BASE_RATES)
    )
    cue_segment_rate: float = 0.35
    window_s: float = 16.0
    min_activity_duration_s: float = aggregation.DEFAULT_MIN_ACTIVITY_DURATION_S

    def __post_init__(self):
        if self.n_sessions < 1:
            raise InvalidConfigError(f"n_sessions must be >= 1, got {self.n_sessions}")
        if self.duration_s <= 0:
            raise InvalidConfigError(f"duration_s must be > 0, got {self.duration_s}")
        lo, hi = self.activity_dwell_s
        if not 0 < lo <= hi:
            raise InvalidConfigError(f"activity dwell range must satisfy 0 < min <= max, got {self.activity_dwell_s}")
        if not 0.0 <= self.cue_segment_rate <= 1.0:
            raise InvalidConfigError("cue_segment_rate must be in [0, 1]")
        for task in E_TASKS:
            rate = self.e_base_rates.get(task)
            if rate is None or not 0.0 <= rate <= 1.0:
                raise InvalidConfigError(f"base rate for {task.value} must be set and in [0, 1], got {rate}")


@dataclass(frozen=True)
class SimOutput:
    corpus_dir: Path
    fixtures_path: Path
    taxonomy_path: Path


def _derived_rng(*parts: object) -> random.Random:
    """A process-independent RNG stream keyed by the given parts."""
    key = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _flip_label(label: str, labels: Sequence[str], p: float, rng: random.Random) -> str:
    if p > 0 and rng.random() < p:
        others = [l for l in labels if l != label]
        if others:
            return rng.choice(others)
    return label


def _dominant_label(evidence: str, labels: Sequence[str]) -> str | None:
    """Most frequent label string in the evidence; earliest occurrence breaks ties."""
    hay = evidence.casefold()
    best_key: tuple[int, int, int] | None = None
    best_label: str | None = None
    for order, label in enumerate(labels):
        needle = label.casefold()
        count = hay.count(needle)
        if count == 0:
            continue
        key = (-count, hay.find(needle), order)
        if best_key is None or key < best_key:
            best_key, best_label = key, label
    return best_label


def _activity_answer(label: str | None) -> str:
    return NO_SIGNAL_ANSWER if label is None else f"The activity is {label}."


def _binary_answer(present: bool) -> str:
    return "Yes." if present else "No."


@dataclass
class _SessionWorld:
    manifest: SessionManifest
    segments: list[Segment]
    true_labels: list[str]
    caption_labels: list[str]
    captions: list[str]
    utterances: list[TimedUtterance]
    cue_segments: dict[TaskKind, frozenset[int]]


def _make_timeline(cfg: SimConfig, rng: random.Random) -> tuple[TimelineEntry, ...]:
    entries: list[TimelineEntry] = []
    t = 0.0
    prev: str | None = None
    while t < cfg.duration_s - 1e-9:
        dwell = rng.uniform(*cfg.activity_dwell_s)
        label = rng.choice([l for l in cfg.taxonomy.labels if l != prev])
        end = min(t + dwell, cfg.duration_s)
        entries.append(TimelineEntry(start_s=t, end_s=end, label=label))
        prev = label
        t = end
    return tuple(entries)


def _label_utterances(seg: Segment, label: str) -> list[TimedUtterance]:
    length = seg.duration_s
    return [
        TimedUtterance(seg.start_s + 0.05 * length, seg.start_s + 0.25 * length, f"Now we are doing {label}."),
        TimedUtterance(seg.start_s + 0.40 * length, seg.start_s + 0.60 * length, f"This {label} is fun."),
    ]


def _build_session(cfg: SimConfig, index: int) -> _SessionWorld:
    session_id = f"sim-{index:03d}"
    rng_world = _derived_rng(cfg.seed, session_id, "world")
    timeline = _make_timeline(cfg, rng_world)
    segments = windowing.plan_segments(cfg.duration_s, cfg.window_s, session_id=session_id)
    true_labels = []
    for seg in segments:
        label = metrics.resolve_segment_gold(seg, timeline)
        assert label is not None  # timelines cover the full session
        true_labels.append(label)

    e_flags = {
        task: _derived_rng(cfg.seed, session_id, "eflag", task.value).random() < cfg.e_base_rates[task]
        for task in E_TASKS
    }
    cue_segments: dict[TaskKind, frozenset[int]] = {}
    for task in E_TASKS:
        if not e_flags[task]:
            cue_segments[task] = frozenset()
            continue
        rng_cue = _derived_rng(cfg.seed, session_id, "cues", task.value)
        picks = {i for i in range(len(segments)) if rng_cue.random() < cfg.cue_segment_rate}
        if not picks:
            picks = {rng_cue.randrange(len(segments))}
        cue_segments[task] = frozenset(picks)

    caption_labels = []
    captions = []
    for seg, true_label in zip(segments, true_labels):
        rng_cap = _derived_rng(cfg.seed, session_id, "caption", seg.index)
        shown = _flip_label(true_label, cfg.taxonomy.labels, cfg.noise.caption_flip_p, rng_cap)
        caption_labels.append(shown)
        text = (
            "The video shows a child and an adult in a recorded session. "
            f"They are engaged in {shown}."
        )
        for task in E_TASKS:
            if seg.index in cue_segments[task]:
                text += f" The child is {CUE_MARKERS[task]}."
        captions.append(text)

    utterances: list[TimedUtterance] = []
    for seg, true_label in zip(segments, true_labels):
        candidates = _label_utterances(seg, true_label)
        length = seg.duration_s
        for k, task in enumerate(E_TASKS):
            if seg.index in cue_segments[task]:
                start = seg.start_s + (0.70 + 0.08 * k) * length
                candidates.append(
                    TimedUtterance(start, start + 0.05 * length, f"The child is {CUE_MARKERS[task]}.")
                )
        for j, utt in enumerate(candidates):
            rng_drop = _derived_rng(cfg.seed, session_id, "drop", seg.index, j)
            if cfg.noise.transcript_drop_p > 0 and rng_drop.random() < cfg.noise.transcript_drop_p:
                continue
            utterances.append(utt)
    utterances.sort(key=lambda u: u.start_s)

    gold_activities = aggregation.session_activities(
        [
            aggregation.SegmentPrediction(
                session_id=session_id,
                task=TaskKind.ACTIVITY_RECOGNITION,
                mode=RefinementMode.MULTIMODAL,
                unit_index=seg.index,
                start_s=seg.start_s,
                end_s=seg.end_s,
                label=ParsedLabel(label=label, tier=MatchTier.EXACT, raw=label),
            )
            for seg, label in zip(segments, true_labels)
        ],
        min_duration_s=cfg.min_activity_duration_s,
    )

    manifest = SessionManifest(
        session_id=session_id,
        dataset=DatasetKind.DIAGNOSTIC,
        media_duration_s=cfg.duration_s,
        video_ref=f"sim://{session_id}/video",
        audio_ref=f"sim://{session_id}/audio",
        ground_truth=GroundTruth(
            session_activities=gold_activities,
            activity_timeline=timeline,
            e1=e_flags[TaskKind.E1_OVERACTIVITY],
            e2=e_flags[TaskKind.E2_TANTRUMS],
            e3=e_flags[TaskKind.E3_ANXIETY],
        ),
    )
    return _SessionWorld(
        manifest=manifest,
        segments=segments,
        true_labels=true_labels,
        caption_labels=caption_labels,
        captions=captions,
        utterances=utterances,
        cue_segments=cue_segments,
    )


def _reasoner_answer(
    cfg: SimConfig,
    world: _SessionWorld,
    task: TaskKind,
    evidence: str,
    unit_index: int,
    prompt_hash: str,
) -> str:
    rng = _derived_rng(cfg.seed, world.manifest.session_id, "reason", unit_index, prompt_hash)
    if task in ACTIVITY_TASKS:
        label = _dominant_label(evidence, cfg.taxonomy.labels)
        if label is None:
            return NO_SIGNAL_ANSWER
        label = _flip_label(label, cfg.taxonomy.labels, cfg.noise.reasoner_flip_p, rng)
        return _activity_answer(label)
    present = CUE_MARKERS[task].casefold() in evidence.casefold()
    if cfg.noise.reasoner_flip_p > 0 and rng.random() < cfg.noise.reasoner_flip_p:
        present = not present
    return _binary_answer(present)


def _session_fixtures(
    cfg: SimConfig,
    world: _SessionWorld,
    tasks: Sequence[TaskKind],
    modes: Sequence[RefinementMode],
    chunk_lens: Sequence[int],
) -> list[dict]:
    session_id = world.manifest.session_id
    records: list[dict] = []

    def add(role: Role, segment_index: int | None, prompt: str, text: str) -> None:
        records.append(
            {
                "role": role.value,
                "session_id": session_id,
                "segment_index": segment_index,
                "prompt_hash": prompt_sha256(prompt),
                "text": text,
            }
        )

    needs_captions = any(
        m in modes for m in (RefinementMode.VIDEO_ONLY, RefinementMode.MULTIMODAL)
    )
    needs_transcript = any(
        m in modes for m in (RefinementMode.TRANSCRIPT_ONLY, RefinementMode.MULTIMODAL)
    )

    if needs_captions:
        description = prompting.build_description_prompt()
        for seg, text in zip(world.segments, world.captions):
            add(Role.CAPTIONER, seg.index, description, text)

    if needs_transcript:
        add(Role.TRANSCRIBER, None, prompting.build_transcription_prompt(), utterances_to_json(world.utterances))

    chunks_by_len: dict[int, list[TranscriptChunk]] = {}
    if needs_transcript:
        for length in chunk_lens:
            planned = windowing.plan_transcript_chunks(cfg.duration_s, length, session_id=session_id)
            chunks_by_len[length] = windowing.fill_chunks(planned, world.utterances)

    for mode in modes:
        for task in tasks:
            if mode is RefinementMode.ZERO_SHOT:
                prompt = prompting.build_task_prompt(mode, task, None, None, cfg.taxonomy).rendered
                for seg in world.segments:
                    if task in ACTIVITY_TASKS:
                        text = _activity_answer(world.caption_labels[seg.index])
                    else:
                        text = _binary_answer(seg.index in world.cue_segments[task])
                    add(Role.CAPTIONER, seg.index, prompt, text)
            elif mode is RefinementMode.VIDEO_ONLY:
                for seg in world.segments:
                    caption_text = world.captions[seg.index]
                    prompt = prompting.build_task_prompt(mode, task, caption_text, None, cfg.taxonomy).rendered
                    answer = _reasoner_answer(
                        cfg, world, task, caption_text, seg.index, prompt_sha256(prompt)
                    )
                    add(Role.REASONER, seg.index, prompt, answer)
            elif mode is RefinementMode.TRANSCRIPT_ONLY:
                for length in chunk_lens:
                    for chunk in chunks_by_len[length]:
                        prompt = prompting.build_task_prompt(mode, task, None, chunk.text, cfg.taxonomy).rendered
                        answer = _reasoner_answer(
                            cfg, world, task, chunk.text, chunk.index, prompt_sha256(prompt)
                        )
                        add(Role.REASONER, chunk.index, prompt, answer)
            else:  # multimodal: one prediction per video segment
                for length in chunk_lens:
                    for seg in world.segments:
                        caption_text = world.captions[seg.index]
                        chunk = windowing.chunk_covering(chunks_by_len[length], seg.midpoint_s)
                        chunk_text = chunk.text if chunk is not None else ""
                        prompt = prompting.build_task_prompt(
                            mode, task, caption_text, chunk_text, cfg.taxonomy
                        ).rendered
                        evidence = caption_text + "\n" + chunk_text
                        answer = _reasoner_answer(
                            cfg, world, task, evidence, seg.index, prompt_sha256(prompt)
                        )
                        add(Role.REASONER, seg.index, prompt, answer)
    return records


def build_manifests(cfg: SimConfig) -> list[SessionManifest]:
    """The synthetic sessions alone, without fixtures."""
    return [_build_session(cfg, i).manifest for i in range(cfg.n_sessions)]


def generate_corpus(
    cfg: SimConfig,
    out_dir: str | Path,
    tasks: Sequence[TaskKind] | None = None,
    modes: Sequence[RefinementMode] | None = None,
    chunk_lens: Sequence[int] = (16, 64),
) -> SimOutput:
    """Write a corpus directory plus the fixture file covering the given sweep.

    tasks/modes default to full coverage. Output is byte-identical for
    identical arguments.
    """
    tasks = tuple(tasks) if tasks is not None else ALL_TASKS
    modes = tuple(modes) if modes is not None else ALL_MODES
    out_dir = Path(out_dir)
    corpus_dir = out_dir / "corpus"
    corpus_dir.mkdir(parents=True, exist_ok=True)

    worlds = [_build_session(cfg, i) for i in range(cfg.n_sessions)]
    corpus.write_corpus([w.manifest for w in worlds], corpus_dir)
    taxonomy_path = corpus_dir / "taxonomy.json"
    corpus.save_taxonomy(cfg.taxonomy, taxonomy_path)

    fixtures_path = out_dir / "fixtures.jsonl"
    with open(fixtures_path, "w", encoding="utf-8") as fh:
        for world in worlds:
            for record in _session_fixtures(cfg, world, tasks, modes, chunk_lens):
                fh.write(json.dumps(record, sort_keys=True) + "\n")
    return SimOutput(corpus_dir=corpus_dir, fixtures_path=fixtures_path, taxonomy_path=taxonomy_path)


# ---------------------------------------------------------------------------
# post-hoc fixture corruption


def corrupt_fixture(
    records: Sequence[Mapping[str, object]],
    noise: NoiseSpec,
    seed: int,
    taxonomy: ActivityTaxonomy,
) -> list[dict]:
    """Independently corrupt each fixture record at the channel's stated rate.

    Captions and zero-shot answers flip their embedded label, transcripts drop
    utterances, reasoner label answers flip, reasoner Yes/No answers invert.
    Deterministic per (seed, record key).
    """
    out: list[dict] = []
    for record in records:
        record = dict(record)
        rng = _derived_rng(
            seed, "corrupt", record["role"], record["session_id"],
            record["segment_index"], record["prompt_hash"],
        )
        role = record["role"]
        text = str(record["text"])
        if role == Role.TRANSCRIBER.value:
            if noise.transcript_drop_p > 0:
                kept = [
                    u for u in parse_utterances_json(text)
                    if rng.random() >= noise.transcript_drop_p
                ]
                record["text"] = utterances_to_json(kept)
        else:
            flip_p = noise.caption_flip_p if role == Role.CAPTIONER.value else noise.reasoner_flip_p
            if flip_p > 0:
                if role == Role.REASONER.value and text in ("Yes.", "No."):
                    if rng.random() < flip_p:
                        record["text"] = "No." if text == "Yes." else "Yes."
                else:
                    label = _dominant_label(text, taxonomy.labels)
                    if label is not None:
                        flipped = _flip_label(label, taxonomy.labels, flip_p, rng)
                        if flipped != label:
                            record["text"] = text.replace(label, flipped, 1)
        out.append(record)
    return out
