"""Prompt construction for description extraction and task refinement.

Templates are plain strings with ``{labels}``, ``{caption}``, ``{transcript}``
and ``{rubric}`` placeholders. Every rendered prompt is byte-stable for
identical inputs; golden-file tests pin each template.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .corpus import ACTIVITY_TASKS, ActivityTaxonomy, TaskKind


class RefinementMode(Enum):
    ZERO_SHOT = "zero_shot"
    VIDEO_ONLY = "video_only"
    TRANSCRIPT_ONLY = "transcript_only"
    MULTIMODAL = "multimodal"


class PromptingError(ValueError):
    pass


class MissingCaptionError(PromptingError):
    pass


class MissingTranscriptError(PromptingError):
    pass


class EmptyTaxonomyError(PromptingError):
    pass


DESCRIPTION_PROMPT = (
    "Please provide a detailed description of the video, focusing on the "
    "main subjects, their actions, and the background scenes."
)

TRANSCRIPTION_PROMPT = (
    "Transcribe all speech in this recording. Return a JSON list of "
    "utterances, each an object with start_s, end_s, and text fields."
)

# Behavioral rubrics for the three binary codes, phrased so a text reasoner
# has concrete observable criteria rather than a bare construct name.
RUBRICS: dict[TaskKind, str] = {
    TaskKind.E1_OVERACTIVITY: (
        "overactivity, meaning excessive movement or physical agitation, "
        "such as getting up from the chair, walking around the room, or "
        "fidgeting and moving about in the chair"
    ),
    TaskKind.E2_TANTRUMS: (
        "tantrums or disruptive behavior, meaning any form of anger or "
        "disruption, such as aggression, throwing things, hitting or biting, "
        "or loud screaming and yelling"
    ),
    TaskKind.E3_ANXIETY: (
        "anxiety, meaning signs of worry, upset, or concern, such as "
        "trembling or jumpiness"
    ),
}

_AR_GOAL = (
    "You are analyzing one segment of a recorded interaction session between "
    "a child and an adult. The goal is to recognize which activities occur "
    "during the session. Identify the activity taking place in this segment."
)
_AS_GOAL = (
    "You are analyzing one segment of a recorded interaction session between "
    "a child and an adult. The goal is to label the session timeline. "
    "Identify the activity being performed at this point in the session."
)
_BINARY_GOAL = (
    "You are analyzing one segment of a recorded interaction session between "
    "a child and an adult. Decide whether the child shows {rubric} in this "
    "segment."
)

_ACTIVITY_ANSWER = "Answer with exactly one label from the list."
_BINARY_ANSWER = "Answer Yes or No."

_CAPTION_BLOCK = "Video description:\n{caption}"
_TRANSCRIPT_BLOCK = "Speech transcript:\n{transcript}"
_ZERO_SHOT_NOTE = "Base your answer on the video segment itself."

_EVIDENCE_BLOCKS: dict[RefinementMode, tuple[str, ...]] = {
    RefinementMode.ZERO_SHOT: (_ZERO_SHOT_NOTE,),
    RefinementMode.VIDEO_ONLY: (_CAPTION_BLOCK,),
    RefinementMode.TRANSCRIPT_ONLY: (_TRANSCRIPT_BLOCK,),
    RefinementMode.MULTIMODAL: (_CAPTION_BLOCK, _TRANSCRIPT_BLOCK),
}


def _activity_template(goal: str, mode: RefinementMode) -> str:
    parts = [goal, "Candidate activities:", "{labels}"]
    parts.extend(_EVIDENCE_BLOCKS[mode])
    parts.append(_ACTIVITY_ANSWER)
    return "\n".join(parts)


def _binary_template(mode: RefinementMode) -> str:
    parts = [_BINARY_GOAL]
    parts.extend(_EVIDENCE_BLOCKS[mode])
    parts.append(_BINARY_ANSWER)
    return "\n".join(parts)


def _build_default_templates() -> dict[str, str]:
    templates = {
        "description": DESCRIPTION_PROMPT,
        "transcription": TRANSCRIPTION_PROMPT,
    }
    for mode in RefinementMode:
        templates[f"activity_recognition.{mode.value}"] = _activity_template(_AR_GOAL, mode)
        templates[f"activity_segmentation.{mode.value}"] = _activity_template(_AS_GOAL, mode)
        templates[f"binary.{mode.value}"] = _binary_template(mode)
    return templates


DEFAULT_TEMPLATES: dict[str, str] = _build_default_templates()


def template_key(task: TaskKind, mode: RefinementMode) -> str:
    kind = task.value if task in ACTIVITY_TASKS else "binary"
    return f"{kind}.{mode.value}"


def load_templates(template_dir: str | Path) -> dict[str, str]:
    """Override defaults with ``<key>.txt`` files from a directory."""
    templates = dict(DEFAULT_TEMPLATES)
    template_dir = Path(template_dir)
    if not template_dir.is_dir():
        raise FileNotFoundError(f"template directory not found: {template_dir}")
    for path in sorted(template_dir.glob("*.txt")):
        key = path.stem
        if key not in templates:
            raise PromptingError(f"unknown template name '{key}' in {template_dir}")
        templates[key] = path.read_text(encoding="utf-8").rstrip("\n")
    return templates


@dataclass(frozen=True)
class PromptBundle:
    mode: RefinementMode
    task: TaskKind
    caption: str | None
    transcript: str | None
    taxonomy: ActivityTaxonomy
    rendered: str


def build_description_prompt() -> str:
    """The fixed single-line video description prompt."""
    return DESCRIPTION_PROMPT


def build_transcription_prompt() -> str:
    """The fixed transcription request prompt."""
    return TRANSCRIPTION_PROMPT


def _check_evidence(mode: RefinementMode, caption: str | None, transcript: str | None) -> None:
    needs_caption = mode in (RefinementMode.VIDEO_ONLY, RefinementMode.MULTIMODAL)
    needs_transcript = mode in (RefinementMode.TRANSCRIPT_ONLY, RefinementMode.MULTIMODAL)
    if needs_caption and caption is None:
        raise MissingCaptionError(f"mode {mode.value} requires a caption")
    if needs_transcript and transcript is None:
        raise MissingTranscriptError(f"mode {mode.value} requires a transcript")
    if not needs_caption and caption is not None:
        raise PromptingError(f"mode {mode.value} does not take a caption")
    if not needs_transcript and transcript is not None:
        raise PromptingError(f"mode {mode.value} does not take a transcript")


def build_task_prompt(
    mode: RefinementMode,
    task: TaskKind,
    caption: str | None,
    transcript: str | None,
    taxonomy: ActivityTaxonomy,
    templates: dict[str, str] | None = None,
) -> PromptBundle:
    """Render the refinement prompt for one (mode, task) on one window."""
    _check_evidence(mode, caption, transcript)
    if task in ACTIVITY_TASKS and not taxonomy.labels:
        raise EmptyTaxonomyError("activity tasks need a non-empty taxonomy")
    templates = templates if templates is not None else DEFAULT_TEMPLATES
    template = templates[template_key(task, mode)]
    rendered = template.format(
        labels="\n".join(f"- {label}" for label in taxonomy.labels),
        caption="" if caption is None else caption,
        transcript="" if transcript is None else transcript,
        rubric=RUBRICS.get(task, ""),
    )
    return PromptBundle(
        mode=mode,
        task=task,
        caption=caption,
        transcript=transcript,
        taxonomy=taxonomy,
        rendered=rendered,
    )
