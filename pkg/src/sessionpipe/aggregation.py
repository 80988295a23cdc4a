"""Session-level decisions from per-window predictions.

Activity membership uses a duration threshold (default 90 s): an activity is
part of the session iff the windows predicted as that activity add up to at
least the threshold. Abnormal-behavior scores are the fraction of windows
predicted Presence; a higher ratio means more frequent abnormal behavior.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .corpus import ACTIVITY_TASKS, TaskKind
from .parsing import ParsedBinary, ParsedLabel
from .prompting import RefinementMode

DEFAULT_MIN_ACTIVITY_DURATION_S = 90.0


class MixedSessionsError(ValueError):
    pass


class EmptySessionError(ValueError):
    pass


@dataclass(frozen=True)
class SegmentPrediction:
    """One parsed prediction for one window of one session."""

    session_id: str
    task: TaskKind
    mode: RefinementMode
    unit_index: int
    start_s: float
    end_s: float
    label: ParsedLabel | ParsedBinary

    def __post_init__(self):
        if self.task in ACTIVITY_TASKS and not isinstance(self.label, ParsedLabel):
            raise TypeError(f"activity task {self.task.value} needs a ParsedLabel")
        if self.task.is_binary and not isinstance(self.label, ParsedBinary):
            raise TypeError(f"binary task {self.task.value} needs a ParsedBinary")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class SessionPrediction:
    """Session-level decision: an activity set for recognition, a score in
    [0, 1] for the binary behavior codes. Segmentation has no session lift."""

    session_id: str
    task: TaskKind
    mode: RefinementMode
    activity_set: frozenset[str] | None = None
    score: float | None = None

    def __post_init__(self):
        if self.task is TaskKind.ACTIVITY_RECOGNITION:
            if self.activity_set is None or self.score is not None:
                raise ValueError("recognition predictions carry an activity_set only")
        elif self.task.is_binary:
            if self.score is None or self.activity_set is not None:
                raise ValueError("binary-task predictions carry a score only")
            if not 0.0 <= self.score <= 1.0:
                raise ValueError(f"score must be in [0, 1], got {self.score}")
        else:
            raise ValueError(f"{self.task.value} is evaluated per segment, not per session")


def _check_single_group(preds: Sequence[SegmentPrediction]) -> None:
    sessions = {p.session_id for p in preds}
    modes = {p.mode for p in preds}
    tasks = {p.task for p in preds}
    if len(sessions) > 1 or len(modes) > 1 or len(tasks) > 1:
        raise MixedSessionsError(
            f"predictions span sessions={sorted(sessions)} modes={sorted(m.value for m in modes)} "
            f"tasks={sorted(t.value for t in tasks)}"
        )


def session_activities(
    preds: Sequence[SegmentPrediction],
    min_duration_s: float = DEFAULT_MIN_ACTIVITY_DURATION_S,
) -> frozenset[str]:
    """Labels whose predicted windows total at least min_duration_s seconds.

    Unknown predictions never contribute. With uniform 16 s windows and the
    default threshold this reduces to "predicted in at least 6 windows".
    """
    _check_single_group(preds)
    totals: dict[str, float] = {}
    for pred in preds:
        label = pred.label.label if isinstance(pred.label, ParsedLabel) else None
        if label is None:
            continue
        totals[label] = totals.get(label, 0.0) + pred.duration_s
    return frozenset(label for label, total in totals.items() if total >= min_duration_s)


def abnormal_ratio(preds: Sequence[SegmentPrediction]) -> float:
    """Fraction of windows predicted Presence; Unknown counts as Absence."""
    if not preds:
        raise EmptySessionError("cannot score an empty prediction list")
    _check_single_group(preds)
    n_present = sum(
        1 for p in preds if isinstance(p.label, ParsedBinary) and p.label.presence is True
    )
    return n_present / len(preds)


def lift_session(
    preds: Sequence[SegmentPrediction],
    min_duration_s: float = DEFAULT_MIN_ACTIVITY_DURATION_S,
) -> SessionPrediction:
    """Lift one session's window predictions to a SessionPrediction."""
    if not preds:
        raise EmptySessionError("cannot lift an empty prediction list")
    _check_single_group(preds)
    head = preds[0]
    if head.task is TaskKind.ACTIVITY_SEGMENTATION:
        raise ValueError("segmentation is evaluated per segment, not lifted per session")
    if head.task is TaskKind.ACTIVITY_RECOGNITION:
        return SessionPrediction(
            session_id=head.session_id,
            task=head.task,
            mode=head.mode,
            activity_set=session_activities(preds, min_duration_s),
        )
    return SessionPrediction(
        session_id=head.session_id,
        task=head.task,
        mode=head.mode,
        score=abnormal_ratio(preds),
    )
