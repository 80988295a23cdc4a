"""Temporal planning: video segments, transcript chunks, utterance alignment.

Sessions are tiled into consecutive half-open windows ``[k*w, (k+1)*w)``. A
trailing partial window is kept iff it is at least half a window long, so a
900 s session at 16 s windows yields 56 segments and drops the 4 s tail.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

_EPS = 1e-9

SUPPORTED_CHUNK_LENGTHS = (16, 64)


class NonPositiveDurationError(ValueError):
    pass


class UnsupportedChunkLengthError(ValueError):
    pass


class UnsortedUtterancesError(ValueError):
    pass


@dataclass(frozen=True)
class TimedUtterance:
    start_s: float
    end_s: float
    text: str

    def __post_init__(self):
        if self.start_s > self.end_s:
            raise ValueError(f"utterance has start {self.start_s} > end {self.end_s}")

    @property
    def midpoint_s(self) -> float:
        return (self.start_s + self.end_s) / 2.0


@dataclass(frozen=True)
class Segment:
    """A video window with frame sample timestamps (1 fps by default)."""

    session_id: str
    index: int
    start_s: float
    end_s: float
    frame_timestamps_s: tuple[float, ...]

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s

    @property
    def midpoint_s(self) -> float:
        return (self.start_s + self.end_s) / 2.0


@dataclass(frozen=True)
class TranscriptChunk:
    """A transcript window; chunk_len_s is the nominal (configured) length."""

    session_id: str
    index: int
    start_s: float
    end_s: float
    chunk_len_s: int
    text: str = ""

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s

    @property
    def midpoint_s(self) -> float:
        return (self.start_s + self.end_s) / 2.0


def _tile(media_duration_s: float, window_s: float) -> list[tuple[float, float]]:
    """Half-open windows covering the session; tail kept iff >= window_s / 2."""
    if media_duration_s <= 0:
        raise NonPositiveDurationError(f"media duration must be > 0, got {media_duration_s}")
    if window_s <= 0:
        raise ValueError(f"window length must be > 0, got {window_s}")
    n_full = int(media_duration_s // window_s)
    windows = [(k * window_s, (k + 1) * window_s) for k in range(n_full)]
    tail_start = n_full * window_s
    tail_len = media_duration_s - tail_start
    if tail_len >= window_s / 2 - _EPS and tail_len > _EPS:
        windows.append((tail_start, media_duration_s))
    return windows


def plan_segments(
    media_duration_s: float,
    window_s: float = 16.0,
    fps: float = 1.0,
    *,
    session_id: str = "",
) -> list[Segment]:
    """Plan video segments with frame timestamps at multiples of 1/fps.

    Every full window at the default 16 s / 1 fps carries exactly 16 frames.
    """
    if fps <= 0:
        raise ValueError(f"fps must be > 0, got {fps}")
    segments = []
    for index, (start, end) in enumerate(_tile(media_duration_s, window_s)):
        n_frames = int((end - start) * fps + _EPS)
        frames = tuple(start + k / fps for k in range(n_frames))
        segments.append(
            Segment(
                session_id=session_id,
                index=index,
                start_s=start,
                end_s=end,
                frame_timestamps_s=frames,
            )
        )
    return segments


def plan_transcript_chunks(
    media_duration_s: float,
    chunk_len_s: int,
    *,
    session_id: str = "",
) -> list[TranscriptChunk]:
    """Plan empty transcript chunks with the same tiling/tail rule as segments."""
    if chunk_len_s not in SUPPORTED_CHUNK_LENGTHS:
        raise UnsupportedChunkLengthError(
            f"chunk length must be one of {SUPPORTED_CHUNK_LENGTHS}, got {chunk_len_s}"
        )
    return [
        TranscriptChunk(
            session_id=session_id,
            index=index,
            start_s=start,
            end_s=end,
            chunk_len_s=int(chunk_len_s),
        )
        for index, (start, end) in enumerate(_tile(media_duration_s, float(chunk_len_s)))
    ]


def _check_sorted(utterances: Sequence[TimedUtterance]) -> None:
    for prev, cur in zip(utterances, utterances[1:]):
        if cur.start_s < prev.start_s:
            raise UnsortedUtterancesError(
                f"utterances not sorted by start_s: {prev.start_s} followed by {cur.start_s}"
            )


def align_transcript(
    utterances: Sequence[TimedUtterance],
    window_start_s: float,
    window_end_s: float,
) -> str:
    """Join the utterances whose midpoint falls in [start, end).

    The midpoint rule assigns each utterance to exactly one window; text is
    space-joined in input order.
    """
    _check_sorted(utterances)
    picked = [
        u.text
        for u in utterances
        if window_start_s <= u.midpoint_s < window_end_s
    ]
    return " ".join(picked)


def fill_chunks(
    chunks: Iterable[TranscriptChunk],
    utterances: Sequence[TimedUtterance],
) -> list[TranscriptChunk]:
    """Fill planned chunks with aligned utterance text."""
    _check_sorted(utterances)
    return [
        replace(chunk, text=align_transcript(utterances, chunk.start_s, chunk.end_s))
        for chunk in chunks
    ]


def chunk_covering(chunks: Sequence[TranscriptChunk], t_s: float) -> TranscriptChunk | None:
    """The chunk whose [start, end) window contains the given time, if any."""
    for chunk in chunks:
        if chunk.start_s <= t_s < chunk.end_s:
            return chunk
    return None
