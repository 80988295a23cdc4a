"""sessionpipe: batch analysis of long-form dyadic interaction sessions.

Modality content (video captions, speech transcripts) is extracted per time
window by pluggable backends, refined into task labels by a text reasoner,
aggregated to session-level decisions, and scored against ground truth.
"""

from .corpus import (
    ActivityTaxonomy,
    DatasetKind,
    GroundTruth,
    SessionManifest,
    TaskKind,
    TimelineEntry,
    load_corpus,
    load_taxonomy,
)
from .prompting import RefinementMode
from .windowing import Segment, TimedUtterance, TranscriptChunk

__version__ = "0.1.0"

__all__ = [
    "ActivityTaxonomy",
    "DatasetKind",
    "GroundTruth",
    "RefinementMode",
    "Segment",
    "SessionManifest",
    "TaskKind",
    "TimedUtterance",
    "TimelineEntry",
    "TranscriptChunk",
    "load_corpus",
    "load_taxonomy",
    "__version__",
]
