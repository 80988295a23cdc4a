import pytest

from sessionpipe.corpus import (
    ActivityTaxonomy,
    DatasetKind,
    GroundTruth,
    SessionManifest,
    TimelineEntry,
)


@pytest.fixture
def taxonomy():
    return ActivityTaxonomy(
        name="test-3",
        labels=("shared book reading", "singing, reciting", "toy play"),
        aliases={"book reading": "shared book reading"},
    )


@pytest.fixture
def diagnostic_manifest():
    return SessionManifest(
        session_id="diag-001",
        dataset=DatasetKind.DIAGNOSTIC,
        media_duration_s=64.0,
        video_ref="file:///diag-001.mp4",
        audio_ref="file:///diag-001.wav",
        ground_truth=GroundTruth(
            activity_timeline=(
                TimelineEntry(0.0, 32.0, "toy play"),
                TimelineEntry(32.0, 64.0, "shared book reading"),
            ),
            e1=True,
            e2=False,
            e3=False,
        ),
    )


@pytest.fixture
def naturalistic_manifest():
    return SessionManifest(
        session_id="nat-001",
        dataset=DatasetKind.NATURALISTIC,
        media_duration_s=900.0,
        video_ref="file:///nat-001.mp4",
        audio_ref="file:///nat-001.wav",
        ground_truth=GroundTruth(session_activities=frozenset({"toy play"})),
    )
