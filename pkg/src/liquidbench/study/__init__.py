from .manifest import (
    MAX_RECOMMENDED_VIDEOS,
    Question,
    StudyManifest,
    VideoEntry,
    generate_manifest,
)
from .simulate import simulate_votes
from .votes import (
    CONSISTENCY_THRESHOLD,
    ParticipantVerdict,
    VoteRecord,
    aggregate,
    consistency,
    dedup_votes,
    participant_verdicts,
    validate_vote,
    votes_from_csv,
    votes_from_jsonl,
    votes_to_csv,
    votes_to_jsonl,
)

__all__ = [
    "CONSISTENCY_THRESHOLD",
    "MAX_RECOMMENDED_VIDEOS",
    "ParticipantVerdict",
    "Question",
    "StudyManifest",
    "VideoEntry",
    "VoteRecord",
    "aggregate",
    "consistency",
    "dedup_votes",
    "generate_manifest",
    "participant_verdicts",
    "simulate_votes",
    "validate_vote",
    "votes_from_csv",
    "votes_from_jsonl",
    "votes_to_csv",
    "votes_to_jsonl",
]
