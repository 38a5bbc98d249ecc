"""Pairwise study manifests.

A study shows participants every unordered pair of its videos twice,
with independently randomized presentation order and left/right side.
The duplicated presentations are what later drives the consistency
check, so the manifest is the single source of truth for question
order; clients must never reshuffle it.
"""

from __future__ import annotations

import json
import random
import warnings
from dataclasses import dataclass, field

MAX_RECOMMENDED_VIDEOS = 7


@dataclass(frozen=True)
class VideoEntry:
    id: str
    uri: str
    dummy: bool = False  # shown in sessions but excluded from scoring


@dataclass(frozen=True)
class Question:
    left: str
    right: str

    @property
    def pair(self) -> frozenset[str]:
        return frozenset((self.left, self.right))


@dataclass
class StudyManifest:
    study_id: str
    videos: list[VideoEntry]
    questions: list[Question]
    rng_seed: int
    reference_uri: str | None = None

    def __post_init__(self):
        self.validate()

    @property
    def n_videos(self) -> int:
        return len(self.videos)

    @property
    def video_ids(self) -> list[str]:
        return [v.id for v in self.videos]

    @property
    def scored_video_ids(self) -> list[str]:
        return [v.id for v in self.videos if not v.dummy]

    def pair_question_indices(self) -> dict[frozenset[str], list[int]]:
        """Map each unordered pair to the two question indices presenting it."""
        out: dict[frozenset[str], list[int]] = {}
        for idx, q in enumerate(self.questions):
            out.setdefault(q.pair, []).append(idx)
        return out

    def validate(self):
        ids = self.video_ids
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate video ids")
        m = len(ids)
        if m < 2:
            raise ValueError("a study needs at least two videos")
        if len(self.questions) != m * (m - 1):
            raise ValueError(
                f"expected {m * (m - 1)} questions for {m} videos, got {len(self.questions)}"
            )
        known = set(ids)
        for q in self.questions:
            if q.left == q.right:
                raise ValueError(f"self-pair {q.left!r}")
            if q.left not in known or q.right not in known:
                raise ValueError(f"question references unknown video: {q}")
        for pair, idxs in self.pair_question_indices().items():
            if len(idxs) != 2:
                raise ValueError(f"pair {set(pair)} appears {len(idxs)} times, expected 2")

    def to_dict(self) -> dict:
        return {
            "study_id": self.study_id,
            "rng_seed": self.rng_seed,
            "reference_uri": self.reference_uri,
            "videos": [
                {"id": v.id, "uri": v.uri, "dummy": v.dummy} for v in self.videos
            ],
            "questions": [{"left": q.left, "right": q.right} for q in self.questions],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "StudyManifest":
        return cls(
            study_id=d["study_id"],
            videos=[
                VideoEntry(v["id"], v["uri"], bool(v.get("dummy", False)))
                for v in d["videos"]
            ],
            questions=[Question(q["left"], q["right"]) for q in d["questions"]],
            rng_seed=int(d["rng_seed"]),
            reference_uri=d.get("reference_uri"),
        )

    @classmethod
    def from_json(cls, text: str) -> "StudyManifest":
        return cls.from_dict(json.loads(text))

    def session_order(self, participant: str) -> list[int]:
        """Deterministic per-participant permutation of question indices."""
        rng = random.Random(f"{self.rng_seed}:{self.study_id}:{participant}")
        order = list(range(len(self.questions)))
        rng.shuffle(order)
        return order


def generate_manifest(
    study_id: str,
    videos: list[VideoEntry],
    rng_seed: int,
    reference_uri: str | None = None,
) -> StudyManifest:
    """Build a manifest presenting every unordered video pair exactly twice.

    Side assignment is randomized independently for each of the two
    presentations, then the whole question list is shuffled. Everything
    is deterministic for a fixed seed.
    """
    m = len(videos)
    if m < 2:
        raise ValueError("a study needs at least two videos")
    if m > MAX_RECOMMENDED_VIDEOS:
        warnings.warn(
            f"{m} videos means {m * (m - 1)} questions per participant; "
            f"sessions beyond {MAX_RECOMMENDED_VIDEOS} videos get long",
            stacklevel=2,
        )
    rng = random.Random(rng_seed)
    ids = [v.id for v in videos]
    questions: list[Question] = []
    for i in range(m):
        for j in range(i + 1, m):
            for _ in range(2):
                if rng.random() < 0.5:
                    questions.append(Question(ids[i], ids[j]))
                else:
                    questions.append(Question(ids[j], ids[i]))
    rng.shuffle(questions)
    return StudyManifest(
        study_id=study_id,
        videos=list(videos),
        questions=questions,
        rng_seed=rng_seed,
        reference_uri=reference_uri,
    )
