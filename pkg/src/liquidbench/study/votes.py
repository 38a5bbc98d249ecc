"""Vote records, participant filtering, and aggregation into win matrices."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from ..analytics.bradley_terry import WinMatrix
from .manifest import StudyManifest

CONSISTENCY_THRESHOLD = 0.7

VOTE_CSV_HEADER = ["study", "participant", "question", "choice", "timestamp"]


@dataclass(frozen=True)
class VoteRecord:
    """One binary judgment: `choice` is the id of the preferred video."""

    study: str
    participant: str
    question: int
    choice: str
    timestamp: str = ""

    def to_dict(self) -> dict:
        return {
            "study": self.study,
            "participant": self.participant,
            "question": self.question,
            "choice": self.choice,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VoteRecord":
        return cls(
            study=d["study"],
            participant=d["participant"],
            question=int(d["question"]),
            choice=d["choice"],
            timestamp=str(d.get("timestamp", "")),
        )


@dataclass(frozen=True)
class ParticipantVerdict:
    participant: str
    consistency: float
    accepted: bool
    complete: bool = True


def votes_to_jsonl(votes) -> str:
    return "".join(json.dumps(v.to_dict(), sort_keys=True) + "\n" for v in votes)


def votes_from_jsonl(text: str) -> list[VoteRecord]:
    return [
        VoteRecord.from_dict(json.loads(line))
        for line in text.splitlines()
        if line.strip()
    ]


def votes_to_csv(votes) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(VOTE_CSV_HEADER)
    for v in votes:
        writer.writerow([v.study, v.participant, v.question, v.choice, v.timestamp])
    return buf.getvalue()


def votes_from_csv(text: str) -> list[VoteRecord]:
    reader = csv.DictReader(io.StringIO(text))
    missing = set(VOTE_CSV_HEADER) - set(reader.fieldnames or [])
    if missing:
        raise ValueError(f"vote CSV missing columns: {sorted(missing)}")
    return [VoteRecord.from_dict(row) for row in reader]


def dedup_votes(votes) -> dict[str, dict[int, VoteRecord]]:
    """participant -> question index -> vote; later records win."""
    table: dict[str, dict[int, VoteRecord]] = {}
    for v in votes:
        table.setdefault(v.participant, {})[v.question] = v
    return table


def validate_vote(vote: VoteRecord, manifest: StudyManifest):
    if vote.study != manifest.study_id:
        raise ValueError(f"vote for study {vote.study!r}, expected {manifest.study_id!r}")
    if not 0 <= vote.question < len(manifest.questions):
        raise ValueError(f"question index {vote.question} out of range")
    q = manifest.questions[vote.question]
    if vote.choice not in (q.left, q.right):
        raise ValueError(
            f"choice {vote.choice!r} is neither side of question {vote.question}"
        )


def consistency(participant_votes, manifest: StudyManifest) -> ParticipantVerdict:
    """Fraction of duplicated pairs answered identically on both presentations.

    A session is complete when every manifest question has an answer;
    incomplete sessions are never accepted. Acceptance requires
    consistency >= CONSISTENCY_THRESHOLD.
    """
    votes = list(participant_votes)
    if not votes:
        raise ValueError("no votes supplied")
    participant = votes[0].participant
    for v in votes:
        if v.participant != participant:
            raise ValueError("votes from more than one participant")
        validate_vote(v, manifest)
    by_question = dedup_votes(votes)[participant]
    complete = len(by_question) == len(manifest.questions)

    pairs = manifest.pair_question_indices()
    agree = 0
    judged = 0
    for idxs in pairs.values():
        answers = [by_question[i].choice for i in idxs if i in by_question]
        if len(answers) == 2:
            judged += 1
            if answers[0] == answers[1]:
                agree += 1
    value = agree / len(pairs) if complete else (agree / judged if judged else 0.0)
    accepted = complete and value >= CONSISTENCY_THRESHOLD
    return ParticipantVerdict(
        participant=participant,
        consistency=value,
        accepted=accepted,
        complete=complete,
    )


def participant_verdicts(votes, manifest: StudyManifest) -> dict[str, ParticipantVerdict]:
    table = dedup_votes(votes)
    return {
        pid: consistency(list(qmap.values()), manifest)
        for pid, qmap in sorted(table.items())
    }


def aggregate(votes, manifest: StudyManifest, verdicts=None) -> WinMatrix:
    """Count pairwise wins over accepted participants.

    Duplicated presentations both count, so each accepted participant
    contributes 2 to w_ij + w_ji for every pair. Dummy videos are
    dropped from the matrix entirely. The result does not depend on the
    order of the vote records.
    """
    votes = list(votes)
    if verdicts is None:
        verdicts = participant_verdicts(votes, manifest)
    ids = manifest.scored_video_ids
    index = {vid: k for k, vid in enumerate(ids)}
    counts = np.zeros((len(ids), len(ids)), dtype=np.int64)
    for pid, qmap in sorted(dedup_votes(votes).items()):
        verdict = verdicts.get(pid)
        if verdict is None or not verdict.accepted:
            continue
        for qidx, vote in qmap.items():
            validate_vote(vote, manifest)
            q = manifest.questions[qidx]
            loser = q.right if vote.choice == q.left else q.left
            if vote.choice in index and loser in index:
                counts[index[vote.choice], index[loser]] += 1
    return WinMatrix(counts, labels=tuple(ids))
