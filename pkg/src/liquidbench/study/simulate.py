"""Synthetic voters for testing the study pipeline end to end.

Each simulated answer is an independent Bernoulli draw with the win
probability implied by the true score difference, which makes fitted
scores directly comparable to the ground truth that generated them.
"""

from __future__ import annotations

import numpy as np

from ..analytics.bradley_terry import preference_probability
from .manifest import StudyManifest
from .votes import VoteRecord


def simulate_votes(
    true_scores: dict[str, float],
    participants,
    manifest: StudyManifest,
    rng_seed: int,
) -> list[VoteRecord]:
    """Full sessions for every participant, deterministic per seed.

    `participants` is an iterable of ids or an int (auto-named sim0000..).
    Videos missing from `true_scores` default to score 0.
    """
    if isinstance(participants, int):
        participants = [f"sim{i:04d}" for i in range(participants)]
    rng = np.random.default_rng(rng_seed)
    votes = []
    for pid in participants:
        for qidx, q in enumerate(manifest.questions):
            p_left = preference_probability(
                true_scores.get(q.left, 0.0), true_scores.get(q.right, 0.0)
            )
            choice = q.left if rng.random() < p_left else q.right
            votes.append(
                VoteRecord(
                    study=manifest.study_id,
                    participant=pid,
                    question=qidx,
                    choice=choice,
                )
            )
    return votes
