import itertools
import math

import numpy as np
import pytest

from liquidbench.analytics import preference_probability
from liquidbench.study import (
    ParticipantVerdict,
    CONSISTENCY_THRESHOLD,
    StudyManifest,
    VideoEntry,
    VoteRecord,
    aggregate,
    consistency,
    generate_manifest,
    participant_verdicts,
    simulate_votes,
    votes_from_csv,
    votes_from_jsonl,
    votes_to_csv,
    votes_to_jsonl,
)


def make_videos(m, dummy_last=False):
    vids = [VideoEntry(f"v{i}", f"videos/v{i}.mp4") for i in range(m)]
    if dummy_last:
        vids[-1] = VideoEntry(vids[-1].id, vids[-1].uri, dummy=True)
    return vids


def answer_all(manifest, chooser, participant="p0"):
    """chooser(question) -> chosen id."""
    return [
        VoteRecord(manifest.study_id, participant, i, chooser(q))
        for i, q in enumerate(manifest.questions)
    ]


class TestManifestGeneration:
    @pytest.mark.parametrize("m,questions", [(2, 2), (6, 30), (7, 42)])
    def test_question_counts(self, m, questions):
        man = generate_manifest("s", make_videos(m), rng_seed=1)
        assert len(man.questions) == questions
        assert len(man.pair_question_indices()) == m * (m - 1) // 2

    def test_seven_videos_have_21_unique_pairs(self):
        man = generate_manifest("s", make_videos(7), rng_seed=9)
        pairs = {q.pair for q in man.questions}
        assert len(pairs) == 21

    def test_every_pair_appears_exactly_twice(self):
        man = generate_manifest("s", make_videos(5), rng_seed=3)
        for idxs in man.pair_question_indices().values():
            assert len(idxs) == 2

    def test_no_self_pairs(self):
        man = generate_manifest("s", make_videos(6), rng_seed=2)
        assert all(q.left != q.right for q in man.questions)

    def test_deterministic_per_seed(self):
        a = generate_manifest("s", make_videos(6), rng_seed=7)
        b = generate_manifest("s", make_videos(6), rng_seed=7)
        assert a.to_json() == b.to_json()
        c = generate_manifest("s", make_videos(6), rng_seed=8)
        assert a.to_json() != c.to_json()

    def test_two_video_sides_randomized_independently(self):
        # across seeds, the two presentations of the single pair must
        # sometimes agree and sometimes differ in side assignment
        same, diff = 0, 0
        for seed in range(40):
            man = generate_manifest("s", make_videos(2), rng_seed=seed)
            q0, q1 = man.questions
            if (q0.left, q0.right) == (q1.left, q1.right):
                same += 1
            else:
                diff += 1
        assert same > 0 and diff > 0

    def test_warns_above_seven(self):
        with pytest.warns(UserWarning):
            generate_manifest("s", make_videos(8), rng_seed=1)

    def test_rejects_fewer_than_two(self):
        with pytest.raises(ValueError):
            generate_manifest("s", make_videos(1), rng_seed=1)

    def test_json_roundtrip_bit_exact(self):
        man = generate_manifest("round", make_videos(5, dummy_last=True), rng_seed=4,
                                reference_uri="ref.mp4")
        text = man.to_json()
        again = StudyManifest.from_json(text)
        assert again.to_json() == text

    def test_session_order_is_stable_permutation(self):
        man = generate_manifest("s", make_videos(4), rng_seed=5)
        order = man.session_order("alice")
        assert sorted(order) == list(range(len(man.questions)))
        assert order == man.session_order("alice")
        assert order != man.session_order("bob")


class TestConsistency:
    def test_perfectly_consistent_voter(self):
        man = generate_manifest("s", make_videos(7), rng_seed=1)
        votes = answer_all(man, lambda q: min(q.left, q.right))
        verdict = consistency(votes, man)
        assert verdict.consistency == 1.0
        assert verdict.accepted

    def test_thirteen_of_21_pairs_is_rejected(self):
        man = generate_manifest("s", make_videos(7), rng_seed=1)
        pair_idxs = list(man.pair_question_indices().values())
        agree_on = {frozenset(man.questions[i[0]].pair) for i in pair_idxs[:13]}
        votes = []
        for idxs in pair_idxs:
            q0, q1 = man.questions[idxs[0]], man.questions[idxs[1]]
            first = min(q0.left, q0.right)
            second = first if q0.pair in agree_on else (
                q1.right if first == q1.left else q1.left
            )
            votes.append(VoteRecord(man.study_id, "p0", idxs[0], first))
            votes.append(VoteRecord(man.study_id, "p0", idxs[1], second))
        verdict = consistency(votes, man)
        assert verdict.consistency == pytest.approx(13 / 21)
        assert not verdict.accepted

    def test_consistency_is_multiple_of_pair_fraction(self):
        man = generate_manifest("s", make_videos(5), rng_seed=6)
        n_pairs = len(man.pair_question_indices())
        rng = np.random.default_rng(0)
        for trial in range(10):
            votes = answer_all(
                man, lambda q: q.left if rng.random() < 0.5 else q.right,
                participant=f"p{trial}",
            )
            v = consistency(votes, man)
            assert (v.consistency * n_pairs) == pytest.approx(
                round(v.consistency * n_pairs), abs=1e-12
            )

    def test_incomplete_session_excluded(self):
        man = generate_manifest("s", make_videos(3), rng_seed=2)
        votes = answer_all(man, lambda q: q.left)[:-1]
        verdict = consistency(votes, man)
        assert not verdict.complete
        assert not verdict.accepted

    def test_random_voter_mostly_rejected(self):
        # mean consistency of a coin-flip voter is 0.5; smoke-scale
        # version of the 10k Monte-Carlo run in the acceptance suite
        man = generate_manifest("s", make_videos(7), rng_seed=3)
        votes = simulate_votes({}, 200, man, rng_seed=11)
        verdicts = participant_verdicts(votes, man)
        rejected = sum(not v.accepted for v in verdicts.values())
        assert rejected / len(verdicts) > 0.9
        mean_c = np.mean([v.consistency for v in verdicts.values()])
        assert 0.4 < mean_c < 0.6


class TestAggregation:
    def test_single_participant_two_videos(self):
        man = generate_manifest("s", make_videos(2), rng_seed=1)
        votes = answer_all(man, lambda q: "v0")
        wins = aggregate(votes, man)
        i, j = wins.labels.index("v0"), wins.labels.index("v1")
        assert wins.counts[i, j] == 2
        assert wins.counts[j, i] == 0

    def test_rejected_participants_contribute_nothing(self):
        man = generate_manifest("s", make_videos(2), rng_seed=1)
        votes = answer_all(man, lambda q: "v0", participant="good")
        q0, q1 = man.questions
        votes += [
            VoteRecord(man.study_id, "flaky", 0, "v0"),
            VoteRecord(man.study_id, "flaky", 1, "v1" if "v1" in (q1.left, q1.right) else "v0"),
        ]
        # "flaky" answered both questions but inconsistently -> 0.0 < 0.7
        wins = aggregate(votes, man)
        assert wins.counts.sum() == 2

    def test_row_plus_column_totals(self):
        man = generate_manifest("s", make_videos(4), rng_seed=5)
        votes = simulate_votes({"v0": 2.0, "v1": 1.0}, 9, man, rng_seed=2)
        wins = aggregate(votes, man)
        verdicts = participant_verdicts(votes, man)
        accepted = sum(v.accepted for v in verdicts.values())
        sym = wins.counts + wins.counts.T
        for a, b in itertools.combinations(range(4), 2):
            assert sym[a, b] == 2 * accepted

    def test_order_independence(self):
        man = generate_manifest("s", make_videos(3), rng_seed=8)
        votes = simulate_votes({"v0": 1.0}, 5, man, rng_seed=3)
        wins_fwd = aggregate(votes, man)
        wins_rev = aggregate(list(reversed(votes)), man)
        assert np.array_equal(wins_fwd.counts, wins_rev.counts)

    def test_duplicate_votes_deduplicated(self):
        man = generate_manifest("s", make_videos(2), rng_seed=1)
        votes = answer_all(man, lambda q: "v0")
        wins = aggregate(votes + votes, man)  # idempotent resubmission
        assert wins.counts.sum() == 2

    def test_dummy_video_excluded_from_matrix(self):
        man = generate_manifest("s", make_videos(3, dummy_last=True), rng_seed=2)
        votes = answer_all(man, lambda q: min(q.left, q.right))
        wins = aggregate(votes, man)
        assert set(wins.labels) == {"v0", "v1"}
        assert wins.counts.shape == (2, 2)


class TestSimulatedVotes:
    def test_equal_scores_approach_half(self):
        man = generate_manifest("s", make_videos(2), rng_seed=1)
        votes = simulate_votes({"v0": 1.3, "v1": 1.3}, 600, man, rng_seed=4)
        share = sum(v.choice == "v0" for v in votes) / len(votes)
        sigma = math.sqrt(0.25 / len(votes))
        assert abs(share - 0.5) < 3.5 * sigma

    def test_log3_gap_approaches_three_quarters(self):
        man = generate_manifest("s", make_videos(2), rng_seed=1)
        votes = simulate_votes({"v0": math.log(3), "v1": 0.0}, 600, man, rng_seed=4)
        share = sum(v.choice == "v0" for v in votes) / len(votes)
        sigma = math.sqrt(0.75 * 0.25 / len(votes))
        assert abs(share - 0.75) < 3.5 * sigma

    def test_win_fractions_match_model_within_binomial_bound(self):
        # aggregation checked filter-free: conditioning on consistent
        # duplicates would bias the per-pair win fraction
        truth = {"v0": 0.0, "v1": 0.8, "v2": 1.9}
        man = generate_manifest("s", make_videos(3), rng_seed=6)
        votes = simulate_votes(truth, 400, man, rng_seed=7)
        accept_all = {
            f"sim{i:04d}": ParticipantVerdict(f"sim{i:04d}", 1.0, True)
            for i in range(400)
        }
        wins = aggregate(votes, man, verdicts=accept_all)
        labels = wins.labels
        for a, b in itertools.combinations(range(3), 2):
            n = wins.counts[a, b] + wins.counts[b, a]
            p_hat = wins.counts[a, b] / n
            p_true = preference_probability(truth[labels[a]], truth[labels[b]])
            assert abs(p_hat - p_true) <= 3 * math.sqrt(p_true * (1 - p_true) / n)

    def test_deterministic_per_seed(self):
        man = generate_manifest("s", make_videos(3), rng_seed=6)
        a = simulate_votes({"v0": 1.0}, 3, man, rng_seed=9)
        b = simulate_votes({"v0": 1.0}, 3, man, rng_seed=9)
        assert a == b


class TestVoteSerialization:
    def _votes(self):
        man = generate_manifest("s", make_videos(3), rng_seed=1)
        return answer_all(man, lambda q: q.left), man

    def test_jsonl_roundtrip(self):
        votes, _ = self._votes()
        assert votes_from_jsonl(votes_to_jsonl(votes)) == votes

    def test_csv_roundtrip(self):
        votes, _ = self._votes()
        assert votes_from_csv(votes_to_csv(votes)) == votes

    def test_csv_header(self):
        votes, _ = self._votes()
        assert votes_to_csv(votes).splitlines()[0] == "study,participant,question,choice,timestamp"

    def test_csv_missing_column_rejected(self):
        with pytest.raises(ValueError):
            votes_from_csv("study,participant,question\n")
