"""Bradley-Terry score fitting for pairwise-comparison data.

Items are ranked by latent scores s; the probability that item i beats
item j is sigmoid(s_i - s_j). Scores are fitted by maximum likelihood
with the minorization-maximization (MM) update and reported relative to
an anchor item pinned at zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

MM_MAX_ITER = 10_000
MM_GRAD_TOL = 1e-10
SCORE_CLAMP = 30.0  # |s| bound for items with all wins or all losses


class DisconnectedGraphError(ValueError):
    """Comparison graph splits into components; scores are not comparable."""

    def __init__(self, components):
        self.components = components
        super().__init__(
            "comparison graph is disconnected: "
            + "; ".join("{" + ", ".join(str(i) for i in comp) + "}" for comp in components)
        )


@dataclass
class WinMatrix:
    """Pairwise win counts: counts[i, j] = times item i was preferred over j."""

    counts: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        m = self.counts.shape[0]
        if self.counts.ndim != 2 or self.counts.shape[1] != m:
            raise ValueError(f"win matrix must be square, got {self.counts.shape}")
        if (self.counts < 0).any():
            raise ValueError("win counts must be non-negative")
        if np.diagonal(self.counts).any():
            raise ValueError("win matrix diagonal must be zero")
        if self.labels is not None and len(self.labels) != m:
            raise ValueError("label count does not match matrix size")

    @property
    def n_items(self) -> int:
        return self.counts.shape[0]

    def degenerate_items(self) -> tuple[int, ...]:
        """Items with no wins or no losses; their MLE score is unbounded."""
        wins = self.counts.sum(axis=1)
        losses = self.counts.sum(axis=0)
        return tuple(int(i) for i in np.flatnonzero((wins == 0) | (losses == 0)))

    def components(self) -> list[list[int]]:
        """Connected components of the comparison graph (edges where any votes exist)."""
        m = self.n_items
        adj = (self.counts + self.counts.T) > 0
        seen = np.zeros(m, dtype=bool)
        comps = []
        for start in range(m):
            if seen[start]:
                continue
            stack, comp = [start], []
            seen[start] = True
            while stack:
                i = stack.pop()
                comp.append(i)
                for j in np.flatnonzero(adj[i]):
                    if not seen[j]:
                        seen[j] = True
                        stack.append(int(j))
            comps.append(sorted(comp))
        return comps


@dataclass
class ScoreVector:
    """Fitted scores with standard errors; the anchor item has score 0, SE 0."""

    scores: np.ndarray
    standard_errors: np.ndarray
    anchor: int
    labels: tuple[str, ...] | None = None
    degenerate: tuple[int, ...] = field(default_factory=tuple)

    def as_rows(self) -> list[tuple[str, float, float]]:
        labels = self.labels or tuple(f"item{i}" for i in range(len(self.scores)))
        return [
            (labels[i], float(self.scores[i]), float(self.standard_errors[i]))
            for i in range(len(self.scores))
        ]


def preference_probability(s_i, s_j):
    """Probability that the item scored s_i is chosen over the one scored s_j.

    Stable for arbitrarily large score differences (no overflow).
    """
    return expit(np.asarray(s_i, dtype=float) - np.asarray(s_j, dtype=float))


def log_likelihood(scores, wins) -> float:
    """Log likelihood of the win counts under scores (log-sum-exp stabilized).

    Invariant under adding a constant to all scores.
    """
    s = np.asarray(scores, dtype=float)
    w = wins.counts if isinstance(wins, WinMatrix) else np.asarray(wins)
    lse = np.logaddexp(s[:, None], s[None, :])
    terms = w * (s[:, None] - lse)
    return float(terms[~np.eye(len(s), dtype=bool)].sum())


def log_likelihood_gradient(scores, wins) -> np.ndarray:
    """Gradient of the log likelihood with respect to each score."""
    s = np.asarray(scores, dtype=float)
    w = wins.counts if isinstance(wins, WinMatrix) else np.asarray(wins)
    n = w + w.T
    p = expit(s[:, None] - s[None, :])
    np.fill_diagonal(p, 0.0)
    return w.sum(axis=1) - (n * p).sum(axis=1)


def _information_matrix(s: np.ndarray, n: np.ndarray) -> np.ndarray:
    # Observed information -H of the log likelihood; for this model it
    # depends only on the pair totals n_ij and the scores.
    p = expit(s[:, None] - s[None, :])
    v = n * p * (1.0 - p)
    np.fill_diagonal(v, 0.0)
    info = -v
    np.fill_diagonal(info, v.sum(axis=1))
    return info


def fit_bradley_terry(wins, anchor: int | None = None) -> ScoreVector:
    """Maximum-likelihood scores from a win matrix via MM iteration.

    The score vector is shifted so the minimum-score item (or the given
    anchor index) sits at zero with zero standard error. Standard errors
    for the other items come from the inverse observed information of
    the anchor-free parameterization.

    Raises DisconnectedGraphError if the comparison graph has more than
    one component. Items with all wins or all losses are reported in
    ``degenerate`` and their scores clamped to +-SCORE_CLAMP.
    """
    if not isinstance(wins, WinMatrix):
        wins = WinMatrix(np.asarray(wins))
    w = wins.counts.astype(float)
    m = wins.n_items
    if m < 2:
        raise ValueError("need at least two items")
    comps = wins.components()
    if len(comps) > 1:
        raise DisconnectedGraphError(comps)
    degenerate = wins.degenerate_items()

    n = w + w.T
    total_wins = w.sum(axis=1)
    pi = np.ones(m)
    for _ in range(MM_MAX_ITER):
        denom = (n / (pi[:, None] + pi[None, :] + np.eye(m))).sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            pi_new = np.where(denom > 0, total_wins / denom, pi)
        pi_new = np.clip(pi_new, np.exp(-SCORE_CLAMP), np.exp(SCORE_CLAMP))
        pi_new /= np.exp(np.mean(np.log(pi_new)))  # fix the gauge each sweep
        pi = pi_new
        grad = log_likelihood_gradient(np.log(pi), w)
        live = np.ones(m, dtype=bool)
        live[list(degenerate)] = False
        if np.linalg.norm(grad[live]) < MM_GRAD_TOL:
            break

    s = np.log(pi)
    if anchor is None:
        anchor = int(np.argmin(s))
    s = s - s[anchor]
    s = np.clip(s, -SCORE_CLAMP, SCORE_CLAMP)

    info = _information_matrix(s, n)
    keep = [i for i in range(m) if i != anchor]
    se = np.zeros(m)
    if keep:
        reduced = info[np.ix_(keep, keep)]
        try:
            cov = np.linalg.inv(reduced)
            se[keep] = np.sqrt(np.maximum(np.diagonal(cov), 0.0))
        except np.linalg.LinAlgError:
            se[keep] = np.inf
    return ScoreVector(
        scores=s,
        standard_errors=se,
        anchor=anchor,
        labels=wins.labels,
        degenerate=degenerate,
    )
