"""Pearson correlation with exact two-tailed significance.

The p-value uses the Student-t transform of r with n-2 degrees of
freedom, evaluated through the regularized incomplete beta function
rather than a normal approximation (the score vectors compared here are
tiny, n = 6 or 7).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betainc


class ZeroVarianceError(ValueError):
    """Correlation is undefined when either input is constant."""


@dataclass(frozen=True)
class CorrelationReport:
    r: float
    p_value: float
    n: int

    def __str__(self):
        return f"r={self.r:.5f}, p={self.p_value:.5f} (n={self.n})"


def pearson(x, y) -> CorrelationReport:
    """Pearson r between two equal-length vectors plus two-tailed p-value."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"inputs must be 1-d and equal length, got {x.shape} vs {y.shape}")
    n = len(x)
    if n < 3:
        raise ValueError("need at least 3 points for a significance test")
    xm = x - x.mean()
    ym = y - y.mean()
    sx = np.sqrt((xm * xm).sum())
    sy = np.sqrt((ym * ym).sum())
    if sx == 0.0 or sy == 0.0:
        raise ZeroVarianceError("one of the inputs has zero variance")
    r = float((xm * ym).sum() / (sx * sy))
    r = max(-1.0, min(1.0, r))
    df = n - 2
    if abs(r) == 1.0:
        p = 0.0
    else:
        t2 = r * r * df / (1.0 - r * r)
        p = float(betainc(df / 2.0, 0.5, df / (df + t2)))
    return CorrelationReport(r=r, p_value=p, n=n)
