from .bradley_terry import (
    DisconnectedGraphError,
    ScoreVector,
    WinMatrix,
    fit_bradley_terry,
    log_likelihood,
    log_likelihood_gradient,
    preference_probability,
)
from .correlation import CorrelationReport, ZeroVarianceError, pearson
from .published import (
    PUBLISHED_CORRELATIONS,
    PUBLISHED_STUDIES,
    PublishedCorrelation,
    ScoreTable,
)

__all__ = [
    "CorrelationReport",
    "DisconnectedGraphError",
    "PUBLISHED_CORRELATIONS",
    "PUBLISHED_STUDIES",
    "PublishedCorrelation",
    "ScoreTable",
    "ScoreVector",
    "WinMatrix",
    "ZeroVarianceError",
    "fit_bradley_terry",
    "log_likelihood",
    "log_likelihood_gradient",
    "pearson",
    "preference_probability",
]
