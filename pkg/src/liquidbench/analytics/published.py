"""Reference data: visual-accuracy scores from the original crowd-sourced studies.

Each study ranked a handful of liquid-simulation videos by pairwise
comparison; the published outcome is a Bradley-Terry score per video
with its standard error (the anchor video is pinned at 0.0000 with SE
0.0000). The correlation results published alongside them are kept here
too, so the analysis pipeline can be checked against known outcomes.

Study naming: `dam`/`wave` is the scenario, `ref`/`noref` says whether
participants saw a real-world reference video, and the remaining tag
identifies the rendering style or the method set under comparison.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ScoreTable:
    labels: tuple[str, ...]
    scores: tuple[float, ...]
    standard_errors: tuple[float, ...]

    def __post_init__(self):
        assert len(self.labels) == len(self.scores) == len(self.standard_errors)


_FLIP_SPH = ("flip_1x", "flip_2x", "flip_4x", "sph_1x", "sph_2x", "sph_3x")
_APIC_IISPH = ("apic_1x", "apic_2x", "apic_4x", "iisph_1x", "iisph_2x", "iisph_3x")
_SEVEN_METHODS = ("mp", "ls", "flip", "apic", "wcsph", "iisph", "sph")


PUBLISHED_STUDIES: dict[str, ScoreTable] = {
    # FLIP & SPH at three resolutions, varying rendering style and reference availability.
    "dam_opaque_ref": ScoreTable(
        _FLIP_SPH,
        (0.0000, 3.1368, 4.6271, 4.9480, 6.5291, 6.7529),
        (0.0000, 0.4584, 0.4786, 0.4813, 0.4961, 0.4989),
    ),
    "dam_opaque_noref": ScoreTable(
        _FLIP_SPH,
        (0.0000, 1.0822, 1.6328, 0.0579, 0.9089, 1.0300),
        (0.0000, 0.1975, 0.2083, 0.1964, 0.1955, 0.1968),
    ),
    "dam_transparent_ref": ScoreTable(
        _FLIP_SPH,
        (0.0000, 2.0498, 3.8288, 2.8715, 4.6016, 5.3260),
        (0.0000, 0.3272, 0.3572, 0.3428, 0.3700, 0.3864),
    ),
    "dam_transparent_noref": ScoreTable(
        _FLIP_SPH,
        (1.6860, 1.7125, 1.5685, 0.8198, 0.4223, 0.0000),
        (0.1785, 0.1789, 0.1765, 0.1694, 0.1695, 0.0000),
    ),
    "wave_opaque_ref": ScoreTable(
        _FLIP_SPH,
        (0.0000, 3.2189, 3.6823, 3.0738, 5.2235, 5.0324),
        (0.0000, 0.4720, 0.4771, 0.4701, 0.4996, 0.4958),
    ),
    # APIC & IISPH with the same resolutions.
    "dam_apic_iisph_ref": ScoreTable(
        _APIC_IISPH,
        (0.0000, 2.6095, 3.7208, 2.6466, 4.2966, 4.9892),
        (0.0000, 0.3411, 0.3541, 0.3416, 0.3618, 0.3751),
    ),
    "dam_apic_iisph_noref": ScoreTable(
        _APIC_IISPH,
        (0.1480, 1.5857, 2.0321, 0.0000, 1.4117, 1.8044),
        (0.1816, 0.1857, 0.1933, 0.0000, 0.1835, 0.1890),
    ),
    # Rendering-style series (all without reference video).
    "dam_blend25_noref": ScoreTable(
        _FLIP_SPH,
        (0.0000, -0.0776, 0.0000, -1.9924, -1.4552, -1.6837),
        (0.0000, 0.1762, 0.1769, 0.1972, 0.1849, 0.1895),
    ),
    "dam_blend50_noref": ScoreTable(
        _FLIP_SPH,
        (0.0000, 0.1456, 0.2132, -1.2302, -0.6418, -0.7460),
        (0.0000, 0.1629, 0.1636, 0.1726, 0.1629, 0.1641),
    ),
    "dam_blend75_noref": ScoreTable(
        _FLIP_SPH,
        (0.0000, 0.8031, 1.1089, -1.0177, -0.2983, -0.2034),
        (0.0000, 0.1843, 0.1919, 0.1914, 0.1779, 0.1772),
    ),
    "dam_glossy_noref": ScoreTable(
        _FLIP_SPH,
        (0.0000, 0.5613, 0.8232, -0.7548, 0.1286, 0.0537),
        (0.0000, 0.1489, 0.1524, 0.1553, 0.1465, 0.1465),
    ),
    "dam_translucent_noref": ScoreTable(
        _FLIP_SPH,
        (0.0000, 0.8324, 0.8324, -0.2321, 0.1135, 0.0723),
        (0.0000, 0.1484, 0.1484, 0.1456, 0.1437, 0.1438),
    ),
    # Seven simulation methods at matched resolution.
    "methods_dam": ScoreTable(
        _SEVEN_METHODS,
        (0.0000, 0.1248, 2.0613, 3.4211, 2.6271, 4.4595, 4.3855),
        (0.0000, 0.1769, 0.1962, 0.2136, 0.2039, 0.2294, 0.2280),
    ),
    "methods_wave": ScoreTable(
        _SEVEN_METHODS,
        (0.0000, 1.6646, 2.6871, 2.6987, 0.7209, 3.7943, 3.7943),
        (0.0000, 0.1943, 0.2058, 0.2060, 0.1876, 0.2229, 0.2229),
    ),
    # Four methods tuned to a matched per-frame compute budget.
    "budget_dam": ScoreTable(
        ("flip", "apic", "iisph", "sph"),
        (1.5215, 2.8256, 0.0000, 0.1410),
        (0.3387, 0.4205, 0.0000, 0.3070),
    ),
    # Seven particle-skinning resolutions of one FLIP run.
    "skinning_dam": ScoreTable(
        ("0.5x", "0.75x", "1x", "1.5x", "2x", "3x", "4x"),
        (0.0000, 0.9397, 1.0235, 1.9248, 2.7473, 2.7891, 2.9170),
        (0.0000, 0.2308, 0.2310, 0.2393, 0.2533, 0.2542, 0.2572),
    ),
    # FLIP with and without a learned splash model, plus two baselines.
    "splash_dam": ScoreTable(
        ("mp", "flip", "mlflip", "sph"),
        (0.0000, 2.2833, 4.1758, 5.0077),
        (0.0000, 0.3723, 0.4353, 0.4569),
    ),
    "splash_wave": ScoreTable(
        ("mp", "flip", "mlflip", "sph"),
        (0.0000, 1.8312, 2.6612, 3.5203),
        (0.0000, 0.3069, 0.3282, 0.3538),
    ),
    # One identical study run on three crowd-sourcing platforms
    # (six videos plus one dummy; the dummy is item a7).
    "platform_crowdflower": ScoreTable(
        ("a1", "a2", "a3", "a4", "a5", "a6", "a7"),
        (0.3317, 0.2673, 1.1146, 1.6024, 0.0000, 0.8540, 1.2931),
        (0.1637, 0.1640, 0.1665, 0.1744, 0.0000, 0.1643, 0.1688),
    ),
    "platform_microworkers": ScoreTable(
        ("a1", "a2", "a3", "a4", "a5", "a6", "a7"),
        (0.6556, 0.3539, 0.9845, 1.8701, 0.0000, 1.2118, 1.7273),
        (0.1685, 0.1693, 0.1696, 0.1820, 0.0000, 0.1715, 0.1790),
    ),
    "platform_mturk": ScoreTable(
        ("a1", "a2", "a3", "a4", "a5", "a6", "a7"),
        (0.3677, 0.0000, 0.7923, 1.8208, 0.0000, 1.0997, 1.5849),
        (0.1661, 0.1687, 0.1666, 0.1820, 0.0000, 0.1692, 0.1766),
    ),
}


@dataclass(frozen=True)
class PublishedCorrelation:
    """One published correlation cell between two studies' score vectors."""

    cell: str
    study_x: str
    study_y: str
    r: float
    p_value: float


# Published correlation analysis. study ids refer to PUBLISHED_STUDIES;
# `wave_opaque_noref` (used by cell C3) has no published score vector.
PUBLISHED_CORRELATIONS: tuple[PublishedCorrelation, ...] = (
    PublishedCorrelation("C0", "dam_opaque_ref", "dam_transparent_ref", 0.97347, 0.00105),
    PublishedCorrelation("C1", "dam_opaque_ref", "wave_opaque_ref", 0.96557, 0.00176),
    PublishedCorrelation("C2", "dam_opaque_noref", "dam_transparent_noref", -0.01308, 0.98039),
    PublishedCorrelation("C3", "dam_opaque_noref", "wave_opaque_noref", 0.83895, 0.03682),
    PublishedCorrelation("C4", "dam_opaque_ref", "dam_opaque_noref", 0.64540, 0.16632),
    PublishedCorrelation("C5", "dam_transparent_ref", "dam_transparent_noref", -0.60960, 0.19887),
    PublishedCorrelation("C6", "dam_opaque_ref", "dam_apic_iisph_ref", 0.96057, 0.00230),
    PublishedCorrelation("C7", "dam_opaque_noref", "dam_apic_iisph_noref", 0.96932, 0.00140),
    PublishedCorrelation("C8", "dam_apic_iisph_ref", "dam_apic_iisph_noref", 0.72139, 0.10562),
    PublishedCorrelation("opaque_glossy", "dam_opaque_noref", "dam_glossy_noref", 0.94329, 0.00473),
    PublishedCorrelation("opaque_translucent", "dam_opaque_noref", "dam_translucent_noref", 0.93170, 0.00684),
    PublishedCorrelation("transparent_glossy", "dam_transparent_noref", "dam_glossy_noref", 0.55867, 0.24918),
    PublishedCorrelation("transparent_translucent", "dam_transparent_noref", "dam_translucent_noref", 0.59764, 0.21027),
    PublishedCorrelation("cf_mw", "platform_crowdflower", "platform_microworkers", 0.95808, 0.00068),
    PublishedCorrelation("mw_mt", "platform_microworkers", "platform_mturk", 0.98596, 0.00004),
    PublishedCorrelation("mt_cf", "platform_mturk", "platform_crowdflower", 0.95170, 0.00096),
)
