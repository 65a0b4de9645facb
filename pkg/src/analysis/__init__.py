from .stability import (
    VERDICTS,
    DriftEstimate,
    LittleLawReport,
    SlopeTest,
    StabilityReport,
    VerdictThresholds,
    backlog_slope,
    default_V_grid,
    drift_estimate,
    empirical_g,
    littles_law_check,
    locate_knee,
    stability_report,
    stability_verdict,
)

__all__ = [
    "VERDICTS",
    "DriftEstimate",
    "LittleLawReport",
    "SlopeTest",
    "StabilityReport",
    "VerdictThresholds",
    "backlog_slope",
    "default_V_grid",
    "drift_estimate",
    "empirical_g",
    "littles_law_check",
    "locate_knee",
    "stability_report",
    "stability_verdict",
]
