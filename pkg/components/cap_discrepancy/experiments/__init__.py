"""
Experiments Component - comparative studies at desk scale.

Ratio study of the lower estimate against the exact discrepancy, log-log
slope fits per sampling scheme, and enumeration timings, all emitted as
rows for CSV output.
"""

from .core import (
    DEFAULT_SECONDS_PER_SUBSET,
    EXPERIMENT_COLUMNS,
    LOGLOG_COLUMNS,
    RATIO_COLUMNS,
    SLOPE_COLUMNS,
    TIMING_COLUMNS,
    ExperimentError,
    ExperimentPlan,
    ExperimentRow,
    RatioSummary,
    SlopeFit,
    TimingRow,
    calibrate_seconds_per_subset,
    dimension_study,
    loglog_rows,
    loglog_slope,
    parse_seeds,
    parse_sizes,
    projected_seconds,
    ratio_summary,
    run_experiment,
    timing_table,
)

__all__ = [
    "DEFAULT_SECONDS_PER_SUBSET",
    "EXPERIMENT_COLUMNS",
    "LOGLOG_COLUMNS",
    "RATIO_COLUMNS",
    "SLOPE_COLUMNS",
    "TIMING_COLUMNS",
    "ExperimentError",
    "ExperimentPlan",
    "ExperimentRow",
    "RatioSummary",
    "SlopeFit",
    "TimingRow",
    "calibrate_seconds_per_subset",
    "dimension_study",
    "loglog_rows",
    "loglog_slope",
    "parse_seeds",
    "parse_sizes",
    "projected_seconds",
    "ratio_summary",
    "run_experiment",
    "timing_table",
]
