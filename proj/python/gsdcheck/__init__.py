"""Subjective experiment consistency check.

Fits the Generalized Score Distribution to each stimulus, computes a
bootstrapped G-test p-value per stimulus and judges the experiment from the
p-value P-P plot.
"""

from ._gsdcheck import (  # noqa: F401
    CsvError,
    Estimator,
    GridFileError,
    ParamGrid,
    __version__,
    batch_gof,
    bootstrap_pvalue,
    classify_experiment,
    contaminate,
    ecdf,
    experiment_test,
    g_statistic,
    gsd_log_pmf,
    gsd_moments,
    gsd_pmf,
    mos,
    ppplot_svg,
    sample,
    tag_stimulus,
    threshold_line,
    variance_bounds,
)
