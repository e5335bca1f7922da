from convex_truncation.testers.constants import DEFAULT_CONSTANTS, DefaultConstants
from convex_truncation.testers.calibration import (
    ALGORITHMS,
    CalibrationResult,
    budget_epsilon,
    calibrate_threshold,
    required_samples,
)
from convex_truncation.testers.distinguishers import (
    TestConfig,
    TestReport,
    convex_distinguisher,
    get_distinguisher_classes,
    ltf_distinguisher,
    run_distinguisher,
    symm_convex_distinguisher,
)
from convex_truncation.testers.statistics import (
    geometric_median,
    mean_estimator,
    statistic_L_normsq,
    statistic_M,
    statistic_N,
)
