"""Frozen reference values for the golden tests.

Two kinds of constants live here. The two-decimal interval tables are
published reference values the package is required to reproduce within
the documented tolerances. The full-precision constants were computed
once with the independent routes in oracles.py (or, where marked as
behavior pins, with the package itself after oracle verification) and
frozen so regressions are caught bit-for-bit.
"""

# nine-stratum recidivism counts: (category, total, events)
VRAG_COUNTS = (
    (1, 11, 0),
    (2, 71, 6),
    (3, 101, 12),
    (4, 111, 19),
    (5, 116, 41),
    (6, 96, 42),
    (7, 74, 41),
    (8, 29, 22),
    (9, 9, 9),
)
VRAG_TOTAL_SUBJECTS = 618
VRAG_TOTAL_EVENTS = 192
VRAG_PROPORTIONS_2DP = (0.00, 0.08, 0.12, 0.17, 0.35, 0.44, 0.55, 0.76, 1.00)

# published 95% score intervals per stratum, two decimals
WILSON_95_BOUNDS = (
    (0.00, 0.26),
    (0.04, 0.17),
    (0.07, 0.20),
    (0.11, 0.25),
    (0.27, 0.44),
    (0.34, 0.54),
    (0.44, 0.66),
    (0.58, 0.88),
    (0.70, 1.00),
)

# published delta-method intervals from the trend fit, two decimals
LOGISTIC_95_BOUNDS = (
    (0.02, 0.06),
    (0.05, 0.10),
    (0.09, 0.16),
    (0.16, 0.24),
    (0.27, 0.35),
    (0.40, 0.51),
    (0.53, 0.67),
    (0.66, 0.80),
    (0.76, 0.89),
)
LOGISTIC_80_BOUNDS = (
    (0.03, 0.05),
    (0.05, 0.09),
    (0.10, 0.14),
    (0.17, 0.22),
    (0.28, 0.34),
    (0.42, 0.49),
    (0.56, 0.65),
    (0.68, 0.78),
    (0.79, 0.88),
)

# published percent-scale 95% bounds for the 13%-reoffending sweep:
# (n, events or None when the scenario is fictitious, lower %, upper %)
PERCENT_SWEEP = (
    (107, 14, 8, 21),
    (167, 22, 9, 19),
    (50, None, 6, 25),
    (10, None, 3, 44),
    (5, None, 2, 56),
    (1, None, 0, 84),
)
# the n = 100 000 row is published at one decimal on the percent scale
LARGE_SAMPLE_ROW = (100_000, 13_000, 12.8, 13.2)

# quantiles, oracle-verified (Acklam + Halley, mpmath bisection)
Z_975 = 1.959963984540054
Z_90 = 1.2815515655446004
T_975_DF1 = 12.706204736432095
T_975_DF253 = 1.9693848042198945
T_975_DF1M = 1.9599663568141066

# exact coverage at n=1, true risk 0.2, level 95%: the k=1 interval
# excludes 0.2, so coverage is the k=0 mass, bit-exactly 0.8
COVERAGE_N1_P02 = 0.8
COVERAGE_N1_P02_K0_UPPER = 0.7934506856227626
COVERAGE_N1_P02_K1_LOWER = 0.20654931437723742

# nine-stratum trend fit, behavior pins verified against an external
# GLM implementation and the score equations
VRAG_BETA0 = -3.834593460263826
VRAG_BETA1 = 0.6074616933367479
VRAG_SE0 = 0.33755772182979354
VRAG_SE1 = 0.06148987690024896
VRAG_DEVIANCE = 6.714032344770193
VRAG_ITERATIONS = 5
VRAG_WALD_CHI2 = 97.59566905029293
VRAG_WALD_P = 5.1316048051414264e-23

# worked prediction-interval example (intercept -2, slope 0.5, claimed
# residual SD 1, n=255, predictor mean 20, predictor sum of squares
# 5000, target 20, level 95%), frozen after oracle t-quantile agreement
CM1_EXAMPLE_POINT = 0.9996646498695336
CM1_EXAMPLE_LOWER = 0.9975925034194513
CM1_EXAMPLE_UPPER = 0.9999533710607047

# single-outcome construction at observed proportion 0.13
HMC_013_LOWER = 0.004140724177150052
HMC_013_UPPER = 0.8430127831836942

# two-scenario exact count distribution at n=2 (mean risk 0.6)
SINGLE_OUTCOME_N2 = (0.16, 0.48, 0.36)
