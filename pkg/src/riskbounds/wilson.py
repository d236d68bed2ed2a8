"""Wilson score intervals and their exact finite-sample coverage.

The score interval for a binomial proportion inverts the normal score test
of H0: p = p0, which keeps the bounds inside [0, 1] and behaves sensibly at
observed proportions of 0 or 1, unlike the Wald interval.

Real designs have an integer sample size and an integer event count.  The
input type nevertheless allows real-valued n so that "what if" calls with
fractional implied event counts (theta_hat * n not an integer) can be
computed; such calls are tagged ``fictitious_wilson`` and flagged invalid,
because no actual sample could have produced them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from scipy.special import gammaln, ndtri

#: Interval construction tags.  ``wald`` is reserved for completeness; no
#: operation in this package currently emits it.
METHODS = frozenset(
    {"wilson", "wald", "logistic_delta", "fictitious_wilson", "cm1_pseudo"}
)
#: Constructions that are reproduced for demonstration but are not
#: statistically legitimate; estimates carrying these tags are permanently
#: flagged valid=False.
INVALID_METHODS = frozenset({"fictitious_wilson", "cm1_pseudo"})

_INTEGRAL_TOL = 1e-9


@dataclass(frozen=True)
class IntervalEstimate:
    """A point estimate with lower/upper bounds and a validity flag.

    ``valid`` is False exactly for the refuted constructions
    (``fictitious_wilson`` and ``cm1_pseudo``); downstream consumers must
    never treat those as legitimate confidence intervals.  ``note`` carries
    a machine-readable explanation when the construction is refuted.
    """

    point: float
    lower: float
    upper: float
    level: float
    method: str
    valid: bool
    note: str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown interval method {self.method!r}")
        if not 0.0 < self.level < 1.0:
            raise ValueError(f"confidence level must be in (0,1), got {self.level}")
        if not 0.0 <= self.lower <= self.upper <= 1.0:
            raise ValueError(
                f"bounds must satisfy 0 <= lower <= upper <= 1, got "
                f"({self.lower}, {self.upper})"
            )
        if not 0.0 <= self.point <= 1.0:
            raise ValueError(f"point estimate must be in [0,1], got {self.point}")
        expected_valid = self.method not in INVALID_METHODS
        if self.valid != expected_valid:
            raise ValueError(
                "valid flag must be False exactly for the refuted methods "
                f"(method={self.method!r}, valid={self.valid})"
            )
        if self.valid and not self.lower <= self.point <= self.upper:
            raise ValueError(
                f"point {self.point} outside bounds "
                f"({self.lower}, {self.upper}) for valid method {self.method!r}"
            )

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class WilsonInput:
    """Inputs for a score interval: observed proportion, sample size, alpha.

    ``n`` is real-valued on purpose; see the module docstring.
    """

    theta_hat: float
    n: float
    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.theta_hat <= 1.0:
            raise ValueError(f"theta_hat must be in [0,1], got {self.theta_hat}")
        if not (math.isfinite(self.n) and self.n > 0):
            raise ValueError(f"n must be positive and finite, got {self.n}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0,1), got {self.alpha}")


class CoverageOutcome(NamedTuple):
    k: int
    probability: float
    interval: IntervalEstimate
    covered: bool


@dataclass(frozen=True)
class CoverageReport:
    """Exact coverage of the score interval at one (n, p_true, level)."""

    n: int
    p_true: float
    level: float
    coverage: float
    per_outcome: tuple[CoverageOutcome, ...]


def standard_normal_quantile(p: float) -> float:
    """Inverse standard normal CDF (absolute error well below 1e-9)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile argument must be in (0,1), got {p}")
    return float(ndtri(p))


def _is_integral(x: float) -> bool:
    return abs(x - round(x)) <= _INTEGRAL_TOL


def wilson_interval(inp: WilsonInput) -> IntervalEstimate:
    """Score interval for a binomial proportion.

    Bounds solve the quadratic (theta_hat - b)^2 = z^2 b(1-b)/n in b, with
    z the standard normal quantile at 1 - alpha/2.  The result is tagged
    ``wilson`` only when n and the implied event count theta_hat*n are both
    integers (within 1e-9); otherwise it is tagged ``fictitious_wilson``
    and flagged invalid.
    """
    z = standard_normal_quantile(1.0 - inp.alpha / 2.0)
    n, th = inp.n, inp.theta_hat
    z2 = z * z
    denom = 1.0 + z2 / n
    center = th + z2 / (2.0 * n)
    half = z * math.sqrt(th * (1.0 - th) / n + z2 / (4.0 * n * n))
    lower = max(0.0, (center - half) / denom)
    upper = min(1.0, (center + half) / denom)
    # The formula contains theta_hat by construction; snap away float dust
    # so the containment invariant cannot trip at the boundaries.
    if lower > th:
        if lower - th > 1e-9:
            raise AssertionError(f"wilson lower bound {lower} above point {th}")
        lower = th
    if upper < th:
        if th - upper > 1e-9:
            raise AssertionError(f"wilson upper bound {upper} below point {th}")
        upper = th
    real_sample = _is_integral(n) and _is_integral(th * n)
    method = "wilson" if real_sample else "fictitious_wilson"
    return IntervalEstimate(
        point=th,
        lower=lower,
        upper=upper,
        level=1.0 - inp.alpha,
        method=method,
        valid=real_sample,
        note=None if real_sample else "fractional sample: no such design exists",
    )


def binomial_pmf(k: int, n: int, p: float) -> float:
    """Binomial(n, p) mass at k.

    Edge cases (k in {0, n}, p in {0, 1}) use direct powers so that, e.g.,
    pmf(0, 1, 0.2) is the float 0.8 bit-exactly; interior terms go through
    log-gamma to stay finite at large n.
    """
    if not 0 <= k <= n:
        return 0.0
    if p == 0.0:
        return 1.0 if k == 0 else 0.0
    if p == 1.0:
        return 1.0 if k == n else 0.0
    if k == 0:
        return (1.0 - p) ** n
    if k == n:
        return p**n
    log_pmf = (
        gammaln(n + 1)
        - gammaln(k + 1)
        - gammaln(n - k + 1)
        + k * math.log(p)
        + (n - k) * math.log1p(-p)
    )
    return math.exp(log_pmf)


def exact_coverage(n: int, p_true: float, level: float) -> CoverageReport:
    """Exact probability that the score interval covers p_true.

    Enumerates every possible outcome k in {0..n}, builds the interval for
    theta_hat = k/n, and sums the binomial probabilities of the outcomes
    whose interval contains p_true.  No simulation is involved; the answer
    is exact up to float arithmetic.  Cost is O(n).
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n!r}")
    if not 0.0 <= p_true <= 1.0:
        raise ValueError(f"p_true must be in [0,1], got {p_true}")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0,1), got {level}")
    alpha = 1.0 - level
    outcomes = []
    covered_mass = []
    for k in range(n + 1):
        interval = wilson_interval(WilsonInput(theta_hat=k / n, n=n, alpha=alpha))
        prob = binomial_pmf(k, n, p_true)
        covered = interval.lower <= p_true <= interval.upper
        outcomes.append(CoverageOutcome(k, prob, interval, covered))
        if covered:
            covered_mass.append(prob)
    coverage = math.fsum(covered_mass)
    return CoverageReport(
        n=n,
        p_true=p_true,
        level=level,
        coverage=coverage,
        per_outcome=tuple(outcomes),
    )
