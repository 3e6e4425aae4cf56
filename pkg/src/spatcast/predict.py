"""Residual-time predictors over conditioned empirical distributions.

Each prediction method is the exact minimizer of a loss over the empirical
conditional distribution:

* expectation minimizes squared loss (the conditional sample mean),
* a confidence bound alpha returns the largest value the duration still
  exceeds with empirical probability alpha,
* an asymmetric piecewise-linear loss with underestimate weight c1 and
  overestimate weight c2 is minimized by the c1/(c1+c2) lower quantile.

All predictors condition on "the phase is still running at elapsed time t"
(samples strictly greater than t) and are pure functions of an immutable
distribution snapshot and t, so callers may invoke them at any cadence and
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

from .cycles import DURATION_KEY, PHASE_RING, RING_SEQUENCE
from .distributions import EmpiricalDist, JointSamples
from .errors import EmptyCondition, NonpositiveWeight

DEFAULT_HOLD_S = 1.0  # broadcast fallback when history is exhausted


@dataclass(frozen=True)
class Prediction:
    """A predicted phase end with its residual and conditioning context."""

    made_at: float
    quantity: str
    method: str
    predicted_duration: float
    residual: float
    n_conditioning_samples: int
    degraded: bool = False

    def __post_init__(self) -> None:
        if abs(self.residual - (self.predicted_duration - self.made_at)) > 1e-9:
            raise ValueError("residual must equal predicted_duration - made_at")
        if not self.degraded and self.n_conditioning_samples < 1:
            raise ValueError("a non-degraded prediction needs >= 1 sample")


@dataclass(frozen=True)
class Expectation:
    """Conditional-mean prediction; minimizes mean squared error."""

    @property
    def label(self) -> str:
        return "expectation"

    def apply(self, dist: EmpiricalDist) -> float:
        return dist.mean()


@dataclass(frozen=True)
class Confidence:
    """Value the duration exceeds with probability alpha."""

    alpha: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")

    @property
    def label(self) -> str:
        return f"confidence({self.alpha:g})"

    def apply(self, dist: EmpiricalDist) -> float:
        return dist.upper_quantile(self.alpha)


@dataclass(frozen=True)
class AsymmetricLoss:
    """Minimizer of c1*|err| for underestimates, c2*err for overestimates.

    The optimum is the c1/(c1+c2) lower quantile, taken as the smallest
    support value whose cdf reaches the ratio; ties are broken toward the
    smaller minimizer, matching a brute-force scan of the loss over the
    support.
    """

    c1: float
    c2: float

    def __post_init__(self) -> None:
        if self.c1 <= 0 or self.c2 <= 0:
            raise NonpositiveWeight("c1 and c2 must be > 0")

    @property
    def ratio(self) -> float:
        return self.c1 / (self.c1 + self.c2)

    @property
    def label(self) -> str:
        return f"asymmetric({self.c1:g},{self.c2:g})"

    def apply(self, dist: EmpiricalDist) -> float:
        return dist.quantile(self.ratio)


Method = Union[Expectation, Confidence, AsymmetricLoss]


def predict(
    dist: EmpiricalDist,
    t: float,
    method: Method,
    *,
    hold_interval: float | None = None,
) -> Prediction:
    """Condition ``dist`` on running past t, then apply ``method``.

    By default EmptyCondition propagates when t exceeds every historical
    sample.  A streaming caller that must always broadcast something can
    pass ``hold_interval`` to get a degraded prediction of t + hold instead.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    try:
        cond = dist.condition_gt(t)
    except EmptyCondition:
        if hold_interval is None:
            raise
        return Prediction(
            made_at=t, quantity=dist.quantity, method=method.label,
            predicted_duration=t + hold_interval, residual=hold_interval,
            n_conditioning_samples=0, degraded=True,
        )
    value = float(method.apply(cond))
    return Prediction(
        made_at=t, quantity=dist.quantity, method=method.label,
        predicted_duration=value, residual=value - t,
        n_conditioning_samples=cond.n,
    )


def predict_expectation(
    dist: EmpiricalDist, t: float, *, hold_interval: float | None = None
) -> Prediction:
    return predict(dist, t, Expectation(), hold_interval=hold_interval)


def predict_confidence(
    dist: EmpiricalDist, t: float, alpha: float, *, hold_interval: float | None = None
) -> Prediction:
    return predict(dist, t, Confidence(alpha), hold_interval=hold_interval)


def predict_asymmetric(
    dist: EmpiricalDist, t: float, c1: float, c2: float,
    *, hold_interval: float | None = None,
) -> Prediction:
    return predict(dist, t, AsymmetricLoss(c1, c2), hold_interval=hold_interval)


def predict_sum_marginal(
    sum_dist: EmpiricalDist, t: float, method: Method,
    *, hold_interval: float | None = None,
) -> Prediction:
    """Predict a two-phase end from the marginal sum samples.

    Conditions on {sum > t}, which is implied by (but weaker than) the
    leading phase still running; see ``predict_sum_joint`` for the exact
    conditioning.
    """
    if "+" not in sum_dist.quantity:
        raise ValueError(
            f"expected a per-cycle sum distribution, got {sum_dist.quantity!r}"
        )
    return predict(sum_dist, t, method, hold_interval=hold_interval)


def predict_sum_joint(
    joint: JointSamples, t: float, method: Method,
    *, hold_interval: float | None = None,
) -> Prediction:
    """Predict a two-phase end from joint pairs, given the lead runs past t."""
    if t < 0:
        raise ValueError("t must be >= 0")
    try:
        cond = joint.sum_given_lead_gt(t)
    except EmptyCondition:
        if hold_interval is None:
            raise
        return Prediction(
            made_at=t, quantity=joint.sum_quantity, method=method.label,
            predicted_duration=t + hold_interval, residual=hold_interval,
            n_conditioning_samples=0, degraded=True,
        )
    value = float(method.apply(cond))
    return Prediction(
        made_at=t, quantity=joint.sum_quantity, method=method.label,
        predicted_duration=value, residual=value - t,
        n_conditioning_samples=cond.n,
    )


# ---------------------------------------------------------------------------
# Whole-cycle transition schedules


@dataclass(frozen=True)
class ScheduleEntry:
    """Predicted green end (and start, when determinable) for one phase."""

    phase: str
    cycle_offset: int
    end_time: float
    start_time: float | None


def predict_schedule(
    dists: Mapping[str, EmpiricalDist],
    current_phase: str,
    t: float,
    horizon_cycles: int,
    method: Method = Expectation(),
) -> list[ScheduleEntry]:
    """Transition times for the active ring, current cycle plus future ones.

    The current cycle uses real-time conditioning: the opening phase
    conditions its own duration on {d > t}; the middle phase conditions the
    per-cycle sum on {sum > t}; the coordination phase ends at the cycle
    length exactly.  Cycles n+1 .. n+horizon-1 stack unconditional expected
    durations at multiples of the cycle length, since real-time information
    does not reach across the cycle boundary.  Times are seconds from the
    current cycle start.  Knowing only (phase, t) says nothing about how far
    the opposite ring has advanced mid-cycle, so a schedule covers one ring;
    query the other ring with its own phase tag.
    """
    if horizon_cycles < 1:
        raise ValueError("horizon_cycles must be >= 1")
    if current_phase not in PHASE_RING:
        raise ValueError(f"unknown phase {current_phase!r}")
    seq = RING_SEQUENCE[PHASE_RING[current_phase]]
    first_key, mid_key, _ = (DURATION_KEY[p] for p in seq)
    first = dists[first_key]
    mid = dists[mid_key]
    if first.stratum is None:
        raise ValueError("distributions must carry their cycle-length stratum")
    length = float(first.stratum)
    mu_first, mu_mid = first.mean(), mid.mean()

    idx = seq.index(current_phase)
    entries: list[ScheduleEntry] = []
    if idx == 0:
        end0 = predict(first, t, method).predicted_duration
        entries.append(ScheduleEntry(seq[0], 0, end0, 0.0))
        entries.append(ScheduleEntry(seq[1], 0, end0 + mu_mid, end0))
        entries.append(ScheduleEntry(seq[2], 0, length, end0 + mu_mid))
    elif idx == 1:
        sum_key = f"{first_key}+{mid_key}"
        if sum_key not in dists:
            raise ValueError(
                f"schedule from {current_phase} needs the {sum_key!r} distribution"
            )
        end1 = predict(dists[sum_key], t, method).predicted_duration
        entries.append(ScheduleEntry(seq[1], 0, end1, None))
        entries.append(ScheduleEntry(seq[2], 0, length, end1))
    else:
        entries.append(ScheduleEntry(seq[2], 0, length, None))

    for j in range(1, horizon_cycles):
        base = j * length
        entries.append(ScheduleEntry(seq[0], j, base + mu_first, base))
        entries.append(
            ScheduleEntry(seq[1], j, base + mu_first + mu_mid, base + mu_first)
        )
        entries.append(
            ScheduleEntry(seq[2], j, (j + 1) * length, base + mu_first + mu_mid)
        )
    return entries


def next_green_start(schedule: list[ScheduleEntry], phase: str) -> float:
    """When the phase next turns green: its start in the following cycle."""
    for entry in schedule:
        if entry.phase == phase and entry.cycle_offset == 1:
            assert entry.start_time is not None
            return entry.start_time
    raise ValueError(f"schedule has no cycle-offset-1 entry for {phase!r}")
