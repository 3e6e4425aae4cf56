"""Synthetic semi-actuated, coordinated dual-ring controller.

Ground-truth generator for desk-scale testing: per cycle, side-street and
left-turn demands are Poisson draws, each detected vehicle extends its
actuated green by a fixed amount, and the coordination phase absorbs the
slack so the cycle keeps the length fixed by the timing plan.  Output
satisfies the barrier identities exactly and is a pure function of
(plan, demand, seed), so runs are reproducible and parallel-safe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cycles import (
    DURATION_KEY,
    MS_PER_DAY,
    RING_SEQUENCE,
    CycleRecord,
    CycleTable,
    PhaseEvent,
)
from .errors import InfeasiblePlan

Segments = tuple[tuple[float, float, float], ...]

_MS_PER_HOUR = 3_600_000.0


def _check_segments(segments: Segments, what: str) -> None:
    if not segments:
        raise ValueError(f"{what}: at least one segment required")
    prev_end = 0.0
    for start, end, _ in segments:
        if start != prev_end:
            raise ValueError(f"{what}: segments must tile 0-24 h contiguously")
        if end <= start:
            raise ValueError(f"{what}: empty segment {start}-{end}")
        prev_end = end
    if prev_end != 24.0:
        raise ValueError(f"{what}: segments must end at hour 24")


def _segment_value(segments: Segments, hour: float) -> float:
    for start, end, value in segments:
        if start <= hour < end:
            return value
    return segments[-1][2]


@dataclass(frozen=True)
class TimingPlan:
    """Cycle lengths by time of day plus the actuation rule parameters.

    ``schedule`` is a tuple of (start_hour, end_hour, cycle_length) segments
    tiling the 24 h day.  The side-street green starts from the pedestrian
    clearance minimum and each detected vehicle extends it; the left-turn
    green is pure extensions.  Caps bound both actuated greens.
    """

    schedule: Segments = ((0.0, 24.0, 120.0),)
    min_green_p4: float = 36.0
    extension: float = 5.0
    max_d4: float = 60.0
    max_d1: float = 25.0

    def __post_init__(self) -> None:
        _check_segments(self.schedule, "schedule")
        if self.extension <= 0:
            raise ValueError("extension must be positive")
        for _, _, length in self.schedule:
            if length <= 0:
                raise ValueError("cycle length must be positive")
            if self.min_green_p4 + self.max_d1 >= length:
                raise ValueError(
                    "coordination phase must receive positive time: "
                    f"min_green_p4 + max_d1 >= L = {length}"
                )

    def cycle_length_at(self, hour: float) -> float:
        return _segment_value(self.schedule, hour)


@dataclass(frozen=True)
class DemandProfile:
    """Piecewise-constant vehicle arrival rates per cycle, periodic over 24 h."""

    side_street_rate: Segments = ((0.0, 24.0, 0.5),)
    left_turn_rate: Segments = ((0.0, 24.0, 0.3),)
    rng_seed: int = 0

    def __post_init__(self) -> None:
        _check_segments(self.side_street_rate, "side_street_rate")
        _check_segments(self.left_turn_rate, "left_turn_rate")
        for segs in (self.side_street_rate, self.left_turn_rate):
            if any(v < 0 for _, _, v in segs):
                raise ValueError("rates must be >= 0")

    def side_rate_at(self, hour: float) -> float:
        return _segment_value(self.side_street_rate, hour)

    def left_rate_at(self, hour: float) -> float:
        return _segment_value(self.left_turn_rate, hour)


def peaked_demand(seed: int = 0) -> DemandProfile:
    """A day with AM and PM peaks, the shape that spreads actuated greens."""
    return DemandProfile(
        side_street_rate=(
            (0.0, 6.0, 0.2), (6.0, 10.0, 3.0), (10.0, 16.0, 0.8),
            (16.0, 19.0, 3.5), (19.0, 24.0, 0.3),
        ),
        left_turn_rate=(
            (0.0, 6.0, 0.1), (6.0, 10.0, 1.2), (10.0, 16.0, 0.4),
            (16.0, 19.0, 1.5), (19.0, 24.0, 0.2),
        ),
        rng_seed=seed,
    )


def ring1_durations(
    plan: TimingPlan, cycle_length: float, side_count: int, left_count: int
) -> tuple[float, float, float]:
    """Apply the extension rule: returns (d4, d1, d2) for one cycle."""
    d4 = min(plan.min_green_p4 + plan.extension * side_count, plan.max_d4)
    d1 = min(plan.extension * left_count, plan.max_d1)
    return d4, d1, cycle_length - d4 - d1


def simulate(
    plan: TimingPlan,
    demand: DemandProfile,
    n_cycles: int,
    *,
    start_ms: int = 0,
    site_id: str = "sim",
) -> CycleTable:
    """Generate ``n_cycles`` records under the actuation rule.

    Ring 2 mirrors ring 1 at the barrier (d8 = d4); its split of the
    remaining time draws an independent left-turn count and is resampled in
    the rare case the coordination phase d6 would not survive.  Identical
    (plan, demand, n_cycles, start_ms) always produce an identical table.
    """
    if n_cycles < 1:
        raise ValueError("n_cycles must be >= 1")
    for _, _, length in plan.schedule:
        if length - plan.max_d4 - plan.max_d1 <= 0:
            raise InfeasiblePlan(
                f"caps leave d2 <= 0 at L = {length}: "
                f"max_d4 + max_d1 = {plan.max_d4 + plan.max_d1}"
            )

    rng = np.random.default_rng(demand.rng_seed)
    records = []
    t_ms = start_ms
    for i in range(n_cycles):
        hour = (t_ms % MS_PER_DAY) / _MS_PER_HOUR
        length = plan.cycle_length_at(hour)
        side = int(rng.poisson(demand.side_rate_at(hour)))
        left = int(rng.poisson(demand.left_rate_at(hour)))
        d4, d1, d2 = ring1_durations(plan, length, side, left)
        left_rate = demand.left_rate_at(hour)
        while True:
            d5 = min(plan.extension * int(rng.poisson(left_rate)), plan.max_d1)
            d6 = d1 + d2 - d5
            if d6 > 0:
                break
        records.append(CycleRecord(
            cycle_index=i, cycle_start_ms=t_ms, length_s=length,
            d4=d4, d1=d1, d2=d2, d8=d4, d5=d5, d6=d6,
        ))
        t_ms += int(round(length * 1000))
    return CycleTable(tuple(records), site_id=site_id)


def emit_events(table: CycleTable) -> list[PhaseEvent]:
    """Serialize a table back into the phase-event stream that produced it.

    Re-ingesting the result reproduces the table's durations to within the
    1 ms timestamp quantization.  Zero-duration phases emit their start and
    end at the same timestamp.
    """
    events: list[PhaseEvent] = []
    for rec in table:
        for ring, seq in RING_SEQUENCE.items():
            elapsed = 0.0
            for phase in seq:
                dur = rec.duration(DURATION_KEY[phase])
                start_ms = rec.cycle_start_ms + int(round(elapsed * 1000))
                end_ms = rec.cycle_start_ms + int(round((elapsed + dur) * 1000))
                events.append(PhaseEvent(start_ms, ring, phase, "start"))
                events.append(PhaseEvent(end_ms, ring, phase, "end"))
                elapsed += dur
    events.sort(key=lambda ev: ev.timestamp_ms)  # stable: per-ring order kept
    return events


# ---------------------------------------------------------------------------
# Flat key-value config files


@dataclass(frozen=True)
class SimulationConfig:
    plan: TimingPlan
    demand: DemandProfile
    start_ms: int = 0


def _parse_segments(text: str, scale_hours: bool = True) -> Segments:
    segs = []
    for part in text.split(","):
        part = part.strip()
        span, _, value = part.partition("@")
        if not value:
            raise ValueError(f"segment {part!r} must look like '6-10@2.5'")
        lo, _, hi = span.partition("-")
        segs.append((float(lo), float(hi), float(value)))
    return tuple(segs)


def _format_segments(segs: Segments) -> str:
    return ", ".join(f"{a:g}-{b:g}@{v:g}" for a, b, v in segs)


def parse_config(text: str) -> SimulationConfig:
    """Parse the flat ``key = value`` simulator config format.

    Recognized keys: min_green_p4, extension, max_d4, max_d1, schedule,
    side_street_rate, left_turn_rate, seed, start_ms.  Schedule and rate
    values are comma-separated 'START-END@VALUE' hour segments.  Lines
    starting with '#' and blank lines are ignored.
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        values[key.strip()] = value.strip()

    known = {
        "min_green_p4", "extension", "max_d4", "max_d1", "schedule",
        "side_street_rate", "left_turn_rate", "seed", "start_ms",
    }
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")

    plan_kwargs = {}
    if "schedule" in values:
        plan_kwargs["schedule"] = _parse_segments(values["schedule"])
    for key in ("min_green_p4", "extension", "max_d4", "max_d1"):
        if key in values:
            plan_kwargs[key] = float(values[key])
    demand_kwargs = {}
    if "side_street_rate" in values:
        demand_kwargs["side_street_rate"] = _parse_segments(values["side_street_rate"])
    if "left_turn_rate" in values:
        demand_kwargs["left_turn_rate"] = _parse_segments(values["left_turn_rate"])
    if "seed" in values:
        demand_kwargs["rng_seed"] = int(values["seed"])
    return SimulationConfig(
        plan=TimingPlan(**plan_kwargs),
        demand=DemandProfile(**demand_kwargs),
        start_ms=int(values.get("start_ms", "0")),
    )


def format_config(config: SimulationConfig) -> str:
    plan, demand = config.plan, config.demand
    lines = [
        f"schedule = {_format_segments(plan.schedule)}",
        f"min_green_p4 = {plan.min_green_p4:g}",
        f"extension = {plan.extension:g}",
        f"max_d4 = {plan.max_d4:g}",
        f"max_d1 = {plan.max_d1:g}",
        f"side_street_rate = {_format_segments(demand.side_street_rate)}",
        f"left_turn_rate = {_format_segments(demand.left_turn_rate)}",
        f"seed = {demand.rng_seed}",
        f"start_ms = {config.start_ms}",
    ]
    return "\n".join(lines) + "\n"


def load_config(path) -> SimulationConfig:
    with open(path, "r", encoding="utf-8") as f:
        return parse_config(f.read())
