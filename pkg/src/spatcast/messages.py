"""SPaT message composition and fixed-cadence NDJSON streaming.

A message carries, for one phase at one instant, the phase start offset,
the earliest/likeliest/latest predicted green end, a confidence-bound
value, and when the phase next turns green.  All times are seconds into
the current cycle, printed with two decimals in a fixed field order so
replays are byte-identical.

Streaming replays a cycle table tick by tick: at each tick the active
phase of each ring gets one message, composed from an immutable snapshot
of fitted distributions.  When the live phase outlives every historical
sample the message degrades to a short hold prediction rather than going
silent.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from typing import Mapping, TextIO

from .cycles import DURATION_KEY, PHASE_RING, RING_SEQUENCE, CycleRecord, CycleTable
from .distributions import EmpiricalDist, fit
from .errors import EmptyCondition, SinkClosed
from .predict import DEFAULT_HOLD_S, next_green_start, predict_schedule

_ORDER_EPS = 1e-9

MESSAGE_DIST_KEYS = ("d4", "d1", "d2", "d8", "d5", "d6", "d4+d1", "d8+d5")


@dataclass(frozen=True)
class SpatMessage:
    """One broadcastable phase-state record."""

    site_id: str
    cycle_index: int
    phase: str
    made_at: float
    start_time: float
    min_end_time: float
    max_end_time: float
    likely_time: float
    confidence_alpha: float
    confidence_value: float
    next_time: float
    degraded: bool

    def __post_init__(self) -> None:
        if not 0.0 < self.confidence_alpha < 1.0:
            raise ValueError("confidence_alpha must be in (0, 1)")
        ordered = (
            self.start_time <= self.min_end_time + _ORDER_EPS
            and self.min_end_time <= self.likely_time + _ORDER_EPS
            and self.likely_time <= self.max_end_time + _ORDER_EPS
        )
        if not ordered:
            raise ValueError("need startTime <= minEndTime <= likelyTime <= maxEndTime")
        if self.min_end_time + _ORDER_EPS < self.made_at:
            raise ValueError("minEndTime cannot precede made_at")
        if self.next_time <= self.likely_time:
            raise ValueError("nextTime must follow likelyTime")

    def to_ndjson(self) -> str:
        """One JSON line, fixed field order, 2-decimal seconds."""
        site = json.dumps(self.site_id)
        return (
            f'{{"site":{site},"cycle":{self.cycle_index},"phase":"{self.phase}",'
            f'"madeAt":{self.made_at:.2f},"startTime":{self.start_time:.2f},'
            f'"minEndTime":{self.min_end_time:.2f},"maxEndTime":{self.max_end_time:.2f},'
            f'"likelyTime":{self.likely_time:.2f},'
            f'"confidenceAlpha":{self.confidence_alpha:.2f},'
            f'"confidenceValue":{self.confidence_value:.2f},'
            f'"nextTime":{self.next_time:.2f},'
            f'"degraded":{"true" if self.degraded else "false"}}}'
        )


def fit_message_dists(table: CycleTable) -> dict[str, EmpiricalDist]:
    """Fit every distribution message composition needs, for both rings."""
    return {key: fit(table, key) for key in MESSAGE_DIST_KEYS}


def _conditional_stats(
    dists: Mapping[str, EmpiricalDist],
    phase: str,
    t: float,
    alpha: float,
    hold_interval: float,
) -> tuple[float, float, float, float, float, int, bool]:
    """(min_end, max_end, likely, confidence_value, next_time, n, degraded).

    Pure in (dists, phase, t, alpha), which lets the streamer cache per
    tick offset.  The opening phase conditions its own duration on running
    past t; the middle phase conditions the per-cycle sum; the coordination
    phase ends exactly at the cycle length.
    """
    seq = RING_SEQUENCE[PHASE_RING[phase]]
    first_key, mid_key, last_key = (DURATION_KEY[p] for p in seq)
    length = dists[first_key].stratum
    if length is None:
        raise ValueError("distributions must carry their cycle-length stratum")
    idx = seq.index(phase)
    if idx == 2 and t >= length:
        raise ValueError(f"t = {t:g} s is beyond the cycle length {length:g} s")
    try:
        if idx == 2:
            min_end = max_end = likely = conf = float(length)
            n = dists[last_key].n
        else:
            key = first_key if idx == 0 else f"{first_key}+{mid_key}"
            if key not in dists:
                raise ValueError(f"composing {phase} needs the {key!r} distribution")
            base = dists[key]
            cond = base.condition_gt(t)
            min_end = max(t, cond.support_min())
            max_end = cond.support_max()
            likely = cond.mean()
            conf = cond.upper_quantile(alpha)
            n = cond.n
        schedule = predict_schedule(dists, phase, t, horizon_cycles=2)
        next_time = next_green_start(schedule, phase)
        return min_end, max_end, likely, conf, next_time, n, False
    except EmptyCondition:
        held = t + hold_interval
        return held, held, held, held, held + float(length), 0, True


def compose(
    dists: Mapping[str, EmpiricalDist],
    current_phase: str,
    t: float,
    alpha: float,
    *,
    site_id: str = "",
    cycle_index: int = 0,
    phase_start: float = 0.0,
    hold_interval: float = DEFAULT_HOLD_S,
) -> SpatMessage:
    """Compose the broadcastable record for one phase at elapsed time t.

    ``phase_start`` is the phase's realized start offset within the cycle;
    a replaying streamer knows it, and it defaults to 0, which is exact for
    the cycle-opening phases p4 and p8.
    """
    min_end, max_end, likely, conf, next_time, n, degraded = _conditional_stats(
        dists, current_phase, t, alpha, hold_interval
    )
    return SpatMessage(
        site_id=site_id,
        cycle_index=cycle_index,
        phase=current_phase,
        made_at=t,
        start_time=phase_start,
        min_end_time=min_end,
        max_end_time=max_end,
        likely_time=likely,
        confidence_alpha=alpha,
        confidence_value=conf,
        next_time=next_time,
        degraded=degraded,
    )


def _active_phase(rec: CycleRecord, ring: int, t: float) -> tuple[str, float]:
    """(phase, realized start offset) active on a ring at cycle time t."""
    if ring == 1:
        if t < rec.d4:
            return "p4", 0.0
        if t < rec.d4 + rec.d1:
            return "p1", rec.d4
        return "p2", rec.d4 + rec.d1
    if t < rec.d8:
        return "p8", 0.0
    if t < rec.d8 + rec.d5:
        return "p5", rec.d8
    return "p6", rec.d8 + rec.d5


def stream(
    table: CycleTable,
    dists: Mapping[str, EmpiricalDist],
    out: TextIO,
    *,
    cadence_ms: int = 100,
    alpha: float = 0.8,
    site_id: str | None = None,
    speed: float | None = None,
    hold_interval: float = DEFAULT_HOLD_S,
) -> int:
    """Replay a cycle table as NDJSON messages at a fixed cadence.

    Each tick emits one message per ring's active phase (ring 1 first).
    ``speed`` of None replays as fast as possible; a positive value paces
    ticks at cadence/speed wall seconds (1.0 is real time).  Returns the
    number of messages written; a sink that stops accepting writes ends the
    stream cleanly.
    """
    if cadence_ms < 10:
        raise ValueError("cadence_ms must be >= 10 (the log clock resolution)")
    if speed is not None and speed <= 0:
        raise ValueError("speed must be positive")
    sid = table.site_id if site_id is None else site_id
    pace = None if speed is None else (cadence_ms / 1000.0) / speed

    cache: dict[tuple[str, int], tuple] = {}
    emitted = 0
    for rec in table:
        length_ms = int(round(rec.length_s * 1000))
        for t_ms in range(0, length_ms, cadence_ms):
            t = t_ms / 1000.0
            for ring in (1, 2):
                phase, phase_start = _active_phase(rec, ring, t)
                key = (phase, t_ms)
                stats = cache.get(key)
                if stats is None:
                    stats = _conditional_stats(dists, phase, t, alpha, hold_interval)
                    cache[key] = stats
                min_end, max_end, likely, conf, next_time, n, degraded = stats
                msg = SpatMessage(
                    site_id=sid,
                    cycle_index=rec.cycle_index,
                    phase=phase,
                    made_at=t,
                    start_time=phase_start,
                    min_end_time=min_end,
                    max_end_time=max_end,
                    likely_time=likely,
                    confidence_alpha=alpha,
                    confidence_value=conf,
                    next_time=next_time,
                    degraded=degraded,
                )
                try:
                    out.write(msg.to_ndjson() + "\n")
                except (SinkClosed, BrokenPipeError, ValueError):
                    return emitted
                emitted += 1
            if pace is not None:
                time.sleep(pace)
    return emitted
