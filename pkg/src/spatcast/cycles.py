"""Phase-log model: cycle reconstruction, validation, and slicing.

A controller log is a stream of green-interval transitions.  Ring 1 runs
p4 -> p1 -> p2 and ring 2 runs p8 -> p5 -> p6; both rings open each cycle
together at the p4/p8 barrier and close it together at the cycle end.
Yellow and all-red clearance are folded into the green intervals upstream,
so starts and ends of greens are the only transitions in the model.  From
the transition timestamps we rebuild one record per cycle carrying the six
phase durations, which must satisfy the barrier identities

    d4 + d1 + d2 = d8 + d5 + d6 = L,    d1 + d2 = d5 + d6,    d4 = d8,

where L is the cycle length fixed by the timing plan.

Timestamps are integer milliseconds; durations are seconds at 0.01 s
resolution.  A reconstructed table is immutable and safe for concurrent
reads.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    BarrierViolation,
    EmptyStratum,
    OutOfOrderEvent,
    RingSequenceViolation,
)
from .ioutil import text_sink, text_source

RING_SEQUENCE: dict[int, tuple[str, str, str]] = {
    1: ("p4", "p1", "p2"),
    2: ("p8", "p5", "p6"),
}
PHASE_RING: dict[str, int] = {p: r for r, seq in RING_SEQUENCE.items() for p in seq}
DURATION_KEY: dict[str, str] = {
    "p4": "d4", "p1": "d1", "p2": "d2",
    "p8": "d8", "p5": "d5", "p6": "d6",
}
PHASES: tuple[str, ...] = tuple(PHASE_RING)
DURATION_NAMES: tuple[str, ...] = ("d4", "d1", "d2", "d8", "d5", "d6")

MS_PER_DAY = 86_400_000
DEFAULT_TOLERANCE_S = 0.05  # covers the 10 ms log clock skew with margin

_EVENT_HEADER = ["timestamp_ms", "ring", "phase", "kind"]
_CYCLE_HEADER = [
    "cycle_index", "cycle_start_ms", "L_s",
    "d4_s", "d1_s", "d2_s", "d8_s", "d5_s", "d6_s",
]


@dataclass(frozen=True)
class PhaseEvent:
    """One timestamped green-interval transition from a controller log."""

    timestamp_ms: int
    ring: int
    phase: str
    kind: str  # "start" | "end"

    def __post_init__(self) -> None:
        if self.ring not in RING_SEQUENCE:
            raise ValueError(f"unknown ring {self.ring!r}")
        if self.phase not in RING_SEQUENCE[self.ring]:
            raise ValueError(f"phase {self.phase!r} is not on ring {self.ring}")
        if self.kind not in ("start", "end"):
            raise ValueError(f"kind must be 'start' or 'end', got {self.kind!r}")


@dataclass(frozen=True)
class CycleRecord:
    """One cycle's start time, length, and per-phase green durations.

    Phase end times are cumulative sums of durations along each ring and
    are exposed as properties; they are measured in seconds from the cycle
    start.
    """

    cycle_index: int
    cycle_start_ms: int
    length_s: float
    d4: float
    d1: float
    d2: float
    d8: float
    d5: float
    d6: float

    def __post_init__(self) -> None:
        for name in DURATION_NAMES:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.length_s <= 0:
            raise ValueError("cycle length must be positive")

    # Ring 1 end times.
    @property
    def p4_end(self) -> float:
        return self.d4

    @property
    def p1_end(self) -> float:
        return self.d4 + self.d1

    @property
    def p2_end(self) -> float:
        return self.d4 + self.d1 + self.d2

    # Ring 2 end times.
    @property
    def p8_end(self) -> float:
        return self.d8

    @property
    def p5_end(self) -> float:
        return self.d8 + self.d5

    @property
    def p6_end(self) -> float:
        return self.d8 + self.d5 + self.d6

    @property
    def day_index(self) -> int:
        """Calendar day of the cycle start, counted in UTC days since epoch."""
        return self.cycle_start_ms // MS_PER_DAY

    def duration(self, name: str) -> float:
        if name not in DURATION_NAMES:
            raise ValueError(f"unknown duration {name!r}")
        return getattr(self, name)

    def barrier_residuals(self) -> dict[str, float]:
        """Absolute residuals of the four barrier identities."""
        return {
            "ring1_sum": abs(self.d4 + self.d1 + self.d2 - self.length_s),
            "ring2_sum": abs(self.d8 + self.d5 + self.d6 - self.length_s),
            "cross_sum": abs((self.d1 + self.d2) - (self.d5 + self.d6)),
            "lead": abs(self.d4 - self.d8),
        }

    def validate(self, tolerance: float = DEFAULT_TOLERANCE_S) -> None:
        bad = {k: v for k, v in self.barrier_residuals().items() if v > tolerance}
        if bad:
            raise BarrierViolation(
                f"cycle {self.cycle_index}: barrier residuals {bad} exceed "
                f"tolerance {tolerance}"
            )


@dataclass(frozen=True)
class CycleTable:
    """Ordered, immutable collection of cycle records from one site.

    Tables straight out of ingestion or simulation are contiguous in time
    (each cycle starts where the previous one ended); slices produced by
    ``stratify`` or ``window`` keep order but not contiguity.
    """

    records: tuple[CycleRecord, ...]
    site_id: str = ""
    provenance: str | None = None

    def __post_init__(self) -> None:
        starts = [r.cycle_start_ms for r in self.records]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("cycle_start_ms must be strictly increasing")

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[CycleRecord]:
        return iter(self.records)

    def __getitem__(self, i: int) -> CycleRecord:
        return self.records[i]

    def column(self, quantity: str) -> np.ndarray:
        """Per-cycle values of a duration, or of a per-cycle sum like 'd4+d1'."""
        parts = [p.strip() for p in quantity.split("+")]
        for p in parts:
            if p not in DURATION_NAMES:
                raise ValueError(f"unknown quantity {quantity!r}")
        out = np.zeros(len(self.records), dtype=float)
        for p in parts:
            out += np.array([getattr(r, p) for r in self.records], dtype=float)
        return out

    def cycle_lengths(self) -> np.ndarray:
        return np.array([r.length_s for r in self.records], dtype=float)

    def day_indices(self) -> np.ndarray:
        return np.array([r.day_index for r in self.records], dtype=np.int64)

    def validate(self, tolerance: float = DEFAULT_TOLERANCE_S) -> None:
        for rec in self.records:
            rec.validate(tolerance)


# ---------------------------------------------------------------------------
# Ingestion


def _ring_spans(
    events: Sequence[PhaseEvent], ring: int, tol_ms: int
) -> list[tuple[str, int, int]]:
    """Turn one ring's events into (phase, start_ms, end_ms) green spans.

    Leading events before the ring's first cycle-opening start are dropped
    (they belong to a cycle whose beginning we never saw); a dangling
    trailing start is dropped as incomplete.  Everything in between must
    follow the ring pattern exactly, with consecutive spans contiguous in
    time: phase k+1 starts where phase k ended, and the next cycle's
    opening phase starts where the previous cycle closed.
    """
    seq = RING_SEQUENCE[ring]
    start_at = next(
        (i for i, ev in enumerate(events) if ev.phase == seq[0] and ev.kind == "start"),
        None,
    )
    if start_at is None:
        raise RingSequenceViolation(f"ring {ring}: no {seq[0]} start in stream")

    spans: list[tuple[str, int, int]] = []
    pos = 0
    span_start = 0
    for ev in events[start_at:]:
        expected_phase = seq[(pos // 2) % 3]
        expect_end = pos % 2 == 1
        if ev.phase != expected_phase or (ev.kind == "end") != expect_end:
            raise RingSequenceViolation(
                f"ring {ring}: got {ev.phase} {ev.kind} at {ev.timestamp_ms} ms, "
                f"expected {expected_phase} {'end' if expect_end else 'start'}"
            )
        if expect_end:
            spans.append((expected_phase, span_start, ev.timestamp_ms))
        else:
            if spans and abs(ev.timestamp_ms - spans[-1][2]) > tol_ms:
                raise RingSequenceViolation(
                    f"ring {ring}: {ev.phase} starts at {ev.timestamp_ms} ms but "
                    f"{spans[-1][0]} ended at {spans[-1][2]} ms (stream not contiguous)"
                )
            span_start = ev.timestamp_ms
        pos += 1
    return spans


def ingest_events(
    stream: Iterable[PhaseEvent],
    tolerance: float = DEFAULT_TOLERANCE_S,
    site_id: str = "",
) -> CycleTable:
    """Reconstruct per-cycle duration records from a phase-event stream.

    The stream must be sorted by timestamp and contain both rings.  One
    record is produced per completed cycle; incomplete leading or trailing
    cycles are dropped.  Durations are transition-timestamp differences
    converted to seconds.

    Raises OutOfOrderEvent on a timestamp regression, RingSequenceViolation
    when the phase order breaks a ring pattern (or the stream has a time
    gap), and BarrierViolation when the barrier identities fail beyond
    ``tolerance`` seconds.
    """
    events = list(stream)
    prev_ts = None
    for ev in events:
        if prev_ts is not None and ev.timestamp_ms < prev_ts:
            raise OutOfOrderEvent(
                f"timestamp {ev.timestamp_ms} ms after {prev_ts} ms"
            )
        prev_ts = ev.timestamp_ms

    tol_ms = int(round(tolerance * 1000))
    spans = {
        ring: _ring_spans([ev for ev in events if ev.ring == ring], ring, tol_ms)
        for ring in (1, 2)
    }
    cycles = {ring: _chunk3(spans[ring]) for ring in (1, 2)}

    r1, r2 = cycles[1], cycles[2]
    # Drop unpaired leading cycles until both rings open together.
    while r1 and r2 and abs(r1[0][0][1] - r2[0][0][1]) > tol_ms:
        if r1[0][0][1] < r2[0][0][1]:
            r1.pop(0)
        else:
            r2.pop(0)

    records = []
    for idx in range(min(len(r1), len(r2))):
        c1, c2 = r1[idx], r2[idx]
        if abs(c1[0][1] - c2[0][1]) > tol_ms:
            raise BarrierViolation(
                f"cycle {idx}: rings open {abs(c1[0][1] - c2[0][1])} ms apart"
            )
        cycle_start = c1[0][1]
        length = (c1[2][2] - cycle_start) / 1000.0
        durs = {
            DURATION_KEY[phase]: (end - start) / 1000.0
            for phase, start, end in (*c1, *c2)
        }
        rec = CycleRecord(
            cycle_index=idx, cycle_start_ms=cycle_start, length_s=length, **durs
        )
        rec.validate(tolerance)
        records.append(rec)
    return CycleTable(tuple(records), site_id=site_id)


def _chunk3(spans: list[tuple[str, int, int]]) -> list[tuple]:
    """Group a ring's spans into complete 3-phase cycles, dropping the tail."""
    return [tuple(spans[i:i + 3]) for i in range(0, len(spans) - len(spans) % 3, 3)]


# ---------------------------------------------------------------------------
# Slicing


def stratify(table: CycleTable, cycle_length: float) -> CycleTable:
    """Select exactly the records whose cycle length matches, order preserved.

    Matching is exact after rounding both sides to 0.1 s.  Raises
    EmptyStratum when nothing matches.
    """
    if cycle_length <= 0:
        raise ValueError("cycle_length must be positive")
    key = round(cycle_length, 1)
    recs = tuple(r for r in table.records if round(r.length_s, 1) == key)
    if not recs:
        raise EmptyStratum(f"no cycles with L = {key} s")
    tag = f"L={key:g}"
    prov = tag if table.provenance is None else f"{table.provenance},{tag}"
    return replace(table, records=recs, provenance=prov)


def day_number(day: "dt.date | int") -> int:
    """Days since the Unix epoch for a date, or an int passed through."""
    if isinstance(day, dt.datetime):
        day = day.date()
    if isinstance(day, dt.date):
        return (day - dt.date(1970, 1, 1)).days
    return int(day)


def window(table: CycleTable, target_day: "dt.date | int", delta_days: int) -> CycleTable:
    """Select the ``delta_days`` calendar days before ``target_day``.

    Keeps records whose day index lies in [target - delta, target - 1]; the
    target day itself is excluded so a prediction for that day uses only
    past data.  A window reaching before the first recorded day is clipped
    to what exists; EmptyStratum is raised only when nothing remains.
    """
    if delta_days < 1:
        raise ValueError("delta_days must be >= 1")
    target = day_number(target_day)
    lo, hi = target - delta_days, target - 1
    recs = tuple(r for r in table.records if lo <= r.day_index <= hi)
    if not recs:
        raise EmptyStratum(f"no cycles in days [{lo}, {hi}]")
    tag = f"days[{lo},{hi}]"
    prov = tag if table.provenance is None else f"{table.provenance},{tag}"
    return replace(table, records=recs, provenance=prov)


# ---------------------------------------------------------------------------
# CSV interfaces


def write_event_csv(events: Iterable[PhaseEvent], target) -> None:
    with text_sink(target) as f:
        w = csv.writer(f)
        w.writerow(_EVENT_HEADER)
        for ev in events:
            w.writerow([ev.timestamp_ms, ev.ring, ev.phase, ev.kind])


def read_event_csv(source) -> list[PhaseEvent]:
    with text_source(source) as f:
        rows = csv.reader(f)
        header = next(rows, None)
        if header != _EVENT_HEADER:
            raise ValueError(f"expected header {_EVENT_HEADER}, got {header}")
        return [
            PhaseEvent(int(ts), int(ring), phase, kind)
            for ts, ring, phase, kind in rows
        ]


def write_cycle_csv(table: CycleTable, target) -> None:
    with text_sink(target) as f:
        w = csv.writer(f)
        w.writerow(_CYCLE_HEADER)
        for r in table:
            w.writerow([
                r.cycle_index, r.cycle_start_ms, f"{r.length_s:.2f}",
                f"{r.d4:.2f}", f"{r.d1:.2f}", f"{r.d2:.2f}",
                f"{r.d8:.2f}", f"{r.d5:.2f}", f"{r.d6:.2f}",
            ])


def read_cycle_csv(source, site_id: str = "") -> CycleTable:
    with text_source(source) as f:
        rows = csv.reader(f)
        header = next(rows, None)
        if header != _CYCLE_HEADER:
            raise ValueError(f"expected header {_CYCLE_HEADER}, got {header}")
        records = tuple(
            CycleRecord(
                cycle_index=int(row[0]),
                cycle_start_ms=int(row[1]),
                length_s=float(row[2]),
                d4=float(row[3]), d1=float(row[4]), d2=float(row[5]),
                d8=float(row[6]), d5=float(row[7]), d6=float(row[8]),
            )
            for row in rows
        )
    return CycleTable(records, site_id=site_id)
