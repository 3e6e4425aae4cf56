#!/usr/bin/env python3
"""Regenerate the byte-exact stream fixture used by the test suite.

The fixture is a hand-built three-cycle table (no RNG involved) streamed at
a 5 s cadence, so the bytes depend only on the composition and formatting
code paths.  Run from the repository root:

    python scripts/make_stream_golden.py
"""

from pathlib import Path

from spatcast import CycleRecord, CycleTable, fit_message_dists, stream

ROWS = [
    # (d4, d1, d5); d2/d6 derived so the barrier identities hold exactly
    (36.0, 0.0, 0.0),
    (41.0, 5.0, 10.0),
    (46.0, 10.0, 0.0),
]


def build_table() -> CycleTable:
    records = []
    t_ms = 0
    for i, (d4, d1, d5) in enumerate(ROWS):
        d2 = 120.0 - d4 - d1
        d6 = d1 + d2 - d5
        records.append(CycleRecord(
            cycle_index=i, cycle_start_ms=t_ms, length_s=120.0,
            d4=d4, d1=d1, d2=d2, d8=d4, d5=d5, d6=d6,
        ))
        t_ms += 120_000
    return CycleTable(tuple(records), site_id="golden")


def main() -> None:
    table = build_table()
    dists = fit_message_dists(table)
    target = Path(__file__).resolve().parent.parent / "tests" / "data" / "golden_stream.ndjson"
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="") as out:
        count = stream(table, dists, out, cadence_ms=5000, alpha=0.8)
    print(f"wrote {count} messages to {target}")


if __name__ == "__main__":
    main()
