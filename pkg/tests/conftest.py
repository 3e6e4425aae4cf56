import pytest

from spatcast import CycleRecord, CycleTable


def _build_table(rows, site_id="t", start_ms=0, length=120.0):
    """Build a contiguous table from (d4, d1, d5) rows.

    d2 and d6 are derived so the barrier identities hold exactly; d8 = d4.
    A row may also be a dict overriding L per cycle.
    """
    records = []
    t_ms = start_ms
    for i, row in enumerate(rows):
        if isinstance(row, dict):
            d4, d1 = row["d4"], row["d1"]
            d5 = row.get("d5", d1)
            cycle_len = row.get("L", length)
        else:
            d4, d1, d5 = row
            cycle_len = length
        d2 = cycle_len - d4 - d1
        d6 = d1 + d2 - d5
        records.append(CycleRecord(
            cycle_index=i, cycle_start_ms=t_ms, length_s=cycle_len,
            d4=d4, d1=d1, d2=d2, d8=d4, d5=d5, d6=d6,
        ))
        t_ms += int(round(cycle_len * 1000))
    return CycleTable(tuple(records), site_id=site_id)


@pytest.fixture
def build_table():
    return _build_table
