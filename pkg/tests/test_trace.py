from pathlib import Path

import pytest

from imisac.trace import OPERATIONS, TRACE, TraceEntry, check_trace, generate_trace_table

DOC = Path(__file__).resolve().parents[1] / "docs" / "paper-map.md"


def test_trace_is_complete_and_unique():
    assert check_trace() == []
    modeled = {op for op, (_, m) in OPERATIONS.items() if m}
    assert {e.operation for e in TRACE} == modeled
    assert len(TRACE) == len(modeled)


def test_expected_rows_present():
    by_op = {e.operation: e for e in TRACE}
    assert by_op["tx_subcarrier_im"].module == "subcarrier"
    assert by_op["spim_se"].module == "spim"
    table = generate_trace_table()
    assert "`imisac.subcarrier` | `tx_subcarrier_im`" in table
    assert "`imisac.spim` | `spim_se`" in table


def test_missing_entry_is_reported():
    trace = tuple(e for e in TRACE if e.operation != "spim_se")
    assert any("spim_se" in p for p in check_trace(trace))
    with pytest.raises(RuntimeError):
        generate_trace_table(trace)


def test_duplicate_and_misplaced_entries_are_reported():
    dup = TRACE + (TRACE[0],)
    assert check_trace(dup)
    wrong = TRACE + (TraceEntry("x", "y", "spim", "monte_carlo_ber"),)
    assert any("plumbing" in p or "registered" in p for p in check_trace(wrong))


def test_unresolvable_name_is_reported():
    ops = dict(OPERATIONS, no_such_function=("codebook", False))
    assert any("no_such_function" in p for p in check_trace(TRACE, ops))


def test_pipes_are_escaped():
    table = generate_trace_table()
    for line in table.splitlines()[6:]:
        assert line.replace("\\|", "").count("|") == 5


def test_committed_map_is_current():
    assert DOC.read_text() == generate_trace_table()
