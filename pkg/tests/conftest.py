import pytest

from ncswitch import load_fixture
from ncswitch.codec import CodingHeader, NextPrimitive, Packet, original_header


def host_packet(seq, payload, stream_id=1, first=NextPrimitive.SPLIT):
    return Packet(original_header(stream_id, seq, first, len(payload)), payload)


def coded_packet(batch, coeffs, payload, nxt=NextPrimitive.GATHER, stream_id=1, orig_len=None):
    if orig_len is None:
        orig_len = len(payload) if sum(1 for c in coeffs if c) == 1 and max(coeffs) == 1 else 0
    return Packet(CodingHeader(stream_id, batch, nxt, bytes(coeffs), orig_len), payload)


@pytest.fixture
def butterfly():
    return load_fixture("butterfly.topo")


@pytest.fixture
def diversity():
    return load_fixture("diversity.topo")


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance verdict lines, which pytest would otherwise capture."""
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
