import numpy as np
import pytest

from ncswitch import gf
from ncswitch.codec import NextPrimitive
from ncswitch.dataplane import Switch, TableEntry
from ncswitch.primitives import CodeRow, GatherOutcome, Kind, Output, PrimitiveConfig, from_symbol, gather
from ncswitch.primitives import to_symbol
from ncswitch.registers import RegisterBank

from conftest import coded_packet, host_packet

N = NextPrimitive


def split_code_switch(rows=(CodeRow(b"\x01\x01", 4, N.FORWARD),)):
    sw = Switch("s1", 1)
    actions = [PrimitiveConfig(Kind.SPLIT, 1, 2, assign=(Output(2, N.FORWARD), Output(3, N.FORWARD)))]
    if rows:
        actions.append(PrimitiveConfig(Kind.CODE, 1, 2, rows=rows))
    sw.install(TableEntry(1, N.SPLIT, None, tuple(actions)))
    return sw


def decoder(k=2, port=9):
    sw = Switch("s5", 5)
    sw.install(TableEntry(1, N.GATHER, None, (
        PrimitiveConfig(Kind.GATHER, 1, k), PrimitiveConfig(Kind.DECODE, 1, k, delivery_port=port))))
    return sw


def test_split_assigns_batches_and_positions():
    sw = split_code_switch(rows=())
    out = [sw.ingress(host_packet(i, bytes([i]) * 3), 1, i)[0] for i in range(4)]
    assert [(p.header.batch_number, p.header.coeffs, port) for p, port in out] == [
        (0, b"\x01\x00", 2), (0, b"\x00\x01", 3), (1, b"\x01\x00", 2), (1, b"\x00\x01", 3)]
    assert all(p.header.next_primitive is N.FORWARD for p, _ in out)


def test_split_pads_partial_batch_on_stream_end():
    sw = split_code_switch()
    for i in range(5):
        sw.ingress(host_packet(i, b"pay%d" % i), 1, i)
    out = sw.ingress(host_packet(5, b""), 1, 10)
    by_port = {port: p for p, port in out}
    pad = by_port[3]
    assert pad.header.batch_number == 2 and pad.header.coeffs == b"\x00\x01"
    assert pad.payload == b"" and pad.header.orig_len == 0
    parity = by_port[4]
    # parity of (len-prefixed p4, zero symbol) is p4's symbol
    assert from_symbol(parity.payload) == b"pay4"


def test_split_end_marker_on_full_batch_emits_nothing():
    sw = split_code_switch()
    for i in range(4):
        sw.ingress(host_packet(i, b"x"), 1, i)
    assert sw.ingress(host_packet(4, b""), 1, 10) == []


def test_diversity_ingress_emits_parity_after_second_packet():
    sw = split_code_switch()
    a, b = b"first", b"second!"
    (pa, port_a), = sw.ingress(host_packet(0, a), 1, 0)
    out = sw.ingress(host_packet(1, b), 1, 1)
    assert port_a == 2 and pa.payload == a
    ports = {port: p for p, port in out}
    assert set(ports) == {3, 4}
    parity = ports[4]
    assert parity.header.coeffs == b"\x01\x01" and parity.header.orig_len == 0
    syms = gf.pad_symbols([to_symbol(pa.header, a), to_symbol(ports[3].header, b)])
    assert parity.payload == gf.combine([1, 1], syms)


def test_code_row_e1_projects_stored_original():
    sw = split_code_switch(rows=(CodeRow(b"\x01\x00", 4, N.GATHER),))
    sw.ingress(host_packet(0, b"alpha"), 1, 0)
    out = sw.ingress(host_packet(1, b"be"), 1, 1)
    proj = {port: p for p, port in out}[4]
    assert proj.payload == b"alpha" and proj.header.orig_len == 5


def run_gather(rows):
    sw = Switch("g", 1)
    bank_cfg = PrimitiveConfig(Kind.GATHER, 1, 2)
    outcomes = []

    class Tr:
        stored = False
        batch = None
        halted = False

        def bank(self, cfg):
            return sw.bank(cfg.stream_id, cfg.gen_size)

        def touch(self, n):
            pass

        def count(self, name):
            sw.counters[name] += 1

        def halt(self):
            self.halted = True

    for coeffs, payload in rows:
        outcomes.append(gather(Tr(), coded_packet(0, coeffs, payload), bank_cfg))
    return outcomes


def test_gather_outcomes():
    assert run_gather([([1, 0], b"a"), ([1, 1], b"b")]) == [GatherOutcome.STORED, GatherOutcome.READY]
    assert run_gather([([1, 0], b"a"), ([1, 0], b"a")])[1] is GatherOutcome.REDUNDANT


def test_gather_late_after_decode():
    sw = decoder()
    sw.ingress(coded_packet(0, [1, 0], b"a"), 1, 0)
    sw.ingress(coded_packet(0, [0, 1], b"b"), 2, 1)
    assert sw.ingress(coded_packet(0, [1, 1], b"\x00\x01a\x00"), 3, 2) == []
    assert sw.counters["late"] == 1


def sym(payload):
    return len(payload).to_bytes(2, "big") + payload


def test_decode_pass_through_no_recirculation():
    sw = decoder()
    out1 = sw.ingress(coded_packet(0, [1, 0], b"aaa"), 1, 0)
    out2 = sw.ingress(coded_packet(0, [0, 1], b"bb"), 2, 1)
    assert [p.payload for p, _ in out1 + out2] == [b"aaa", b"bb"]
    assert all(p.header.next_primitive is N.DELIVER for p, _ in out1 + out2)
    assert sum(r.cost.recirculations for r in sw.records) == 0
    assert sw.banks[1].branches == {0: "pass-through"}


def test_decode_arithmetic_one_recirculation():
    sw = decoder()
    a, b = b"hello", b"xy"
    parity = gf.combine([1, 1], gf.pad_symbols([sym(a), sym(b)]))
    out1 = sw.ingress(coded_packet(0, [1, 0], a), 1, 0)
    out2 = sw.ingress(coded_packet(0, [1, 1], parity), 3, 1)
    assert [p.payload for p, _ in out1 + out2] == [a, b]
    assert out2[0][0].header.orig_len == 2
    assert sw.records[-1].cost.recirculations == 1
    assert sw.banks[1].branches == {0: "arithmetic"}


def test_decode_orders_within_batch_regardless_of_arrival():
    sw = decoder()
    a, b = b"A" * 4, b"B" * 4
    out = sw.ingress(coded_packet(0, [0, 1], b), 2, 0)
    assert out == []
    out = sw.ingress(coded_packet(0, [1, 0], a), 1, 1)
    assert [p.payload for p, _ in out] == [a, b]


def test_decode_parity_only_stays_undelivered():
    sw = decoder()
    assert sw.ingress(coded_packet(0, [1, 1], b"\x00\x01ab"), 3, 0) == []
    assert not sw.banks[1].slot(0).delivered


def test_decode_integrity_error_drops_batch():
    sw = decoder()
    bad = b"\x00\x09ab"  # claims 9 bytes, carries 2
    sw.ingress(coded_packet(0, [1, 1], bad), 3, 0)
    sw.ingress(coded_packet(0, [0, 1], b"ab"), 2, 1)
    assert sw.counters["integrity_errors"] >= 1


def test_decode_in_order_across_batches():
    sw = decoder()
    out = sw.ingress(coded_packet(1, [1, 0], b"c"), 1, 0)
    out += sw.ingress(coded_packet(1, [0, 1], b"d"), 2, 0)
    assert out == []
    out += sw.ingress(coded_packet(0, [1, 0], b"a"), 1, 1)
    out += sw.ingress(coded_packet(0, [0, 1], b"b"), 2, 1)
    assert [p.payload for p, _ in out] == [b"a", b"b", b"c", b"d"]


def test_random_arrival_orders_deliver_exactly_once_in_order():
    rng = np.random.default_rng(11)
    for _ in range(30):
        sw = decoder()
        originals = [rng.bytes(int(rng.integers(1, 9))) for _ in range(8)]
        rows = []
        for b in range(4):
            a_, b_ = originals[2 * b], originals[2 * b + 1]
            par = gf.combine([1, 1], gf.pad_symbols([sym(a_), sym(b_)]))
            rows += [(b, [1, 0], a_), (b, [0, 1], b_), (b, [1, 1], par)]
        delivered = []
        for i in rng.permutation(len(rows)):
            batch, coeffs, payload = rows[i]
            delivered += [p.payload for p, _ in sw.ingress(coded_packet(batch, coeffs, payload), 1, int(i))]
        assert delivered == originals


def test_config_validation():
    with pytest.raises(ValueError):
        PrimitiveConfig(Kind.SPLIT, 1, 2, assign=(Output(2, N.FORWARD),))
    with pytest.raises(ValueError):
        PrimitiveConfig(Kind.CODE, 1, 2, rows=(CodeRow(b"\x00\x00", 2, N.FORWARD),))
    with pytest.raises(ValueError):
        PrimitiveConfig(Kind.DECODE, 1, 2)
    with pytest.raises(gf.DecodeIntegrityError):
        from_symbol(b"\x00")
    assert RegisterBank(1, 2).split_seq == 0
