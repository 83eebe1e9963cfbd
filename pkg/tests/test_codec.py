from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from ncswitch import codec
from ncswitch.codec import CodingHeader, NextPrimitive, Packet, Telemetry

GOLDEN = Path(__file__).parent / "golden" / "headers.hex"


def load_golden():
    cases = []
    for line in GOLDEN.read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        name, fields, image = line.split("|")
        stream, batch, nxt, coeffs, orig, tele, payload = fields.split()
        records = () if tele == "-" else tuple(
            Telemetry(*map(int, r.split(":"))) for r in tele.split(";"))
        header = CodingHeader(int(stream), int(batch), NextPrimitive[nxt], bytes.fromhex(coeffs),
                              int(orig), records)
        body = b"" if payload == "-" else bytes.fromhex(payload)
        cases.append(pytest.param(header, body, bytes.fromhex(image.replace(" ", "")), id=name))
    return cases


@pytest.mark.parametrize("header, payload, image", load_golden())
def test_golden_images(header, payload, image):
    assert codec.serialize(header, payload) == image
    assert codec.parse(image) == (header, payload)


def test_minimal_image_size_and_formula():
    h = CodingHeader(1, 0, NextPrimitive.FORWARD, b"\x01")
    assert len(codec.serialize(h, b"")) == 15
    assert codec.wire_length(h, 0) == 15
    h2 = CodingHeader(1, 0, NextPrimitive.FORWARD, b"\x01\x02\x03", telemetry=(Telemetry(1, 2, 3),) * 2)
    assert len(codec.serialize(h2, b"xyz")) == codec.wire_length(h2, 3) == 14 + 3 + 36 + 3


def test_stream_id_offset():
    image = codec.serialize(CodingHeader(0x0102, 0, NextPrimitive.FORWARD, b"\x01"), b"")
    assert image[1:3] == b"\x01\x02"


telemetry_st = st.lists(
    st.tuples(st.integers(0, 0xFFFF), st.integers(0, 2**64 - 1), st.integers(0, 2**64 - 1)),
    max_size=4,
).map(lambda rs: tuple(Telemetry(s, i, e) for s, i, e in sorted(rs, key=lambda r: r[1])))


@st.composite
def headers(draw):
    k = draw(st.integers(1, 16))
    coeffs = draw(st.binary(min_size=k, max_size=k).filter(any))
    payload = draw(st.binary(max_size=64))
    orig = draw(st.integers(0, len(payload))) if codec.is_basis(coeffs) is not None else 0
    h = CodingHeader(draw(st.integers(0, 0xFFFF)), draw(st.integers(0, 2**32 - 1)),
                     draw(st.sampled_from(list(NextPrimitive))), coeffs, orig, draw(telemetry_st))
    return h, payload


@settings(max_examples=1000, deadline=None)
@given(headers())
def test_round_trip_fuzz(hp):
    h, payload = hp
    assert codec.parse(codec.serialize(h, payload)) == (h, payload)


@settings(max_examples=300, deadline=None)
@given(headers(), st.tuples(st.integers(0, 0xFFFF), st.integers(0, 2**63)))
def test_telemetry_append_grows_by_18(hp, rec):
    h, payload = hp
    last = h.telemetry[-1].ingress_ts if h.telemetry else 0
    ts = min(last + rec[1], 2**64 - 1)
    t = Telemetry(rec[0], ts, ts)
    before = codec.serialize(h, payload)
    after = codec.serialize(h.with_telemetry(t), payload)
    assert len(after) == len(before) + 18
    k = h.gen_size
    split = 11 + k  # everything up to and including orig_len
    assert after[:split] == before[:split]
    assert after[split] == before[split] + 1
    assert after[-(2 + len(payload)):] == before[-(2 + len(payload)):]


def test_truncation_names_field():
    image = codec.serialize(CodingHeader(1, 2, NextPrimitive.CODE, b"\x01\x02\x03\x04"), b"abc")
    expectations = {0: "version", 2: "stream_id", 5: "batch_number", 7: "next_primitive", 8: "gen_size",
                    10: "coeffs", 13: "orig_len", 15: "telemetry_count", 16: "payload_len", 19: "payload"}
    for cut, name in expectations.items():
        with pytest.raises(codec.ParseError) as exc:
            codec.parse(image[:cut])
        assert exc.value.field == name


@settings(max_examples=2000, deadline=None)
@given(st.binary(max_size=80))
def test_garbage_never_escapes_structured_errors(data):
    try:
        codec.parse(data)
    except codec.ParseError:
        pass


def test_parse_rejections():
    good = bytearray(codec.serialize(CodingHeader(1, 2, NextPrimitive.CODE, b"\x01\x01"), b"ab"))
    bad = bytearray(good)
    bad[0] = 2
    with pytest.raises(codec.ParseError, match="version"):
        codec.parse(bytes(bad))
    bad = bytearray(good)
    bad[7] = 9
    with pytest.raises(codec.ParseError) as exc:
        codec.parse(bytes(bad))
    assert exc.value.field == "next_primitive"
    with pytest.raises(codec.ParseError) as exc:
        codec.parse(bytes(good) + b"\x00")
    assert exc.value.field == "payload"
    bad = bytearray(good)
    bad[9:11] = b"\x00\x00"
    with pytest.raises(codec.ParseError) as exc:
        codec.parse(bytes(bad))
    assert exc.value.field == "coeffs"


def test_serialize_rejections():
    f = NextPrimitive.FORWARD
    cases = {
        "stream_id": CodingHeader(70000, 0, f, b"\x01"),
        "batch_number": CodingHeader(1, -1, f, b"\x01"),
        "gen_size": CodingHeader(1, 0, f, b""),
        "coeffs": CodingHeader(1, 0, f, b"\x00\x00"),
        "orig_len": CodingHeader(1, 0, f, b"\x01\x01", orig_len=1),
        "next_primitive": CodingHeader(1, 0, 42, b"\x01"),
        "version": CodingHeader(1, 0, f, b"\x01", version=3),
        "telemetry": CodingHeader(1, 0, f, b"\x01", telemetry=(Telemetry(1, 5, 6), Telemetry(1, 4, 6))),
    }
    for name, h in cases.items():
        with pytest.raises(codec.EncodeError) as exc:
            codec.serialize(h, b"xx")
        assert exc.value.field == name
    with pytest.raises(codec.EncodeError, match="orig_len"):
        codec.serialize(CodingHeader(1, 0, f, b"\x01", orig_len=5), b"ab")


def test_packet_wire_round_trip_keeps_metadata_off_the_wire():
    p = Packet(CodingHeader(3, 4, NextPrimitive.GATHER, b"\x00\x01", orig_len=2), b"hi", in_port=7, arrival_ns=9)
    q = Packet.from_wire(p.wire())
    assert q.header == p.header and q.payload == p.payload and q.in_port is None
