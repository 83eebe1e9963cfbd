"""Mix two packets over GF(2^8), recover them, and look at the header on the wire."""
from ncswitch import codec, gf
from ncswitch.codec import NextPrimitive

a, b = b"hello, switch!!!", b"second original."
print("3 * 7 in GF(2^8) =", gf.gf_mul(3, 7), "| inverse of 3 =", gf.gf_inv(3))

# two coded rows: a + b and a + 2b
rows = [[1, 1], [1, 2]]
coded = gf.encode(rows, [a, b])
print("coded symbols:", [c.hex()[:16] + "..." for c in coded])
print("recovered:", gf.solve(list(zip([bytes(r) for r in rows], coded)), 2))

# a rank-deficient pair cannot be solved
try:
    gf.solve([(b"\x01\x01", coded[0]), (b"\x02\x02", coded[0])], 2)
except gf.InsufficientRank as exc:
    print("rank-deficient input rejected:", exc)

header = codec.CodingHeader(stream_id=7, batch_number=12, next_primitive=NextPrimitive.GATHER,
                            coeffs=b"\x01\x01")
wire = codec.serialize(header, coded[0])
print(f"header + payload = {len(wire)} bytes, header bytes: {wire[:len(wire) - len(coded[0])].hex()}")
assert codec.parse(wire) == (header, coded[0])
