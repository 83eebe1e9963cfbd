"""Ask the control plane what a topology can carry, then compile both coding functions."""
from ncswitch import load_fixture
from ncswitch.compiler import AdmissionError, StreamSpec, compile_butterfly, compile_diversity
from ncswitch.flows import edge_disjoint_paths, max_flow, min_multicast_rate, path_nodes

bt = load_fixture("butterfly.topo")
unit = bt.link("s1:2").bandwidth
for r in ("h2", "h3"):
    print(f"max flow h1->{r}: {max_flow(bt, 'h1', r) / unit:g} units")
print(f"multicast bound h1->{{h2,h3}}: {min_multicast_rate(bt, 'h1', ['h2', 'h3']) / unit:g} units")

cfg = compile_butterfly(bt, StreamSpec(1, "h1", ("h2", "h3"), kind="butterfly"))
print("\nbutterfly configuration:\n" + cfg.dumps())

try:
    compile_butterfly(bt, StreamSpec(2, "h1", ("h2", "h3"), rate=3 * unit, kind="butterfly"))
except AdmissionError as exc:
    print("admission refused:", exc)

dv = load_fixture("diversity.topo")
for i, p in enumerate(edge_disjoint_paths(dv, "s1", "s5", 3), 1):
    print(f"disjoint path {i}:", " -> ".join(path_nodes(p)))
print("\ndiversity configuration:\n" + compile_diversity(dv, StreamSpec(1, "h1", ("h2",))).dumps())
