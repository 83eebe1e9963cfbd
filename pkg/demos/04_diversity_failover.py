"""Cut one of three paths mid-stream and check that the receiver never notices."""
from ncswitch import load_fixture
from ncswitch.compiler import StreamSpec, compile_diversity
from ncswitch.netsim import Failure, HostProcess, make_payload, run

topo = load_fixture("diversity.topo")
cfg = compile_diversity(topo, StreamSpec(1, "h1", ("h2",)))
sender = HostProcess("h1", 1, 400, 4096, "back-to-back")

for failures in ([], [Failure(0.5, "s1:3")], [Failure(0.5, "s1:2"), Failure(0.5, "s1:3")]):
    trace = run(topo, cfg, [sender], failures, seed=0)
    got = [d.payload for d in trace.deliveries["h2"]]
    expected = [make_payload(1, i, 4096) for i in range(400)]
    intact = got == expected[:len(got)]
    links = ", ".join(f.link for f in failures) or "nothing"
    print(f"failed {links:<12} delivered {len(got)}/400, in order and byte-exact prefix: {intact}, "
          f"lost on links: {sum(c['lost'] for c in trace.link_counters.values())}")
