"""Command-line entry point: ``ncswitch <subcommand> [flags]``."""
from __future__ import annotations

import argparse
import json
import sys

from . import load_fixture
from .compiler import StreamSpec, compile_stream
from .experiments import SweepSpec, emit_outputs, role_means, RUNNERS
from .flows import InfeasibleError
from .netsim import load_scenario, received_rate, UndefinedRate
from .topology import Topology


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x)


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--topology", help="topology file (defaults to the bundled fixture)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--packets", type=int, default=1000)
    p.add_argument("--out-dir", default="results")
    p.add_argument("--workers", type=int, default=1, help="run sweep points in this many processes")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ncswitch", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("butterfly-rate", help="received/send ratio sweep, coding against forwarding")
    _common(p)
    p.add_argument("--payload-size", type=int, default=4096)
    p.add_argument("--send-rate-ratio", type=_floats, default=(), help="comma list, default 0.1..1.0")
    p.add_argument("--repetitions", type=int, default=5)

    p = sub.add_parser("diversity-failure", help="single and double path failures on the diversity code")
    _common(p)
    p.add_argument("--payload-size", type=int, default=4096)
    p.add_argument("--fail-path", type=_ints, default=None, help="1-based path numbers, comma list")
    p.add_argument("--fail-time", type=_floats, default=None, help="failure times in seconds, comma list")

    p = sub.add_parser("diversity-bench", help="modeled pipeline cost per role and decode branch")
    _common(p)
    p.add_argument("--payload-size", type=_ints, default=(1024, 2048, 4096), help="comma list")
    p.add_argument("--differential-ms", type=_floats, default=(-4.0, -2.0, 0.0, 2.0, 4.0))
    p.add_argument("--wallclock", action="store_true", help="also record informational wall-clock times")

    p = sub.add_parser("compile", help="emit the configuration document for one stream")
    p.add_argument("--topology", help="topology file (defaults to the fixture matching --function)")
    p.add_argument("--function", choices=("diversity", "butterfly", "forwarding"), default="diversity")
    p.add_argument("--source")
    p.add_argument("--receivers", help="comma list of receiver hosts")
    p.add_argument("--stream-id", type=int, default=1)
    p.add_argument("--rate", type=float, default=0.0, help="requested rate in bit/s, checked for admission")
    p.add_argument("--gen-size", type=int, default=None)
    p.add_argument("--out", help="write here instead of stdout")

    p = sub.add_parser("simulate", help="run a scenario file and write trace CSVs")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--out-dir", default="results")
    return ap


def _header(cfg: dict) -> None:
    print("# effective config: " + json.dumps(cfg, sort_keys=True, default=list))


def _sweep(args) -> int:
    common = dict(seed=args.seed, packets=args.packets, topology=args.topology, workers=args.workers)
    if args.command == "butterfly-rate":
        spec = SweepSpec("butterfly-rate", values=args.send_rate_ratio, repetitions=args.repetitions,
                         payload_size=args.payload_size, **common)
    elif args.command == "diversity-failure":
        paths = None if args.fail_path is None else tuple(p - 1 for p in args.fail_path)
        spec = SweepSpec("diversity-failure", payload_size=args.payload_size, fail_paths=paths,
                         fail_times=args.fail_time, **common)
    else:
        spec = SweepSpec("diversity-bench", values=args.payload_size, differentials_ms=args.differential_ms,
                         **common)
    _header({"command": args.command, "out_dir": args.out_dir, **spec.effective()})
    if args.command == "diversity-bench":
        table = RUNNERS[args.command](spec, wallclock=args.wallclock)
    else:
        table = RUNNERS[args.command](spec)
    for path in emit_outputs([table], args.out_dir):
        print(f"wrote {path}")
    if args.command == "diversity-bench":
        for (size, role, branch), ns in role_means(table).items():
            print(f"{size:>6} {role:<11} {branch:<13} {ns:10.1f} ns")
    else:
        print(table.to_csv(), end="")
    return 0


def _compile(args) -> int:
    fixture = {"diversity": "diversity.topo"}.get(args.function, "butterfly.topo")
    topo = Topology.load(args.topology) if args.topology else load_fixture(fixture)
    hosts = topo.hosts()
    source = args.source or hosts[0]
    if args.receivers:
        receivers = tuple(args.receivers.split(","))
    else:
        receivers = tuple(hosts[1:2] if args.function == "diversity" else hosts[1:3])
    k = args.gen_size or (1 if args.function == "forwarding" else 2)
    _header({"command": "compile", "topology": args.topology or fixture, "function": args.function,
             "source": source, "receivers": receivers, "rate": args.rate, "gen_size": k})
    doc = compile_stream(topo, StreamSpec(args.stream_id, source, receivers, args.rate, k, args.function, k + 1))
    if args.out:
        doc.dump(args.out)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(doc.dumps())
    return 0


def _simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario.seed = args.seed
    _header({"command": "simulate", "scenario": str(args.scenario), "seed": scenario.seed,
             "out_dir": args.out_dir, "hosts": [h.__dict__ for h in scenario.hosts],
             "failures": [f.__dict__ for f in scenario.failures]})
    trace = scenario.run()
    for path in trace.write(args.out_dir):
        print(f"wrote {path}")
    for host, log in trace.deliveries.items():
        try:
            rate = f"{received_rate(trace, host):.1f} bit/s"
        except UndefinedRate:
            rate = "undefined"
        print(f"{host}: {len(log)} deliveries, received rate {rate}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "compile":
            return _compile(args)
        if args.command == "simulate":
            return _simulate(args)
        return _sweep(args)
    except Exception as exc:  # every failure leaves as a structured error
        err = {"error": type(exc).__name__, "message": str(exc), "command": args.command}
        if isinstance(exc, InfeasibleError) and exc.cut:
            err["cut"] = list(exc.cut)
        print(json.dumps(err), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
