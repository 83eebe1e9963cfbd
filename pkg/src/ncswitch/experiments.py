"""Parameter sweeps over the two bundled scenarios, and their CSV/SVG outputs."""
from __future__ import annotations

import csv
import io
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import load_fixture, svg
from .compiler import StreamSpec, compile_butterfly, compile_diversity, compile_forwarding_baseline
from .flows import min_multicast_rate
from .netsim import Failure, HostProcess, make_payload, payload_seq, received_rate, run, send_rate
from .topology import Topology

SCENARIOS = ("butterfly-rate", "diversity-failure", "diversity-bench")

DEFAULTS = {
    "butterfly-rate": tuple(round(0.1 * i, 1) for i in range(1, 11)),
    # failure times as fractions of the nominal stream duration
    "diversity-failure": tuple(round(0.05 + 0.1 * i, 2) for i in range(10)),
    "diversity-bench": (1024, 2048, 4096),
}


class ExperimentError(RuntimeError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    scenario: str
    values: tuple = ()
    repetitions: int = 1
    seed: int = 0
    packets: int = 1000
    payload_size: int = 4096
    topology: str | None = None
    differentials_ms: tuple[float, ...] = (-4.0, -2.0, 0.0, 2.0, 4.0)
    fail_paths: tuple[int, ...] | None = None
    fail_times: tuple[float, ...] | None = None
    workers: int = 1

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ExperimentError(f"unknown scenario {self.scenario!r}")
        if not self.values:
            object.__setattr__(self, "values", DEFAULTS[self.scenario])
        if self.repetitions < 1:
            raise ExperimentError("repetitions must be at least 1")
        if self.scenario == "butterfly-rate" and not all(0 < v <= 1 for v in self.values):
            raise ExperimentError("send-rate ratios must lie in (0, 1]")
        if self.packets < 2:
            raise ExperimentError("need at least two packets to measure a rate")

    def effective(self) -> dict:
        return asdict(self)

    def load_topology(self, fixture: str) -> Topology:
        return Topology.load(self.topology) if self.topology else load_fixture(fixture)


@dataclass
class Table:
    name: str
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def records(self) -> list[dict]:
        return [dict(zip(self.columns, r)) for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_cell(v) for v in r])
        return buf.getvalue()


def _cell(v):
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, float):
        return format(v, ".10g")
    return v


def _map(fn, jobs, workers: int):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


# butterfly rate sweep

def _butterfly_point(job):
    topo_text, mode, ratio, rep, seed, packets, size = job
    topo = Topology.loads(topo_text)
    source, receivers = topo.hosts()[0], tuple(topo.hosts()[1:3])
    bound = min_multicast_rate(topo, source, receivers)
    rate = ratio * bound
    if mode == "coding":
        cfg = compile_butterfly(topo, StreamSpec(1, source, receivers, rate, 2, "butterfly"))
    else:
        cfg = compile_forwarding_baseline(topo, StreamSpec(1, source, receivers, rate, 1, "forwarding"))
    trace = run(topo, cfg, [HostProcess(source, 1, packets, size, "exponential", rate)], seed=seed)
    sent = send_rate(trace, source)
    rows = []
    for h in receivers:
        got = received_rate(trace, h)
        rows.append((mode, ratio, rep, seed, h, sent, got, got / sent, len(trace.deliveries[h])))
    return rows


def butterfly_rate(spec: SweepSpec) -> Table:
    """Received/send rate ratio per receiver, coding against the forwarding tree."""
    topo = spec.load_topology("butterfly.topo")
    if len(topo.hosts()) < 3:
        raise ExperimentError("butterfly topology needs a source and two receiver hosts")
    jobs = [(topo.dumps(), mode, ratio, rep, spec.seed + rep, spec.packets, spec.payload_size)
            for mode in ("coding", "forwarding") for ratio in sorted(spec.values)
            for rep in range(spec.repetitions)]
    table = Table("butterfly_rate", ("mode", "send_ratio", "rep", "seed", "receiver", "send_bps",
                                     "received_bps", "received_over_send", "delivered"))
    for rows in _map(_butterfly_point, jobs, spec.workers):
        table.rows.extend(rows)
    return table


# diversity failure sweep

def _nominal_duration(topo: Topology, source: str, packets: int, size: int) -> float:
    wire = size + 19  # a fresh host packet: fixed fields, one coefficient, no telemetry
    return packets * topo.uplink(source).serialization_ns(wire) / 1e9


def _diversity_point(job):
    topo_text, case, failed, t_fail, seed, packets, size = job
    topo = Topology.loads(topo_text)
    source, receiver = topo.hosts()[0], topo.hosts()[1]
    cfg = compile_diversity(topo, StreamSpec(1, source, (receiver,), 0, 2, "diversity", 3))
    paths = cfg.streams[1].paths
    failures = [Failure(t_fail, paths[p][0]) for p in failed]
    trace = run(topo, cfg, [HostProcess(source, 1, packets, size, "back-to-back")], failures, seed)
    log = trace.deliveries[receiver]
    seqs = [payload_seq(d.payload) for d in log]
    exact = all(d.payload == make_payload(1, s, size) for d, s in zip(log, seqs))
    unique = len(set(seqs))
    stamps = np.array([d.timestamp_ns for d in log], dtype=np.int64)
    gap = int(np.diff(stamps).max()) if len(stamps) > 1 else 0
    counters = trace.counters
    return (case, "+".join(str(p + 1) for p in failed) or "-", t_fail, len(log), packets - unique,
            seqs == sorted(seqs) and unique == len(seqs), exact, gap,
            sum(c.get("late", 0) for c in counters.values()),
            sum(c.get("evicted_undelivered", 0) for c in counters.values()))


def diversity_failure(spec: SweepSpec) -> Table:
    """Delivery and loss with one or two paths cut at points across the stream."""
    topo = spec.load_topology("diversity.topo")
    text = topo.dumps()
    duration = _nominal_duration(topo, topo.hosts()[0], spec.packets, spec.payload_size)
    singles = spec.fail_paths if spec.fail_paths is not None else (0, 1, 2)
    jobs = [(text, "none", (), 0.0, spec.seed, spec.packets, spec.payload_size)]
    if spec.fail_times is not None:
        times = sorted(spec.fail_times)
    else:
        times = [round(frac * duration, 9) for frac in sorted(spec.values)]
    for p in singles:
        if not 0 <= p < 3:
            raise ExperimentError(f"path index {p + 1} out of range 1..3")
        for t in times:
            jobs.append((text, "single", (p,), t, spec.seed, spec.packets, spec.payload_size))
    for pair in itertools.combinations(range(3), 2):
        jobs.append((text, "double", pair, round(0.5 * duration, 9), spec.seed, spec.packets, spec.payload_size))
    table = Table("diversity_failure", ("case", "failed_paths", "fail_time_s", "delivered", "lost",
                                        "in_order", "byte_exact", "max_gap_ns", "late_rows",
                                        "evicted_undelivered"))
    table.rows = _map(_diversity_point, jobs, spec.workers)
    return table


# diversity cost bench

ROLE_OF = {"split": "coding", "forward": "forwarding", "gather": "decoding"}


def _bench_point(job):
    topo_text, size, diff_ms, seed, packets, wallclock = job
    topo = Topology.loads(topo_text)
    source, receiver = topo.hosts()[0], topo.hosts()[1]
    cfg = compile_diversity(topo, StreamSpec(1, source, (receiver,), 0, 2, "diversity", 3))
    paths = cfg.streams[1].paths
    data_delay = topo.link(paths[0][0]).delay
    parity_ref = paths[2][0]
    topo = topo.with_link(parity_ref, delay=max(0.0, data_delay + diff_ms / 1e3))
    trace = run(topo, cfg, [HostProcess(source, 1, packets, size, "back-to-back")], seed=seed, wallclock=wallclock)
    groups: dict[tuple[str, str], list] = {}
    for sw, records in trace.records.items():
        branches = trace.branches[sw].get(1, {})
        for r in records:
            if r.fate == "discarded" or not r.actions:
                continue
            role = ROLE_OF[r.actions[0]]
            branch = branches.get(r.batch_number, "-") if role == "decoding" else "-"
            groups.setdefault((role, branch), []).append(r)
    batches = {}
    for b in trace.branches[receiver_switch(topo, receiver)].get(1, {}).values():
        batches[b] = batches.get(b, 0) + 1
    rows = []
    for (role, branch), recs in sorted(groups.items()):
        lookups = np.mean([r.cost.table_lookups for r in recs])
        nbytes = np.mean([r.cost.bytes_touched for r in recs])
        recirc = np.mean([r.cost.recirculations for r in recs])
        latency = np.mean([r.latency_ns for r in recs])
        wall = float(np.mean([r.wall_ns for r in recs])) if wallclock else 0.0
        rows.append((size, diff_ms, role, branch, len(recs), batches.get(branch, 0), float(lookups),
                     float(nbytes), float(recirc), float(latency), wall))
    return rows


def receiver_switch(topo: Topology, host: str) -> str:
    return topo.downlink(host).src


def diversity_bench(spec: SweepSpec, wallclock: bool = False) -> Table:
    """Mean modeled pipeline cost per role and decode branch, over sizes and delay differentials.

    The differential is the parity link delay minus the data link delay.
    """
    topo = spec.load_topology("diversity.topo")
    jobs = [(topo.dumps(), size, diff, spec.seed, spec.packets, wallclock)
            for size in sorted(spec.values) for diff in sorted(spec.differentials_ms)]
    table = Table("diversity_bench", ("payload_size", "differential_ms", "role", "branch", "traversals",
                                      "batches", "mean_lookups", "mean_bytes", "mean_recirculations",
                                      "mean_latency_ns", "mean_wall_ns"))
    for rows in _map(_bench_point, jobs, spec.workers):
        table.rows.extend(rows)
    return table


def role_means(table: Table) -> dict[tuple[int, str, str], float]:
    """Traversal-weighted mean modeled latency per (payload size, role, branch)."""
    acc: dict[tuple, list[float]] = {}
    for r in table.records():
        a = acc.setdefault((r["payload_size"], r["role"], r["branch"]), [0.0, 0])
        a[0] += r["mean_latency_ns"] * r["traversals"]
        a[1] += r["traversals"]
    return {k: s / n for k, (s, n) in sorted(acc.items()) if n}


RUNNERS = {
    "butterfly-rate": butterfly_rate,
    "diversity-failure": diversity_failure,
    "diversity-bench": diversity_bench,
}


# outputs

def read_csv(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


def plot_from_csv(name: str, text: str) -> str | None:
    rows = read_csv(text)
    if name == "butterfly_rate":
        series: dict[str, dict[float, list[float]]] = {}
        for r in rows:
            series.setdefault(r["mode"], {}).setdefault(float(r["send_ratio"]), []).append(
                float(r["received_over_send"]))
        lines = {mode: [(x, float(np.mean(ys))) for x, ys in sorted(pts.items())] for mode, pts in sorted(series.items())}
        return svg.line_chart(lines, title="Received over send rate", xlabel="send rate / max-flow",
                              ylabel="received / send", ylim=(0.0, 1.05))
    if name == "diversity_bench":
        acc: dict[str, dict[str, list[float]]] = {}
        for r in rows:
            label = r["role"] if r["branch"] == "-" else f'{r["role"]} ({r["branch"]})'
            w = int(r["traversals"])
            a = acc.setdefault(r["payload_size"], {}).setdefault(label, [0.0, 0])
            a[0] += float(r["mean_latency_ns"]) * w
            a[1] += w
        groups = {size: {label: s / n for label, (s, n) in sorted(bars.items()) if n}
                  for size, bars in sorted(acc.items(), key=lambda kv: int(kv[0]))}
        return svg.grouped_bars(groups, title="Modeled processing latency per packet",
                                xlabel="payload size (bytes)", ylabel="latency (ns)")
    return None


def emit_outputs(tables: list[Table], out_dir) -> list[Path]:
    """Write one CSV per table, plus an SVG built from that CSV where a plot exists.

    Everything is rendered in memory first so that a bad table leaves no partial output.
    """
    if not tables:
        raise ExperimentError("nothing to write")
    rendered: list[tuple[str, str]] = []
    for t in tables:
        if not t.rows:
            raise ExperimentError(f"table {t.name} is empty")
        text = t.to_csv()
        rendered.append((f"{t.name}.csv", text))
        plot = plot_from_csv(t.name, text)
        if plot is not None:
            rendered.append((f"{t.name}.svg", plot))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for fname, text in rendered:
        p = out / fname
        p.write_text(text)
        paths.append(p)
    return paths
