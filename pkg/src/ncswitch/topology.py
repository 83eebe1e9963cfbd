"""Network topology: hosts, switches and directed, capacitated links.

Text format, one declaration per line (``#`` starts a comment)::

    node <id> host|switch
    link <id>:<port> <id>:<port> <bandwidth_bps> <delay_s>
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace
from pathlib import Path


class TopologyError(ValueError):
    pass


def node_key(name: str):
    """Natural sort key: ``s2`` before ``s10``."""
    return tuple(int(p) if p.isdigit() else p for p in re.split(r"(\d+)", name))


@dataclass(frozen=True)
class Link:
    src: str
    src_port: int
    dst: str
    dst_port: int
    bandwidth: float
    delay: float

    @property
    def ref(self) -> str:
        return f"{self.src}:{self.src_port}"

    @property
    def delay_ns(self) -> int:
        return round(self.delay * 1e9)

    def serialization_ns(self, nbytes: int) -> int:
        return -(-nbytes * 8 * 10**9 // int(self.bandwidth))


class Topology:
    def __init__(self):
        self.nodes: dict[str, str] = {}
        self.links: list[Link] = []
        self._out: dict[tuple[str, int], Link] = {}
        self._in: dict[tuple[str, int], Link] = {}

    def add_node(self, name: str, kind: str) -> None:
        if kind not in ("host", "switch"):
            raise TopologyError(f"node {name}: unknown kind {kind!r}")
        if name in self.nodes:
            raise TopologyError(f"node {name} declared twice")
        self.nodes[name] = kind

    def add_link(self, link: Link) -> None:
        for end in (link.src, link.dst):
            if end not in self.nodes:
                raise TopologyError(f"link {link.ref}: unknown node {end}")
        if link.src_port < 1 or link.dst_port < 1:
            raise TopologyError(f"link {link.ref}: ports start at 1 (0 is the recirculation port)")
        if (link.src, link.src_port) in self._out:
            raise TopologyError(f"port {link.src}:{link.src_port} already sends on a link")
        if (link.dst, link.dst_port) in self._in:
            raise TopologyError(f"port {link.dst}:{link.dst_port} already receives a link")
        if link.bandwidth <= 0 or link.delay < 0:
            raise TopologyError(f"link {link.ref}: bandwidth must be positive and delay non-negative")
        self.links.append(link)
        self._out[(link.src, link.src_port)] = link
        self._in[(link.dst, link.dst_port)] = link

    def link(self, ref: str) -> Link:
        node, _, port = ref.partition(":")
        try:
            return self._out[(node, int(port))]
        except (KeyError, ValueError):
            raise TopologyError(f"no link leaves {ref}") from None

    def link_from(self, node: str, port: int) -> Link | None:
        return self._out.get((node, port))

    def out_links(self, node: str) -> list[Link]:
        return sorted((l for l in self.links if l.src == node), key=lambda l: (l.src_port,))

    def in_links(self, node: str) -> list[Link]:
        return sorted((l for l in self.links if l.dst == node), key=lambda l: (l.dst_port,))

    def hosts(self) -> list[str]:
        return sorted((n for n, k in self.nodes.items() if k == "host"), key=node_key)

    def switches(self) -> list[str]:
        return sorted((n for n, k in self.nodes.items() if k == "switch"), key=node_key)

    def is_host(self, name: str) -> bool:
        return self.nodes.get(name) == "host"

    def uplink(self, host: str) -> Link:
        links = self.out_links(host)
        if not links:
            raise TopologyError(f"host {host} has no outgoing link")
        return links[0]

    def downlink(self, host: str) -> Link:
        links = self.in_links(host)
        if not links:
            raise TopologyError(f"host {host} has no incoming link")
        return links[0]

    def with_link(self, ref: str, **changes) -> "Topology":
        """Copy of the topology with one link's attributes replaced."""
        target = self.link(ref)
        topo = Topology()
        for name, kind in self.nodes.items():
            topo.add_node(name, kind)
        for l in self.links:
            topo.add_link(replace(l, **changes) if l == target else l)
        return topo

    def dumps(self) -> str:
        lines = [f"node {n} {k}" for n, k in self.nodes.items()]
        lines += [f"link {l.src}:{l.src_port} {l.dst}:{l.dst_port} {l.bandwidth:g} {l.delay:g}" for l in self.links]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Topology":
        topo = cls()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                if parts[0] == "node" and len(parts) == 3:
                    topo.add_node(parts[1], parts[2])
                elif parts[0] == "link" and len(parts) == 5:
                    src, sp = parts[1].split(":")
                    dst, dp = parts[2].split(":")
                    topo.add_link(Link(src, int(sp), dst, int(dp), float(parts[3]), float(parts[4])))
                else:
                    raise TopologyError(f"cannot parse {line!r}")
            except (ValueError, IndexError) as exc:
                raise TopologyError(f"line {lineno}: {exc}") from None
        return topo

    @classmethod
    def load(cls, path) -> "Topology":
        return cls.loads(Path(path).read_text())
