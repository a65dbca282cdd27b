"""Stock graphs and random graph generation."""

from __future__ import annotations

import random
from typing import Optional, Sequence

from .graph import CayleyGraph, NamedGraph, canonicalize, edge, from_edges, singleton


def k1(ports: int = 1, label=None) -> CayleyGraph:
    return singleton(ports, label)


def k2(ports: int = 1, labels=(None, None)) -> CayleyGraph:
    return from_edges(ports, 2, [(0, 0, 1, 0)], labels)


def cycle(n: int, labels: Optional[Sequence] = None) -> CayleyGraph:
    """Oriented cycle: port 1 of vertex i meets port 0 of vertex i+1."""
    if n < 1:
        raise ValueError("cycle needs at least one vertex")
    return from_edges(2, n, [(i, 1, (i + 1) % n, 0) for i in range(n)], labels)


def line(n: int, labels: Optional[Sequence] = None) -> CayleyGraph:
    """Oriented line pointed at its left end."""
    if n < 1:
        raise ValueError("line needs at least one vertex")
    return from_edges(2, n, [(i, 1, i + 1, 0) for i in range(n - 1)], labels)


EXAMPLE_PORT_NAMES = ("1", "2", "3")
EXAMPLE_STRING = "$1;(1,1)$0;(2,3)$0(2,3)||;(1,1)$1(2,3)||;"


def dfs_example() -> CayleyGraph:
    """Four-vertex example over ports {1,2,3} (indices 0..2), labels 1,0,0,1.

    Edges, with port names: A:1-B:1, B:2-C:3, C:2-A:3, C:1-D:1, D:2-B:3.
    """
    a, b, c, d = range(4)
    edges = [(a, 0, b, 0), (b, 1, c, 2), (c, 1, a, 2), (c, 0, d, 0), (d, 1, b, 2)]
    return from_edges(3, 4, edges, ["1", "0", "0", "1"])


def two_vertex() -> CayleyGraph:
    """Two degree-3 vertices joined through port 2 of the first and port 0 of the second."""
    return from_edges(3, 2, [(0, 2, 1, 0)])


def random_named(rng: random.Random, ports: int, n: int, vlabels: Sequence = (),
                 elabels: Sequence = (), density: float = 0.6,
                 loops: bool = True) -> NamedGraph:
    """Random connected port graph on vertices ``0..n-1``.

    A random spanning tree guarantees connectivity; extra edges are then added
    between free ports with probability ``density``.
    """
    if n > 1 and ports < 1:
        raise ValueError("cannot connect vertices without ports")
    free = {v: list(range(ports)) for v in range(n)}
    for v in free:
        rng.shuffle(free[v])
    edges = []
    order = list(range(n))
    rng.shuffle(order)
    placed = [order[0]]
    for v in order[1:]:
        hosts = [u for u in placed if free[u]]
        if not hosts or not free[v]:
            raise ValueError("port budget too small for a spanning tree")
        u = rng.choice(hosts)
        edges.append((u, free[u].pop(), v, free[v].pop()))
        placed.append(v)
    slots = [(v, p) for v in range(n) for p in free[v]]
    rng.shuffle(slots)
    while len(slots) >= 2:
        a = slots.pop()
        if rng.random() > density:
            continue
        choices = [s for s in slots if loops or s[0] != a[0]]
        if not choices:
            continue
        b = rng.choice(choices)
        slots.remove(b)
        edges.append((a[0], a[1], b[0], b[1]))
    vl = {v: rng.choice(list(vlabels)) for v in range(n)} if vlabels else {}
    el = {}
    es = []
    for u, p, v, q in edges:
        e = edge(u, p, v, q)
        es.append(e)
        if elabels:
            el[e] = rng.choice(list(elabels))
    return NamedGraph(ports, frozenset(range(n)), frozenset(es), vl, el)


def random_graph(rng: random.Random, ports: int, n: int, vlabels: Sequence = (),
                 elabels: Sequence = (), density: float = 0.6, loops: bool = True) -> CayleyGraph:
    g = random_named(rng, ports, n, vlabels, elabels, density, loops)
    return canonicalize(g, rng.randrange(n))


def rename(g: NamedGraph, mapping: dict) -> NamedGraph:
    """Apply a vertex renaming to a named graph."""
    edges = []
    elabels = {}
    for e in g.edges:
        (u, p), (v, q) = tuple(e)
        ne = edge(mapping[u], p, mapping[v], q)
        edges.append(ne)
        if e in g.elabels:
            elabels[ne] = g.elabels[e]
    return NamedGraph(g.ports, frozenset(mapping[v] for v in g.vertices), frozenset(edges),
                      {mapping[v]: lab for v, lab in g.vlabels.items()}, elabels)


def parse_graph_spec(spec: str) -> CayleyGraph:
    """Builtin graph by name: ``k1``, ``k2``, ``cycle:N``, ``line:N``,
    ``dfs_example`` or ``two_vertex``.

    ``cycle`` and ``line`` accept labels after a second colon, one character
    per vertex (``cycle:4:0110``).
    """
    name, _, rest = spec.partition(":")
    if name == "k1":
        return k1()
    if name == "k2":
        return k2()
    if name == "dfs_example":
        return dfs_example()
    if name == "two_vertex":
        return two_vertex()
    if name in ("cycle", "line"):
        size, _, labs = rest.partition(":")
        n = int(size)
        labels = list(labs) if labs else None
        if labels is not None and len(labels) != n:
            raise ValueError(f"{len(labels)} labels for {n} vertices")
        return (cycle if name == "cycle" else line)(n, labels)
    raise ValueError(f"unknown graph {spec!r}")
