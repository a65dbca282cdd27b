"""Port graphs, generalized Cayley graphs and their algebra.

A :class:`NamedGraph` is a plain port graph whose vertices carry opaque
names.  A :class:`CayleyGraph` is the canonical representative of a pointed
port graph modulo pointer-preserving isomorphism: vertices are numbered in
breadth-first order from the pointer, scanning ports in ascending order, so
two isomorphic pointed graphs have literally equal representatives.  Vertex
``i`` is named by :attr:`CayleyGraph.paths` ``[i]``, the shortlex-smallest
path reaching it from the origin.

A path is a tuple of ``(out_port, in_port)`` steps; ``()`` is the origin.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Hashable, Iterable, Iterator, Mapping, Optional, Sequence

from .errors import (
    DisconnectedGraph,
    InconsistentUnion,
    NoSuchVertex,
    PortConflict,
    SignatureMismatch,
)

Path = tuple  # tuple[tuple[int, int], ...]
Endpoint = tuple  # (vertex, port)

EPSILON: Path = ()


def inverse(path: Path) -> Path:
    """The path walking ``path`` backwards."""
    return tuple((b, a) for a, b in reversed(path))


def format_path(path: Path) -> str:
    if not path:
        return "ε"
    return "".join(f"({a},{b})" for a, b in path)


def label_key(label):
    """Total order on partial labels: unlabeled first, then by text."""
    if label is None:
        return (0, "")
    return (1, str(label))


# ---------------------------------------------------------------------------
# Named graphs


def edge(u, p: int, v, q: int) -> frozenset:
    return frozenset(((u, p), (v, q)))


def _endpoints(e) -> tuple:
    ends = tuple(e)
    if len(ends) != 2:
        raise PortConflict(f"edge {sorted(map(repr, ends))} uses one port twice")
    return ends


@dataclass(frozen=True)
class NamedGraph:
    """A finite port graph with named vertices and partial labellings."""

    ports: int
    vertices: frozenset
    edges: frozenset = frozenset()
    vlabels: Mapping = field(default_factory=dict)
    elabels: Mapping = field(default_factory=dict)

    @classmethod
    def build(cls, ports, vertices, edges=(), vlabels=None, elabels=None) -> "NamedGraph":
        es = frozenset(e if isinstance(e, frozenset) else edge(*e) for e in edges)
        return cls(ports, frozenset(vertices), es,
                   {k: x for k, x in (vlabels or {}).items() if x is not None},
                   {k: x for k, x in (elabels or {}).items() if x is not None})

    def adjacency(self) -> dict:
        """Map every used ``(vertex, port)`` to the endpoint across its edge."""
        adj = {}
        for e in self.edges:
            a, b = _endpoints(e)
            for x, y in ((a, b), (b, a)):
                if x[0] not in self.vertices:
                    raise PortConflict(f"edge endpoint {x!r} on a missing vertex")
                if not 0 <= x[1] < self.ports:
                    raise PortConflict(f"port {x[1]} out of range 0..{self.ports - 1}")
                if x in adj:
                    raise PortConflict(f"port {x!r} used by two edges")
                adj[x] = y
        return adj

    def __len__(self) -> int:
        return len(self.vertices)


def _atoms(name) -> frozenset:
    return name if isinstance(name, frozenset) else frozenset((name,))


class Verdict(enum.Enum):
    TRIVIALLY_CONSISTENT = "trivially-consistent"
    CONSISTENT = "consistent"
    INCONSISTENT = "inconsistent"


@dataclass(frozen=True)
class ConsistencyVerdict:
    kind: Verdict
    conflict: Optional[str] = None

    def __bool__(self) -> bool:
        return self.kind is not Verdict.INCONSISTENT


def merge(graphs: Sequence[NamedGraph]) -> tuple[NamedGraph, bool]:
    """Union of named graphs whose vertex names are sets of atoms.

    Vertices whose atom sets intersect (transitively) are identified.  Returns
    the merged graph and whether any atom was shared between two inputs.
    Raises :class:`InconsistentUnion` on port or label clashes.
    """
    if not graphs:
        raise ValueError("merge of no graphs")
    ports = graphs[0].ports
    parent: dict = {}
    owner: dict = {}
    shared = False

    def find(a):
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    for gi, g in enumerate(graphs):
        if g.ports != ports:
            raise SignatureMismatch(f"port counts differ: {ports} vs {g.ports}")
        for name in g.vertices:
            atoms = _atoms(name)
            first = None
            for a in atoms:
                if a in owner:
                    if owner[a] != gi:
                        shared = True
                else:
                    owner[a] = gi
                    parent[a] = a
                if first is None:
                    first = find(a)
                else:
                    r = find(a)
                    if r != first:
                        parent[r] = first

    classes: dict = {}
    for a in parent:
        classes.setdefault(find(a), set()).add(a)
    names = {r: frozenset(s) for r, s in classes.items()}

    memo: dict = {}

    def cls(name):
        c = memo.get(name)
        if c is None:
            c = memo[name] = names[find(next(iter(_atoms(name))))]
        return c

    adj: dict = {}
    edges = set()
    vlabels: dict = {}
    elabels: dict = {}
    for g in graphs:
        for name, lab in g.vlabels.items():
            c = cls(name)
            old = vlabels.setdefault(c, lab)
            if old != lab:
                raise InconsistentUnion(f"vertex {_show(c)} labelled both {old!r} and {lab!r}")
        for e in g.edges:
            (u, p), (v, q) = _endpoints(e)
            a, b = (cls(u), p), (cls(v), q)
            if a == b:
                raise InconsistentUnion(f"edge collapses onto port {p} of {_show(a[0])}")
            for x, y in ((a, b), (b, a)):
                old = adj.setdefault(x, y)
                if old != y:
                    raise InconsistentUnion(
                        f"port {x[1]} of {_show(x[0])} joined to both "
                        f"{_show(old[0])}:{old[1]} and {_show(y[0])}:{y[1]}")
            ne = frozenset((a, b))
            edges.add(ne)
            lab = g.elabels.get(e)
            if lab is not None:
                old = elabels.setdefault(ne, lab)
                if old != lab:
                    raise InconsistentUnion(f"edge labelled both {old!r} and {lab!r}")
    merged = NamedGraph(ports, frozenset(names.values()), frozenset(edges), vlabels, elabels)
    return merged, shared


def _show(name) -> str:
    atoms = sorted((repr(a) for a in _atoms(name)))
    return "{" + ", ".join(atoms) + "}"


def consistency(g: NamedGraph, h: NamedGraph) -> ConsistencyVerdict:
    if g.ports != h.ports:
        raise SignatureMismatch(f"port counts differ: {g.ports} vs {h.ports}")
    try:
        _, shared = merge([g, h])
    except InconsistentUnion as exc:
        return ConsistencyVerdict(Verdict.INCONSISTENT, str(exc))
    return ConsistencyVerdict(Verdict.CONSISTENT if shared else Verdict.TRIVIALLY_CONSISTENT)


def union(g: NamedGraph, h: NamedGraph) -> NamedGraph:
    return merge([g, h])[0]


def empty_graph(ports: int) -> NamedGraph:
    return NamedGraph(ports, frozenset())


# ---------------------------------------------------------------------------
# Canonical pointed graphs


def _canonical(ports: int, start, neighbor: Callable, vlabel: Callable, elabel: Callable,
               radius: Optional[int] = None) -> tuple["CayleyGraph", list]:
    """Breadth-first canonical numbering from ``start``.

    With ``radius`` set, only vertices at distance ``<= radius`` are expanded:
    the result is the disk of that radius (boundary vertices keep only their
    edges towards the interior, labels are kept on the interior only).
    Returns the graph and the list of original vertices in canonical order.
    """
    ids = {start: 0}
    order = [start]
    dist = [0]
    i = 0
    while i < len(order):
        v = order[i]
        if radius is None or dist[i] <= radius:
            for p in range(ports):
                e = neighbor(v, p)
                if e is not None and e[0] not in ids:
                    ids[e[0]] = len(order)
                    order.append(e[0])
                    dist.append(dist[i] + 1)
        i += 1

    def inner(k):
        return radius is None or dist[k] <= radius

    nbrs = []
    vlabs = []
    elabs = []
    for k, v in enumerate(order):
        row = []
        for p in range(ports):
            e = neighbor(v, p)
            if e is None:
                row.append(None)
                continue
            j = ids.get(e[0])
            if j is None or not (inner(k) or inner(j)):
                row.append(None)
                continue
            row.append((j, e[1]))
            if inner(k) and inner(j) and (k, p) <= (j, e[1]):
                lab = elabel(v, p)
                if lab is not None:
                    elabs.append(((k, p), lab))
        nbrs.append(tuple(row))
        vlabs.append(vlabel(v) if inner(k) else None)
    g = CayleyGraph(ports, tuple(nbrs), tuple(vlabs), tuple(sorted(elabs, key=lambda t: t[0])))
    return g, order


@dataclass(frozen=True)
class CayleyGraph:
    """Canonical representative of a pointed port graph (vertex 0 is the origin).

    ``nbrs[v][p]`` is ``(w, q)`` when port ``p`` of ``v`` is joined to port
    ``q`` of ``w``, else ``None``.  ``elabels`` lists ``((v, p), label)`` keyed
    by the smaller endpoint of each labelled edge.
    """

    ports: int
    nbrs: tuple
    vlabels: tuple
    elabels: tuple = ()

    @property
    def n(self) -> int:
        return len(self.nbrs)

    def __len__(self) -> int:
        return len(self.nbrs)

    @cached_property
    def _elabel_map(self) -> dict:
        out = {}
        for (v, p), lab in self.elabels:
            out[(v, p)] = lab
            w, q = self.nbrs[v][p]
            out[(w, q)] = lab
        return out

    def elabel(self, v: int, p: int):
        return self._elabel_map.get((v, p))

    def neighbor(self, v: int, p: int):
        return self.nbrs[v][p]

    def edges(self) -> Iterator[tuple]:
        """Each edge once, as ``((v, p), (w, q))`` with the smaller endpoint first."""
        for v, row in enumerate(self.nbrs):
            for p, e in enumerate(row):
                if e is not None and (v, p) <= e:
                    yield (v, p), e

    def degree(self, v: int) -> int:
        return sum(e is not None for e in self.nbrs[v])

    @cached_property
    def paths(self) -> tuple:
        """Canonical (shortlex-minimal) path naming each vertex."""
        out = [None] * self.n
        out[0] = EPSILON
        for v in range(self.n):
            for p, e in enumerate(self.nbrs[v]):
                if e is not None and out[e[0]] is None:
                    out[e[0]] = out[v] + ((p, e[1]),)
        return tuple(out)

    @cached_property
    def _path_index(self) -> dict:
        return {p: i for i, p in enumerate(self.paths)}

    def index_of(self, path: Path) -> int:
        """Vertex named by canonical ``path``; falls back to walking."""
        i = self._path_index.get(tuple(path))
        return i if i is not None else self.walk(0, path)

    def walk(self, v: int, path: Path) -> int:
        for a, b in path:
            e = self.nbrs[v][a] if 0 <= a < self.ports else None
            if e is None or e[1] != b:
                raise NoSuchVertex(f"path {format_path(path)} leaves the graph")
            v = e[0]
        return v

    def distances(self, start: int = 0) -> list:
        dist = [None] * self.n
        dist[start] = 0
        queue = [start]
        for v in queue:
            for e in self.nbrs[v]:
                if e is not None and dist[e[0]] is None:
                    dist[e[0]] = dist[v] + 1
                    queue.append(e[0])
        return dist

    def _rebuild(self, start: int, radius: Optional[int] = None):
        return _canonical(self.ports, start, self.neighbor,
                          self.vlabels.__getitem__, self.elabel, radius)

    def shift_to(self, v: int) -> "CayleyGraph":
        return self._rebuild(v)[0]

    def shift(self, path: Path) -> "CayleyGraph":
        return self.shift_to(self.walk(0, path))

    def disk(self, r: int) -> "CayleyGraph":
        return self._rebuild(0, r)[0]

    def disk_at(self, v: int, r: int) -> "CayleyGraph":
        return self._rebuild(v, r)[0]

    def disk_with_map(self, v: int, r: int) -> tuple["CayleyGraph", list]:
        """Disk around ``v`` plus the host vertex of each disk vertex."""
        return self._rebuild(v, r)

    def to_named(self, names: Optional[Sequence] = None) -> NamedGraph:
        names = list(self.paths if names is None else names)
        edges = []
        elabels = {}
        for (v, p), (w, q) in self.edges():
            e = edge(names[v], p, names[w], q)
            edges.append(e)
            lab = self.elabel(v, p)
            if lab is not None:
                elabels[e] = lab
        vlabels = {names[v]: lab for v, lab in enumerate(self.vlabels) if lab is not None}
        return NamedGraph(self.ports, frozenset(names), frozenset(edges), vlabels, elabels)

    def sort_key(self) -> tuple:
        return (self.n, self.nbrs_key(), tuple(label_key(x) for x in self.vlabels),
                tuple((k, label_key(x)) for k, x in self.elabels))

    def nbrs_key(self) -> tuple:
        return tuple(tuple((-1, -1) if e is None else e for e in row) for row in self.nbrs)

    def __repr__(self) -> str:
        parts = []
        for (v, p), (w, q) in self.edges():
            parts.append(f"{v}:{p}-{w}:{q}")
        labs = "" if all(x is None for x in self.vlabels) else f" labels={list(self.vlabels)}"
        return f"CayleyGraph(ports={self.ports}, n={self.n}, edges=[{', '.join(parts)}]{labs})"


def canonicalize(g: NamedGraph, pointer) -> CayleyGraph:
    """Canonical representative of the pointed graph ``(g, pointer)``."""
    if pointer not in g.vertices:
        raise NoSuchVertex(f"pointer {pointer!r} is not a vertex")
    adj = g.adjacency()
    vl = g.vlabels
    el = g.elabels
    for name in vl:
        if name not in g.vertices:
            raise PortConflict(f"label on missing vertex {name!r}")

    def elabel(v, p):
        if not el:
            return None
        return el.get(edge(v, p, *adj[(v, p)]))

    x, order = _canonical(g.ports, pointer, lambda v, p: adj.get((v, p)), vl.get, elabel)
    if len(order) != len(g.vertices):
        raise DisconnectedGraph(f"{len(g.vertices) - len(order)} vertices unreachable from the pointer")
    return x


def iso_eq(x: CayleyGraph, y: CayleyGraph) -> bool:
    if x.ports != y.ports:
        raise SignatureMismatch(f"port counts differ: {x.ports} vs {y.ports}")
    return x == y


def from_edges(ports: int, n: int, edges: Iterable[tuple], vlabels=None, elabels=None,
               pointer: int = 0) -> CayleyGraph:
    """Build from vertices ``0..n-1`` and ``(u, p, v, q)`` edge tuples."""
    es = []
    el = {}
    for item in edges:
        u, p, v, q = item[:4]
        e = edge(u, p, v, q)
        es.append(e)
        if len(item) > 4 and item[4] is not None:
            el[e] = item[4]
    vl = {}
    if vlabels is not None:
        vl = {i: lab for i, lab in enumerate(vlabels) if lab is not None}
    if elabels:
        for (u, p, v, q), lab in elabels.items():
            el[edge(u, p, v, q)] = lab
    return canonicalize(NamedGraph(ports, frozenset(range(n)), frozenset(es), vl, el), pointer)


def with_ports(x: CayleyGraph, ports: int) -> CayleyGraph:
    """Same graph viewed over a larger port set."""
    if ports < x.ports:
        raise SignatureMismatch("cannot shrink the port set")
    pad = (None,) * (ports - x.ports)
    return CayleyGraph(ports, tuple(row + pad for row in x.nbrs), x.vlabels, x.elabels)


def relabel_vertices(x: CayleyGraph, mapping: Callable[[Any], Any]) -> CayleyGraph:
    return CayleyGraph(x.ports, x.nbrs, tuple(None if l is None else mapping(l) for l in x.vlabels),
                       x.elabels)


def diameter(x: CayleyGraph) -> int:
    return max(max(d for d in x.distances(v)) for v in range(x.n))


def singleton(ports: int, label=None) -> CayleyGraph:
    return CayleyGraph(ports, ((None,) * ports,), (label,))
