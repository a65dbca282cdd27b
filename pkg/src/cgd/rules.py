"""Local rules, their validation, and the synchronous global step.

A local rule maps the radius-``r`` disk around a vertex to an *image graph*:
a :class:`~cgd.graph.NamedGraph` whose vertex names are frozensets of atoms
``(path, suffix)``.  ``path`` names a vertex of the disk (canonical path) and
``suffix`` in ``0..bound`` picks one of its successors, ``0`` playing the role
of the empty suffix.  The global step prefixes every image by its vertex,
resolves atoms to host vertices, and takes the union.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Sequence

from .errors import (
    BudgetExceeded,
    CGDError,
    InconsistentUnion,
    MissingDiskEntry,
    NoSuchVertex,
    PortConflict,
    UnknownBuiltin,
)
from .graph import (
    EPSILON,
    CayleyGraph,
    NamedGraph,
    canonicalize,
    edge,
    merge,
)

GRAPH_CLASSES = ("any", "simple", "oriented")
DEFAULT_BUDGET = int(os.environ.get("CGD_ENUM_BUDGET", "200000"))

ORIGIN_ATOM = (EPSILON, 0)


def atom(path=EPSILON, suffix: int = 0) -> tuple:
    return (tuple(path), suffix)


def image_graph(ports: int, vertices, edges=(), vlabels=None, elabels=None) -> NamedGraph:
    """Image graph from atom-set names.

    ``vertices`` is an iterable of atom iterables; ``edges`` holds
    ``(name, p, name, q)`` or ``(name, p, name, q, label)``; names given as
    atom iterables are frozen automatically.
    """
    names = [frozenset(v) for v in vertices]
    es = set()
    el = {}
    for item in edges:
        u, p, v, q = item[:4]
        e = edge(frozenset(u), p, frozenset(v), q)
        es.add(e)
        if len(item) > 4 and item[4] is not None:
            el[e] = item[4]
    vl = {frozenset(k): x for k, x in (vlabels or {}).items() if x is not None}
    return NamedGraph(ports, frozenset(names), frozenset(es), vl, el)


# ---------------------------------------------------------------------------
# Rules


@dataclass(eq=False)
class LocalRule:
    """A local rule of the given signature.

    Either ``table`` (canonical disk -> image) or ``fn`` (disk -> image) must
    be given.  Table rules may be partial; :meth:`image` raises
    :class:`MissingDiskEntry` for disks outside the table.
    """

    ports: int
    vlabels: tuple = ()
    elabels: tuple = ()
    radius: int = 0
    bound: int = 1
    table: Optional[dict] = None
    fn: Optional[Callable[[CayleyGraph], NamedGraph]] = None
    graph_class: str = "any"
    name: str = ""

    def __post_init__(self):
        if (self.table is None) == (self.fn is None):
            raise ValueError("exactly one of table and fn is required")
        if self.graph_class not in GRAPH_CLASSES:
            raise ValueError(f"unknown graph class {self.graph_class!r}")
        self.vlabels = tuple(self.vlabels)
        self.elabels = tuple(self.elabels)

    @property
    def suffixes(self) -> range:
        return range(self.bound + 1)

    def image(self, disk: CayleyGraph) -> NamedGraph:
        if self.table is not None:
            try:
                return self.table[disk]
            except KeyError:
                raise MissingDiskEntry(disk) from None
        return self.fn(disk)

    def local_image(self, x: CayleyGraph, v: int) -> NamedGraph:
        """Image produced at host vertex ``v``; atoms are relative to ``v``."""
        return self.image(x.disk_at(v, self.radius))

    def resolved_image(self, x: CayleyGraph, v: int) -> NamedGraph:
        """Image at ``v`` with atoms resolved to host vertices."""
        return resolve(self.local_image(x, v), x, v)

    def signature(self) -> tuple:
        return (self.ports, self.vlabels, self.elabels, self.radius, self.bound)

    def same_as(self, other: "LocalRule") -> bool:
        """Entrywise equality of two table rules."""
        return (self.signature() == other.signature() and self.table is not None
                and self.table == other.table)

    def __repr__(self) -> str:
        kind = f"table[{len(self.table)}]" if self.table is not None else "procedural"
        return (f"LocalRule({self.name or 'anonymous'}, ports={self.ports}, r={self.radius}, "
                f"b={self.bound}, {kind})")


def materialize(f: LocalRule, budget: int = DEFAULT_BUDGET) -> LocalRule:
    """Tabulate a procedural rule over every disk of its signature and class."""
    table = {}
    for d in enumerate_disks(f.ports, f.vlabels, f.elabels, f.radius, f.graph_class, budget):
        try:
            table[d] = f.image(d)
        except MissingDiskEntry:
            pass
    return LocalRule(f.ports, f.vlabels, f.elabels, f.radius, f.bound, table=table,
                     graph_class=f.graph_class, name=f.name)


# ---------------------------------------------------------------------------
# Disk enumeration

_UNSET = object()


def _edge_allowed(graph_class: str, ports: int, nbrs, v, p, w, q) -> bool:
    if graph_class == "any":
        return True
    if graph_class == "oriented":
        return q == ports - 1 - p
    # simple
    if w == v:
        return False
    return all(e is _UNSET or e is None or e[0] != w for e in nbrs[v])


def enumerate_shapes(ports: int, radius: Optional[int], graph_class: str = "any",
                     max_vertices: Optional[int] = None,
                     budget: int = DEFAULT_BUDGET) -> Iterator[CayleyGraph]:
    """Unlabelled canonical shapes, generated directly in canonical numbering.

    With ``radius`` set, yields every disk of that radius (boundary vertices at
    distance ``radius + 1`` keep only their edges to the interior).  With
    ``radius=None`` yields complete graphs of at most ``max_vertices``
    vertices.  Each port of an interior vertex is, in breadth-first order,
    either free, joined to a free port of an already created vertex, or joined
    to a new vertex; this choice sequence is exactly the canonical numbering so
    no shape is produced twice.
    """
    if graph_class not in GRAPH_CLASSES:
        raise ValueError(f"unknown graph class {graph_class!r}")
    if radius is None and max_vertices is None:
        raise ValueError("complete graphs need a vertex bound")
    nbrs = [[_UNSET] * ports]
    dist = [0]
    count = 0

    def snapshot():
        return CayleyGraph(ports, tuple(tuple(None if e is _UNSET else e for e in row)
                                        for row in nbrs), (None,) * len(nbrs))

    def rec(v, p):
        nonlocal count
        while v < len(nbrs):
            if radius is not None and dist[v] > radius:
                v = len(nbrs)
                break
            row = nbrs[v]
            while p < ports and row[p] is not _UNSET:
                p += 1
            if p < ports:
                break
            v, p = v + 1, 0
        if v >= len(nbrs):
            count += 1
            if count > budget:
                raise BudgetExceeded(f"more than {budget} shapes")
            yield snapshot()
            return
        nbrs[v][p] = None
        yield from rec(v, p + 1)
        nbrs[v][p] = _UNSET
        for w in range(v, len(nbrs)):
            for q in range(ports):
                if nbrs[w][q] is not _UNSET or (w == v and q == p):
                    continue
                if not _edge_allowed(graph_class, ports, nbrs, v, p, w, q):
                    continue
                nbrs[v][p] = (w, q)
                nbrs[w][q] = (v, p)
                yield from rec(v, p + 1)
                nbrs[w][q] = _UNSET
                nbrs[v][p] = _UNSET
        if max_vertices is None or len(nbrs) < max_vertices:
            w = len(nbrs)
            for q in range(ports):
                if not _edge_allowed(graph_class, ports, nbrs, v, p, w, q):
                    continue
                nbrs.append([_UNSET] * ports)
                dist.append(dist[v] + 1)
                nbrs[v][p] = (w, q)
                nbrs[w][q] = (v, p)
                yield from rec(v, p + 1)
                nbrs.pop()
                dist.pop()
                nbrs[v][p] = _UNSET

    yield from rec(0, 0)


def labelled_slots(shape: CayleyGraph, radius: Optional[int]) -> tuple[list, list]:
    """Vertices and edges (by smaller endpoint) that carry labels in a disk."""
    dist = shape.distances(0)
    inner = [radius is None or d <= radius for d in dist]
    verts = [v for v in range(shape.n) if inner[v]]
    edges = [a for a, b in shape.edges() if inner[a[0]] and inner[b[0]]]
    return verts, edges


def labellings(shape: CayleyGraph, radius: Optional[int], vlabels: Sequence,
               elabels: Sequence) -> Iterator[CayleyGraph]:
    verts, edges = labelled_slots(shape, radius)
    vchoices = [tuple(vlabels)] * len(verts) if vlabels else []
    echoices = [tuple(elabels)] * len(edges) if elabels else []
    for vs in itertools.product(*vchoices):
        labs = [None] * shape.n
        for v, lab in zip(verts, vs):
            labs[v] = lab
        for es in itertools.product(*echoices):
            yield CayleyGraph(shape.ports, shape.nbrs, tuple(labs),
                              tuple(zip(edges, es)) if elabels else ())


def enumerate_disks(ports: int, vlabels: Sequence = (), elabels: Sequence = (), r: int = 0,
                    graph_class: str = "any", budget: int = DEFAULT_BUDGET) -> list:
    """Every radius-``r`` disk of the signature, in canonical order."""
    out = []
    for shape in enumerate_shapes(ports, r, graph_class, budget=budget):
        for d in labellings(shape, r, vlabels, elabels):
            out.append(d)
            if len(out) > budget:
                raise BudgetExceeded(f"more than {budget} disks")
    out.sort(key=CayleyGraph.sort_key)
    return out


# ---------------------------------------------------------------------------
# The global step


def resolve(img: NamedGraph, x: CayleyGraph, v: int) -> NamedGraph:
    """Prefix an image produced at ``v``: atoms ``(path, z)`` become ``(host vertex, z)``."""
    cache = {}

    def res(name):
        out = []
        for path, z in name:
            w = cache.get(path)
            if w is None:
                w = cache[path] = x.walk(v, path)
            out.append((w, z))
        return frozenset(out)

    names = {name: res(name) for name in img.vertices}
    edges = set()
    elabels = {}
    for e in img.edges:
        (a, p), (b, q) = tuple(e)
        ne = edge(names[a], p, names[b], q)
        edges.add(ne)
        if e in img.elabels:
            elabels[ne] = img.elabels[e]
    vlabels = {names[k]: lab for k, lab in img.vlabels.items()}
    return NamedGraph(img.ports, frozenset(names.values()), frozenset(edges), vlabels, elabels)


def local_images(f: LocalRule, x: CayleyGraph, workers: Optional[int] = None) -> list:
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda v: f.resolved_image(x, v), range(x.n)))
    return [f.resolved_image(x, v) for v in range(x.n)]


def apply_step(f: LocalRule, x: CayleyGraph, workers: Optional[int] = None) -> CayleyGraph:
    """One synchronous application of ``f`` to every vertex of ``x``."""
    if x.ports != f.ports:
        raise PortConflict(f"graph has {x.ports} ports, rule expects {f.ports}")
    images = local_images(f, x, workers)
    # a rule may hand several vertices the very same image object
    merged, _ = merge(list({id(g): g for g in images}.values()))
    origin = (0, 0)
    for name in merged.vertices:
        if origin in name:
            return canonicalize(merged, name)
    raise InconsistentUnion("no image vertex descends from the pointer")


def run(f: LocalRule, x: CayleyGraph, t: int) -> list:
    traj = [x]
    for _ in range(t):
        traj.append(apply_step(f, traj[-1]))
    return traj


# ---------------------------------------------------------------------------
# Validation


@dataclass
class ConditionResult:
    passed: bool = True
    checked: int = 0
    witness: Optional[str] = None

    def fail(self, witness: str):
        if self.passed:
            self.passed = False
            self.witness = witness


@dataclass
class ValidationReport:
    rule: str
    mode: str
    conditions: dict = field(default_factory=lambda: {i: ConditionResult() for i in (1, 2, 3, 4)})

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.conditions.values())

    def lines(self) -> list:
        titles = {1: "names disjoint, origin present", 2: "image size bound",
                  3: "non-trivial consistency of neighbours", 4: "consistency at distance"}
        out = []
        for i, c in self.conditions.items():
            state = "pass" if c.passed else "FAIL"
            line = f"condition {i} ({titles[i]}): {state} [{c.checked} checks]"
            if c.witness:
                line += f" witness: {c.witness}"
            out.append(line)
        return out


def _check_image(f: LocalRule, disk: CayleyGraph, img: NamedGraph, report: ValidationReport,
                 where: str):
    c1 = report.conditions[1]
    c2 = report.conditions[2]
    c1.checked += 1
    c2.checked += 1
    seen = set()
    has_origin = False
    for name in img.vertices:
        if not isinstance(name, frozenset) or not name:
            c1.fail(f"{where}: vertex name {name!r} is not a non-empty atom set")
            continue
        for a in name:
            path, z = a
            if z not in f.suffixes:
                c1.fail(f"{where}: suffix {z!r} outside 0..{f.bound}")
            try:
                disk.walk(0, path)
            except NoSuchVertex:
                c1.fail(f"{where}: atom path {path!r} is not in the disk")
            if a in seen:
                c1.fail(f"{where}: atom {a!r} names two vertices")
            seen.add(a)
            has_origin |= a == ORIGIN_ATOM
    if not has_origin:
        c1.fail(f"{where}: no vertex contains the origin atom")
    try:
        img.adjacency()
    except PortConflict as exc:
        c1.fail(f"{where}: {exc}")
    if len(img.vertices) > f.bound:
        c2.fail(f"{where}: {len(img.vertices)} vertices exceed bound {f.bound}")


def _resolve_via(img: NamedGraph, sub: CayleyGraph, host_of: Sequence[int]) -> NamedGraph:
    cache = {}

    def res(name):
        out = []
        for path, z in name:
            w = cache.get(path)
            if w is None:
                w = cache[path] = host_of[sub.walk(0, path)]
            out.append((w, z))
        return frozenset(out)

    names = {name: res(name) for name in img.vertices}
    edges = set()
    elabels = {}
    for e in img.edges:
        (a, p), (b, q) = tuple(e)
        ne = edge(names[a], p, names[b], q)
        edges.add(ne)
        if e in img.elabels:
            elabels[ne] = img.elabels[e]
    return NamedGraph(img.ports, frozenset(names.values()), frozenset(edges),
                      {names[k]: lab for k, lab in img.vlabels.items()}, elabels)


def _pair_check(f, shape, u, r, report, cond, cache, seen):
    """Check f(X^r) against u.f(X_u^r) for every labelling of the two sub-disks."""
    sub0, map0 = shape.disk_with_map(0, r)
    subu, mapu = shape.disk_with_map(u, r)
    relabel = {}
    for w in itertools.chain(map0, mapu):
        relabel.setdefault(w, len(relabel))
    key = (sub0.nbrs, subu.nbrs, tuple(relabel[w] for w in map0),
           tuple(relabel[w] for w in mapu))
    if key in seen:
        return
    seen.add(key)
    v0, e0 = labelled_slots(sub0, r)
    vu, eu = labelled_slots(subu, r)
    vvars = sorted({map0[v] for v in v0} | {mapu[v] for v in vu})
    evars = sorted({_host_edge(sub0, map0, a) for a in e0} | {_host_edge(subu, mapu, a) for a in eu})
    vchoices = [f.vlabels] * len(vvars) if f.vlabels else []
    echoices = [f.elabels] * len(evars) if f.elabels else []
    for vs in itertools.product(*vchoices):
        vassign = dict(zip(vvars, vs))
        for es in itertools.product(*echoices):
            eassign = dict(zip(evars, es))
            d0 = _labelled(sub0, map0, v0, e0, vassign, eassign)
            du = _labelled(subu, mapu, vu, eu, vassign, eassign)
            try:
                i0 = _cached_image(f, d0, cache)
                iu = _cached_image(f, du, cache)
            except MissingDiskEntry:
                continue
            try:
                g = _resolve_via(i0, d0, map0)
                h = _resolve_via(iu, du, mapu)
            except NoSuchVertex:
                continue  # reported under condition 1
            res = report.conditions[cond]
            res.checked += 1
            try:
                _, shared = merge([g, h])
            except InconsistentUnion as exc:
                res.fail(f"disk {shape!r}, u={shape.paths[u]}: {exc}")
                continue
            if cond == 3 and not shared:
                res.fail(f"disk {shape!r}, u={shape.paths[u]}: images only trivially consistent")


def _host_edge(sub, host_of, a):
    v, p = a
    w, q = sub.nbrs[v][p]
    return min((host_of[v], p), (host_of[w], q))


def _labelled(sub, host_of, verts, edges, vassign, eassign) -> CayleyGraph:
    labs = [None] * sub.n
    for v in verts:
        labs[v] = vassign.get(host_of[v])
    el = tuple((a, eassign[_host_edge(sub, host_of, a)]) for a in edges) if eassign else ()
    return CayleyGraph(sub.ports, sub.nbrs, tuple(labs), el)


def _cached_image(f, disk, cache):
    if disk not in cache:
        try:
            cache[disk] = f.image(disk)
        except MissingDiskEntry as exc:
            cache[disk] = exc
    out = cache[disk]
    if isinstance(out, MissingDiskEntry):
        raise out
    return out


def validate_rule(f: LocalRule, budget: int = DEFAULT_BUDGET,
                  samples: Optional[Iterable[CayleyGraph]] = None) -> ValidationReport:
    """Check the four local-rule conditions.

    By default every disk of the rule's signature and graph class is
    enumerated (radius ``r + 1`` for neighbour consistency, ``3r + 2`` for
    consistency at distance).  With ``samples`` the checks run on the disks
    that occur in the given graphs instead, which is the only option for
    procedural rules over large signatures.
    """
    if samples is not None:
        return _validate_observed(f, samples)
    report = ValidationReport(f.name, "exhaustive")
    r = f.radius
    if f.table is not None:
        for disk, img in f.table.items():
            _check_image(f, disk, img, report, f"entry {disk!r}")
    else:
        for disk in enumerate_disks(f.ports, f.vlabels, f.elabels, r, f.graph_class, budget):
            try:
                _check_image(f, disk, f.image(disk), report, f"entry {disk!r}")
            except MissingDiskEntry:
                pass
    cache: dict = {}
    for cond, big, reach in ((3, r + 1, 1), (4, 3 * r + 2, 2 * r + 2)):
        seen: set = set()
        for shape in enumerate_shapes(f.ports, big, f.graph_class, budget=budget):
            dist = shape.distances(0)
            for u in range(shape.n):
                if dist[u] <= reach:
                    _pair_check(f, shape, u, r, report, cond, cache, seen)
    return report


def _validate_observed(f: LocalRule, samples) -> ValidationReport:
    report = ValidationReport(f.name, "observed")
    r = f.radius
    for x in samples:
        images = []
        for v in range(x.n):
            disk = x.disk_at(v, r)
            img = f.local_image(x, v)
            _check_image(f, disk, img, report, f"vertex {x.paths[v]}")
            images.append(resolve(img, x, v))
        for v in range(x.n):
            dist = x.distances(v)
            for w in range(x.n):
                if w == v or dist[w] is None or dist[w] > 2 * r + 2:
                    continue
                cond = 3 if dist[w] <= 1 else 4
                res = report.conditions[cond]
                res.checked += 1
                try:
                    _, shared = merge([images[v], images[w]])
                except InconsistentUnion as exc:
                    res.fail(f"vertices {x.paths[v]} and {x.paths[w]}: {exc}")
                    continue
                if cond == 3 and not shared:
                    res.fail(f"vertices {x.paths[v]} and {x.paths[w]}: only trivially consistent")
    return report


# ---------------------------------------------------------------------------
# Builtin rules


def _star_image(disk: CayleyGraph, label=None, keep_label: bool = True) -> NamedGraph:
    """The origin, its neighbours and its incident edges, one successor each."""
    verts = {frozenset([atom(EPSILON)])}
    edges = []
    for p, e in enumerate(disk.nbrs[0]):
        if e is None:
            continue
        w, q = e
        n = frozenset([atom(disk.paths[w])])
        verts.add(n)
        edges.append((frozenset([atom(EPSILON)]), p, n, q, disk.elabel(0, p)))
    lab = disk.vlabels[0] if keep_label else label
    return image_graph(disk.ports, verts, edges, {frozenset([atom(EPSILON)]): lab})


def identity_rule(ports: int = 1, vlabels: Sequence = (), elabels: Sequence = (),
                  graph_class: str = "any", tabulate: bool = True) -> LocalRule:
    """Rule fixing every graph.

    Radius 0 suffices unless edges carry labels, which a radius-0 disk does not
    show (labels stop at the interior), so labelled edges need radius 1.
    """
    radius = 1 if elabels else 0
    f = LocalRule(ports, tuple(vlabels), tuple(elabels), radius, ports + 1, fn=_star_image,
                  graph_class=graph_class, name="identity")
    return materialize(f) if tabulate else f


def turtle_rule() -> LocalRule:
    """Switches between the two connected graphs over a single port."""
    alone, paired = enumerate_disks(1, r=0)
    e = atom(EPSILON)
    table = {
        alone: image_graph(1, [[e], [atom(EPSILON, 1)]], [([e], 0, [atom(EPSILON, 1)], 0)]),
        paired: image_graph(1, [[e, atom(paired.paths[1])]]),
    }
    return LocalRule(1, radius=0, bound=2, table=table, name="turtle")


def labelled_turtle_rule(labels: Sequence = ("0", "1")) -> LocalRule:
    """Turtle that keeps vertex labels; a merged pair takes the larger label."""
    labels = tuple(labels)
    table = {}
    for d in enumerate_disks(1, labels, (), 1):
        e = atom(EPSILON)
        if d.n == 1:
            twin = atom(EPSILON, 1)
            table[d] = image_graph(1, [[e], [twin]], [([e], 0, [twin], 0)],
                                   {frozenset([e]): d.vlabels[0], frozenset([twin]): d.vlabels[0]})
        else:
            name = [e, atom(d.paths[1])]
            lab = max(d.vlabels[0], d.vlabels[1], key=labels.index)
            table[d] = image_graph(1, [name], (), {frozenset(name): lab})
    return LocalRule(1, labels, (), 1, 2, table=table, name="labelled_turtle")


def _inflate(disk: CayleyGraph) -> NamedGraph:
    first, second = frozenset([atom(EPSILON, 0)]), frozenset([atom(EPSILON, 1)])
    verts = {first, second}
    edges = {(first, 1, second, 0)}
    for p, e in enumerate(disk.nbrs[0]):
        if e is None:
            continue
        w, q = e
        mine = frozenset([atom(EPSILON, p)])
        theirs = frozenset([atom(disk.paths[w], q)])
        verts.add(theirs)
        edges.add((mine, p, theirs, q))
    return image_graph(2, verts, edges)


def inflating_line_rule(simple: bool = False) -> LocalRule:
    """Replace each vertex of a degree-2 graph by two, doubling lines and cycles.

    The default table covers every radius-0 disk over two ports, including the
    self-loop and double-edge disks of the one- and two-vertex cycles.
    ``simple=True`` restricts it to the nine disks of simple graphs.
    """
    cls = "simple" if simple else "any"
    table = {d: _inflate(d) for d in enumerate_disks(2, r=0, graph_class=cls)}
    return LocalRule(2, radius=0, bound=4, table=table, graph_class=cls, name="inflating_line")


BUILTINS = ("identity", "turtle", "inflating_line", "inflating_line_simple", "labelled_turtle")


def builtin(name: str, ports: int = 1, vlabels: Sequence = (), elabels: Sequence = ()) -> LocalRule:
    if name == "identity":
        return identity_rule(ports, vlabels, elabels)
    if name == "turtle":
        return turtle_rule()
    if name == "inflating_line":
        return inflating_line_rule()
    if name == "inflating_line_simple":
        return inflating_line_rule(simple=True)
    if name == "labelled_turtle":
        return labelled_turtle_rule()
    raise UnknownBuiltin(f"unknown builtin rule {name!r}; choose from {', '.join(BUILTINS)}")
