"""Simulation maps: shrinking the radius to one and erasing labels.

Both reductions return a simulator rule together with the encoder ``E`` and
time dilation ``delta`` such that ``E(F(x)) == F'^delta(E(x))``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .errors import CGDError, MalformedEncoding, MissingDiskEntry
from .graph import EPSILON, CayleyGraph, NamedGraph, canonicalize, edge, with_ports
from .rules import LocalRule, _star_image, apply_step, atom, image_graph

STAR = "⋆"


@dataclass
class SimulationMap:
    encode: Callable[[CayleyGraph], CayleyGraph]
    delta: int
    source_ports: int
    target_ports: int
    name: str = ""

    def __call__(self, x: CayleyGraph) -> CayleyGraph:
        return self.encode(x)

    def then(self, outer: "SimulationMap") -> "SimulationMap":
        """``outer`` after ``self``; dilations multiply."""
        return SimulationMap(lambda x: outer.encode(self.encode(x)), self.delta * outer.delta,
                             self.source_ports, outer.target_ports,
                             f"{outer.name}∘{self.name}")


@dataclass
class ReductionResult:
    rule: LocalRule
    map: SimulationMap


def identity_map(ports: int) -> SimulationMap:
    return SimulationMap(lambda x: x, 1, ports, ports, "id")


# ---------------------------------------------------------------------------
# Radius one


def _word_index(d: int, max_len: int) -> dict:
    """Port offset of every path word of length 2..max_len, in shortlex order."""
    letters = [(a, b) for a in range(d) for b in range(d)]
    out = {}
    for k in range(2, max_len + 1):
        for w in itertools.product(letters, repeat=k):
            out[w] = len(out)
    return out


def _shortlex(w):
    return (len(w), w)


class _RadiusOne:
    """Procedural simulator for :func:`radius_one_reduction`."""

    def __init__(self, f: LocalRule, ell: int):
        self.f = f
        self.ell = ell
        self.big = 2 ** ell
        self.d = f.ports
        self.words = _word_index(self.d, self.big)
        self.word_of = {self.d + i: w for w, i in self.words.items()}

    def word(self, port: int, far: int):
        if port < self.d:
            return ((port, far),)
        return self.word_of[port]

    def __call__(self, disk: CayleyGraph) -> NamedGraph:
        label = disk.vlabels[0]
        if not isinstance(label, tuple) or len(label) != 2:
            raise MalformedEncoding(f"label {label!r} carries no counter")
        sigma, counter = label
        if counter < self.ell:
            return self._grow(disk, sigma, counter + 1)
        return self._apply(disk)

    def _grow(self, disk: CayleyGraph, sigma, counter: int) -> NamedGraph:
        img = _star_image(disk, keep_label=False, label=(sigma, counter))
        dist = disk.distances(0)
        best: dict = {}
        for v, e in enumerate(disk.nbrs[0]):
            if e is None:
                continue
            mid, back = e
            out_w = self.word(v, back)
            for p, e2 in enumerate(disk.nbrs[mid]):
                if e2 is None or dist[e2[0]] != 2:
                    continue
                w, q = e2
                there = out_w + self.word(p, q)
                home = self.word(q, p) + self.word(back, v)
                old = best.get(w)
                if old is None or _shortlex(there) < _shortlex(old[0]):
                    best[w] = (there, old[1] if old else home)
                if _shortlex(home) < _shortlex(best[w][1]):
                    best[w] = (best[w][0], home)
        centre = frozenset([atom(EPSILON)])
        verts = set(img.vertices)
        edges = set(img.edges)
        elabels = dict(img.elabels)
        for w, (there, home) in best.items():
            far = frozenset([atom(disk.paths[w])])
            verts.add(far)
            e = edge(centre, self.d + self.words[there], far, self.d + self.words[home])
            edges.add(e)
            elabels[e] = STAR
        return NamedGraph(img.ports, frozenset(verts), frozenset(edges), img.vlabels, elabels)

    def _apply(self, disk: CayleyGraph) -> NamedGraph:
        d = self.d
        nbrs = tuple(tuple(e if p < d and e is not None and e[1] < d else None
                           for p, e in enumerate(row[:d])) for row in disk.nbrs)
        labs = tuple(None if lab is None else lab[0] for lab in disk.vlabels)
        elabs = tuple(((v, p), lab) for (v, p), lab in disk.elabels if p < d)
        plain = CayleyGraph(d, nbrs, labs, elabs)
        sub, host = plain.disk_with_map(0, self.f.radius)
        img = self.f.image(sub)

        def lift(name):
            return frozenset((disk.paths[host[sub.index_of(path)]], z) for path, z in name)

        names = {n: lift(n) for n in img.vertices}
        edges = set()
        elabels = {}
        for e in img.edges:
            (a, p), (b, q) = tuple(e)
            ne = edge(names[a], p, names[b], q)
            edges.add(ne)
            if e in img.elabels:
                elabels[ne] = img.elabels[e]
        vlabels = {names[n]: (lab, 0) for n, lab in img.vlabels.items()}
        return NamedGraph(disk.ports, frozenset(names.values()), frozenset(edges), vlabels, elabels)


def _counter_labels(vlabels: Sequence, ell: int) -> tuple:
    return tuple((s, c) for s in (vlabels or (None,)) for c in range(ell + 1))


def radius_one_reduction(f: LocalRule) -> ReductionResult:
    """Simulate ``f`` by a radius-one rule that first grows ancillary edges.

    The radius is padded to ``2**ell``.  Labels gain a counter; while it is
    below ``ell`` every vertex links itself by a ``⋆`` edge to each vertex at
    distance two, so after ``ell`` steps the whole radius-``2**ell`` disk is
    adjacent.  The last step drops the ancillary edges, applies ``f`` and resets
    the counter.  Ancillary ports are indexed by the shortlex-least path word
    they stand for.
    """
    if f.radius < 2:
        return ReductionResult(f, identity_map(f.ports))
    ell = (f.radius - 1).bit_length()
    sim = _RadiusOne(f, ell)
    ports = f.ports + len(sim.words)
    rule = LocalRule(ports, _counter_labels(f.vlabels, ell), tuple(f.elabels) + (STAR,), 1,
                     max(f.bound, 1), fn=sim, name=f"radius_one({f.name})")

    def encode(x: CayleyGraph) -> CayleyGraph:
        wide = with_ports(x, ports)
        return CayleyGraph(ports, wide.nbrs, tuple((lab, 0) for lab in x.vlabels), wide.elabels)

    return ReductionResult(rule, SimulationMap(encode, ell + 1, f.ports, ports, "E_radius"))


# ---------------------------------------------------------------------------
# Label erasure


class _LabelFree:
    """Procedural simulator for :func:`label_free_reduction`."""

    def __init__(self, f: LocalRule):
        self.f = f
        self.d = f.ports
        self.ns = len(f.vlabels)
        self.ne = len(f.elabels)
        self.extra = self.ns + self.ne * self.d
        self.stride = f.bound + 1

    def vport(self, label) -> int:
        return self.d + self.f.vlabels.index(label)

    def eport(self, label, a: int) -> int:
        return self.d + self.ns + self.f.elabels.index(label) * self.d + a

    def is_dangling(self, g: CayleyGraph, v: int) -> bool:
        e = g.nbrs[v][0] if g.ports else None
        return e is not None and e[1] >= self.d

    def decode(self, g: CayleyGraph, radius: Optional[int]) -> tuple[CayleyGraph, list]:
        """Strip dangling vertices back into labels; returns the decoded graph
        and the encoded index of each decoded vertex."""
        d = self.d
        dist = g.distances(0)
        inner = [radius is None or (x is not None and x <= radius) for x in dist]
        real = [v for v in range(g.n) if not self.is_dangling(g, v)]
        pos = {v: i for i, v in enumerate(real)}
        nbrs = []
        labs = []
        elabs = {}
        for v in real:
            row = []
            for p in range(d):
                e = g.nbrs[v][p]
                if e is not None and (e[1] >= d or e[0] not in pos):
                    raise MalformedEncoding(f"port {p} of a vertex leads into a label port")
                row.append(None if e is None else (pos[e[0]], e[1]))
            nbrs.append(tuple(row))
            lab = None
            for k in range(self.ns):
                e = g.nbrs[v][d + k]
                if e is None:
                    continue
                self._audit_dangling(g, e[0])
                if lab is not None:
                    raise MalformedEncoding("vertex carries two label markers")
                lab = self.f.vlabels[k]
            labs.append(lab if inner[v] else None)
            for j in range(self.ne):
                for a in range(d):
                    e = g.nbrs[v][d + self.ns + j * d + a]
                    if e is None:
                        continue
                    self._audit_dangling(g, e[0])
                    if g.nbrs[v][a] is None:
                        raise MalformedEncoding(f"edge label marker on free port {a}")
                    key = (pos[v], a)
                    if key in elabs and elabs[key] != self.f.elabels[j]:
                        raise MalformedEncoding(f"two edge labels on port {a}")
                    elabs[key] = self.f.elabels[j]
        out_el = {}
        for (v, a), lab in elabs.items():
            w, b = nbrs[v][a]
            if not (inner[real[v]] and inner[real[w]]):
                continue
            other = elabs.get((w, b))
            if other is not None and other != lab:
                raise MalformedEncoding("edge ends carry different labels")
            out_el[min((v, a), (w, b))] = lab
        plain = CayleyGraph(d, tuple(nbrs), tuple(labs), tuple(sorted(out_el.items())))
        return plain, real

    def _audit_dangling(self, g: CayleyGraph, v: int):
        if any(e is not None for e in g.nbrs[v][1:]):
            raise MalformedEncoding("label marker vertex has further edges")

    def __call__(self, disk: CayleyGraph) -> NamedGraph:
        if self.is_dangling(disk, 0):
            host, back = disk.nbrs[0][0]
            return image_graph(disk.ports, [[atom(EPSILON), atom(((0, back),))]])
        plain, real = self.decode(disk, self.f.radius)
        sub, host = plain.disk_with_map(0, self.f.radius)
        img = self.f.image(sub)
        return self.encode_image(img, lambda path: disk.paths[real[host[sub.index_of(path)]]],
                                 disk.ports)

    def marker(self, name, k: int) -> frozenset:
        shift = self.stride * (1 + k)
        return frozenset((v, z + shift) for v, z in name)

    def encode_image(self, img: NamedGraph, path_of: Callable, ports: int) -> NamedGraph:
        d = self.d
        names = {n: frozenset((path_of(p), z) for p, z in n) for n in img.vertices}
        verts = set(names.values())
        edges = set()
        for n, lab in img.vlabels.items():
            k = self.vport(lab) - d
            m = self.marker(names[n], k)
            verts.add(m)
            edges.add(edge(names[n], d + k, m, 0))
        for e in img.edges:
            (a, p), (b, q) = tuple(e)
            edges.add(edge(names[a], p, names[b], q))
            lab = img.elabels.get(e)
            if lab is None:
                continue
            for n, port in ((a, p), (b, q)):
                k = self.eport(lab, port) - d
                m = self.marker(names[n], k)
                verts.add(m)
                edges.add(edge(names[n], d + k, m, 0))
        return NamedGraph(ports, frozenset(verts), frozenset(edges))


def label_free_reduction(f: LocalRule) -> ReductionResult:
    """Simulate ``f`` by an unlabelled rule over extra ports.

    A vertex label is a dangling vertex hung on the label's port; a label on
    the edge leaving port ``a`` is a dangling vertex on that label's ``a``-th
    port.  Dangling vertices attach by their own port 0, which is how they are
    told apart.  The simulator has radius ``r + 1`` so the markers of vertices
    at distance ``r`` are visible.
    """
    sim = _LabelFree(f)
    ports = f.ports + sim.extra
    bound = sim.stride * (1 + sim.extra) - 1
    rule = LocalRule(ports, (), (), f.radius + 1, bound, fn=sim, name=f"label_free({f.name})")

    def encode(x: CayleyGraph) -> CayleyGraph:
        return encode_labels(sim, x, ports)

    return ReductionResult(rule, SimulationMap(encode, 1, f.ports, ports, "E_labels"))


def encode_labels(sim: _LabelFree, x: CayleyGraph, ports: int) -> CayleyGraph:
    g = x.to_named(list(range(x.n)))
    verts = set(g.vertices)
    edges = set(g.edges)
    d = sim.d
    for v, lab in g.vlabels.items():
        k = sim.vport(lab)
        verts.add(("marker", v, k))
        edges.add(edge(v, k, ("marker", v, k), 0))
    for e, lab in g.elabels.items():
        (a, p), (b, q) = tuple(e)
        for v, port in ((a, p), (b, q)):
            k = sim.eport(lab, port)
            verts.add(("marker", v, k))
            edges.add(edge(v, k, ("marker", v, k), 0))
    if ports < d:
        raise CGDError("target has fewer ports than the source")
    return canonicalize(NamedGraph(ports, frozenset(verts), frozenset(edges)), 0)


def decode_labels(f: LocalRule, y: CayleyGraph) -> CayleyGraph:
    """Inverse of the label-free encoder; raises :class:`MalformedEncoding`."""
    sim = _LabelFree(f)
    if y.ports != f.ports + sim.extra:
        raise MalformedEncoding(f"expected {f.ports + sim.extra} ports, got {y.ports}")
    if sim.is_dangling(y, 0):
        raise MalformedEncoding("pointer sits on a label marker")
    plain, _ = sim.decode(y, None)
    return plain.shift_to(0)


def normal_form(f: LocalRule) -> ReductionResult:
    """Radius reduction followed by label erasure."""
    one = radius_one_reduction(f)
    free = label_free_reduction(one.rule)
    return ReductionResult(free.rule, one.map.then(free.map))


# ---------------------------------------------------------------------------
# Checking simulations


@dataclass
class SimulationVerdict:
    passed: bool
    checked: int
    counterexample: Optional[dict] = None

    def __bool__(self) -> bool:
        return self.passed

    def describe(self) -> str:
        if self.passed:
            return f"pass ({self.checked} checks)"
        c = self.counterexample
        return "fail: " + ", ".join(f"{k}={v}" for k, v in c.items())


def verify_simulation(f1: LocalRule, f2: LocalRule, m: SimulationMap, xs: Sequence[CayleyGraph],
                      T: int) -> SimulationVerdict:
    """Check ``E(F2^t x) == F1^(delta t)(E x)`` for every ``x`` and ``t <= T``.

    ``f1`` simulates ``f2`` through ``m``.  The encoder is first audited for
    injectivity on ``xs``.
    """
    if f1.ports != m.target_ports or f2.ports != m.source_ports:
        raise CGDError("rule signatures do not match the simulation map")
    seen = {}
    for x in xs:
        y = m.encode(x)
        if y in seen and seen[y] != x:
            return SimulationVerdict(False, 0, {"cause": "encoder not injective",
                                                "x": seen[y], "x2": x})
        seen[y] = x
    checked = 0
    for x in xs:
        src = x
        tgt = m.encode(x)
        for t in range(1, T + 1):
            try:
                src = apply_step(f2, src)
            except (CGDError, MissingDiskEntry) as exc:
                return SimulationVerdict(False, checked, {"cause": f"simulated step: {exc}",
                                                          "x": x, "t": t})
            try:
                for _ in range(m.delta):
                    tgt = apply_step(f1, tgt)
            except CGDError as exc:
                return SimulationVerdict(False, checked, {"cause": f"simulator step: {exc}",
                                                          "x": x, "t": t})
            checked += 1
            want = m.encode(src)
            if want != tgt:
                return SimulationVerdict(False, checked, {"cause": "trajectories differ", "x": x,
                                                          "t": t, "expected": want, "got": tgt})
    return SimulationVerdict(True, checked)


# ---------------------------------------------------------------------------
# A radius-two test rule


def rotate_rule(labels: Sequence = ("0", "1"), steps: int = 2) -> LocalRule:
    """On oriented degree-2 graphs, copy the label found ``steps`` hops along port 1.

    Vertices whose walk leaves the graph keep their own label.
    """
    walk = ((1, 0),) * steps

    def fn(disk: CayleyGraph) -> NamedGraph:
        try:
            lab = disk.vlabels[disk.walk(0, walk)]
        except CGDError:
            lab = disk.vlabels[0]
        return _star_image(disk, label=lab, keep_label=False)

    return LocalRule(2, tuple(labels), (), steps, 3, fn=fn, graph_class="oriented",
                     name=f"rotate{steps}")
