"""A construction machine living inside the model.

The machine is one vertex ``M`` of degree 7 wired to

* the input tape holding the tokens of a graph string (port ``IN``),
* the rule tape holding the lines of a rule string (``F_READ``, ``F_TOP``),
* the construction site (``CURRENT``: last added ring, ``CURSOR``: walker),
* a stack of tree edges (``STACK_START``: top, ``STACK_READ``: reader).

Tapes and the stack are lines (port 0 towards the head end, port 1 onwards);
heads attach on ports 2 and 3 of a cell.  Site vertices are ring-encoded
(ports 0-2), VERTEX vertices hang their rule payload on port 3, and ports 4/5
receive ``CURRENT``/``CURSOR``.

Every step ``M`` computes a patch of its radius-``rho`` disk, ``rho = d + 3``.
Vertices within ``rho + 1`` of ``M`` see that disk whole (the rule radius is
``2 rho + 2``) and all output the patched region, so their images agree by
construction; every other vertex outputs its identity star.  Stack pops merge
the popped entry into ``M``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .encodings import BLANK, PORT, VERTEX, ring_decode, rule_decode, tokenize
from .errors import CGDError, NotDone, ParseError
from .graph import CayleyGraph, NamedGraph, canonicalize, edge, merge
from .rules import LocalRule, _star_image, apply_step, resolve

IN, F_READ, F_TOP, CURRENT, CURSOR, STACK_START, STACK_READ = range(7)
MACHINE_PORTS = 7
PREV, NEXT, NEIGHBOR, PAYLOAD, AT_CURRENT, AT_CURSOR = range(6)
HEAD, HEAD2 = 2, 3
END = "⊣"
BOTTOM = "⊥"
MACHINE = "M"


# ---------------------------------------------------------------------------
# Tapes


def tape_tokens(s: str, port_names=None, ports: Optional[int] = None) -> list:
    """Tape symbols of a graph string: ``$``, ``;``, ``|``, ``("lab", σ)``,
    ``("pair", a, b, label)``.  Only syntax is checked here; semantic faults
    are left to the machine."""
    if port_names is None:
        ports = ports if ports is not None else _infer_ports(s)
        port_names = [str(i) for i in range(ports)]
    out = []
    state = "start"
    toks = tokenize(s, port_names)
    for i, (pos, kind, val) in enumerate(toks):
        expect = {"start": ("$",), "label": ("label",), "back": ("pair", ";"),
                  "path": ("pair", "$")}[state]
        if kind not in expect:
            raise ParseError(pos, " or ".join(repr(e) for e in expect), s)
        if kind == "$":
            if state == "path" and toks[i - 1][1] != "pair":
                raise ParseError(pos, "a port pair", s)
            out.append("$")
            state = "label"
        elif kind == "label":
            out.append(("lab", None if val == BLANK else val))
            state = "back"
        elif kind == ";":
            out.append(";")
            state = "path"
        else:
            a, b, lab, bars = val
            out.append(("pair", a, b, lab))
            out.extend(["|"] * bars)
    if state != "path" or (toks and toks[-1][1] != ";"):
        raise ParseError(len(s), "';' closing the last vertex", s)
    return out


def _infer_ports(s: str) -> int:
    import re

    found = [int(t) for pair in re.findall(r"\((\d+),(\d+)", s) for t in pair]
    return max(found) + 1 if found else 0


def show_token(tok) -> str:
    if isinstance(tok, tuple):
        if tok[0] == "lab":
            return BLANK if tok[1] is None else str(tok[1])
        _, a, b, lab = tok
        return f"({a},{b})" if lab is None else f"({a},{b}:{lab})"
    return str(tok)


@dataclass
class MachineConfig:
    graph: CayleyGraph
    ports: int
    tape_length: int
    rule_lines: int


def assemble(xs: str, fs: str, ports: Optional[int] = None, port_names=None) -> MachineConfig:
    """Machine vertex wired to the token tape of ``xs`` and the line tape of ``fs``."""
    if port_names is not None:
        ports = len(port_names)
    elif ports is None:
        ports = _infer_ports(xs)
    tokens = tape_tokens(xs, port_names, ports)
    rule_decode(fs, validate=False)
    lines = [ln for ln in fs.splitlines() if ln.strip()]
    vertices = [MACHINE]
    labels = {MACHINE: (MACHINE, ("start",))}
    edges = [(MACHINE, IN, ("in", 0), HEAD)]
    for k, tok in enumerate(tokens + [END]):
        vertices.append(("in", k))
        labels[("in", k)] = ("in", tok)
        if k:
            edges.append((("in", k - 1), NEXT, ("in", k), PREV))
    edges += [(MACHINE, F_READ, ("f", 0), HEAD), (MACHINE, F_TOP, ("f", 0), HEAD2)]
    for k, line in enumerate(lines):
        vertices.append(("f", k))
        labels[("f", k)] = ("f", line)
        if k:
            edges.append((("f", k - 1), NEXT, ("f", k), PREV))
    vertices.append(("stk", 0))
    labels[("stk", 0)] = ("stk", BOTTOM)
    edges += [(MACHINE, STACK_START, ("stk", 0), HEAD), (MACHINE, STACK_READ, ("stk", 0), HEAD2)]
    g = NamedGraph.build(MACHINE_PORTS, vertices, edges, labels)
    return MachineConfig(canonicalize(g, MACHINE), ports, len(tokens), len(lines))


# ---------------------------------------------------------------------------
# The patch computed by M


class _Patch:
    """Changes to M's disk, on disk indices; new vertices are ``("new", z)``."""

    def __init__(self, disk: CayleyGraph, d: int):
        self.disk = disk
        self.d = d
        self.labels = {}
        self.removed = set()
        self.added = []
        self.new = {}
        self.merged = []

    # reading
    def nb(self, v, p):
        if isinstance(v, tuple):
            return self._new_nb(v, p)
        e = self.disk.nbrs[v][p]
        return None if e is None else e

    def _new_nb(self, v, p):
        for (a, pa), (b, pb) in self.added:
            if (a, pa) == (v, p):
                return (b, pb)
            if (b, pb) == (v, p):
                return (a, pa)
        return None

    def label(self, v):
        if v in self.labels:
            return self.labels[v]
        if isinstance(v, tuple):
            return self.new[v]
        return self.disk.vlabels[v]

    def head(self, port):
        e = self.nb(0, port)
        return None if e is None else e[0]

    def step(self, v, p):
        e = self.nb(v, p)
        if e is None:
            raise CGDError("machine walked off its disk")
        return e[0]

    def port_vertex(self, vertex, i):
        """PORT_i of the ring whose VERTEX vertex is ``vertex``."""
        d = self.d
        if i + 1 <= d - i:
            v = vertex
            for _ in range(i + 1):
                v = self.step(v, NEXT)
        else:
            v = vertex
            for _ in range(d - i):
                v = self.step(v, PREV)
        return v

    def vertex_of(self, port_v, i):
        d = self.d
        v = port_v
        if d - i <= i + 1:
            for _ in range(d - i):
                v = self.step(v, NEXT)
        else:
            for _ in range(i + 1):
                v = self.step(v, PREV)
        return v

    # writing
    def cut(self, a, pa):
        e = self.nb(a, pa)
        if e is None:
            return
        if isinstance(a, tuple) or isinstance(e[0], tuple):
            self.added = [x for x in self.added if (a, pa) not in x]
            return
        self.removed.add(frozenset([(a, pa), e]))

    def link(self, a, pa, b, pb):
        self.added.append(((a, pa), (b, pb)))

    def move(self, port, target, target_port):
        self.cut(0, port)
        self.link(0, port, target, target_port)

    def make(self, z, label):
        v = ("new", z)
        self.new[v] = label
        return v


class MachineRule(LocalRule):
    """The machine's local rule for graphs over ``d`` ports."""

    def __init__(self, d: int):
        self.d = d
        self.rho = d + 3
        super().__init__(MACHINE_PORTS, (), (), 2 * self.rho + 2, MACHINE_PORTS ** (self.rho + 3),
                         fn=self._image, name=f"machine(d={d})")
        self._cache = None

    # -- the patch -----------------------------------------------------
    def patch(self, disk: CayleyGraph) -> _Patch:
        """Patch of M's radius-rho disk (M at index 0)."""
        P = _Patch(disk, self.d)
        kind, state = P.label(0)
        assert kind == MACHINE
        mode = state[0]
        if mode in ("done", "fault"):
            return P
        head = P.head(IN)
        tok = P.label(head)[1]
        nxt = P.nb(head, NEXT)
        ahead = P.label(nxt[0])[1] if nxt is not None else None

        def advance():
            P.move(IN, P.step(head, NEXT), HEAD)

        def fault(reason):
            P.labels[0] = (MACHINE, ("fault", reason))

        def set_state(*s):
            P.labels[0] = (MACHINE, s)

        current = P.head(CURRENT)
        if mode == "start":
            if tok != "$":
                return fault("expected '$'") or P
            root = self._new_ring(P)
            P.link(0, CURRENT, root, AT_CURRENT)
            P.link(0, CURSOR, root, AT_CURSOR)
            advance()
            set_state("copy")
        elif mode == "copy":
            self._copy(P, current)
        elif mode == "label":
            _, sigma = tok
            P.labels[current] = VERTEX if sigma is None else f"{VERTEX}/{sigma}"
            advance()
            set_state("back")
        elif mode == "back":
            if tok == ";":
                advance()
                set_state("fwd")
            elif isinstance(tok, tuple) and tok[0] == "pair":
                _, a, b, lab = tok
                if ahead == "|":
                    advance()
                    set_state("bars", a, b, lab)
                else:
                    if not self._join(P, current, a, current, b, lab):
                        return fault("port used twice") or P
                    advance()
            else:
                fault(f"unexpected {show_token(tok)}")
        elif mode == "bars":
            _, a, b, lab = state
            reader = P.head(STACK_READ)
            entry = P.label(reader)[1]
            if entry == BOTTOM:
                return fault("backtrack past the root") or P
            s, t = entry
            cursor = P.head(CURSOR)
            parent = P.vertex_of(P.step(P.port_vertex(cursor, t), NEIGHBOR), s)
            P.move(CURSOR, parent, AT_CURSOR)
            P.move(STACK_READ, P.step(reader, NEXT), HEAD2)
            advance()
            if ahead != "|":
                set_state("link", a, b, lab)
        elif mode == "link":
            _, a, b, lab = state
            cursor = P.head(CURSOR)
            if not self._join(P, current, a, cursor, b, lab):
                return fault("port used twice") or P
            P.move(CURSOR, current, AT_CURSOR)
            P.move(STACK_READ, P.head(STACK_START), HEAD2)
            set_state("back")
        elif mode == "fwd":
            if tok == END:
                set_state("done")
            elif tok == "$":
                advance()
                set_state("copy")
            elif isinstance(tok, tuple) and tok[0] == "pair":
                _, a, b, lab = tok
                if ahead == "$":
                    if not self._create(P, current, a, b, lab):
                        return fault("port used twice") or P
                elif not self._climb(P, current, a, b):
                    return P
                advance()
            else:
                fault(f"unexpected {show_token(tok)}")
        return P

    def _new_ring(self, P: _Patch):
        d = self.d
        ring = [P.make(z + 1, PORT) for z in range(d)] + [P.make(d + 1, VERTEX)]
        for i in range(d + 1):
            P.link(ring[i], NEXT, ring[(i + 1) % (d + 1)], PREV)
        return ring[d]

    def _join(self, P, u, a, v, b, lab) -> bool:
        if a >= self.d or b >= self.d:
            return False
        pu, pv = P.port_vertex(u, a), P.port_vertex(v, b)
        if (pu, a) == (pv, b) or P.nb(pu, NEIGHBOR) is not None or P.nb(pv, NEIGHBOR) is not None:
            return False
        P.link(pu, NEIGHBOR, pv, NEIGHBOR)
        if lab is not None:
            P.labels[("edge", pu, pv)] = lab
        return True

    def _create(self, P, current, a, b, lab) -> bool:
        if a >= self.d or b >= self.d:
            return False
        pu = P.port_vertex(current, a)
        if P.nb(pu, NEIGHBOR) is not None:
            return False
        vertex = self._new_ring(P)
        pv = P.port_vertex(vertex, b)
        P.link(pu, NEIGHBOR, pv, NEIGHBOR)
        if lab is not None:
            P.labels[("edge", pu, pv)] = lab
        P.move(CURRENT, vertex, AT_CURRENT)
        P.move(CURSOR, vertex, AT_CURSOR)
        top = P.head(STACK_START)
        entry = P.make(self.d + 2, ("stk", (a, b)))
        P.cut(0, STACK_START)
        P.cut(0, STACK_READ)
        P.link(0, STACK_START, entry, HEAD)
        P.link(0, STACK_READ, entry, HEAD2)
        P.link(entry, NEXT, top, PREV)
        return True

    def _climb(self, P, current, a, b) -> bool:
        top = P.head(STACK_START)
        entry = P.label(top)[1]
        if entry == BOTTOM:
            P.labels[0] = (MACHINE, ("fault", "backtrack past the root"))
            return False
        s, t = entry
        if (a, b) != (t, s):
            P.labels[0] = (MACHINE, ("fault", f"({a},{b}) is not the edge to the parent"))
            return False
        parent = P.vertex_of(P.step(P.port_vertex(current, t), NEIGHBOR), s)
        P.move(CURRENT, parent, AT_CURRENT)
        P.move(CURSOR, parent, AT_CURSOR)
        below = P.step(top, NEXT)
        P.cut(0, STACK_START)
        P.cut(0, STACK_READ)
        P.cut(top, NEXT)
        P.link(0, STACK_START, below, HEAD)
        P.link(0, STACK_READ, below, HEAD2)
        P.merged.append(top)
        return True

    def _copy(self, P, current):
        cursor = P.head(CURSOR)
        reader = P.head(F_READ)
        line = P.label(reader)[1]
        cell = P.make(1, ("pay", line))
        P.link(cursor, PAYLOAD if cursor == current else NEXT, cell, PREV)
        nxt = P.nb(reader, NEXT)
        if nxt is None:
            P.move(F_READ, P.head(F_TOP), HEAD)
            P.move(CURSOR, current, AT_CURSOR)
            P.labels[0] = (MACHINE, ("label",))
        else:
            P.move(F_READ, nxt[0], HEAD)
            P.move(CURSOR, cell, AT_CURSOR)

    # -- images ----------------------------------------------------------
    def region(self, P: _Patch, atom_of: Callable, machine_atom) -> NamedGraph:
        """The patched disk with old vertex ``i`` named ``atom_of(i)``."""
        disk = P.disk
        parent = {}

        def find(i):
            while parent.get(i, i) != i:
                i = parent[i]
            return i

        for v in P.merged:
            parent[v] = 0
        names = {}
        for i in range(disk.n):
            names.setdefault(find(i), set()).add(atom_of(i))
        for z in P.new:
            names[z] = {(machine_atom[0], z[1])}
        names = {k: frozenset(v) for k, v in names.items()}

        def name(v):
            return names[v] if isinstance(v, tuple) else names[find(v)]

        edges = set()
        elabels = {}
        for (v, p), (w, q) in disk.edges():
            e = frozenset([(v, p), (w, q)])
            if e in P.removed:
                continue
            ne = edge(name(v), p, name(w), q)
            edges.add(ne)
            lab = disk.elabel(v, p)
            if lab is not None:
                elabels[ne] = lab
        for (v, p), (w, q) in P.added:
            ne = edge(name(v), p, name(w), q)
            edges.add(ne)
            lab = P.labels.get(("edge", v, w))
            if lab is not None:
                elabels[ne] = lab
        dist = disk.distances(0)
        vlabels = {}
        for i in range(disk.n):
            if dist[i] <= self.rho and find(i) == i:
                vlabels[names[i]] = P.label(i)
        for z, lab in P.new.items():
            vlabels[names[z]] = P.labels.get(z, lab)
        return NamedGraph(MACHINE_PORTS, frozenset(names.values()), frozenset(edges),
                          {k: v for k, v in vlabels.items() if v is not None}, elabels)

    @staticmethod
    def _machine_in(x: CayleyGraph) -> Optional[int]:
        for v, lab in enumerate(x.vlabels):
            if isinstance(lab, tuple) and lab and lab[0] == MACHINE:
                return v
        return None

    def _image(self, disk: CayleyGraph) -> NamedGraph:
        m = self._machine_in(disk)
        dist = disk.distances(m) if m is not None else None
        if m is None or dist[0] > self.rho + 1:
            return _star_image(disk)
        sub, host = disk.disk_with_map(m, self.rho)
        P = self.patch(sub)
        to_m = disk.paths[m]
        img = self.region(P, lambda i: (disk.paths[host[i]], 0), (to_m, 0))
        if dist[0] <= self.rho:
            return img
        return merge([img, _star_image(disk)])[0]

    def local_image(self, x: CayleyGraph, v: int) -> NamedGraph:
        return self.image(x.disk_at(v, self.radius))

    def resolved_image(self, x: CayleyGraph, v: int) -> NamedGraph:
        """Host-resolved image at ``v``; skips the disk computation."""
        if self._cache is None or self._cache[0] is not x:
            m = self._machine_in(x)
            if m is None:
                self._cache = (x, None, None, None)
            else:
                sub, host = x.disk_with_map(m, self.rho)
                P = self.patch(sub)
                reg = self.region(P, lambda i: (host[i], 0), (m, 0))
                self._cache = (x, x.distances(m), reg, None)
        _, dist, reg, _ = self._cache
        if dist is None or dist[v] is None or dist[v] > self.rho + 1:
            return host_star(x, v)
        if dist[v] <= self.rho:
            return reg
        return merge([reg, host_star(x, v)])[0]


def host_star(x: CayleyGraph, v: int) -> NamedGraph:
    """Identity star at ``v`` already resolved to host vertices."""
    me = frozenset([(v, 0)])
    verts = {me}
    edges = set()
    elabels = {}
    for p, e in enumerate(x.nbrs[v]):
        if e is None:
            continue
        w, q = e
        other = frozenset([(w, 0)])
        verts.add(other)
        ne = edge(me, p, other, q)
        edges.add(ne)
        lab = x.elabel(v, p)
        if lab is not None:
            elabels[ne] = lab
    lab = x.vlabels[v]
    return NamedGraph(x.ports, frozenset(verts), frozenset(edges),
                      {} if lab is None else {me: lab}, elabels)


def machine_rule(ports: int = 3) -> MachineRule:
    return MachineRule(ports)


# ---------------------------------------------------------------------------
# Running and extracting


@dataclass
class MachineOutcome:
    status: str
    reason: Optional[str]
    steps: int
    graph: CayleyGraph
    ports: int


def machine_state(x: CayleyGraph) -> tuple:
    m = MachineRule._machine_in(x)
    return x.vlabels[m][1]


def head_token(x: CayleyGraph):
    m = MachineRule._machine_in(x)
    cell = x.nbrs[m][IN][0]
    return x.vlabels[cell][1]


def run_machine(c: MachineConfig, max_steps: int = 100000, trace: Optional[Callable] = None,
                rule: Optional[MachineRule] = None) -> MachineOutcome:
    rule = rule or machine_rule(c.ports)
    x = c.graph
    for t in range(max_steps + 1):
        state = machine_state(x)
        if trace is not None:
            trace(f"t={t} head={show_token(head_token(x))} mode={state[0]}")
        if state[0] == "done":
            return MachineOutcome("Done", None, t, x, c.ports)
        if state[0] == "fault":
            return MachineOutcome("Fault", state[1], t, x, c.ports)
        if t == max_steps:
            break
        x = apply_step(rule, x)
    return MachineOutcome("Running", None, max_steps, x, c.ports)


def _root_vertex(x: CayleyGraph, d: int) -> int:
    """Climb the stored tree edges from CURRENT back to the root ring."""
    m = MachineRule._machine_in(x)
    P = _Patch(x, d)
    v = x.nbrs[m][CURRENT][0]
    entry = x.nbrs[m][STACK_START][0]
    while x.vlabels[entry][1] != BOTTOM:
        s, t = x.vlabels[entry][1]
        v = P.vertex_of(P.step(P.port_vertex(v, t), NEIGHBOR), s)
        entry = x.nbrs[entry][NEXT][0]
    return v


def extract(o: MachineOutcome, strip: bool = False) -> CayleyGraph:
    """The construction site pointed at the root ring's VERTEX vertex.

    With payloads it is a 7-port graph (payload lines hang on port 3 of every
    VERTEX vertex).  ``strip=True`` drops the payloads and ring-decodes.
    """
    if o.status != "Done":
        raise NotDone(f"machine status is {o.status}")
    site = site_graph(o.graph, o.ports, payloads=not strip)
    if strip:
        return ring_decode(site, o.ports)
    return site


def site_graph(x: CayleyGraph, d: int, payloads: bool = True) -> CayleyGraph:
    root = _root_vertex(x, d)
    allowed = (PREV, NEXT, NEIGHBOR, PAYLOAD) if payloads else (PREV, NEXT, NEIGHBOR)
    seen = {root}
    order = [root]
    edges = set()
    elabels = {}
    for v in order:
        lab = x.vlabels[v]
        is_payload = isinstance(lab, tuple) and lab[0] == "pay"
        for p in allowed:
            if is_payload and p not in (PREV, NEXT):
                continue
            e = x.nbrs[v][p]
            if e is None:
                continue
            w, q = e
            if q not in allowed:
                continue
            e2 = edge(v, p, w, q)
            edges.add(e2)
            lab2 = x.elabel(v, p)
            if lab2 is not None:
                elabels[e2] = lab2
            if w not in seen:
                seen.add(w)
                order.append(w)
    ports = MACHINE_PORTS if payloads else 3
    g = NamedGraph(ports, frozenset(order), frozenset(edges),
                   {v: x.vlabels[v] for v in order}, elabels)
    return canonicalize(g, root)


def payloads(site: CayleyGraph) -> list:
    """Rule text hanging from each VERTEX vertex of a site graph."""
    out = []
    for v, lab in enumerate(site.vlabels):
        if not (isinstance(lab, str) and lab.startswith(VERTEX)):
            continue
        lines = []
        e = site.nbrs[v][PAYLOAD]
        while e is not None:
            w = e[0]
            lines.append(site.vlabels[w][1])
            e = site.nbrs[w][NEXT]
        out.append("\n".join(lines) + "\n")
    return out
