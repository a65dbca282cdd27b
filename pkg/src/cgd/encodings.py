"""Graph and rule serialisations.

* ring codec: every vertex of degree ``d`` becomes a ring of ``d`` PORT
  vertices and one VERTEX vertex over three ports (previous, next, neighbour);
* string codec: a depth-first word over ``$ ; |``, port pairs and labels;
* rule codec: a line per table entry, the output ring-encoded then written as
  a string, with per-vertex address tapes and inheritor marks.
"""

from __future__ import annotations

import math
import re
from typing import Optional, Sequence

from .errors import InvalidRule, MalformedRing, ParseError, SemanticError
from .graph import EPSILON, CayleyGraph, NamedGraph, canonicalize, edge, from_edges

PREV, NEXT, NEIGHBOR = 0, 1, 2
VERTEX, PORT = "VERTEX", "PORT"
BLANK = "·"
SPECIAL = "$;|()"


# ---------------------------------------------------------------------------
# Ring codec


def ring_label(label) -> str:
    return VERTEX if label is None else f"{VERTEX}/{label}"


def ring_encode(x: CayleyGraph) -> CayleyGraph:
    """Ring encoding; the pointer lands on the origin's VERTEX vertex."""
    d = x.ports
    size = d + 1

    def node(v, i):
        return v * size + i

    edges = []
    labels = []
    for v in range(x.n):
        for i in range(size):
            edges.append((node(v, i), NEXT, node(v, (i + 1) % size), PREV))
        labels.extend([PORT] * d + [ring_label(x.vlabels[v])])
    for (v, p), (w, q) in x.edges():
        edges.append((node(v, p), NEIGHBOR, node(w, q), NEIGHBOR, x.elabel(v, p)))
    return from_edges(3, x.n * size, edges, labels, pointer=node(0, d))


def ring_decode(y: CayleyGraph, ports: int) -> CayleyGraph:
    """Inverse of :func:`ring_encode`; raises :class:`MalformedRing`."""
    if y.ports != 3:
        raise MalformedRing(f"ring graphs have 3 ports, got {y.ports}")
    size = ports + 1
    owner = {}
    rings = []
    for v in range(y.n):
        lab = y.vlabels[v]
        if not isinstance(lab, str) or not (lab == VERTEX or lab.startswith(VERTEX + "/")):
            if lab != PORT:
                raise MalformedRing(f"vertex {y.paths[v]} has label {lab!r}")
            continue
        if y.nbrs[v][NEIGHBOR] is not None:
            raise MalformedRing(f"VERTEX vertex {y.paths[v]} has a neighbour edge")
        ring = []
        cur = v
        for step in range(size):
            e = y.nbrs[cur][NEXT]
            if e is None or e[1] != PREV:
                raise MalformedRing(f"ring through {y.paths[v]} is broken")
            cur = e[0]
            if step < ports:
                if y.vlabels[cur] != PORT:
                    raise MalformedRing(f"ring through {y.paths[v]} has the wrong length")
                ring.append(cur)
        if cur != v:
            raise MalformedRing(f"ring through {y.paths[v]} has the wrong length")
        for i, u in enumerate(ring + [v]):
            if u in owner:
                raise MalformedRing(f"vertex {y.paths[u]} lies on two rings")
            owner[u] = (len(rings), i)
        rings.append(v)
    for u in range(y.n):
        if u not in owner:
            raise MalformedRing(f"vertex {y.paths[u]} lies on no ring")
    vertices = []
    vlabels = {}
    for k, v in enumerate(rings):
        vertices.append(k)
        lab = y.vlabels[v]
        if lab != VERTEX:
            vlabels[k] = lab[len(VERTEX) + 1:]
    edges = set()
    elabels = {}
    for (u, p), (w, q) in y.edges():
        if p != NEIGHBOR and q != NEIGHBOR:
            continue
        if p != q:
            raise MalformedRing("neighbour port joined to a ring port")
        (a, i), (b, j) = owner[u], owner[w]
        e = edge(a, i, b, j)
        edges.add(e)
        lab = y.elabel(u, p)
        if lab is not None:
            elabels[e] = lab
    g = NamedGraph(ports, frozenset(vertices), frozenset(edges), vlabels, elabels)
    return canonicalize(g, owner[0][0])


# ---------------------------------------------------------------------------
# String codec


def _port_names(ports: int, names: Optional[Sequence[str]]) -> list:
    names = [str(i) for i in range(ports)] if names is None else list(names)
    if len(names) < ports:
        raise ValueError(f"{len(names)} port names for {ports} ports")
    return names


def _pair(names, a, b, lab=None, bars=0) -> str:
    inner = f"{names[a]},{names[b]}" if lab is None else f"{names[a]},{names[b]}:{lab}"
    return f"({inner})" + "|" * bars


def _label_text(lab) -> str:
    if lab is None:
        return BLANK
    text = str(lab)
    if not text or any(c in SPECIAL for c in text):
        raise ValueError(f"label {lab!r} cannot be written in a graph string")
    return text


def string_tokens(x: CayleyGraph, port_names: Optional[Sequence[str]] = None) -> list:
    """The encoding of ``x`` as a token list (see :func:`string_encode`)."""
    names = _port_names(x.ports, port_names)
    depth = {0: 0}
    up = {}  # child -> (own port, parent port)
    stack = [0]
    tokens = []

    def word(v):
        tokens.extend(["$", _label_text(x.vlabels[v])])
        for p, e in enumerate(x.nbrs[v]):
            if e is None:
                continue
            w, q = e
            if w == v:
                if p < q:
                    tokens.append(_pair(names, p, q, x.elabel(v, p)))
                continue
            if w not in depth or depth[w] >= depth[v]:
                continue
            if up.get(v) == (p, q):
                continue
            tokens.append(_pair(names, p, q, x.elabel(v, p), depth[v] - depth[w]))
        tokens.append(";")

    word(0)
    pending = []
    while stack:
        v = stack[-1]
        nxt = None
        for p, e in enumerate(x.nbrs[v]):
            if e is not None and e[0] not in depth:
                nxt = (p, e)
                break
        if nxt is None:
            stack.pop()
            if stack:
                pending.append(_pair(names, *up[v]))
            continue
        p, (w, q) = nxt
        tokens.extend(pending)
        pending = []
        tokens.append(_pair(names, p, q, x.elabel(v, p)))
        depth[w] = depth[v] + 1
        up[w] = (q, p)
        stack.append(w)
        word(w)
    return tokens


def string_encode(x: CayleyGraph, port_names: Optional[Sequence[str]] = None) -> str:
    """Depth-first word: per vertex ``$σ``, back edges with their climb, ``;``,
    then the port path to the next vertex.

    Children are visited in ascending own-port order; a back edge ``(i,j)`` is
    followed by one bar per level between the vertex and the ancestor it
    reaches, and loops carry no bar.  Unlabelled vertices are written ``·``
    and edge labels as ``(i,j:δ)``.
    """
    return "".join(string_tokens(x, port_names))


_PAIR = re.compile(r"\(([^(),:|$;]+),([^(),:|$;]+)(?::([^()|$;]+))?\)")


def tokenize(s: str, port_names: Sequence[str]) -> list:
    """Tokens as ``(position, kind, value)``; pairs carry ``(a, b, label, bars)``."""
    index = {n: i for i, n in enumerate(port_names)}
    out = []
    i = 0
    while i < len(s):
        c = s[i]
        if c in "$;":
            out.append((i, c, None))
            i += 1
        elif c == "(":
            m = _PAIR.match(s, i)
            if m is None:
                raise ParseError(i, "port pair '(i,j)'", s)
            a, b = m.group(1), m.group(2)
            for name, at in ((a, m.start(1)), (b, m.start(2))):
                if name not in index:
                    raise ParseError(at, f"a port name in {list(port_names)}", s)
            j = m.end()
            bars = 0
            while j < len(s) and s[j] == "|":
                bars += 1
                j += 1
            out.append((i, "pair", (index[a], index[b], m.group(3), bars)))
            i = j
        elif c == "|":
            raise ParseError(i, "port pair before '|'", s)
        elif c == ")":
            raise ParseError(i, "'$', ';', '(' or a label", s)
        elif c.isspace():
            raise ParseError(i, "no whitespace inside a graph string", s)
        else:
            j = i
            while j < len(s) and s[j] not in SPECIAL and not s[j].isspace():
                j += 1
            out.append((i, "label", s[i:j]))
            i = j
    return out


def string_decode(s: str, ports: Optional[int] = None,
                  port_names: Optional[Sequence[str]] = None,
                  labels: Optional[Sequence] = None) -> CayleyGraph:
    """Parse a graph string.

    ``ports`` defaults to the number of port names, or to one more than the
    largest port index seen.  ``labels`` optionally restricts vertex labels.
    """
    if port_names is None:
        if ports is None:
            found = [int(t) for pair in re.findall(r"\((\d+),(\d+)", s) for t in pair]
            ports = max(found) + 1 if found else 0
        port_names = _port_names(ports, None)
    elif ports is None:
        ports = len(port_names)
    toks = tokenize(s, port_names)
    end = len(s)
    nbrs = [[None] * ports]
    vlabels = []
    elabels = {}
    stack = [0]
    up = {}
    k = 0

    def peek():
        return toks[k] if k < len(toks) else (end, "end", None)

    def connect(u, a, w, b, lab, pos):
        if a >= ports or b >= ports:
            raise SemanticError(pos, "port outside the signature")
        if nbrs[u][a] is not None or nbrs[w][b] is not None or (u == w and a == b):
            raise SemanticError(pos, "port used twice")
        nbrs[u][a] = (w, b)
        nbrs[w][b] = (u, a)
        if lab is not None:
            elabels[min((u, a), (w, b))] = lab

    if peek()[1] != "$":
        raise ParseError(peek()[0], "'$'", s)
    while True:
        pos, kind, _ = peek()
        if kind != "$":
            raise ParseError(pos, "'$'", s)
        k += 1
        pos, kind, val = peek()
        if kind != "label":
            raise ParseError(pos, "a vertex label", s)
        if val == BLANK:
            val = None
        elif labels is not None and val not in labels:
            raise SemanticError(pos, f"label {val!r} not in {list(labels)}")
        vlabels.append(val)
        k += 1
        v = stack[-1]
        while peek()[1] == "pair":
            pos, _, (a, b, lab, bars) = peek()
            k += 1
            if bars > len(stack) - 1:
                raise SemanticError(pos, "backtrack past the root")
            connect(v, a, stack[-1 - bars], b, lab, pos)
        pos, kind, _ = peek()
        if kind != ";":
            raise ParseError(pos, "';' or a port pair", s)
        k += 1
        path = []
        while peek()[1] == "pair":
            pos, _, (a, b, lab, bars) = peek()
            if bars:
                if bars > len(stack) - 1:
                    raise SemanticError(pos, "backtrack past the root")
                raise SemanticError(pos, "bars after a path pair")
            path.append(peek())
            k += 1
        pos, kind, _ = peek()
        if kind == "end":
            if path:
                raise ParseError(pos, "'$'", s)
            break
        if kind != "$":
            raise ParseError(pos, "'$' or a port pair", s)
        if not path:
            raise ParseError(pos, "a port pair", s)
        for n, (pos, _, (a, b, lab, _)) in enumerate(path):
            cur = stack[-1]
            if n < len(path) - 1:
                if len(stack) == 1:
                    raise SemanticError(pos, "backtrack past the root")
                if up[cur] != (a, b):
                    raise SemanticError(pos, f"({a},{b}) is not the edge to the parent")
                stack.pop()
            else:
                w = len(nbrs)
                nbrs.append([None] * ports)
                connect(cur, a, w, b, lab, pos)
                up[w] = (b, a)
                stack.append(w)
    g = CayleyGraph(ports, tuple(tuple(r) for r in nbrs), tuple(vlabels),
                    tuple(sorted(elabels.items())))
    return g.shift_to(0)


# ---------------------------------------------------------------------------
# Graph files


def _list(text: str) -> list:
    return [t for t in text.split(",") if t] if text else []


def _header(line: str, magic: str) -> dict:
    parts = line.split()
    if len(parts) < 2 or " ".join(parts[:2]) != magic:
        raise ParseError(0, f"header '{magic}'", line)
    out = {}
    for p in parts[2:]:
        key, sep, val = p.partition("=")
        if not sep:
            raise ParseError(line.find(p), "key=value", line)
        out[key] = val
    return out


def _ports_field(val: str) -> tuple[int, Optional[list]]:
    if val.isdigit():
        return int(val), None
    names = _list(val)
    return len(names), names


def write_graph(x: CayleyGraph, vlabels: Sequence = (), elabels: Sequence = (),
                port_names: Optional[Sequence[str]] = None) -> str:
    ports = ",".join(port_names) if port_names else str(x.ports)
    head = (f"cgd-graph v1 ports={ports} vlabels={','.join(map(str, vlabels))} "
            f"elabels={','.join(map(str, elabels))}")
    return head + "\n" + string_encode(x, port_names) + "\n"


def read_graph(text: str) -> tuple[CayleyGraph, dict]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) != 2:
        raise ParseError(0, "a header line and one graph string", text)
    info = _header(lines[0], "cgd-graph v1")
    ports, names = _ports_field(info.get("ports", "0"))
    labels = _list(info.get("vlabels", "")) or None
    x = string_decode(lines[1].strip(), ports, names, labels)
    return x, {"ports": ports, "port_names": names, "vlabels": _list(info.get("vlabels", "")),
               "elabels": _list(info.get("elabels", ""))}


# ---------------------------------------------------------------------------
# Rule codec


def neighbourhood_bits(disk: CayleyGraph) -> str:
    """Per port of the centre: ``0`` if free, else ``1`` and the far port in binary."""
    width = math.ceil(math.log2(disk.ports)) if disk.ports > 1 else 0
    out = []
    for e in disk.nbrs[0]:
        if e is None:
            out.append("0")
        else:
            out.append("1" + (format(e[1], f"0{width}b") if width else ""))
    return "".join(out)


def format_atom(a) -> str:
    path, z = a
    steps = ".".join(f"{p}-{q}" for p, q in path) if path else "ε"
    return f"{steps}:{z}"


def parse_atom(text: str, pos: int = 0):
    steps, sep, z = text.rpartition(":")
    if not sep or not z.isdigit():
        raise ParseError(pos, "atom 'path:suffix'", text)
    if steps == "ε":
        return (EPSILON, int(z))
    path = []
    for s in steps.split("."):
        p, sep, q = s.partition("-")
        if not sep or not p.isdigit() or not q.isdigit():
            raise ParseError(pos, "path step 'p-q'", text)
        path.append((int(p), int(q)))
    return (tuple(path), int(z))


def _name_key(name) -> tuple:
    return tuple(sorted((len(p), p, z) for p, z in name))


def _components(img: NamedGraph) -> list:
    """Connected components as ``(root name, member names)``, origin first."""
    adj = {v: set() for v in img.vertices}
    for e in img.edges:
        (a, _), (b, _) = tuple(e)
        adj[a].add(b)
        adj[b].add(a)
    seen = set()
    comps = []
    for v in sorted(img.vertices, key=lambda n: ((EPSILON, 0) not in n, _name_key(n))):
        if v in seen:
            continue
        members = [v]
        seen.add(v)
        for u in members:
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    members.append(w)
        comps.append((v, members))
    return comps


def address_tape(name, ports: int) -> str:
    """Moves leading from the host VERTEX to a vertex of the output.

    ``↑`` leaves the host for the disk walk; each step ``(a, b)`` turns ``a+1``
    times then crosses with ``|`` and turns back ``d-b`` times; ``↓`` enters
    the output and ``→`` selects the successor.  ``∅`` marks an output named
    from the host alone.
    """
    for path, z in sorted(name, key=lambda a: (len(a[0]), a)):
        if path:
            tape = ["↑"]
            for a, b in path:
                tape.append("→" * (a + 1) + "|" + "→" * (ports - b))
            tape.append("↓" + "→" * z)
            return "".join(tape)
    return "∅"


def inheritor(name) -> str:
    return "1" if any(not path for path, _ in name) else "0"


def _entry_line(f, disk: CayleyGraph, img: NamedGraph) -> str:
    out, names, addr, inh = [], [], [], []
    for root, members in _components(img):
        sub = canonicalize(img.build(img.ports, members, [e for e in img.edges
                                                          if set(_ends(e)) <= set(members)],
                                     {k: v for k, v in img.vlabels.items() if k in members},
                                     {e: v for e, v in img.elabels.items()
                                      if set(_ends(e)) <= set(members)}), root)
        order = _order(img, members, root)
        out.append(string_encode(ring_encode(sub)))
        names.append("".join("{" + ",".join(format_atom(a) for a in sorted(n, key=_atom_key)) + "}"
                             for n in order))
        addr.append(",".join(address_tape(n, f.ports) for n in order))
        inh.append("".join(inheritor(n) for n in order))
    return (f"DISK {string_encode(disk)} NB {neighbourhood_bits(disk)} -> "
            f"OUT {'+'.join(out)} NAMES {'+'.join(names)} ADDR {'+'.join(addr)} "
            f"INH {'+'.join(inh)}")


def _atom_key(a):
    return (len(a[0]), a)


def _ends(e):
    return [u for u, _ in e]


def _order(img: NamedGraph, members, root) -> list:
    """Members in the canonical numbering rooted at ``root``."""
    adj = img.adjacency()
    order = [root]
    seen = {root}
    for v in order:
        for p in range(img.ports):
            e = adj.get((v, p))
            if e is not None and e[0] not in seen:
                seen.add(e[0])
                order.append(e[0])
    return order


def rule_encode(f) -> str:
    """Serialise a table rule, one line per entry in canonical disk order."""
    if f.table is None:
        raise InvalidRule("only table rules can be serialised")
    head = (f"cgd-rule v1 ports={f.ports} vlabels={','.join(map(str, f.vlabels))} "
            f"elabels={','.join(map(str, f.elabels))} radius={f.radius} bound={f.bound} "
            f"class={f.graph_class} entries={len(f.table)}")
    if f.name:
        head += f" name={f.name}"
    lines = [head]
    for disk in sorted(f.table, key=CayleyGraph.sort_key):
        lines.append(_entry_line(f, disk, f.table[disk]))
    return "\n".join(lines) + "\n"


_ENTRY = re.compile(r"DISK (\S+) NB ([01]*) -> OUT (\S+) NAMES (\S+) ADDR (\S+) INH (\S+)$")
_NAME = re.compile(r"\{([^{}]*)\}")


def _decode_entry(line: str, lineno: int, ports: int, vlabels, elabels):
    from .rules import image_graph

    m = _ENTRY.match(line)
    if m is None:
        raise ParseError(lineno, "'DISK <graph> NB <bits> -> OUT .. NAMES .. ADDR .. INH ..'", line)
    disk = string_decode(m.group(1), ports, None, vlabels or None)
    if neighbourhood_bits(disk) != m.group(2):
        raise InvalidRule(f"line {lineno}: neighbourhood bits disagree with the disk")
    outs, names, addrs, inhs = (m.group(i).split("+") for i in (3, 4, 5, 6))
    if not len(outs) == len(names) == len(addrs) == len(inhs):
        raise ParseError(lineno, "one NAMES/ADDR/INH group per output component", line)
    verts, edges, vl = [], [], {}
    for out, nm, ad, ih in zip(outs, names, addrs, inhs):
        comp = ring_decode(string_decode(out, 3), ports)
        sets = [frozenset(parse_atom(a, lineno) for a in g.split(",") if a)
                for g in _NAME.findall(nm)]
        if len(sets) != comp.n:
            raise ParseError(lineno, f"{comp.n} names", line)
        if ad.split(",") != [address_tape(s, ports) for s in sets] or \
                ih != "".join(inheritor(s) for s in sets):
            raise InvalidRule(f"line {lineno}: address tapes disagree with the names")
        verts.extend(sets)
        for (v, p), (w, q) in comp.edges():
            edges.append((sets[v], p, sets[w], q, comp.elabel(v, p)))
        for v, lab in enumerate(comp.vlabels):
            if lab is not None:
                vl[sets[v]] = lab
    return disk, image_graph(ports, verts, edges, vl)


def rule_decode(text: str, validate: bool = True):
    """Inverse of :func:`rule_encode`; the decoded rule is validated."""
    from .rules import LocalRule, validate_rule

    lines = [ln.rstrip("\n") for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError(0, "header 'cgd-rule v1'", text)
    info = _header(lines[0], "cgd-rule v1")
    try:
        ports = int(info["ports"])
        radius = int(info["radius"])
        bound = int(info["bound"])
        entries = int(info.get("entries", len(lines) - 1))
    except (KeyError, ValueError) as exc:
        raise ParseError(0, f"numeric header field ({exc})", lines[0]) from None
    vlabels = tuple(_list(info.get("vlabels", "")))
    elabels = tuple(_list(info.get("elabels", "")))
    if len(lines) - 1 != entries:
        raise ParseError(len(lines), f"{entries} entries, found {len(lines) - 1}", text)
    table = {}
    for n, line in enumerate(lines[1:], start=1):
        disk, img = _decode_entry(line, n, ports, vlabels, elabels)
        if disk in table:
            raise InvalidRule(f"line {n}: duplicate disk")
        table[disk] = img
    f = LocalRule(ports, vlabels, elabels, radius, bound, table=table,
                  graph_class=info.get("class", "any"), name=info.get("name", "decoded"))
    if validate:
        report = validate_rule(f)
        if not report.ok:
            bad = next(line for line in report.lines() if "FAIL" in line)
            raise InvalidRule(bad)
    return f
