"""Slow reference implementations used to cross-check the package."""

import itertools
import re


def edge_set(x):
    return {((v, p), e) for v in range(x.n) for p, e in enumerate(x.nbrs[v]) if e is not None}


def pointed_isomorphic(x, y):
    """Try every bijection fixing the pointer."""
    if x.ports != y.ports or x.n != y.n:
        return False
    ex, ey = edge_set(x), edge_set(y)
    if len(ex) != len(ey):
        return False
    for rest in itertools.permutations(range(1, y.n)):
        m = (0,) + rest
        if any(x.vlabels[v] != y.vlabels[m[v]] for v in range(x.n)):
            continue
        if all(((m[v], p), (m[w], q)) in ey for (v, p), (w, q) in ex):
            if all(x.elabel(v, p) == y.elabel(m[v], p) for (v, p), _ in ex):
                return True
    return False


def _partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def count_radius0_disks(ports, graph_class="any"):
    """Radius-0 disks counted from first principles.

    Each centre port is free, looped to another centre port, or leaves for a
    boundary vertex.  Boundary vertices are only told apart by which centre
    ports reach them and at which of their ports, so a disk is a loop
    matching, a set partition of the leaving ports and an injective far-port
    choice per block.
    """
    total = 0
    d = ports

    def matchings(free):
        if not free:
            yield [], []
            return
        p, rest = free[0], free[1:]
        for loops, out in matchings(rest):
            yield loops, out
            yield loops, [p] + out
        for i, q in enumerate(rest):
            for loops, out in matchings(rest[:i] + rest[i + 1:]):
                yield [(p, q)] + loops, out

    for loops, out in matchings(list(range(d))):
        if graph_class == "simple" and loops:
            continue
        if graph_class == "oriented" and any(q != d - 1 - p for p, q in loops):
            continue
        out = sorted(out)
        for blocks in _partitions(out):
            if graph_class == "simple" and any(len(b) > 1 for b in blocks):
                continue
            ways = 1
            for b in blocks:
                if graph_class == "oriented":
                    far = [d - 1 - p for p in b]
                    ways *= len(set(far)) == len(far)
                else:
                    ways *= len(list(itertools.permutations(range(d), len(b))))
            total += ways
    return total


def ca_run(transition, tape, steps):
    out = [list(tape)]
    for _ in range(steps):
        t = out[-1]
        n = len(t)
        out.append([transition[(t[i - 1], t[i], t[(i + 1) % n])] for i in range(n)])
    return out


_TOKEN = re.compile(r"\$|;|\||\((\d+),(\d+)\)|·")


def shortlex_key(s):
    """Order of unlabelled graph strings: length, then $ < ; < | < pairs."""
    out = []
    for m in _TOKEN.finditer(s):
        t = m.group(0)
        if t == "$":
            out.append((0,))
        elif t == ";":
            out.append((1,))
        elif t == "|":
            out.append((2,))
        elif t == "·":
            out.append((4, -1))
        else:
            out.append((3, int(m.group(1)), int(m.group(2)), -1))
    return (len(out), tuple(out))


def two_port_graphs(n):
    """Connected graphs over two ports are paths or cycles; build each from
    a left-to-right walk and every choice of pointer."""
    from cgd.graph import from_edges

    out = set()
    if n == 1:
        out.add(from_edges(2, 1, []))
        out.add(from_edges(2, 1, [(0, 0, 0, 1)]))
        return out
    for right in itertools.product((0, 1), repeat=n - 1):
        for left in itertools.product((0, 1), repeat=n - 1):
            if any(left[i - 1] == right[i] for i in range(1, n - 1)):
                continue
            es = [(i, right[i], i + 1, left[i]) for i in range(n - 1)]
            closed = es + [(n - 1, 1 - left[-1], 0, 1 - right[0])]
            for edges in (es, closed):
                for ptr in range(n):
                    out.add(from_edges(2, n, edges, pointer=ptr))
    return out
