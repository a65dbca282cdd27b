"""Numbering graphs and rule tables.

Graphs are ordered by their string encodings, shortest first and then
token by token (``$ < ; < | <`` port pairs ``<`` labels).  A graph with ``n``
vertices needs at least ``4n - 1`` tokens, so the graphs with at most ``N``
vertices contain every encoding of length ``<= 4N + 2``; that prefix is
enumerated and sorted.

Rule tables of a fixed signature are numbered in mixed radix: one digit per
disk, in canonical disk order, each digit indexing the admissible images of
that disk.
"""

from __future__ import annotations

import itertools
import os
from functools import lru_cache
from typing import NamedTuple, Optional, Sequence

from .encodings import BLANK, string_encode, tokenize
from .errors import BudgetExceeded
from .graph import EPSILON, CayleyGraph, NamedGraph, canonicalize, edge
from .rules import LocalRule, enumerate_disks, enumerate_shapes, labellings


def budget() -> int:
    return int(os.environ.get("CGD_ENUM_BUDGET", "200000"))


def _plain_labels(vlabels: Sequence) -> tuple:
    vlabels = tuple(vlabels)
    return () if vlabels in ((), (BLANK,)) else vlabels


# ---------------------------------------------------------------------------
# Graphs


def token_key(x: CayleyGraph, vlabels: Sequence = (), elabels: Sequence = ()) -> tuple:
    """Sort key of the encoding of ``x``: ``(token count, tokens)``."""
    vlabels = _plain_labels(vlabels)
    vindex = {str(s): i for i, s in enumerate(vlabels)}
    eindex = {str(s): i for i, s in enumerate(elabels)}
    out = []
    for _, kind, val in tokenize(string_encode(x), [str(i) for i in range(x.ports)]):
        if kind == "$":
            out.append((0,))
        elif kind == ";":
            out.append((1,))
        elif kind == "pair":
            a, b, lab, bars = val
            if lab is not None and lab not in eindex:
                raise ValueError(f"edge label {lab!r} outside the signature")
            out.append((3, a, b, -1 if lab is None else eindex[lab]))
            out.extend([(2,)] * bars)
        else:
            if val != BLANK and val not in vindex:
                raise ValueError(f"label {val!r} outside the signature")
            out.append((4, -1 if val == BLANK else vindex[val]))
    return (len(out), tuple(out))


def graphs_up_to(ports: int, n: int, vlabels: Sequence = (), elabels: Sequence = ()) -> list:
    """Every pointed graph with at most ``n`` vertices."""
    vlabels = _plain_labels(vlabels)
    out = []
    limit = budget()
    for shape in enumerate_shapes(ports, None, max_vertices=n, budget=limit):
        for g in labellings(shape, None, vlabels, elabels):
            out.append(g)
            if len(out) > limit:
                raise BudgetExceeded(f"more than {limit} graphs with at most {n} vertices")
    return out


@lru_cache(maxsize=32)
def _prefix(ports: int, n: int, vlabels: tuple, elabels: tuple) -> tuple:
    """Sorted graphs whose encodings have at most ``4n + 2`` tokens."""
    keyed = [(token_key(g, vlabels, elabels), g) for g in graphs_up_to(ports, n, vlabels, elabels)]
    keyed = [kg for kg in keyed if kg[0][0] <= 4 * n + 2]
    keyed.sort(key=lambda kg: kg[0])
    return tuple(kg[1] for kg in keyed), tuple(kg[0] for kg in keyed)


def rank_graph(x: CayleyGraph, vlabels: Sequence = (), elabels: Sequence = ()) -> int:
    vlabels = _plain_labels(vlabels)
    key = token_key(x, vlabels, elabels)
    n = max(1, (key[0] + 1) // 4)
    graphs, keys = _prefix(x.ports, n, vlabels, tuple(elabels))
    lo, hi = 0, len(keys)
    while lo < hi:
        mid = (lo + hi) // 2
        if keys[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    if lo == len(keys) or graphs[lo] != x:
        raise ValueError("graph outside the signature")
    return lo


def unrank_graph(index: int, ports: int, vlabels: Sequence = (), elabels: Sequence = ()) -> CayleyGraph:
    if index < 0:
        raise ValueError("indices are non-negative")
    vlabels = _plain_labels(vlabels)
    n = 1
    while True:
        graphs, _ = _prefix(ports, n, vlabels, tuple(elabels))
        if index < len(graphs):
            return graphs[index]
        if ports == 0:
            raise BudgetExceeded("a signature without ports has a single graph")
        n += 1


# ---------------------------------------------------------------------------
# Rules


class RuleSignature(NamedTuple):
    ports: int
    vlabels: tuple = ()
    elabels: tuple = ()
    radius: int = 0
    bound: int = 1
    graph_class: str = "any"

    @classmethod
    def of(cls, f: LocalRule) -> "RuleSignature":
        return cls(f.ports, f.vlabels, f.elabels, f.radius, f.bound, f.graph_class)


def _set_partitions(atoms: list, blocks: int):
    """Assignments of atoms to at most ``blocks`` blocks or to no block; the
    first atom always opens block 0 and blocks open in order."""
    def rec(i, assign, used):
        if i == len(atoms):
            yield [frozenset(a for a, b in zip(atoms, assign) if b == k) for k in range(used)]
            return
        options = [-1] + list(range(used)) + ([used] if used < blocks else [])
        for o in options:
            yield from rec(i + 1, assign + [o], max(used, o + 1))

    yield from rec(1, [0], 1)


def _matchings(slots: list):
    """Every partial perfect matching of port slots."""
    if not slots:
        yield []
        return
    first, rest = slots[0], slots[1:]
    yield from _matchings(rest)
    for i, other in enumerate(rest):
        for m in _matchings(rest[:i] + rest[i + 1:]):
            yield [(first, other)] + m


def _connected(k: int, pairs) -> bool:
    seen = {0}
    frontier = [0]
    adj = {i: set() for i in range(k)}
    for (a, _), (b, _) in pairs:
        adj[a].add(b)
        adj[b].add(a)
    while frontier:
        v = frontier.pop()
        for w in adj[v] - seen:
            seen.add(w)
            frontier.append(w)
    return len(seen) == k


def image_key(img: NamedGraph, vlabels: Sequence, elabels: Sequence) -> tuple:
    root = next(n for n in img.vertices if (EPSILON, 0) in n)
    g = canonicalize(img, root)
    order = _canonical_names(img, root)
    deco = tuple(tuple(sorted((len(p), p, z) for p, z in n)) for n in order)
    return token_key(g, vlabels, elabels), deco


def _canonical_names(img: NamedGraph, root) -> list:
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


def slot_images(disk: CayleyGraph, sig: RuleSignature) -> list:
    """Connected images with at most ``bound`` vertices named by atoms of
    ``disk``, sorted by encoding then name decoration."""
    return list(_slot_images(disk, sig))


@lru_cache(maxsize=4096)
def _slot_images(disk: CayleyGraph, sig: RuleSignature) -> tuple:
    d = sig.ports
    vl = _plain_labels(sig.vlabels)
    atoms = [(EPSILON, 0)] + [(p, z) for p in disk.paths for z in range(sig.bound + 1)
                              if (p, z) != (EPSILON, 0)]
    out = []
    limit = budget()
    for blocks in _set_partitions(atoms, sig.bound):
        k = len(blocks)
        slots = [(i, p) for i in range(k) for p in range(d)]
        for m in _matchings(slots):
            if any(a == b for a, b in m) or not _connected(k, m):
                continue
            for labs in itertools.product(*([(None,) + vl] * k)):
                for elabs in itertools.product(*([(None,) + tuple(sig.elabels)] * len(m))):
                    es = [(blocks[a], p, blocks[b], q, lab)
                          for ((a, p), (b, q)), lab in zip(m, elabs)]
                    img = NamedGraph.build(d, blocks, [edge(*e[:4]) for e in es],
                                           dict(zip(blocks, labs)),
                                           {edge(*e[:4]): e[4] for e in es})
                    out.append(img)
                    if len(out) > limit:
                        raise BudgetExceeded(f"more than {limit} images for one disk")
    out.sort(key=lambda g: image_key(g, vl, sig.elabels))
    return tuple(out)


def rule_slots(sig: RuleSignature) -> list:
    return enumerate_disks(sig.ports, _plain_labels(sig.vlabels), sig.elabels, sig.radius,
                           sig.graph_class)


def rule_count(sig: RuleSignature) -> int:
    total = 1
    for disk in rule_slots(sig):
        total *= len(_slot_images(disk, sig))
    return total


def rank_rule(f: LocalRule) -> int:
    sig = RuleSignature.of(f)
    if f.table is None:
        raise ValueError("only table rules have an index")
    n = 0
    for disk in rule_slots(sig):
        index = _index_of(disk, sig)
        try:
            i = index[frozen(f.table[disk])]
        except KeyError:
            raise ValueError(f"entry for {disk!r} is missing or not admissible") from None
        n = n * len(index) + i
    return n


def frozen(img: NamedGraph) -> tuple:
    """Hashable form of an image graph."""
    return (img.ports, img.vertices, img.edges, frozenset(img.vlabels.items()),
            frozenset(img.elabels.items()))


@lru_cache(maxsize=4096)
def _index_of(disk: CayleyGraph, sig: RuleSignature) -> dict:
    return {frozen(g): i for i, g in enumerate(_slot_images(disk, sig))}


def unrank_rule(n: int, sig: RuleSignature, name: Optional[str] = None) -> LocalRule:
    if n < 0:
        raise ValueError("indices are non-negative")
    slots = rule_slots(sig)
    sizes = [len(_slot_images(d, sig)) for d in slots]
    digits = []
    for size in reversed(sizes):
        n, r = divmod(n, size)
        digits.append(r)
    if n:
        raise BudgetExceeded("index beyond the number of tables of this signature")
    digits.reverse()
    table = {d: _slot_images(d, sig)[i] for d, i in zip(slots, digits)}
    return LocalRule(sig.ports, sig.vlabels, sig.elabels, sig.radius, sig.bound, table=table,
                     graph_class=sig.graph_class, name=name or "unranked")
