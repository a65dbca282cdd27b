import random

import pytest

from cgd.builders import cycle, dfs_example, k1, k2, line, random_graph, random_named, rename
from cgd.errors import (DisconnectedGraph, InconsistentUnion, NoSuchVertex, PortConflict,
                        SignatureMismatch)
from cgd.graph import (EPSILON, NamedGraph, Verdict, canonicalize, consistency, edge, from_edges,
                       inverse, iso_eq, merge, singleton, union)

from oracles import pointed_isomorphic


def test_single_vertex_canonical():
    g = NamedGraph.build(2, ["a"])
    x = canonicalize(g, "a")
    assert x.n == 1
    assert x.paths == (EPSILON,)
    assert x == singleton(2)


def test_inverse_involution():
    p = ((0, 1), (2, 0), (1, 1))
    assert inverse(inverse(p)) == p
    assert inverse(p) == ((1, 1), (0, 2), (1, 0))


def test_canonical_paths_are_shortlex_minimal():
    x = dfs_example()
    for v, path in enumerate(x.paths):
        assert x.walk(0, path) == v
    assert x.paths[0] == EPSILON
    lengths = [len(p) for p in x.paths]
    assert lengths == sorted(lengths)


def test_relabelled_copies_share_canonical_form():
    rng = random.Random(7)
    for _ in range(40):
        n = rng.randint(1, 10)
        g = random_named(rng, 3, n, ("a", "b"))
        perm = list(range(n))
        rng.shuffle(perm)
        h = rename(g, {v: f"v{perm[v]}" for v in range(n)})
        p = rng.randrange(n)
        assert canonicalize(g, p) == canonicalize(h, f"v{perm[p]}")


def test_canonical_equality_matches_bruteforce_isomorphism():
    rng = random.Random(11)
    graphs = [random_graph(rng, 2, rng.randint(1, 5), ("0", "1")) for _ in range(60)]
    for x in graphs[:30]:
        for y in graphs[30:]:
            if x.n == y.n:
                assert (x == y) == pointed_isomorphic(x, y)


def test_disconnected_and_port_conflict():
    g = NamedGraph.build(1, ["a", "b"])
    with pytest.raises(DisconnectedGraph):
        canonicalize(g, "a")
    bad = NamedGraph.build(1, ["a", "b", "c"], [edge("a", 0, "b", 0), edge("a", 0, "c", 0)])
    with pytest.raises(PortConflict):
        canonicalize(bad, "a")
    with pytest.raises(NoSuchVertex):
        canonicalize(NamedGraph.build(1, ["a"]), "z")


def test_iso_eq_rejects_signature_mismatch():
    with pytest.raises(SignatureMismatch):
        iso_eq(k1(1), k1(2))


def test_shift_and_back():
    x = cycle(5, list("01101"))
    u = x.paths[3]
    y = x.shift(u)
    assert y.shift(inverse(u)) == x
    with pytest.raises(NoSuchVertex):
        k1().shift(((0, 0),))


def test_shift_of_cycle_rotates_labels():
    x = cycle(4, list("0001"))
    # port 1 points to the right neighbour
    y = x.shift(((1, 0),))
    z = from_edges(2, 4, [(i, 1, (i + 1) % 4, 0) for i in range(4)], list("0010"))
    assert y == z


def test_disk_keeps_boundary_structure():
    x = line(5, list("01234"))
    d = x.shift_to(x.walk(0, ((1, 0), (1, 0)))).disk(1)
    # vertices up to distance 2, labels only up to distance 1
    assert d.n == 5
    assert sorted(lab for lab in d.vlabels if lab is not None) == ["1", "2", "3"]
    assert sum(1 for _ in d.edges()) == 4


def test_disk_drops_edges_between_boundary_vertices():
    x = cycle(4)
    d = x.disk(0)
    assert d.n == 3
    assert sum(1 for _ in d.edges()) == 2
    assert x.disk(1).n == 4
    assert sum(1 for _ in x.disk(1).edges()) == 4


def test_consistency_verdicts():
    a = NamedGraph.build(1, [frozenset({"a"}), frozenset({"b"})],
                         [edge(frozenset({"a"}), 0, frozenset({"b"}), 0)])
    b = NamedGraph.build(1, [frozenset({"c"})])
    assert consistency(a, b).kind is Verdict.TRIVIALLY_CONSISTENT
    c = NamedGraph.build(1, [frozenset({"a"})], vlabels={frozenset({"a"}): None})
    assert consistency(a, c).kind is Verdict.CONSISTENT
    d = NamedGraph.build(1, [frozenset({"a"}), frozenset({"z"})],
                         [edge(frozenset({"a"}), 0, frozenset({"z"}), 0)])
    assert consistency(a, d).kind is Verdict.INCONSISTENT
    with pytest.raises(InconsistentUnion):
        union(a, d)


def test_union_glues_shared_names():
    A, B, C = (frozenset({s}) for s in "abc")
    g = NamedGraph.build(2, [A, B], [edge(A, 1, B, 0)])
    h = NamedGraph.build(2, [B, C], [edge(B, 1, C, 0)])
    u, shared = merge([g, h])
    assert shared
    assert canonicalize(u, A) == line(3)


def test_k1_k2():
    assert k1().n == 1 and k2().n == 2
    assert k2().nbrs[0][0] == (1, 0)
