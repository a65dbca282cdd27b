import random

import pytest

from cgd.builders import cycle, k1, k2, line, random_graph
from cgd.errors import MissingDiskEntry
from cgd.graph import EPSILON
from cgd.rules import (LocalRule, apply_step, atom, builtin, enumerate_disks, identity_rule,
                       image_graph, inflating_line_rule, labelled_turtle_rule, run, turtle_rule,
                       validate_rule)

from oracles import count_radius0_disks


@pytest.mark.parametrize("ports", [1, 2, 3])
@pytest.mark.parametrize("graph_class", ["any", "simple", "oriented"])
def test_radius0_disk_counts_match_bruteforce(ports, graph_class):
    assert len(enumerate_disks(ports, r=0, graph_class=graph_class)) == \
        count_radius0_disks(ports, graph_class)


def test_disk_counts_frozen():
    assert len(enumerate_disks(1, r=0)) == 2
    assert len(enumerate_disks(2, r=0, graph_class="simple")) == 9
    assert len(enumerate_disks(2, r=0)) == 12
    # radius 1, two ports: computed once by the enumerator, cross-checked below
    assert [len(enumerate_disks(2, r=1, graph_class=c)) for c in ("any", "simple", "oriented")] \
        == [64, 61, 13]


def test_radius1_disks_are_exactly_the_disks_seen_in_random_graphs():
    found = set()
    rng = random.Random(3)
    for _ in range(3000):
        x = random_graph(rng, 2, rng.randint(1, 7), density=rng.random())
        found.add(x.disk(1))
    assert found <= set(enumerate_disks(2, r=1))
    assert len(found) == 64


def test_labelled_disks():
    disks = enumerate_disks(1, ("a", "b"), r=0)
    # a lone vertex or a vertex with one neighbour, centre labelled
    assert len(disks) == 4
    assert all(d.vlabels[0] in ("a", "b") for d in disks)


def test_turtle_alternates():
    traj = run(turtle_rule(), k1(), 10)
    assert len(traj) == 11
    for t, x in enumerate(traj):
        assert x == (k1() if t % 2 == 0 else k2())


@pytest.mark.parametrize("n", range(2, 17))
def test_inflating_line_doubles_cycles(n):
    assert apply_step(inflating_line_rule(), cycle(n)).n == 2 * n


@pytest.mark.parametrize("n", range(1, 17))
def test_inflating_line_doubles_lines(n):
    y = apply_step(inflating_line_rule(), line(n))
    assert y == line(2 * n)


def test_inflating_line_keeps_shape():
    f = inflating_line_rule()
    assert apply_step(f, cycle(3)) == cycle(6)
    assert apply_step(f, cycle(1)) == cycle(2)
    assert apply_step(f, line(2)) == line(4)
    assert apply_step(inflating_line_rule(simple=True), cycle(4)) == cycle(8)


@pytest.mark.parametrize("name", ["identity", "turtle", "inflating_line",
                                  "inflating_line_simple", "labelled_turtle"])
def test_builtins_valid(name):
    report = validate_rule(builtin(name))
    assert report.ok, report.lines()
    assert report.mode == "exhaustive"


def test_mutated_turtle_fails_neighbour_consistency():
    t = turtle_rule()
    alone, paired = enumerate_disks(1, r=0)
    table = dict(t.table)
    table[paired] = image_graph(1, [[atom(EPSILON)]])
    bad = LocalRule(1, radius=0, bound=2, table=table, name="mutated")
    report = validate_rule(bad)
    assert not report.ok
    c3 = report.conditions[3]
    assert not c3.passed
    assert c3.witness
    assert report.conditions[1].passed and report.conditions[2].passed


def test_bound_violation_is_condition_2():
    alone, paired = enumerate_disks(1, r=0)
    big = image_graph(1, [[atom(EPSILON)], [atom(EPSILON, 1)], [atom(EPSILON, 2)]],
                      [([atom(EPSILON)], 0, [atom(EPSILON, 1)], 0)])
    f = LocalRule(1, radius=0, bound=2, table={alone: big, paired: turtle_rule().table[paired]})
    assert not validate_rule(f).conditions[2].passed


def test_missing_entry():
    alone, _ = enumerate_disks(1, r=0)
    f = LocalRule(1, radius=0, bound=2, table={alone: turtle_rule().table[alone]})
    with pytest.raises(MissingDiskEntry):
        apply_step(f, k2())


def test_identity_fixes_random_graphs():
    rng = random.Random(5)
    f = identity_rule(3, ("0", "1"), ("u",), tabulate=False)
    for _ in range(30):
        x = random_graph(rng, 3, rng.randint(1, 9), ("0", "1"), ("u",))
        assert apply_step(f, x) == x


def test_labelled_turtle_merges_to_max_label():
    f = labelled_turtle_rule()
    assert apply_step(f, k1(label="1")) == k2(labels=("1", "1"))
    assert apply_step(f, k2(labels=("0", "1"))) == k1(label="1")
    assert apply_step(f, k2(labels=("0", "0"))) == k1(label="0")


def test_parallel_step_equals_serial():
    rng = random.Random(9)
    f = inflating_line_rule()
    x = cycle(12)
    assert apply_step(f, x, workers=2) == apply_step(f, x)
    g = random_graph(rng, 2, 6)
    assert apply_step(identity_rule(2, tabulate=False), g, workers=3) == g
