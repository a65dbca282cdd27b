"""Acceptance suite: one test per criterion.  Each records a PASS/FAIL line,
printed in the terminal summary by ``conftest.py``.

Run directly with ``python tests/test_acceptance.py``.
"""

import itertools
import random
import sys
import time

import pytest

import properties as props
from oracles import ca_run, shortlex_key, two_port_graphs

from cgd.arith import RuleSignature, rank_graph, rank_rule, rule_count, unrank_graph, unrank_rule
from cgd.builders import (EXAMPLE_PORT_NAMES, EXAMPLE_STRING, cycle, dfs_example, k1, k2, line,
                          random_graph, two_vertex)
from cgd.constructor import assemble, extract, payloads, run_machine
from cgd.encodings import (ring_decode, ring_encode, rule_decode, rule_encode, string_decode,
                           string_encode)
from cgd.graph import EPSILON, from_edges, iso_eq
from cgd.hereditary import CARule, ca_to_cgd, cells
from cgd.reductions import (label_free_reduction, normal_form, radius_one_reduction, rotate_rule,
                            verify_simulation)
from cgd.rules import (LocalRule, apply_step, atom, enumerate_disks, identity_rule, image_graph,
                       inflating_line_rule, labelled_turtle_rule, run, turtle_rule,
                       validate_rule)

RESULTS = {}


def report(n, title, ok, detail, elapsed):
    line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail} [{elapsed:.2f}s]"
    RESULTS[n] = line
    assert ok, line


def timed(fn):
    t0 = time.perf_counter()
    ok, detail = fn()
    return ok, detail, time.perf_counter() - t0


def c1():
    traj = run(turtle_rule(), k1(), 10)
    ok = all(iso_eq(x, k1() if t % 2 == 0 else k2()) for t, x in enumerate(traj))
    return ok, f"{len(traj)} configurations alternate K1/K2"


def test_01_turtle():
    ok, detail, dt = timed(c1)
    report(1, "turtle dynamics", ok and dt < 1, detail, dt)


def c2():
    f = inflating_line_rule()
    bad = [f"cycle {n}" for n in range(2, 17) if apply_step(f, cycle(n)).n != 2 * n]
    bad += [f"line {n}" for n in range(1, 17) if apply_step(f, line(n)).n != 2 * n]
    return not bad, "all sizes double" if not bad else ", ".join(bad)


def test_02_inflating_line():
    ok, detail, dt = timed(c2)
    report(2, "inflating line", ok and dt < 1, detail, dt)


def c3():
    a = len(enumerate_disks(1, r=0))
    b = len(enumerate_disks(2, r=0, graph_class="simple"))
    return (a, b) == (2, 9), f"|pi|=1: {a}, |pi|=2 simple: {b}"


def test_03_disk_counts():
    ok, detail, dt = timed(c3)
    report(3, "disk counts", ok, detail, dt)


def c4():
    good = validate_rule(turtle_rule()).ok and validate_rule(inflating_line_rule()).ok
    t = turtle_rule()
    alone, paired = enumerate_disks(1, r=0)
    table = dict(t.table)
    table[paired] = image_graph(1, [[atom(EPSILON)]])
    bad = validate_rule(LocalRule(1, radius=0, bound=2, table=table, name="mutated"))
    c3 = bad.conditions[3]
    ok = good and not c3.passed and bool(c3.witness)
    return ok, f"builtins valid: {good}; mutant fails condition 3 with witness: {not c3.passed}"


def test_04_rule_validity():
    ok, detail, dt = timed(c4)
    report(4, "rule validity", ok, detail, dt)


def c5():
    exact = string_encode(dfs_example(), EXAMPLE_PORT_NAMES) == EXAMPLE_STRING
    decoded = iso_eq(string_decode(EXAMPLE_STRING, 3, EXAMPLE_PORT_NAMES, ["0", "1"]), dfs_example())
    rng = random.Random(5)
    fails = 0
    for _ in range(500):
        ports = rng.randint(1, 4)
        x = random_graph(rng, ports, rng.randint(1, 12 if ports > 1 else 2), ("0", "1", "2"),
                         ("e",))
        fails += string_decode(string_encode(x), ports, None, ["0", "1", "2"]) != x
    return exact and decoded and not fails, \
        f"worked example string exact: {exact}, decodes: {decoded}, roundtrip failures: {fails}/500"


def test_05_string_codec():
    ok, detail, dt = timed(c5)
    report(5, "string codec", ok and dt < 5, detail, dt)


def two_vertex_rings():
    edges = [(b + i, 1, b + (i + 1) % 4, 0) for b in (0, 4) for i in range(4)]
    edges.append((3, 2, 5, 2))
    return from_edges(3, 8, edges, ["VERTEX", "PORT", "PORT", "PORT"] * 2)


def c6():
    rng = random.Random(6)
    fails = 0
    for _ in range(200):
        ports = rng.randint(1, 4)
        x = random_graph(rng, ports, rng.randint(1, 30 if ports > 1 else 2), ("0", "1"))
        fails += not iso_eq(ring_decode(ring_encode(x), ports), x)
    rings = two_vertex_rings()
    pair = ring_encode(two_vertex()) == rings and ring_decode(rings, 3) == two_vertex()
    return pair and not fails, f"two-vertex ring pair exact: {pair}, roundtrip failures: {fails}/200"


def test_06_ring_codec():
    ok, detail, dt = timed(c6)
    report(6, "ring codec", ok, detail, dt)


def labelled_cycles(sizes, per_size, seed):
    rng = random.Random(seed)
    return [cycle(n, [rng.choice("01") for _ in range(n)]) for n in sizes for _ in range(per_size)]


def c7():
    f = rotate_rule()
    red = radius_one_reduction(f)
    xs = labelled_cycles(range(4, 13), 3, seed=7)
    v = verify_simulation(red.rule, f, red.map, xs, 3)
    ok = v.passed and red.map.delta == 2 and red.rule.radius == 1
    return ok, f"delta={red.map.delta}, radius={red.rule.radius}, {v.describe()}"


def test_07_radius_one():
    ok, detail, dt = timed(c7)
    report(7, "radius-one reduction", ok, detail, dt)


def c8():
    f = labelled_turtle_rule()
    red = label_free_reduction(f)
    xs = [k1(label=a) for a in "01"] + [k2(labels=p) for p in itertools.product("01", repeat=2)]
    v = verify_simulation(red.rule, f, red.map, xs, 4)
    ok = v.passed and red.map.delta == 1 and not red.rule.vlabels
    return ok, f"delta={red.map.delta}, ports={red.rule.ports}, {v.describe()}"


def test_08_label_free():
    ok, detail, dt = timed(c8)
    report(8, "label-free reduction", ok, detail, dt)


def c9():
    f = rotate_rule()
    nf = normal_form(f)
    xs = labelled_cycles(range(4, 9), 2, seed=9)
    v = verify_simulation(nf.rule, f, nf.map, xs, 3)
    ok = v.passed and not nf.rule.vlabels and not nf.rule.elabels
    return ok, f"composed delta={nf.map.delta}, ports={nf.rule.ports}, {v.describe()}"


def test_09_composition():
    ok, detail, dt = timed(c9)
    report(9, "normal form", ok, detail, dt)


def c10():
    f = identity_rule(1)
    fs = rule_encode(f)
    rng = random.Random(10)
    bad = 0
    for _ in range(50):
        x = random_graph(rng, 3, rng.randint(1, 8), ("0", "1"))
        out = run_machine(assemble(string_encode(x), fs, ports=3))
        if out.status != "Done" or not iso_eq(extract(out, strip=True), x):
            bad += 1
            continue
        loads = payloads(extract(out))
        if len(loads) != x.n or any(not rule_decode(p).same_as(f) for p in loads):
            bad += 1
    return not bad, f"{50 - bad}/50 graphs rebuilt with faithful payloads"


def test_10_constructor():
    ok, detail, dt = timed(c10)
    report(10, "constructor machine", ok and dt < 30, detail, dt)


def c11():
    blank = ("·",)
    graphs = set()
    for n in range(1, 9):
        graphs |= two_port_graphs(n)
    order = sorted((kg for kg in ((shortlex_key(string_encode(g)), g) for g in graphs)
                    if kg[0][0] <= 34))
    g_ok = True
    prev = None
    for i in range(1000):
        x = unrank_graph(i, 2, blank)
        key = shortlex_key(string_encode(x))
        g_ok &= x == order[i][1] and rank_graph(x, blank) == i and (prev is None or prev < key)
        prev = key
    sig = RuleSignature(1, (), (), 0, 2)
    rng = random.Random(11)
    total = rule_count(sig)
    ns = sorted(rng.randrange(total) for _ in range(200))
    r_ok = all(rank_rule(unrank_rule(n, sig)) == n for n in ns)
    return g_ok and r_ok, f"graphs n<1000 bijective and ordered: {g_ok}; 200 rule tables: {r_ok}"


def test_11_arithmetisation():
    ok, detail, dt = timed(c11)
    report(11, "arithmetisation", ok and dt < 30, detail, dt)


def c12():
    ca = CARule.wolfram(110)
    f = ca_to_cgd(ca)
    tape = list("0001001101111100")
    want = ca_run(ca.transition, tape, 32)
    x = cycle(16, tape)
    mism = 0
    for t in range(1, 33):
        x = apply_step(f, x)
        mism += cells(x) != want[t]
    return not mism, f"{32 - mism}/32 steps match the array simulator"


def test_12_hereditary():
    ok, detail, dt = timed(c12)
    report(12, "rule 110 embedding", ok and dt < 2, detail, dt)


PROPERTY_CASES = {"shift algebra": 2500, "disk nesting": 2500, "union laws": 2500,
                  "degree bound": 2000, "off-machine identity": 1000}


def c13():
    rng = random.Random(13)
    traj = props.MachineTrajectories(seed=13)
    checks = {"shift algebra": props.shift_algebra, "disk nesting": props.disk_nesting,
              "union laws": props.union_laws, "degree bound": props.degree_bound,
              "off-machine identity": lambda r: props.off_machine_identity(r, traj)}
    done = 0
    for name, count in PROPERTY_CASES.items():
        for _ in range(count):
            checks[name](rng)
            done += 1
    return done >= 10 ** 4, f"{done} generated cases across {len(checks)} suites"


def test_13_properties():
    ok, detail, dt = timed(c13)
    report(13, "property suites", ok, detail, dt)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
