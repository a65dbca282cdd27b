import itertools
import random

import pytest

from cgd.builders import cycle, k1, k2, random_graph
from cgd.errors import MalformedEncoding
from cgd.reductions import (STAR, decode_labels, identity_map, label_free_reduction, normal_form,
                            radius_one_reduction, rotate_rule, verify_simulation)
from cgd.rules import apply_step, identity_rule, labelled_turtle_rule, turtle_rule


def labelled_cycles(sizes, per_size, seed):
    rng = random.Random(seed)
    out = []
    for n in sizes:
        for _ in range(per_size):
            out.append(cycle(n, [rng.choice("01") for _ in range(n)]))
    return out


def test_rotate_rule_shifts_labels_two_places():
    x = cycle(5, list("10000"))
    y = apply_step(rotate_rule(), x)
    # each cell copies the label two hops to its right
    assert y == cycle(5, list("00010"))


def test_radius_one_shape():
    red = radius_one_reduction(rotate_rule())
    assert red.rule.radius == 1
    assert red.map.delta == 2
    # two ordinary ports plus one per path word of length two over 2x2 letters
    assert red.rule.ports == 2 + 16
    assert STAR in red.rule.elabels


def test_radius_one_pads_to_power_of_two():
    for steps, delta, ports in ((3, 3, 2 + 16 + 64 + 256), (4, 3, 2 + 16 + 64 + 256)):
        red = radius_one_reduction(rotate_rule(steps=steps))
        assert (red.map.delta, red.rule.ports) == (delta, ports)


def test_radius_one_leaves_small_rules_alone():
    t = turtle_rule()
    assert radius_one_reduction(t).rule is t


def test_radius_one_simulates_rotate2():
    f = rotate_rule()
    red = radius_one_reduction(f)
    xs = labelled_cycles(range(4, 9), 2, seed=1)
    v = verify_simulation(red.rule, f, red.map, xs, 3)
    assert v.passed, v.describe()
    assert v.checked == len(xs) * 3


def test_radius_one_simulates_rotate3():
    f = rotate_rule(steps=3)
    red = radius_one_reduction(f)
    v = verify_simulation(red.rule, f, red.map, labelled_cycles([5, 7], 1, seed=2), 2)
    assert v.passed, v.describe()


def test_label_free_turtle():
    f = labelled_turtle_rule()
    red = label_free_reduction(f)
    assert red.rule.vlabels == () and red.rule.elabels == ()
    assert (red.rule.ports, red.rule.radius, red.rule.bound) == (3, 2, 8)
    xs = [k1(label=a) for a in "01"] + [k2(labels=p) for p in itertools.product("01", repeat=2)]
    v = verify_simulation(red.rule, f, red.map, xs, 4)
    assert v.passed, v.describe()


def test_label_free_with_edge_labels():
    f = identity_rule(2, ("a", "b"), ("x", "y"), tabulate=False)
    red = label_free_reduction(f)
    rng = random.Random(4)
    xs = [random_graph(rng, 2, rng.randint(1, 5), ("a", "b"), ("x", "y")) for _ in range(10)]
    v = verify_simulation(red.rule, f, red.map, xs, 2)
    assert v.passed, v.describe()


def test_label_encoder_is_invertible():
    f = identity_rule(3, ("a", "b"), ("x",), tabulate=False)
    red = label_free_reduction(f)
    rng = random.Random(6)
    for _ in range(30):
        x = random_graph(rng, 3, rng.randint(1, 6), ("a", "b"), ("x",))
        assert decode_labels(f, red.map(x)) == x


def test_decode_labels_rejects_marker_pointer():
    f = labelled_turtle_rule()
    y = label_free_reduction(f).map(k1(label="0"))
    marker = y.shift_to(1)
    with pytest.raises(MalformedEncoding):
        decode_labels(f, marker)


def test_normal_form_of_rotate2():
    f = rotate_rule()
    nf = normal_form(f)
    assert nf.rule.vlabels == () and nf.rule.elabels == ()
    assert (nf.rule.ports, nf.rule.radius, nf.map.delta) == (40, 2, 2)
    v = verify_simulation(nf.rule, f, nf.map, labelled_cycles([4, 5, 6], 1, seed=3), 2)
    assert v.passed, v.describe()


def test_wrong_simulation_reports_counterexample():
    v = verify_simulation(turtle_rule(), identity_rule(1), identity_map(1), [k1()], 2)
    assert not v.passed
    assert v.counterexample["cause"] == "trajectories differ"
    assert v.counterexample["t"] == 1
