import random

import pytest

from cgd.arith import (RuleSignature, rank_graph, rank_rule, rule_count, rule_slots, slot_images,
                       unrank_graph, unrank_rule)
from cgd.builders import k1, k2
from cgd.encodings import string_encode
from cgd.errors import BudgetExceeded
from cgd.rules import turtle_rule

from oracles import shortlex_key, two_port_graphs

BLANK = ("·",)
SIG = RuleSignature(1, (), (), 0, 2)


@pytest.fixture(scope="module")
def oracle_order():
    graphs = set()
    for n in range(1, 9):
        graphs |= two_port_graphs(n)
    keyed = [(shortlex_key(string_encode(g)), g) for g in graphs]
    # every string of at most 34 tokens has at most 8 vertices
    keyed = sorted(kg for kg in keyed if kg[0][0] <= 34)
    return [g for _, g in keyed]


def test_first_graphs():
    assert unrank_graph(0, 2, BLANK) == k1(2)
    assert string_encode(unrank_graph(1, 2, BLANK)) == "$·(0,1);"
    assert unrank_graph(2, 2, BLANK) == k2(2)
    assert rank_graph(k1(2), BLANK) == 0


def test_unrank_matches_enumeration_oracle(oracle_order):
    assert len(oracle_order) > 1000
    for i in range(1000):
        assert unrank_graph(i, 2, BLANK) == oracle_order[i]


def test_graph_bijection_and_order():
    seen = set()
    prev = None
    for i in range(1000):
        x = unrank_graph(i, 2, BLANK)
        assert rank_graph(x, BLANK) == i
        assert x not in seen
        seen.add(x)
        key = shortlex_key(string_encode(x))
        assert prev is None or prev < key
        prev = key


def test_rank_outside_signature():
    with pytest.raises(ValueError):
        rank_graph(k1(2, label="z"), BLANK)


def test_slot_sizes():
    alone, paired = rule_slots(SIG)
    # one vertex named by any subset of the spare atoms, or two joined vertices
    assert len(slot_images(alone, SIG)) == 2 ** 2 + (3 ** 2 - 2 ** 2)
    assert len(slot_images(paired, SIG)) == 2 ** 5 + (3 ** 5 - 2 ** 5)
    assert rule_count(SIG) == 9 * 243


def test_turtle_index_is_stable():
    assert rank_rule(turtle_rule()) == 997
    assert unrank_rule(997, SIG).same_as(turtle_rule())


def test_rule_roundtrip():
    rng = random.Random(2024)
    for _ in range(200):
        n = rng.randrange(rule_count(SIG))
        assert rank_rule(unrank_rule(n, SIG)) == n
    assert rank_rule(unrank_rule(0, SIG)) == 0


def test_rule_index_out_of_range():
    with pytest.raises(BudgetExceeded):
        unrank_rule(rule_count(SIG), SIG)
    with pytest.raises(ValueError):
        unrank_rule(-1, SIG)
