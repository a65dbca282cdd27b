import random

import pytest
from hypothesis import given, settings, strategies as st

import properties as props
from cgd.graph import canonicalize

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)
fixed = settings(derandomize=True, max_examples=300, deadline=None)


@fixed
@given(seeds)
def test_shift_algebra(seed):
    props.shift_algebra(random.Random(seed))


@fixed
@given(seeds)
def test_disk_nesting(seed):
    props.disk_nesting(random.Random(seed))


@fixed
@given(seeds)
def test_union_laws(seed):
    props.union_laws(random.Random(seed))


@fixed
@given(seeds)
def test_degree_bound(seed):
    props.degree_bound(random.Random(seed))


@pytest.fixture(scope="module")
def trajectories():
    return props.MachineTrajectories(seed=3)


def test_off_machine_identity(trajectories):
    rng = random.Random(0)
    for _ in range(300):
        props.off_machine_identity(rng, trajectories)


@fixed
@given(seeds)
def test_canonical_form_is_idempotent(seed):
    rng = random.Random(seed)
    x = props._graph(rng)
    assert canonicalize(x.to_named(), ()) == x
