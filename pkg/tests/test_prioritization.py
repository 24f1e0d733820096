import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiprio.coupling import (UndirectedCouplingGraph, find_agent_classes,
                                is_valid_prioritization, orient)
from multiprio.prioritization import (greedy_coloring, p_color, p_constant, p_constraint,
                                      p_from_order, p_random, priorities_from_sequence)

from .test_coupling import DIAMOND, graphs


def test_diamond_priorities():
    p = priorities_from_sequence(((1,), (2, 3), (4,)), 4)
    assert p == {1: 5, 2: 10, 3: 11, 4: 16}


def test_sequence_must_partition_agents():
    with pytest.raises(ValueError):
        priorities_from_sequence(((1,), (2,)), 3)
    with pytest.raises(ValueError):
        priorities_from_sequence(((1, 2), (2, 3)), 3)


@settings(max_examples=200, deadline=None)
@given(graphs(), st.data())
def test_retention_reproduces_the_sequence(g, data):
    order = data.draw(st.permutations(list(g.agents)))
    seq = find_agent_classes(orient(g, p_from_order(order)))
    p = priorities_from_sequence(seq, g.n_agents)
    assert len(set(p.values())) == g.n_agents  # unique: valid for every coupling graph
    assert find_agent_classes(orient(g, p)) == seq


def test_constant():
    assert p_constant(3) == {1: 1, 2: 2, 3: 3}
    with pytest.raises(ValueError):
        p_constant(0)


def test_random_is_a_seeded_permutation():
    a = p_random(6, time_step=4, seed=1)
    assert sorted(a.values()) == list(range(1, 7))
    assert a == p_random(6, time_step=4, seed=1)
    draws = {tuple(p_random(6, k, 1).values()) for k in range(20)}
    assert len(draws) > 1


def test_constraint_prefers_high_degree():
    g = UndirectedCouplingGraph.from_edges(4, [(1, 4), (2, 4), (3, 4)])
    p = p_constraint(g)
    assert p[4] == 1
    assert [p[1], p[2], p[3]] == [2, 3, 4]


@settings(max_examples=200, deadline=None)
@given(graphs())
def test_coloring_is_proper_and_color_priorities_valid(g):
    color = greedy_coloring(g)
    assert all(color[i] != color[j] for i, j in g.edges)
    assert is_valid_prioritization(g, p_color(g))
    # agents of one color end up in the same or later classes, never coupled to each other
    assert max(color.values(), default=0) <= max((g.degree(i) for i in g.agents), default=0) + 1


def test_color_on_diamond():
    assert greedy_coloring(DIAMOND) == {1: 1, 2: 2, 3: 2, 4: 1}
    assert find_agent_classes(orient(DIAMOND, p_color(DIAMOND))) == ((1, 4), (2, 3))


def test_every_strategy_is_valid_on_complete_graphs():
    for n in range(1, 6):
        g = UndirectedCouplingGraph.complete(n)
        for p in (p_constant(n), p_random(n, 0), p_constraint(g), p_color(g)):
            assert is_valid_prioritization(g, p)
        for order in itertools.permutations(range(1, n + 1)):
            assert len(find_agent_classes(orient(g, p_from_order(order)))) == n
