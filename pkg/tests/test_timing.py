import itertools

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiprio.coupling import (DirectedCouplingGraph, UndirectedCouplingGraph,
                                find_agent_classes, orient)
from multiprio.prioritization import p_from_order, priorities_from_sequence
from multiprio.schedule import build_schedule, row_sequences
from multiprio.timing import (ComputationGraph, CyclicGraphError, chain_dag, explore_graph,
                              networked_computation_time, single_graph, uniform_times)

from .test_coupling import graphs


def oracle_longest(cg: ComputationGraph) -> float:
    g = nx.DiGraph()
    for a, succ in cg.arcs.items():
        for b in succ:
            g.add_edge(repr(a), repr(b), weight=cg.weight(a, b))
    return nx.dag_longest_path_length(g, weight="weight")


def test_chain_and_parallel_examples():
    assert networked_computation_time("single", chain_dag(3), times={1: 1, 2: 2, 3: 3}) == 6
    parallel = DirectedCouplingGraph(2, frozenset())
    assert networked_computation_time("single", parallel, times={1: 2, 2: 3}) == 3


@pytest.mark.parametrize("n", [2, 3, 4])
def test_explore_has_no_overhead_for_equal_times(n):
    dag = chain_dag(n)
    seq = find_agent_classes(dag)
    g = dag.undirected()
    for k in range(5):
        rows = row_sequences(build_schedule(n, k), seq)
        dags = [orient(g, priorities_from_sequence(r, n)) for r in rows]
        times = uniform_times([(i, q) for i in range(1, n + 1) for q in range(n)], 0.5)
        single = networked_computation_time("single", dag, times={i: 0.5 for i in range(1, n + 1)})
        explore = networked_computation_time("explore", dags, rows, times)
        assert single == explore == pytest.approx(n * 0.5)


@settings(max_examples=100, deadline=None)
@given(graphs(max_n=6), st.data())
def test_longest_path_matches_oracle_and_dominates_rows(g, data):
    order = data.draw(st.permutations(list(g.agents)))
    seq = find_agent_classes(orient(g, p_from_order(order)))
    n = len(seq)
    k = data.draw(st.integers(0, 1000))
    rows = row_sequences(build_schedule(n, k), seq)
    dags = [orient(g, priorities_from_sequence(r, g.n_agents)) for r in rows]
    times = {(i, q): data.draw(st.floats(0, 5)) for i in g.agents for q in range(n)}
    cg = explore_graph(dags, rows, times)
    total = cg.longest_path()
    assert total == pytest.approx(oracle_longest(cg))
    for q, d in enumerate(dags):
        row_time = single_graph(d, {i: times[(i, q)] for i in g.agents}).longest_path()
        assert total >= row_time - 1e-12


def test_negative_times_rejected():
    with pytest.raises(ValueError):
        single_graph(chain_dag(2), {1: -1.0, 2: 1.0})


def test_cycle_detected():
    cg = ComputationGraph()
    cg.add_task("a", 1)
    cg.add_task("b", 1)
    cg.add_arc("a", "b")
    cg.add_arc("b", "a")
    cg.arcs["S"].add("a")
    with pytest.raises(CyclicGraphError):
        cg.longest_path()


def test_unknown_mode():
    with pytest.raises(ValueError):
        networked_computation_time("batch", chain_dag(2), times={1: 1, 2: 1})
