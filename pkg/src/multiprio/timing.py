"""Networked computation time as the longest path through a computation graph.

Vertices are solve tasks ``(agent, row)`` plus a virtual source ``S`` and
sink ``G``.  An arc carries the solve time of its tail task (zero when the
tail is ``S``), so the longest ``S -> G`` path weight is the time until the
last solve finishes.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Dict, Hashable, Iterable, List, Mapping, Sequence, Tuple

from .coupling import ComputationSequence, DirectedCouplingGraph

SOURCE = "S"
SINK = "G"


class CyclicGraphError(RuntimeError):
    pass


class ComputationGraph:
    def __init__(self):
        self.weights: Dict[Hashable, float] = {}
        self.arcs: Dict[Hashable, set] = defaultdict(set)

    def add_task(self, task: Hashable, time: float):
        if time < 0:
            raise ValueError(f"negative solve time for {task!r}")
        self.weights[task] = float(time)

    def add_arc(self, a: Hashable, b: Hashable):
        self.arcs[a].add(b)

    def close(self):
        """Connect sources to ``S`` and sinks to ``G``."""
        heads = {b for succ in self.arcs.values() for b in succ}
        for t in self.weights:
            if t not in heads:
                self.arcs[SOURCE].add(t)
            if not self.arcs.get(t):
                self.arcs[t].add(SINK)
        return self

    def weight(self, a: Hashable, b: Hashable) -> float:
        return self.weights.get(a, 0.0)

    def longest_path(self) -> float:
        order = self._topological_order()
        dist = {v: float("-inf") for v in order}
        dist[SOURCE] = 0.0
        for v in order:
            if dist[v] == float("-inf"):
                continue
            for w in self.arcs.get(v, ()):
                dist[w] = max(dist[w], dist[v] + self.weight(v, w))
        return max(dist.get(SINK, 0.0), 0.0)

    def _topological_order(self) -> List[Hashable]:
        vertices = set(self.weights) | {SOURCE, SINK}
        indeg = {v: 0 for v in vertices}
        for a, succ in self.arcs.items():
            for b in succ:
                indeg[b] += 1
        ready = sorted((v for v in vertices if indeg[v] == 0), key=repr)
        order = []
        while ready:
            v = ready.pop()
            order.append(v)
            for w in self.arcs.get(v, ()):
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append(w)
        if len(order) != len(vertices):
            raise CyclicGraphError("computation graph contains a cycle")
        return order


def single_graph(dag: DirectedCouplingGraph, times: Mapping[int, float]) -> ComputationGraph:
    g = ComputationGraph()
    for i in dag.agents:
        g.add_task(i, times[i])
    for a, b in dag.arcs:
        g.add_arc(a, b)
    return g.close()


def explore_graph(row_dags: Sequence[DirectedCouplingGraph],
                  row_sequences: Sequence[ComputationSequence],
                  times: Mapping[Tuple[int, int], float]) -> ComputationGraph:
    """Coupling arcs inside each row plus arcs serializing every agent's own solves.

    ``times`` maps ``(agent, row)`` to a solve time.  In row ``q`` agent ``i``
    computes in the slot given by the position of its class in that row's
    sequence; consecutive slots of one agent are chained.
    """
    g = ComputationGraph()
    slots: Dict[int, List[Tuple[int, int]]] = defaultdict(list)
    for q, (dag, seq) in enumerate(zip(row_dags, row_sequences)):
        for slot, cls in enumerate(seq):
            for i in cls:
                g.add_task((i, q), times[(i, q)])
                slots[i].append((slot, q))
        for a, b in dag.arcs:
            g.add_arc((a, q), (b, q))
    for i, entries in slots.items():
        entries.sort()
        for (_, qa), (_, qb) in zip(entries, entries[1:]):
            g.add_arc((i, qa), (i, qb))
    return g.close()


def networked_computation_time(mode: str, dags, sequences=None, times=None) -> float:
    """Longest ``S -> G`` path for one prioritization or a whole schedule."""
    if mode == "single":
        return single_graph(dags, times).longest_path()
    if mode == "explore":
        return explore_graph(dags, sequences, times).longest_path()
    raise ValueError(f"unknown mode {mode!r}")


def chain_dag(n: int) -> DirectedCouplingGraph:
    return DirectedCouplingGraph(n, frozenset((i, i + 1) for i in range(1, n)))


def uniform_times(tasks: Iterable[Hashable], t: float) -> Dict[Hashable, float]:
    return {task: t for task in tasks}
