"""Coupling graphs, priority-induced orientation and agent classes.

Agents are dense integer ids ``1..n_agents``.  A prioritization is a plain
``dict`` mapping agent id to a natural number; a lower number means a higher
priority.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from math import prod
from typing import Dict, FrozenSet, Iterable, List, Mapping, Sequence, Tuple

Prioritization = Dict[int, int]
AgentClass = Tuple[int, ...]
ComputationSequence = Tuple[AgentClass, ...]

MAX_ENUMERATION_EDGES = 20


class NotADagError(ValueError):
    """Raised when agent classes are requested for a cyclic graph."""


class CapacityError(RuntimeError):
    """Raised when an exhaustive enumeration would exceed its guard."""


def _normalize_edge(i: int, j: int) -> Tuple[int, int]:
    if i == j:
        raise ValueError(f"self-loop on agent {i}")
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class UndirectedCouplingGraph:
    n_agents: int
    edges: FrozenSet[Tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        norm = frozenset(_normalize_edge(i, j) for i, j in self.edges)
        for i, j in norm:
            if not (1 <= i <= self.n_agents and 1 <= j <= self.n_agents):
                raise ValueError(f"edge {(i, j)} references unknown agent")
        object.__setattr__(self, "edges", norm)

    @classmethod
    def from_edges(cls, n_agents: int, edges: Iterable[Sequence[int]]):
        return cls(n_agents, frozenset(tuple(e) for e in edges))

    @classmethod
    def complete(cls, n_agents: int):
        return cls(n_agents, frozenset(
            (i, j) for i in range(1, n_agents + 1) for j in range(i + 1, n_agents + 1)))

    @property
    def agents(self) -> range:
        return range(1, self.n_agents + 1)

    def neighbors(self, i: int) -> set:
        self._check_agent(i)
        return {b if a == i else a for a, b in self.edges if i in (a, b)}

    def degree(self, i: int) -> int:
        return len(self.neighbors(i))

    def sorted_edges(self) -> List[Tuple[int, int]]:
        return sorted(self.edges)

    def _check_agent(self, i: int):
        if not 1 <= i <= self.n_agents:
            raise KeyError(f"unknown agent {i}")

    def to_json(self) -> str:
        return json.dumps({"n_agents": self.n_agents,
                           "edges": [list(e) for e in self.sorted_edges()]})

    @classmethod
    def from_json(cls, text: str):
        doc = json.loads(text)
        return cls.from_edges(doc["n_agents"], doc["edges"])


@dataclass(frozen=True)
class DirectedCouplingGraph:
    n_agents: int
    arcs: FrozenSet[Tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        arcs = frozenset((int(i), int(j)) for i, j in self.arcs)
        for i, j in arcs:
            if i == j:
                raise ValueError(f"self-loop on agent {i}")
            if not (1 <= i <= self.n_agents and 1 <= j <= self.n_agents):
                raise ValueError(f"arc {(i, j)} references unknown agent")
        object.__setattr__(self, "arcs", arcs)

    @property
    def agents(self) -> range:
        return range(1, self.n_agents + 1)

    def predecessors(self, i: int) -> set:
        self._check_agent(i)
        return {a for a, b in self.arcs if b == i}

    def successors(self, i: int) -> set:
        self._check_agent(i)
        return {b for a, b in self.arcs if a == i}

    def neighbors(self, i: int) -> set:
        return self.predecessors(i) | self.successors(i)

    def sources(self) -> List[int]:
        heads = {b for _, b in self.arcs}
        return [i for i in self.agents if i not in heads]

    def sinks(self) -> List[int]:
        tails = {a for a, _ in self.arcs}
        return [i for i in self.agents if i not in tails]

    def undirected(self) -> UndirectedCouplingGraph:
        return UndirectedCouplingGraph(self.n_agents, frozenset(self.arcs))

    def _check_agent(self, i: int):
        if not 1 <= i <= self.n_agents:
            raise KeyError(f"unknown agent {i}")


def is_valid_prioritization(g: UndirectedCouplingGraph, p: Mapping[int, int]) -> bool:
    """True iff coupled agents have pairwise different priorities."""
    missing = [i for i in g.agents if i not in p]
    if missing:
        raise KeyError(f"no priority for agents {missing}")
    return all(p[i] != p[j] for i, j in g.edges)


def orient(g: UndirectedCouplingGraph, p: Mapping[int, int]) -> DirectedCouplingGraph:
    """Point every coupling edge towards the agent with lower priority."""
    if not is_valid_prioritization(g, p):
        raise ValueError("prioritization assigns equal priorities to coupled agents")
    arcs = frozenset((i, j) if p[i] < p[j] else (j, i) for i, j in g.edges)
    return DirectedCouplingGraph(g.n_agents, arcs)


def find_agent_classes(g: DirectedCouplingGraph) -> ComputationSequence:
    """Peel off sources layer by layer.

    Each layer is a set of mutually uncoupled agents that may solve in
    parallel once all earlier layers are done.
    """
    todo = set(g.agents)
    arcs = set(g.arcs)
    sequence = []
    while todo:
        heads = {j for _, j in arcs}
        layer = tuple(sorted(i for i in todo if i not in heads))
        if not layer:
            raise NotADagError("Graph is no DAG")
        sequence.append(layer)
        todo.difference_update(layer)
        arcs = {(i, j) for i, j in arcs if i not in layer}
    return tuple(sequence)


def _reaches(adj: Dict[int, set], start: int, goal: int) -> bool:
    stack, seen = [start], {start}
    while stack:
        v = stack.pop()
        if v == goal:
            return True
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return False


def enumerate_acyclic_orientations(
    g: UndirectedCouplingGraph, max_edges: int = MAX_ENUMERATION_EDGES
) -> List[DirectedCouplingGraph]:
    """All acyclic orientations, built edge by edge with a cycle check per step."""
    edges = g.sorted_edges()
    if len(edges) > max_edges:
        raise CapacityError(
            f"{len(edges)} edges exceed the enumeration guard of {max_edges}")
    adj: Dict[int, set] = {i: set() for i in g.agents}
    chosen: List[Tuple[int, int]] = []
    out: List[DirectedCouplingGraph] = []

    def extend(idx: int):
        if idx == len(edges):
            out.append(DirectedCouplingGraph(g.n_agents, frozenset(chosen)))
            return
        i, j = edges[idx]
        for a, b in ((i, j), (j, i)):
            # adding a->b closes a cycle iff b already reaches a
            if _reaches(adj, b, a):
                continue
            adj[a].add(b)
            chosen.append((a, b))
            extend(idx + 1)
            chosen.pop()
            adj[a].discard(b)

    extend(0)
    return out


def orientation_count_bound(g: UndirectedCouplingGraph) -> int:
    degree = {i: 0 for i in g.agents}
    for i, j in g.edges:
        degree[i] += 1
        degree[j] += 1
    return prod(d + 1 for d in degree.values())


def longest_path_vertices(g: DirectedCouplingGraph) -> int:
    """Number of vertices on a longest directed path (DP over a topological order)."""
    if g.n_agents == 0:
        return 0
    order = [i for layer in find_agent_classes(g) for i in layer]
    best = {i: 1 for i in g.agents}
    succ = {i: [] for i in g.agents}
    for a, b in g.arcs:
        succ[a].append(b)
    for i in order:
        for j in succ[i]:
            best[j] = max(best[j], best[i] + 1)
    return max(best.values())


def connected_components(g: UndirectedCouplingGraph) -> List[Tuple[int, ...]]:
    adj: Dict[int, set] = {i: set() for i in g.agents}
    for i, j in g.edges:
        adj[i].add(j)
        adj[j].add(i)
    seen, comps = set(), []
    for start in g.agents:
        if start in seen:
            continue
        comp, queue = [], deque([start])
        seen.add(start)
        while queue:
            v = queue.popleft()
            comp.append(v)
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        comps.append(tuple(sorted(comp)))
    return comps
