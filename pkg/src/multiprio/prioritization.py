"""Prioritization functions.

All ties are broken by ascending agent id so that every agent derives the
same prioritization without communication.
"""

from __future__ import annotations

from typing import Dict, Sequence

import numpy as np

from .coupling import ComputationSequence, Prioritization, UndirectedCouplingGraph

STRATEGIES = ("constant", "random", "constraint", "color", "optimal", "explore")


def priorities_from_sequence(sequence: ComputationSequence, n_agents: int) -> Prioritization:
    """Unique priorities ``Z * n_agents + i`` for agent ``i`` in the Z-th class (Z from 1)."""
    members = [i for cls in sequence for i in cls]
    if sorted(members) != list(range(1, n_agents + 1)):
        raise ValueError(f"sequence {sequence!r} does not partition agents 1..{n_agents}")
    return {i: z * n_agents + i for z, cls in enumerate(sequence, start=1) for i in cls}


def p_constant(n_agents: int) -> Prioritization:
    if n_agents < 1:
        raise ValueError("need at least one agent")
    return {i: i for i in range(1, n_agents + 1)}


def p_random(n_agents: int, time_step: int, seed: int = 0) -> Prioritization:
    # keyed on (seed, time_step) only: every agent draws the same permutation
    rng = np.random.default_rng([seed, time_step])
    perm = rng.permutation(n_agents) + 1
    return {i: int(perm[i - 1]) for i in range(1, n_agents + 1)}


def p_constraint(g: UndirectedCouplingGraph) -> Prioritization:
    """More couplings (potential collisions) -> higher priority."""
    order = sorted(g.agents, key=lambda i: (-g.degree(i), i))
    return {i: rank for rank, i in enumerate(order, start=1)}


def greedy_coloring(g: UndirectedCouplingGraph) -> Dict[int, int]:
    """Smallest free color (starting at 1) for each agent in ascending id order."""
    color: Dict[int, int] = {}
    for i in g.agents:
        used = {color[j] for j in g.neighbors(i) if j in color}
        c = 1
        while c in used:
            c += 1
        color[i] = c
    return color


def p_color(g: UndirectedCouplingGraph) -> Prioritization:
    color = greedy_coloring(g)
    return {i: color[i] * g.n_agents + i for i in g.agents}


def p_from_order(order: Sequence[int]) -> Prioritization:
    return {i: rank for rank, i in enumerate(order, start=1)}
