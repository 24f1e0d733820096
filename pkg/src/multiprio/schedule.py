"""Latin-square computation schedules.

Rows of a schedule are computation sequences, columns are time slots.  Entries
are class indices ``0..n-1`` referring to positions in the initial sequence,
so row 0 is always ``[0, 1, ..., n-1]``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from itertools import permutations
from typing import Dict, FrozenSet, List, Sequence, Tuple

import numpy as np

from .coupling import (CapacityError, ComputationSequence, UndirectedCouplingGraph,
                       connected_components)

log = logging.getLogger(__name__)

MAX_ENUMERATION_ORDER = 5

Row = Tuple[int, ...]
RowSet = FrozenSet[Row]


class ScheduleIntegrityError(RuntimeError):
    pass


@dataclass(frozen=True)
class Schedule:
    matrix: np.ndarray
    restarts: int = 0

    @property
    def n_classes(self) -> int:
        return self.matrix.shape[0]

    def rows(self) -> List[Row]:
        return [tuple(int(c) for c in row) for row in self.matrix]

    def to_json(self) -> str:
        return json.dumps(self.matrix.tolist())


def schedule_rng(time_step: int) -> np.random.Generator:
    # counter-based generator keyed by the time step only
    return np.random.Generator(np.random.Philox(key=int(time_step)))


def build_schedule(n_classes: int, time_step: int) -> Schedule:
    """Fill rows 1.. by repeatedly choosing the most constrained column.

    A row that runs into a column without options is discarded and redrawn.
    """
    if n_classes < 1:
        raise ValueError("need at least one class")
    n = n_classes
    rng = schedule_rng(time_step)
    m = np.full((n, n), -1, dtype=int)
    m[0] = np.arange(n)
    everything = set(range(n))
    restarts = 0
    q = 1
    while q < n:
        valid = True
        todo = n
        while todo > 0:
            best_col, best_opts = -1, None
            for col in range(n):
                if m[q, col] >= 0:
                    continue
                opts = everything - set(m[q].tolist()) - set(m[:q, col].tolist())
                if best_opts is None or len(opts) < len(best_opts):
                    best_col, best_opts = col, opts
            if not best_opts:
                valid = False
                break
            choices = sorted(best_opts)
            m[q, best_col] = choices[int(rng.integers(len(choices)))]
            todo -= 1
        if valid:
            q += 1
        else:
            m[q] = -1
            restarts += 1
    if restarts:
        log.debug("schedule n=%d k=%d needed %d row restarts", n, time_step, restarts)
    return Schedule(m, restarts)


def validate_schedule(matrix) -> bool:
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"schedule must be square, got shape {m.shape}")
    n = m.shape[0]
    symbols = set(m[0].tolist())
    if len(symbols) != n:
        return False
    for k in range(n):
        if set(m[k].tolist()) != symbols or set(m[:, k].tolist()) != symbols:
            return False
    return True


def row_for_slot(matrix, cls: int, slot: int) -> int:
    """Row whose entry in column ``slot`` is ``cls``."""
    m = np.asarray(matrix)
    hits = np.flatnonzero(m[:, slot] == cls)
    if len(hits) != 1:
        raise ScheduleIntegrityError(
            f"class {cls} appears {len(hits)} times in column {slot}")
    return int(hits[0])


def row_sequences(schedule: Schedule, initial: ComputationSequence) -> List[ComputationSequence]:
    """Map each schedule row to the computation sequence it denotes."""
    if len(initial) != schedule.n_classes:
        raise ValueError("schedule size does not match the number of classes")
    return [tuple(initial[c] for c in row) for row in schedule.rows()]


def _latin_row_sets(n: int) -> List[RowSet]:
    """Latin squares with strictly increasing rows, i.e. one per row-set."""
    perms = list(permutations(range(n)))
    out: List[RowSet] = []
    rows: List[Row] = []
    col_used = [set() for _ in range(n)]

    def extend(start: int):
        if len(rows) == n:
            out.append(frozenset(rows))
            return
        for idx in range(start, len(perms)):
            p = perms[idx]
            if any(p[c] in col_used[c] for c in range(n)):
                continue
            rows.append(p)
            for c in range(n):
                col_used[c].add(p[c])
            extend(idx + 1)
            rows.pop()
            for c in range(n):
                col_used[c].discard(p[c])

    extend(0)
    return out


def _check_order(n: int):
    if n < 1:
        raise ValueError("order must be positive")
    if n > MAX_ENUMERATION_ORDER:
        raise CapacityError(f"order {n} exceeds enumeration guard {MAX_ENUMERATION_ORDER}")


def unique_schedule_sets(n: int) -> List[RowSet]:
    _check_order(n)
    return _latin_row_sets(n)


def schedule_graph(n: int) -> Tuple[List[RowSet], UndirectedCouplingGraph]:
    """Unique schedules as vertices ``1..V``; edge iff two schedules share a row."""
    sets = unique_schedule_sets(n)
    by_row: Dict[Row, List[int]] = {}
    for v, rows in enumerate(sets, start=1):
        for r in rows:
            by_row.setdefault(r, []).append(v)
    edges = set()
    for members in by_row.values():
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                edges.add((members[a], members[b]))
    return sets, UndirectedCouplingGraph(len(sets), frozenset(edges))


def reachable_sequences(n: int, start: Sequence[int] = None) -> set:
    """All rows appearing in schedules connected to one containing ``start``."""
    start = tuple(range(n)) if start is None else tuple(start)
    sets, graph = schedule_graph(n)
    for comp in connected_components(graph):
        if any(start in sets[v - 1] for v in comp):
            return set().union(*(sets[v - 1] for v in comp))
    return set()
