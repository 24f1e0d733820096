"""Grid multi-agent path finding with (time-variant) prioritized planning.

Agents move on the free cells of a 4-connected grid and may wait.  In
prioritized planning each agent plans after its higher-priority agents and
treats their plans as moving obstacles.  Planning is receding: at every time
step agents replan over a window of ``window`` steps (``None`` means up to the
time limit ``K``) with that step's ordering, then everyone executes one move.

The single-agent planner is a backward dynamic program over the
time-expanded grid.  It minimizes the number of window steps spent away from
the target plus the static distance to the target at the window end, and
breaks ties by vertex id, so it is deterministic.
"""

from __future__ import annotations

import enum
import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .coupling import CapacityError

Cell = Tuple[int, int]
Order = Tuple[int, ...]  # agents (1-based) in planning order, first = highest priority

MAX_AGENTS = 4
MAX_TIME = 12


class Solvability(enum.Enum):
    P_SOLVABLE = "P_SOLVABLE"
    TP_SOLVABLE_ONLY = "TP_SOLVABLE_ONLY"
    PP_UNSOLVABLE = "PP_UNSOLVABLE"


@dataclass
class GridInstance:
    grid: List[str]
    starts: List[Cell]
    targets: List[Cell]
    K: int
    window: Optional[int] = None
    name: str = "instance"

    def __post_init__(self):
        self.starts = [tuple(s) for s in self.starts]
        self.targets = [tuple(t) for t in self.targets]
        if len(self.starts) != len(self.targets):
            raise ValueError("need one target per start")
        if len(set(self.starts)) != len(self.starts):
            raise ValueError("starts must be pairwise distinct")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError("targets must be pairwise distinct")
        for c in self.starts + self.targets:
            if not self.free(c):
                raise ValueError(f"cell {c} is not free")
        if self.K < 0:
            raise ValueError("time limit must be nonnegative")
        if self.window is not None and self.window < 1:
            raise ValueError("window must be at least 1")

    @property
    def n_agents(self) -> int:
        return len(self.starts)

    def free(self, c: Cell) -> bool:
        r, q = c
        return 0 <= r < len(self.grid) and 0 <= q < len(self.grid[r]) and self.grid[r][q] != "#"

    def cells(self) -> List[Cell]:
        return [(r, q) for r, row in enumerate(self.grid) for q, ch in enumerate(row) if ch != "#"]

    def moves(self, c: Cell) -> List[Cell]:
        """Wait plus the free 4-neighbors, in ascending cell order."""
        r, q = c
        nbrs = [c] + [n for n in ((r - 1, q), (r + 1, q), (r, q - 1), (r, q + 1)) if self.free(n)]
        return sorted(nbrs)

    def distances(self, target: Cell) -> Dict[Cell, int]:
        dist = {target: 0}
        queue = deque([target])
        while queue:
            c = queue.popleft()
            for n in self.moves(c):
                if n not in dist:
                    dist[n] = dist[c] + 1
                    queue.append(n)
        return dist

    def with_cell_opened(self, cell: Cell) -> "GridInstance":
        rows = [list(r) for r in self.grid]
        rows[cell[0]][cell[1]] = "."
        return GridInstance(["".join(r) for r in rows], self.starts, self.targets, self.K,
                            self.window, self.name)

    # -- files -----------------------------------------------------------------
    @classmethod
    def load(cls, path) -> "GridInstance":
        """Read a JSON sidecar; its ``grid`` entry names a text map next to it."""
        path = Path(path)
        doc = json.loads(path.read_text())
        grid = (path.parent / doc["grid"]).read_text().split()
        return cls(grid, doc["starts"], doc["targets"], doc["K"], doc.get("window"),
                   doc.get("name", path.stem))

    def sidecar(self, grid_file: str) -> dict:
        return {"name": self.name, "grid": grid_file, "starts": [list(s) for s in self.starts],
                "targets": [list(t) for t in self.targets], "K": self.K, "window": self.window}


@dataclass
class MAPFResult:
    feasible: bool
    paths: List[List[Cell]] = field(default_factory=list)  # executed, length K+1 each
    failed_at: Optional[int] = None  # time step whose planning failed


def detect_conflicts(paths: Sequence[Sequence[Cell]]) -> list:
    """Vertex conflicts ``(i, j, v, k)`` and swap conflicts ``(i, j, u, v, k)``.

    In a swap conflict agent ``i`` moves ``u -> v`` while ``j`` moves ``v -> u``
    between ``k`` and ``k + 1``.
    """
    if len({len(p) for p in paths}) > 1:
        raise ValueError("all plans must have equal length")
    paths = [[tuple(c) for c in p] for p in paths]
    out = []
    n = len(paths)
    T = len(paths[0]) if paths else 0
    for k in range(T):
        for i in range(n):
            for j in range(i + 1, n):
                if paths[i][k] == paths[j][k]:
                    out.append((i + 1, j + 1, paths[i][k], k))
                if k + 1 < T:
                    u, v = paths[i][k], paths[i][k + 1]
                    if u != v and paths[j][k] == v and paths[j][k + 1] == u:
                        out.append((i + 1, j + 1, u, v, k))
    return out


def plan_single(inst: GridInstance, agent: int, start: Cell, k: int,
                reserved: Sequence[Sequence[Cell]]) -> Optional[List[Cell]]:
    """Path for ``agent`` from ``start`` at time ``k`` to the window end.

    ``reserved`` holds the higher-priority window plans, each indexed from
    time ``k``.  Returns ``None`` if every path collides.
    """
    target = inst.targets[agent - 1]
    end = inst.K if inst.window is None else min(k + inst.window, inst.K)
    dist = inst.distances(target)
    blocked = [set() for _ in range(end - k + 1)]
    swaps = set()
    for path in reserved:
        for t in range(end - k + 1):
            blocked[t].add(path[t])
            if t + 1 <= end - k and path[t] != path[t + 1]:
                swaps.add((t, path[t + 1], path[t]))  # our move u -> v clashes with v -> u
    inf = float("inf")
    cells = inst.cells()
    # cost-to-go over window offsets 0..end-k
    cost = {c: inf if c in blocked[-1] else (inf if end == inst.K and c != target
                                               else dist.get(c, inf)) for c in cells}
    table = [cost]
    for t in range(end - k - 1, -1, -1):
        nxt = table[-1]
        cur = {}
        for c in cells:
            if c in blocked[t]:
                cur[c] = inf
                continue
            best = inf
            for n in inst.moves(c):
                if (t, c, n) in swaps:
                    continue
                best = min(best, (n != target) + nxt[n])
            cur[c] = best
        table.append(cur)
    table.reverse()
    if table[0][start] == inf:
        return None
    path = [start]
    for t in range(end - k):
        c = path[-1]
        options = [((n != target) + table[t + 1][n], n) for n in inst.moves(c)
                   if (t, c, n) not in swaps and table[t + 1][n] < inf]
        path.append(min(options)[1])
    return path


def plan_step(inst: GridInstance, positions: Sequence[Cell], k: int,
              order: Order) -> Optional[Dict[int, List[Cell]]]:
    """One prioritized planning round from ``positions`` at time ``k``."""
    plans: Dict[int, List[Cell]] = {}
    for i in order:
        path = plan_single(inst, i, positions[i - 1], k, [plans[j] for j in plans])
        if path is None:
            return None
        plans[i] = path
    return plans


def _as_order(prio) -> Order:
    if isinstance(prio, dict):
        return tuple(sorted(prio, key=lambda i: (prio[i], i)))
    return tuple(prio)


def pp_solve_grid(inst: GridInstance, prioritization) -> MAPFResult:
    """Receding prioritized planning.

    ``prioritization`` is a fixed ordering (a tuple of agents, first plans
    first, or a priority dict where smaller values plan first) or a list of
    per-step orderings of length ``K`` for a time-variant prioritization.
    """
    if isinstance(prioritization, list):
        schedule = [_as_order(p) for p in prioritization]
        if len(schedule) < inst.K:
            raise ValueError(f"need {inst.K} per-step orderings, got {len(schedule)}")
    else:
        schedule = [_as_order(prioritization)] * max(inst.K, 1)
    for order in schedule:
        if sorted(order) != list(range(1, inst.n_agents + 1)):
            raise ValueError(f"ordering {order} is not a permutation of the agents")
    positions = list(inst.starts)
    paths = [[p] for p in positions]
    for k in range(inst.K):
        plans = plan_step(inst, positions, k, schedule[k])
        if plans is None:
            return MAPFResult(False, paths, k)
        positions = [plans[i][1] for i in range(1, inst.n_agents + 1)]
        for i, p in enumerate(positions):
            paths[i].append(p)
    ok = positions == list(inst.targets)
    return MAPFResult(ok, paths, None if ok else inst.K)


@dataclass
class Classification:
    solvability: Solvability
    certificate: Optional[List[Order]] = None  # per-step orderings that solve the instance

    def to_dict(self) -> dict:
        return {"class": self.solvability.value,
                "certificate": None if self.certificate is None
                else [list(o) for o in self.certificate]}


def classify_solvability(inst: GridInstance) -> Classification:
    if inst.n_agents > MAX_AGENTS or inst.K > MAX_TIME:
        raise CapacityError(
            f"enumeration guard: {inst.n_agents} agents (max {MAX_AGENTS}), "
            f"K={inst.K} (max {MAX_TIME})")
    orders = list(itertools.permutations(range(1, inst.n_agents + 1)))
    for order in orders:
        if pp_solve_grid(inst, order).feasible:
            return Classification(Solvability.P_SOLVABLE, [order] * inst.K)
    schedule = _search_schedule(inst, orders)
    if schedule is not None:
        return Classification(Solvability.TP_SOLVABLE_ONLY, schedule)
    return Classification(Solvability.PP_UNSOLVABLE)


def _search_schedule(inst: GridInstance, orders: Sequence[Order]) -> Optional[List[Order]]:
    """Depth-first search over per-step orderings; the planning state is the positions."""
    dead = set()

    def search(k: int, positions: Tuple[Cell, ...], prev: Optional[Order]) -> Optional[List[Order]]:
        if k == inst.K:
            return [] if list(positions) == inst.targets else None
        if (k, positions) in dead:
            return None
        # try keeping the previous ordering first so certificates flip rarely
        candidates = ([prev] if prev else []) + [o for o in orders if o != prev]
        seen = set()
        for order in candidates:
            plans = plan_step(inst, positions, k, order)
            if plans is None:
                continue
            nxt = tuple(plans[i][1] for i in range(1, inst.n_agents + 1))
            if nxt in seen:
                continue
            seen.add(nxt)
            rest = search(k + 1, nxt, order)
            if rest is not None:
                return [order] + rest
        dead.add((k, positions))
        return None

    return search(0, tuple(inst.starts), None)


def jointly_solvable(inst: GridInstance) -> bool:
    """Centralized breadth-first search over joint configurations (oracle)."""
    start, goal = tuple(inst.starts), tuple(inst.targets)
    layer = {start}
    for _ in range(inst.K):
        nxt = set()
        for conf in layer:
            for move in itertools.product(*(inst.moves(c) for c in conf)):
                if len(set(move)) < len(move):
                    continue
                if any(move[a] == conf[b] and move[b] == conf[a] and a != b
                       for a in range(len(conf)) for b in range(a + 1, len(conf))):
                    continue
                nxt.add(move)
        layer = nxt
    return goal in layer
