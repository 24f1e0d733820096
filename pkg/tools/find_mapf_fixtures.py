"""Search small random grids for MAPF instances with prescribed solvability properties.

Run once; the instances it prints are committed under
``src/multiprio/scenarios/mapf`` together with their certificates.
"""

import argparse
import itertools
import json
import random

from multiprio.mapf import (GridInstance, Solvability, classify_solvability, jointly_solvable,
                            pp_solve_grid)


def random_instance(rng, n_agents, rows, cols, wall_p, K, window):
    grid = ["".join("#" if rng.random() < wall_p else "." for _ in range(cols)) for _ in range(rows)]
    free = [(r, c) for r in range(rows) for c in range(cols) if grid[r][c] == "."]
    if len(free) < 2 * n_agents:
        return None
    cells = rng.sample(free, 2 * n_agents)
    return GridInstance(grid, cells[:n_agents], cells[n_agents:], K, window)


def flips(cert):
    return [k for k in range(1, len(cert)) if cert[k] != cert[k - 1]]


def want_bottleneck(inst):
    ok = [o for o in itertools.permutations(range(1, inst.n_agents + 1))
          if pp_solve_grid(inst, o).feasible]
    return len(ok) == 2 and len({o[-1] for o in ok}) == 1


def want_tp_only(inst):
    c = classify_solvability(inst)
    return c.solvability is Solvability.TP_SOLVABLE_ONLY and flips(c.certificate) == [2]


def want_unsolvable(inst):
    return (classify_solvability(inst).solvability is Solvability.PP_UNSOLVABLE
            and jointly_solvable(inst))


TARGETS = {
    "bottleneck": (3, want_bottleneck, [None]),
    "tp_only": (2, want_tp_only, [1, 2, 3]),
    "pp_unsolvable": (2, want_unsolvable, [None]),
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("kind", choices=sorted(TARGETS))
    ap.add_argument("--tries", type=int, default=200000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    n_agents, pred, windows = TARGETS[args.kind]
    rng = random.Random(args.seed)
    for t in range(args.tries):
        rows, cols = rng.choice([(2, 4), (3, 3), (3, 4), (2, 5), (3, 5), (4, 4)])
        K = rng.randint(4, 8)
        inst = random_instance(rng, n_agents, rows, cols, rng.choice([0.1, 0.2, 0.3]), K,
                               rng.choice(windows))
        if inst is None:
            continue
        if pred(inst):
            print(json.dumps({"try": t, "grid": inst.grid, **inst.sidecar("-")}))
            print("\n".join(inst.grid))
            print(classify_solvability(inst).to_dict())
            return
    print("none found")


if __name__ == "__main__":
    main()
