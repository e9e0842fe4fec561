"""Nash equilibria: outcome characterization, synthesis, verification, decisions."""

from __future__ import annotations

from .game import INF, Game, Lasso, first_visits
from .lassos import lambda_consistent
from .machines import StrategyMachine, best_response_cost, outcome
from .queries import Verdict, solve_query
from .values import solve_view, val_labeling


def is_ne_outcome(game: Game, lasso: Lasso) -> bool:
    """A play is an NE outcome iff it is Val-consistent."""
    if lasso.start != game.init:
        raise ValueError("lasso does not start at the initial vertex")
    return lambda_consistent(game, lasso, val_labeling(game))


def synthesize_ne_machines(game: Game, lasso: Lasso, *, check: bool = True) -> list[StrategyMachine]:
    """Follow the lasso; after a first deviation by j, punish j forever.

    States: ``init``, one per edge ρ_tρ_{t+1} of hℓ, one for the closing edge
    ρ_nρ_k, and one punishment state per player, |hℓ| + 2 + |Π| in total.
    """
    if lasso.start != game.init:
        raise ValueError("lasso does not start at the initial vertex")
    if check and not is_ne_outcome(game, lasso):
        raise ValueError("lasso is not Val-consistent; punishment machines would not form an NE")
    rho = lasso.vertices
    n = lasso.length
    k = len(lasso.prefix)
    close = n + 1
    dev0 = n + 2
    names = ["init"] + [f"e{t}" for t in range(n)] + ["close"]
    names += [f"dev{j}" for j in range(1, game.players + 1)]

    def expected(s: int) -> int:
        return rho[0] if s == 0 else rho[s] if s <= n else rho[k]

    def chooser(s: int) -> int:
        return rho[0] if s == 0 else rho[s - 1] if s <= n else rho[n]

    def after(s: int) -> int:
        if s == 0:
            return 1 if n >= 1 else close
        if s <= n:
            return s + 1 if s < n else close
        return k + 1 if k < n else close

    solutions = {j: solve_view(game, j) for j in range(1, game.players + 1)}

    def punish(p: int, j: int, v: int) -> int:
        _, smin, smax = solutions[j]
        return smin[v] if p == j else smax[v]

    size = dev0 + game.players
    update = []
    for s in range(size):
        row = []
        for v in range(game.size):
            if s >= dev0:
                row.append(s)
            elif v == expected(s):
                row.append(after(s))
            else:
                row.append(dev0 + game.owner[chooser(s)] - 1)
        update.append(tuple(row))

    machines = []
    for p in range(1, game.players + 1):
        nxt = []
        for s in range(size):
            row = []
            for v in range(game.size):
                if game.owner[v] != p:
                    row.append(-1)
                    continue
                t = update[s][v]
                if t < dev0:
                    row.append(expected(t))
                else:
                    row.append(punish(p, t - dev0 + 1, v))
            nxt.append(tuple(row))
        machines.append(StrategyMachine(p, tuple(names), 0, tuple(update), tuple(nxt)))
    return machines


def verify_ne(game: Game, machines) -> bool:
    """No player lowers its cost (raises its gain) by deviating from the start."""
    costs = first_visits(game, outcome(game, machines))
    for i in range(1, game.players + 1):
        c = costs[i - 1]
        if c == 0:
            continue
        br = best_response_cost(game, machines, i)
        if game.qualitative:
            if c == INF and br != INF:
                return False
        elif br < c:
            return False
    return True


def decide_ne(game: Game, query, *, jobs: int = 1, machines: bool = True) -> Verdict:
    verdict = solve_query(game, val_labeling(game), query, solution="ne", jobs=jobs)
    if verdict.answer and machines:
        verdict.machines = synthesize_ne_machines(game, verdict.lasso)
    return verdict
