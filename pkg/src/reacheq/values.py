"""Coalitional two-player zero-sum views of a game and their values.

In the view for player ``i``, Min owns ``V_i`` and wants to reach ``F_i``
quickly; Max is the coalition of all other players.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache

from .game import INF, Game

Labeling = tuple  # vertex-indexed values in ℕ ∪ {INF}


@dataclass(frozen=True)
class CoalitionalView:
    game: Game
    min_player: int

    def is_min(self, v: int) -> bool:
        return self.game.owner[v] == self.min_player

    @property
    def target(self) -> frozenset[int]:
        return self.game.targets[self.min_player - 1]


def _pick(game: Game, options):
    return min(options, key=lambda w: game.names[w])


def quant_values(view: CoalitionalView, *, trace: list | None = None):
    """Values and optimal positional strategies by value iteration from +∞.

    Returns ``(values, min_strategy, max_strategy)``; strategies map each
    vertex of their side to a successor, ties going to the smallest name.
    With ``trace`` set, every round's value vector is appended to it.
    """
    game = view.game
    n = game.size
    target = view.target
    values = [INF] * n
    iso = [view.is_min(v) for v in range(n)]
    for _ in range(n + 1):
        new = []
        for v in range(n):
            if v in target:
                new.append(0)
                continue
            vals = [values[w] for w in game.succ[v]]
            new.append(1 + (min(vals) if iso[v] else max(vals)))
        if trace is not None:
            trace.append(tuple(new))
        if new == values:
            break
        values = new
    min_strategy, max_strategy = {}, {}
    for v in range(n):
        ws = game.succ[v]
        if iso[v]:
            best = min(values[w] for w in ws)
            min_strategy[v] = _pick(game, [w for w in ws if values[w] == best])
        else:
            best = max(values[w] for w in ws)
            max_strategy[v] = _pick(game, [w for w in ws if values[w] == best])
    return tuple(values), min_strategy, max_strategy


def qual_attractor(view: CoalitionalView):
    """Min's attractor to the target, plus attractor and trap strategies."""
    game = view.game
    n = game.size
    pred = [[] for _ in range(n)]
    for v, ws in enumerate(game.succ):
        for w in ws:
            pred[w].append(v)
    rank = [INF] * n
    remaining = [len(ws) for ws in game.succ]
    queue = deque()
    for v in view.target:
        rank[v] = 0
        queue.append(v)
    while queue:
        w = queue.popleft()
        for v in pred[w]:
            if rank[v] != INF:
                continue
            if view.is_min(v):
                rank[v] = rank[w] + 1
                queue.append(v)
            else:
                remaining[v] -= 1
                if remaining[v] == 0:
                    rank[v] = rank[w] + 1
                    queue.append(v)
    win = frozenset(v for v in range(n) if rank[v] != INF)
    min_strategy, max_strategy = {}, {}
    for v in range(n):
        ws = game.succ[v]
        if view.is_min(v):
            if v in win and rank[v] > 0:
                min_strategy[v] = _pick(game, [w for w in ws if rank[w] < rank[v]])
            else:
                min_strategy[v] = _pick(game, ws)
        else:
            outside = [w for w in ws if w not in win]
            max_strategy[v] = _pick(game, outside or ws)
    return win, min_strategy, max_strategy


@lru_cache(maxsize=512)
def solve_view(game: Game, player: int):
    """Cached (values, min_strategy, max_strategy) for the mode of ``game``."""
    view = CoalitionalView(game, player)
    if game.qualitative:
        win, smin, smax = qual_attractor(view)
        values = tuple(0 if v in win else INF for v in range(game.size))
        return values, smin, smax
    return quant_values(view)


def val_labeling(game: Game) -> Labeling:
    """Val(v) = Val_{owner(v)}(v); qualitative mode uses 0 for a winning owner."""
    per_player = {i: solve_view(game, i)[0] for i in range(1, game.players + 1)}
    return tuple(per_player[game.owner[v]][v] for v in range(game.size))
