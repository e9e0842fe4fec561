"""Finite-memory strategies, their composition, and best-response oracles."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .game import INF, Game, GameFormatError, Lasso


@dataclass(frozen=True)
class StrategyMachine:
    """M = (M, m0, αu, αn) for one player.

    ``update[m][v]`` is the memory after reading vertex ``v`` in state ``m``;
    ``next[m][v]`` is the move at a vertex ``v`` of the player (``-1`` elsewhere).
    """

    player: int
    states: tuple[str, ...]
    initial: int
    update: tuple[tuple[int, ...], ...]
    next: tuple[tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.states)


def check_machine(game: Game, machine: StrategyMachine) -> None:
    for m in range(machine.size):
        if len(machine.update[m]) != game.size or len(machine.next[m]) != game.size:
            raise GameFormatError("machine tables do not cover the arena")
        for v in range(game.size):
            if not 0 <= machine.update[m][v] < machine.size:
                raise GameFormatError("update leaves the state set")
            if game.owner[v] == machine.player and machine.next[m][v] not in game.succ[v]:
                raise GameFormatError(
                    f"machine of player {machine.player} moves off an edge at {game.names[v]}"
                )


# --------------------------------------------------------------------------
# composition


def initial_memory(profile: Sequence[StrategyMachine]) -> tuple[int, ...]:
    return tuple(m.initial for m in profile)


def step(game: Game, profile: Sequence[StrategyMachine], mem: tuple[int, ...], v: int):
    """Move of the owner at ``v`` and the memory after reading ``v``."""
    w = profile[game.owner[v] - 1].next[mem[game.owner[v] - 1]][v]
    return tuple(m.update[s][v] for m, s in zip(profile, mem)), w


def outcome(game: Game, profile: Sequence[StrategyMachine], mem=None, v=None) -> Lasso:
    """The lasso played by the composed profile from a configuration."""
    mem = initial_memory(profile) if mem is None else mem
    v = game.init if v is None else v
    seen: dict[tuple, int] = {}
    seq = []
    while (mem, v) not in seen:
        seen[(mem, v)] = len(seq)
        seq.append(v)
        mem, v = step(game, profile, mem, v)
    k = seen[(mem, v)]
    return Lasso(tuple(seq[:k]), tuple(seq[k:])).canonical()


def best_response_cost(
    game: Game,
    profile: Sequence[StrategyMachine],
    player: int,
    mem=None,
    v=None,
) -> float:
    """Least cost ``player`` reaches against the other machines (BFS on the product).

    The player's own machine entry is ignored. In qualitative mode the result is
    still a step count; finiteness is what matters there.
    """
    mem = initial_memory(profile) if mem is None else mem
    v = game.init if v is None else v
    i = player - 1
    target = game.targets[i]
    others = [j for j in range(len(profile)) if j != i]

    def key(mem, v):
        return tuple(mem[j] for j in others), v

    start = (mem, v)
    dist = {key(*start): 0}
    queue = deque([start])
    while queue:
        mem, v = queue.popleft()
        d = dist[key(mem, v)]
        if v in target:
            return d
        new_mem = tuple(
            profile[j].update[mem[j]][v] if j != i else 0 for j in range(len(profile))
        )
        moves = game.succ[v] if game.owner[v] == player else (
            profile[game.owner[v] - 1].next[mem[game.owner[v] - 1]][v],
        )
        for w in moves:
            k = key(new_mem, w)
            if k not in dist:
                dist[k] = d + 1
                queue.append((new_mem, w))
    return INF


class ConfigGraph:
    """All configurations (memory vector, vertex) reachable under arbitrary moves.

    ``served[c]`` is the intersection of the visit sets of all histories
    reaching configuration ``c``: a player outside it still has something to
    gain in at least one subgame ending at ``c``.
    """

    def __init__(self, game: Game, profile: Sequence[StrategyMachine]):
        self.game = game
        self.profile = profile
        start = (initial_memory(profile), game.init)
        self.index = {start: 0}
        self.configs = [start]
        self.move: list[int] = []
        self.succ: list[list[int]] = []
        served_sets: dict[int, set[int]] = {0: {game.tmask[game.init]}}
        k = 0
        while k < len(self.configs):
            mem, v = self.configs[k]
            new_mem, w_played = step(game, profile, mem, v)
            out = []
            for w in game.succ[v]:
                c = (new_mem, w)
                if c not in self.index:
                    self.index[c] = len(self.configs)
                    self.configs.append(c)
                out.append(self.index[c])
            self.succ.append(out)
            self.move.append(self.index[(new_mem, w_played)])
            k += 1
        # histories' visit masks, propagated to a fixpoint
        queue = deque([(0, game.tmask[game.init])])
        seen = {(0, game.tmask[game.init])}
        while queue:
            c, mask = queue.popleft()
            for d in self.succ[c]:
                m2 = mask | game.tmask[self.configs[d][1]]
                if (d, m2) not in seen:
                    seen.add((d, m2))
                    served_sets.setdefault(d, set()).add(m2)
                    queue.append((d, m2))
        full = game.all_players
        self.served = []
        for c in range(len(self.configs)):
            acc = full
            for m in served_sets.get(c, ()):
                acc &= m
            self.served.append(acc)

    def follow_costs(self, player: int) -> list[float]:
        """Cost of ``player`` along the composed continuation from every config."""
        target = self.game.targets[player - 1]
        n = len(self.configs)
        cost: list[float | None] = [None] * n
        for c0 in range(n):
            if cost[c0] is not None:
                continue
            path, on_path = [], set()
            c = c0
            while cost[c] is None and c not in on_path:
                if self.configs[c][1] in target:
                    cost[c] = 0
                    break
                path.append(c)
                on_path.add(c)
                c = self.move[c]
            tail = cost[c] if cost[c] is not None else INF
            for d in reversed(path):
                tail = tail + 1
                cost[d] = tail
        return cost

    def best_costs(self, player: int) -> list[float]:
        """Best-response cost of ``player`` from every config (reverse BFS)."""
        n = len(self.configs)
        owner = self.game.owner
        pred: list[list[int]] = [[] for _ in range(n)]
        for c in range(n):
            v = self.configs[c][1]
            outs = self.succ[c] if owner[v] == player else [self.move[c]]
            for d in outs:
                pred[d].append(c)
        target = self.game.targets[player - 1]
        dist = [INF] * n
        queue = deque()
        for c in range(n):
            if self.configs[c][1] in target:
                dist[c] = 0
                queue.append(c)
        while queue:
            d = queue.popleft()
            for c in pred[d]:
                if dist[c] == INF:
                    dist[c] = dist[d] + 1
                    queue.append(c)
        return dist


def profitable_deviation(game: Game, profile: Sequence[StrategyMachine]):
    """First (config, player, follow cost, best cost) where someone gains, else None."""
    g = ConfigGraph(game, profile)
    for i in range(1, game.players + 1):
        follow, best = g.follow_costs(i), g.best_costs(i)
        for c in range(len(g.configs)):
            if g.served[c] >> (i - 1) & 1:
                continue
            if game.qualitative:
                bad = follow[c] == INF and best[c] != INF
            else:
                bad = best[c] < follow[c]
            if bad:
                return g.configs[c], i, follow[c], best[c]
    return None


# --------------------------------------------------------------------------
# text format


def format_machines(game: Game, profile: Sequence[StrategyMachine]) -> str:
    """Line-oriented description: one ``machine`` block per player."""
    out = []
    for m in profile:
        out.append(f"machine player={m.player} states={m.size} initial={m.states[m.initial]}")
        for s in range(m.size):
            row = m.update[s]
            for v in range(game.size):
                out.append(f"update {m.states[s]} {game.names[v]} {m.states[row[v]]}")
            for v in range(game.size):
                if game.owner[v] == m.player:
                    out.append(
                        f"next {m.states[s]} {game.names[v]} {game.names[m.next[s][v]]}"
                    )
        out.append("end")
    return "\n".join(out) + "\n"


def parse_machines(game: Game, text: str) -> list[StrategyMachine]:
    blocks: list[dict] = []
    cur = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "machine":
            attrs = dict(p.partition("=")[::2] for p in parts[1:])
            try:
                cur = {
                    "player": int(attrs["player"]),
                    "initial": attrs["initial"],
                    "states": {},
                    "update": {},
                    "next": {},
                }
            except (KeyError, ValueError):
                raise GameFormatError("bad machine header", lineno) from None
            blocks.append(cur)
        elif parts[0] in ("update", "next") and cur is not None and len(parts) == 4:
            s, v, t = parts[1:]
            cur["states"].setdefault(s, len(cur["states"]))
            if parts[0] == "update":
                cur["states"].setdefault(t, len(cur["states"]))
                cur["update"][(s, game.vertex(v))] = t
            else:
                cur["next"][(s, game.vertex(v))] = game.vertex(t)
        elif parts[0] == "end" and cur is not None:
            cur = None
        else:
            raise GameFormatError(f"unexpected line {line!r}", lineno)
    profile = []
    for b in sorted(blocks, key=lambda b: b["player"]):
        names = list(b["states"])
        idx = b["states"]
        if b["initial"] not in idx:
            raise GameFormatError(f"unknown initial state {b['initial']!r}")
        try:
            update = tuple(
                tuple(idx[b["update"][(s, v)]] for v in range(game.size)) for s in names
            )
        except KeyError as exc:
            raise GameFormatError(f"update table incomplete at {exc}") from None
        nxt = tuple(
            tuple(
                b["next"].get((s, v), -1) if game.owner[v] == b["player"] else -1
                for v in range(game.size)
            )
            for s in names
        )
        m = StrategyMachine(b["player"], tuple(names), idx[b["initial"]], update, nxt)
        check_machine(game, m)
        profile.append(m)
    if [m.player for m in profile] != list(range(1, game.players + 1)):
        raise GameFormatError("need exactly one machine per player")
    return profile
