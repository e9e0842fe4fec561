"""Seeded random games for tests and benchmarks."""

from __future__ import annotations

import random

from .game import QUANTITATIVE, Game


def random_game(
    vertices: int,
    players: int,
    seed: int,
    *,
    mode: str = QUANTITATIVE,
    max_out: int = 2,
    target_density: float = 0.3,
    strongly_connected: bool = False,
) -> Game:
    """Arena with out-degree 1..max_out; ``strongly_connected`` threads a Hamiltonian cycle."""
    if vertices < 1 or players < 1 or max_out < 1:
        raise ValueError("need at least one vertex, one player and out-degree 1")
    rng = random.Random(seed)
    order = list(range(vertices))
    rng.shuffle(order)
    succ: list[set[int]] = [set() for _ in range(vertices)]
    if strongly_connected:
        for a, b in zip(order, order[1:] + order[:1]):
            succ[a].add(b)
    for v in range(vertices):
        want = rng.randint(1, max_out)
        while len(succ[v]) < min(want, vertices):
            succ[v].add(rng.randrange(vertices))
    owner = tuple(rng.randint(1, players) for _ in range(vertices))
    targets = tuple(
        frozenset(v for v in range(vertices) if rng.random() < target_density)
        for _ in range(players)
    )
    return Game(
        mode=mode,
        players=players,
        names=tuple(f"v{v}" for v in range(vertices)),
        owner=owner,
        succ=tuple(tuple(sorted(s)) for s in succ),
        targets=targets,
        init=0,
    )
