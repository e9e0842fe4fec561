"""Play surgery on lassoes and λ-consistency checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .game import INF, Game, Lasso, first_visits


def residual_costs(game: Game, lasso: Lasso) -> list[list[float]]:
    """``res[i][k]``: steps from position k of hℓ to the next visit of F_{i+1}."""
    window = list(lasso.vertices) + list(lasso.cycle)
    n = len(lasso.vertices)
    res = []
    for i in range(game.players):
        bit = 1 << i
        nxt = INF
        row = [INF] * len(window)
        for k in range(len(window) - 1, -1, -1):
            if game.tmask[window[k]] & bit:
                nxt = k
            row[k] = nxt - k if nxt != INF else INF
        res.append(row[:n])
    return res


class Violation(NamedTuple):
    position: int
    vertex: int
    player: int
    residual: float
    bound: float


def first_violation(game: Game, lasso: Lasso, labeling: Sequence[float]) -> Violation | None:
    """First position of hℓ where a not-yet-served owner overshoots its label."""
    if len(labeling) != game.size:
        raise ValueError("labeling does not cover every vertex")
    res = residual_costs(game, lasso)
    seen = 0
    for k, v in enumerate(lasso.vertices):
        seen |= game.tmask[v]
        o = game.owner[v]
        if seen >> (o - 1) & 1:
            continue
        bound = labeling[v]
        r = res[o - 1][k]
        bad = (bound != INF and r == INF) if game.qualitative else r > bound
        if bad:
            return Violation(k, v, o, r, bound)
    return None


def lambda_consistent(game: Game, lasso: Lasso, labeling: Sequence[float]) -> bool:
    return first_violation(game, lasso, labeling) is None


def _last_visit(game: Game, lasso: Lasso) -> int:
    finite = [c for c in first_visits(game, lasso) if c != INF]
    return int(max(finite)) if finite else 0


def _masks(game: Game, seq: Sequence[int]) -> list[int]:
    out, m = [], 0
    for v in seq:
        m |= game.tmask[v]
        out.append(m)
    return out


def apply_p1(game: Game, lasso: Lasso, k: int, m: int) -> Lasso:
    """Remove positions k+1..m of the play; they must form an unnecessary cycle."""
    if not 0 <= k < m:
        raise ValueError("need 0 <= k < m")
    h, c = len(lasso.prefix), len(lasso.cycle)
    total = h + c * max(1, -(-(m + 1 - h) // c))
    seq = lasso.unroll(total)
    masks = _masks(game, seq)
    if seq[k] != seq[m] or masks[k] != masks[m]:
        raise ValueError(f"positions {k}..{m} do not delimit an unnecessary cycle")
    return Lasso(tuple(seq[: k + 1] + seq[m + 1 :]), lasso.cycle)


def find_unnecessary_cycle(game: Game, lasso: Lasso, limit: int) -> tuple[int, int] | None:
    """Leftmost-innermost unnecessary cycle among positions 0..limit."""
    seq = lasso.unroll(limit + 1)
    masks = _masks(game, seq)
    last: dict[tuple[int, int], int] = {}
    for b, v in enumerate(seq):
        key = (v, masks[b])
        if key in last:
            return last[key], b
        last[key] = b
    return None


def apply_p2(game: Game, lasso: Lasso) -> Lasso:
    """Copy the play until the last visit, then close at the first repetition.

    The result has every visit inside its prefix and the same cost profile.
    """
    p = _last_visit(game, lasso)
    seen: dict[int, int] = {}
    q = p
    while True:
        v = lasso.at(q)
        if v in seen:
            a, b = seen[v], q
            break
        seen[v] = q
        q += 1
    per = b - a

    def new(q: int) -> int:
        return lasso.at(q) if q < b else lasso.at(a + (q - a) % per)

    prefix = tuple(new(q) for q in range(p + 1))
    cycle = tuple(new(q) for q in range(p + 1, p + 1 + per))
    return Lasso(prefix, cycle)


@dataclass
class NormalizationTrace:
    steps: list[tuple] = field(default_factory=list)

    def replay(self, game: Game, lasso: Lasso) -> Lasso:
        for step in self.steps:
            if step[0] == "P1":
                lasso = apply_p1(game, lasso, step[1], step[2])
            else:
                lasso = apply_p2(game, lasso)
        return lasso.canonical()


def normalize(game: Game, lasso: Lasso) -> tuple[Lasso, NormalizationTrace]:
    """(P1) until no unnecessary cycle precedes the last visit, then (P2)."""
    trace = NormalizationTrace()
    while True:
        found = find_unnecessary_cycle(game, lasso, _last_visit(game, lasso))
        if found is None:
            break
        trace.steps.append(("P1", *found))
        lasso = apply_p1(game, lasso, *found)
    closed = apply_p2(game, lasso)
    trace.steps.append(("P2", len(closed.prefix) - 1, closed.length))
    return closed.canonical(), trace


def normalize_p2_only(game: Game, lasso: Lasso) -> Lasso:
    """(P2) alone: costs are preserved exactly."""
    return apply_p2(game, lasso).canonical()
