"""Decision-problem queries, verdicts and the shared bounded lasso search."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .game import INF, Game, Lasso, Welfare, cost_or_gain_profile, enumerate_lassoes, \
    first_visits, lex_compare, parse_value, social_welfare
from .lassos import lambda_consistent


@dataclass(frozen=True)
class Threshold:
    """Upper bound y and optional lower bound x on the cost (or gain) profile."""

    upper: tuple[float, ...] | None = None
    lower: tuple[float, ...] | None = None
    strict_upper: tuple[bool, ...] | None = None
    strict_lower: tuple[bool, ...] | None = None


@dataclass(frozen=True)
class WelfareQuery:
    k: int
    c: float = INF


@dataclass(frozen=True)
class ParetoQuery:
    pass


@dataclass
class Verdict:
    answer: bool
    solution: str
    problem: str
    lasso: Lasso | None = None
    profile: tuple | None = None
    welfare: Welfare | None = None
    machines: list | None = None
    front: list | None = None
    extra: dict = field(default_factory=dict)


def parse_bounds(text: str, players: int) -> tuple[tuple[float, ...], tuple[bool, ...]]:
    """``3<,inf,2`` -> values and per-component strictness flags."""
    items = [t.strip() for t in text.split(",")]
    if len(items) != players:
        raise ValueError(f"expected {players} comma-separated components, got {len(items)}")
    values, strict = [], []
    for t in items:
        s = t.endswith("<")
        values.append(parse_value(t[:-1] if s else t))
        strict.append(s)
    return tuple(values), tuple(strict)


def _check_threshold(game: Game, q: Threshold) -> None:
    for vec in (q.upper, q.lower, q.strict_upper, q.strict_lower):
        if vec is not None and len(vec) != game.players:
            raise ValueError("threshold arity does not match the number of players")
    if game.qualitative:
        for vec in (q.upper, q.lower):
            if vec is not None and any(x not in (0, 1) for x in vec):
                raise ValueError("qualitative thresholds are gains in {0,1}")


def within(game: Game, profile: Sequence[float], q: Threshold) -> bool:
    n = game.players
    su = q.strict_upper or (False,) * n
    sl = q.strict_lower or (False,) * n
    for i in range(n):
        p = profile[i]
        if q.upper is not None:
            y = q.upper[i]
            if not ((p < y) if su[i] else (p <= y)):
                return False
        if q.lower is not None:
            x = q.lower[i]
            if (p <= x) if sl[i] else (p < x):
                return False
    return True


def dominates(a: Sequence[float], b: Sequence[float], qualitative: bool) -> bool:
    """a is at least as good as b everywhere and differs somewhere."""
    if qualitative:
        return all(x >= y for x, y in zip(a, b)) and tuple(a) != tuple(b)
    return all(x <= y for x, y in zip(a, b)) and tuple(a) != tuple(b)


def pareto_front(profiles, qualitative: bool) -> list[tuple]:
    pool = sorted(set(tuple(p) for p in profiles))
    return [p for p in pool if not any(dominates(q, p, qualitative) for q in pool)]


def lasso_key(lasso: Lasso):
    return lasso.length, lasso.vertices, len(lasso.prefix)


def search_bound(game: Game, base_size: int | None = None) -> int:
    return (game.players + 1) * (base_size if base_size is not None else game.size)


def _consistent_chunk(args):
    game, labeling, lassoes = args
    return [l for l in lassoes if lambda_consistent(game, l, labeling)]


def consistent_lassoes(game: Game, labeling, candidates, jobs: int = 1) -> list[Lasso]:
    candidates = list(candidates)
    if jobs <= 1 or len(candidates) < 64:
        return [l for l in candidates if lambda_consistent(game, l, labeling)]
    size = -(-len(candidates) // jobs)
    chunks = [(game, labeling, candidates[i : i + size]) for i in range(0, len(candidates), size)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        found = []
        for part in pool.map(_consistent_chunk, chunks):
            found.extend(part)
    return found


def achievable_profiles(game: Game, base_size: int | None = None) -> set[tuple]:
    bound = search_bound(game, base_size)
    return {cost_or_gain_profile(game, l) for l in enumerate_lassoes(game, bound, normalized=True)}


def solve_query(
    game: Game,
    labeling,
    query,
    *,
    solution: str,
    base_size: int | None = None,
    jobs: int = 1,
) -> Verdict:
    """Exhaustive search for a λ-consistent lasso from init satisfying ``query``."""
    bound = search_bound(game, base_size)
    n = game.players
    quantitative = not game.qualitative
    enum_kw: dict = {"normalized": True, "labeling": labeling}

    if isinstance(query, Threshold):
        _check_threshold(game, query)
        problem = "threshold"
        if quantitative and query.upper is not None:
            su = query.strict_upper or (False,) * n
            enum_kw["caps"] = tuple(
                y - 1 if s and y != INF else y for y, s in zip(query.upper, su)
            )
        if quantitative and query.lower is not None and any(x > 0 for x in query.lower):
            finite = [y for y in (query.upper or ()) if y != INF]
            finite += [x + 1 for x in query.lower if x != INF]
            free = int(max(finite, default=0))
            enum_kw["free_prefix"] = free
            bound += free
    elif isinstance(query, WelfareQuery):
        problem = "welfare"
        if not 0 <= query.k <= n:
            raise ValueError(f"welfare count k must lie in 0..{n}")
    elif isinstance(query, ParetoQuery):
        problem = "pareto"
    else:
        raise TypeError(f"unknown query {query!r}")

    found = consistent_lassoes(game, labeling, enumerate_lassoes(game, bound, **enum_kw), jobs)
    verdict = Verdict(False, solution, problem)

    def finish(best: Lasso | None) -> Verdict:
        if best is not None:
            verdict.answer = True
            verdict.lasso = best
            verdict.profile = cost_or_gain_profile(game, best)
            verdict.welfare = social_welfare(game, best)
        return verdict

    if isinstance(query, Threshold):
        ok = [l for l in found if within(game, cost_or_gain_profile(game, l), query)]
        return finish(min(ok, key=lasso_key) if ok else None)

    if isinstance(query, WelfareQuery):
        target = Welfare(query.k, query.c)
        best = None
        for l in sorted(found, key=lasso_key):
            w = social_welfare(game, l)
            if best is None or lex_compare(w, social_welfare(game, best)) > 0:
                best = l
        if best is None:
            return verdict
        w = social_welfare(game, best)
        verdict.extra["best_welfare"] = w
        good = w.count > target.count if quantitative else w.count >= target.count
        if quantitative and w.count == target.count:
            good = w.total <= target.total
        return finish(best if good else None)

    front = pareto_front(achievable_profiles(game, base_size), game.qualitative)
    verdict.front = front
    front_set = set(front)
    ok = [l for l in found if cost_or_gain_profile(game, l) in front_set]
    return finish(min(ok, key=lasso_key) if ok else None)


def is_dominated(game: Game, profile: Sequence[float], base_size: int | None = None) -> bool:
    """Some bounded lasso from init strictly improves ``profile``."""
    return any(
        dominates(p, profile, game.qualitative) for p in achievable_profiles(game, base_size)
    )


__all__ = [
    "Threshold",
    "WelfareQuery",
    "ParetoQuery",
    "Verdict",
    "parse_bounds",
    "within",
    "pareto_front",
    "solve_query",
    "is_dominated",
    "first_visits",
]
