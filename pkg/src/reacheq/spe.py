"""Subgame perfect equilibria through the extended game and the λ* labeling."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

from .game import INF, Game, Lasso, enumerate_lassoes, first_visits, players_of
from .lassos import lambda_consistent, residual_costs
from .machines import StrategyMachine, profitable_deviation
from .queries import Verdict, search_bound, solve_query


class LambdaStarError(RuntimeError):
    """The λ* iteration hit its cap or met an empty set of consistent plays."""


# --------------------------------------------------------------------------
# extended game


@dataclass(frozen=True)
class ExtendedGame:
    """Reachable part of the product of the arena with visited-player sets.

    ``game`` is an ordinary game over pairs (v, I), where player i's target is
    {(v, I) | i ∈ I}; ``pairs[x]`` gives the base vertex and the mask of I.
    """

    base: Game
    game: Game
    pairs: tuple[tuple[int, int], ...]
    index: dict = field(repr=False, compare=False, hash=False)

    @property
    def x0(self) -> int:
        return 0

    def vertex(self, v: int, mask: int) -> int:
        return self.index[(v, mask)]

    def project(self, lasso: Lasso) -> Lasso:
        base = lambda seq: tuple(self.pairs[x][0] for x in seq)  # noqa: E731
        return Lasso(base(lasso.prefix), base(lasso.cycle)).canonical()

    def lift(self, lasso: Lasso) -> Lasso:
        """The extended play over a base lasso (its I-component settles in one cycle)."""
        n = len(lasso.vertices)
        tm = self.base.tmask
        seq, mask = [], 0
        for k in range(n + len(lasso.cycle)):
            v = lasso.at(k)
            mask |= tm[v]
            seq.append(self.index[(v, mask)])
        return Lasso(tuple(seq[:n]), tuple(seq[n:])).canonical()


def _set_label(mask: int) -> str:
    return ",".join(str(i) for i in sorted(players_of(mask)))


def build_extended(game: Game) -> ExtendedGame:
    x0 = (game.init, game.tmask[game.init])
    index = {x0: 0}
    pairs = [x0]
    succ: list[list[int]] = []
    k = 0
    while k < len(pairs):
        v, mask = pairs[k]
        out = []
        for w in game.succ[v]:
            y = (w, mask | game.tmask[w])
            if y not in index:
                index[y] = len(pairs)
                pairs.append(y)
            out.append(index[y])
        succ.append(out)
        k += 1
    names = tuple(f"{game.names[v]}[{_set_label(m)}]" for v, m in pairs)
    targets = tuple(
        frozenset(x for x, (_, m) in enumerate(pairs) if m >> i & 1) for i in range(game.players)
    )
    xgame = Game(
        mode=game.mode,
        players=game.players,
        names=names,
        owner=tuple(game.owner[v] for v, _ in pairs),
        succ=tuple(tuple(s) for s in succ),
        targets=targets,
        init=0,
    )
    return ExtendedGame(game, xgame, tuple(pairs), index)


# --------------------------------------------------------------------------
# λ-consistent plays as runs of a deadline automaton


class _DeadlineProduct:
    """Runs of (x, D) where D holds every pending requirement of the labeling.

    Quantitative: D[j] > 0 is the number of steps within which player j must
    still visit its target. Qualitative: D[j] = 1 flags that j must visit
    eventually. The λ-consistent plays from x are exactly the infinite runs
    from ``start(x)`` that avoid expired deadlines and end in a cycle with no
    pending requirement.
    """

    def __init__(self, xg: ExtendedGame, lam):
        g = xg.game
        self.g = g
        self.lam = lam
        self.qual = g.qualitative
        n = g.players
        self.nodes: list[tuple[int, tuple[int, ...]]] = []
        self.ids: dict = {}
        self.succ: list[list[int]] = []
        self.starts = [self._node(x, self._constrain(x, (0,) * n)) for x in range(g.size)]
        k = 0
        while k < len(self.nodes):
            x, d = self.nodes[k]
            out = []
            for y in g.succ[x]:
                e = self._advance(d, y)
                if e is not None:
                    out.append(self._node(y, e))
            self.succ.append(out)
            k += 1
        self._analyse()

    def _node(self, x, d):
        key = (x, d)
        if key not in self.ids:
            self.ids[key] = len(self.nodes)
            self.nodes.append(key)
        return self.ids[key]

    def _constrain(self, x, d):
        o = self.g.owner[x] - 1
        if self.g.tmask[x] >> o & 1 or self.lam[x] == INF:
            return d
        bound = 1 if self.qual else int(self.lam[x])
        if d[o] == 0 or bound < d[o]:
            d = d[:o] + (bound,) + d[o + 1 :]
        return d

    def _advance(self, d, y):
        mask = self.g.tmask[y]
        out = []
        for j, dj in enumerate(d):
            if mask >> j & 1 or dj == 0:
                out.append(0)
            elif self.qual:
                out.append(1)
            elif dj == 1:
                return None
            else:
                out.append(dj - 1)
        return self._constrain(y, tuple(out))

    def _cycle_nodes(self, allowed) -> set[int]:
        """Nodes in allowed that lie on a cycle inside allowed (iterative Tarjan)."""
        index, low, on, stack, out = {}, {}, set(), [], set()
        counter = 0
        for root in allowed:
            if root in index:
                continue
            work = [(root, 0)]
            index[root] = low[root] = counter
            counter += 1
            stack.append(root)
            on.add(root)
            while work:
                v, i = work[-1]
                nbrs = self.succ[v]
                if i < len(nbrs):
                    work[-1] = (v, i + 1)
                    w = nbrs[i]
                    if w not in allowed:
                        continue
                    if w not in index:
                        index[w] = low[w] = counter
                        counter += 1
                        stack.append(w)
                        on.add(w)
                        work.append((w, 0))
                    elif w in on:
                        low[v] = min(low[v], index[w])
                else:
                    work.pop()
                    if work:
                        u = work[-1][0]
                        low[u] = min(low[u], low[v])
                    if low[v] == index[v]:
                        comp = []
                        while True:
                            w = stack.pop()
                            on.discard(w)
                            comp.append(w)
                            if w == v:
                                break
                        if len(comp) > 1 or v in self.succ[v]:
                            out.update(comp)
        return out

    def _backward(self, seeds, allowed) -> set[int]:
        pred: dict[int, list[int]] = {}
        for v in allowed:
            for w in self.succ[v]:
                if w in allowed:
                    pred.setdefault(w, []).append(v)
        seen = set(seeds)
        queue = deque(seeds)
        while queue:
            w = queue.popleft()
            for v in pred.get(w, ()):
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return seen

    def _analyse(self):
        every = set(range(len(self.nodes)))
        free = {s for s in every if not any(self.nodes[s][1])}
        self.good = self._cycle_nodes(free)
        self.live = self._backward(self.good, every)
        self._avoid: dict[int, tuple[set[int], set[int], set[int]]] = {}
        self._longest: dict[int, dict[int, float]] = {}

    def _avoid_sets(self, i: int):
        """(region, cycles, escape) for runs keeping player i unserved."""
        if i not in self._avoid:
            bit = 1 << (i - 1)
            region = {s for s in self.live if not self.g.tmask[self.nodes[s][0]] & bit}
            free = {s for s in region if not any(self.nodes[s][1])}
            cycles = self._cycle_nodes(free)
            escape = self._backward(cycles, region)
            self._avoid[i] = (region, cycles, escape)
        return self._avoid[i]

    def sup_cost(self, i: int, s: int) -> float:
        """Supremum of Cost_i over consistent runs from node s (-1 if there is none)."""
        if s not in self.live:
            return -1
        if self.g.tmask[self.nodes[s][0]] >> (i - 1) & 1:
            return 0
        region, _, escape = self._avoid_sets(i)
        if s in escape:
            return INF
        if self.qual:
            return 0
        memo = self._longest.setdefault(i, {})
        stack = [s]
        while stack:
            v = stack[-1]
            if v in memo:
                stack.pop()
                continue
            pending = [w for w in self.succ[v] if w in region and w not in memo]
            if pending:
                stack.extend(pending)
                continue
            best = 0
            for w in self.succ[v]:
                if w in region:
                    best = max(best, 1 + memo[w])
                elif w in self.live:
                    best = max(best, 1)
            memo[v] = best
            stack.pop()
        return memo[s]

    def _path_to(self, s: int, targets: set[int], allowed: set[int]) -> list[int]:
        parent = {s: None}
        queue = deque([s])
        while queue:
            v = queue.popleft()
            if v in targets:
                path = []
                while v is not None:
                    path.append(v)
                    v = parent[v]
                return path[::-1]
            for w in self.succ[v]:
                if w in allowed and w not in parent:
                    parent[w] = v
                    queue.append(w)
        raise LambdaStarError("no run reaches the requested nodes")

    def _close(self, path: list[int], cycles: set[int]) -> Lasso:
        c = path[-1]
        loop = None
        for w in self.succ[c]:
            if w in cycles:
                try:
                    tail = self._path_to(w, {c}, cycles)
                except LambdaStarError:
                    continue
                loop = [c] + tail[:-1]
                break
        xs = lambda ns: tuple(self.nodes[n][0] for n in ns)  # noqa: E731
        return Lasso(xs(path[:-1]), xs(loop)).canonical()

    def argmax_lasso(self, i: int, s: int) -> Lasso:
        """A consistent run from s whose Cost_i equals ``sup_cost(i, s)``."""
        value = self.sup_cost(i, s)
        if value == -1:
            raise LambdaStarError("no consistent play")
        region, cycles, escape = self._avoid_sets(i)
        if value == INF:
            return self._close(self._path_to(s, cycles, escape), cycles)
        path = [s]
        if not self.qual:
            memo = self._longest.get(i, {})
            v = s
            while v in region:
                nxt = None
                for w in self.succ[v]:
                    if w in region and 1 + memo[w] == memo[v]:
                        nxt = w
                        break
                    if w not in region and w in self.live and memo[v] == 1:
                        nxt = w
                        break
                v = nxt
                path.append(v)
        tail = self._path_to(path[-1], self.good, self.live)
        return self._close(path + tail[1:], self.good)


def _label_from(best: float, qual: bool) -> float:
    if best == INF:
        return INF
    return 0 if qual else 1 + best


def _owner_pending(g: Game, x: int) -> bool:
    return not g.tmask[x] >> (g.owner[x] - 1) & 1


def lambda_star(
    xg: ExtendedGame,
    *,
    residual: str = "exact",
    bound: int | None = None,
    max_iter: int = 10_000,
    trace: list | None = None,
):
    """Greatest fixpoint of the λ* update, iterated from the all-INF labeling.

    For an i-owned (v, I) with i ∉ I the new label is 1 + the least, over
    successors, of the largest Cost_i among plays from that successor that
    are consistent with the current labeling. ``residual="exact"`` reads that
    quantity off a deadline automaton; ``residual="lasso"`` searches lassoes
    with at most ``bound`` edges instead.
    """
    if trace is None:
        return _lambda_star(xg, residual, bound, max_iter)
    return _lambda_star_traced(xg, residual, bound, max_iter, trace)


@lru_cache(maxsize=128)
def _lambda_star(xg, residual, bound, max_iter):
    return _lambda_star_traced(xg, residual, bound, max_iter, None)


def _lambda_star_traced(xg, residual, bound, max_iter, trace):
    g = xg.game
    lam = tuple([INF] * g.size)
    if residual == "lasso":
        oracle = _LassoResidual(xg, bound)
    elif residual != "exact":
        raise ValueError(f"unknown residual mode {residual!r}")
    if trace is not None:
        trace.append(lam)
    for _ in range(max_iter):
        if residual == "exact":
            prod = _DeadlineProduct(xg, lam)
            sup = lambda i, y: prod.sup_cost(i, prod.starts[y])  # noqa: E731
        else:
            sup = oracle.sup_for(lam)
        new = []
        for x in range(g.size):
            if not _owner_pending(g, x):
                new.append(INF)
                continue
            i = g.owner[x]
            vals = [sup(i, y) for y in g.succ[x]]
            if any(v == -1 for v in vals):
                raise LambdaStarError(f"no consistent play from a successor of {g.names[x]}")
            new.append(_label_from(min(vals), g.qualitative))
        new = tuple(new)
        if trace is not None:
            trace.append(new)
        if new == lam:
            return lam
        lam = new
    raise LambdaStarError(f"λ* did not stabilise within {max_iter} iterations")


class _LassoResidual:
    """Bounded lasso search from every extended vertex (cross-check route)."""

    def __init__(self, xg: ExtendedGame, bound: int | None):
        g = xg.game
        self.g = g
        self.bound = bound if bound is not None else search_bound(g, xg.base.size)
        # lassoes with equal demands and costs are interchangeable: keep the smallest
        self.pool: dict[int, list] = {}
        for x in range(g.size):
            best: dict[tuple, Lasso] = {}
            for l in enumerate_lassoes(g, self.bound, start=x):
                key = (self._demands(l), first_visits(g, l))
                if key not in best or (l.length, l.vertices) < (best[key].length, best[key].vertices):
                    best[key] = l
            self.pool[x] = [(l, key[0], key[1]) for key, l in best.items()]

    def _demands(self, lasso: Lasso) -> tuple:
        """Largest residual of the owner at each constrained vertex of hℓ."""
        g = self.g
        res = residual_costs(g, lasso)
        need: dict[int, float] = {}
        for t, x in enumerate(lasso.vertices):
            if _owner_pending(g, x):
                r = res[g.owner[x] - 1][t]
                need[x] = max(need.get(x, 0), r)
        return tuple(sorted(need.items()))

    def _fits(self, demands, lam) -> bool:
        if self.g.qualitative:
            return all(r != INF or lam[x] == INF for x, r in demands)
        return all(r <= lam[x] for x, r in demands)

    def consistent(self, lam, x):
        return [(l, c) for l, d, c in self.pool[x] if self._fits(d, lam)]

    def sup_for(self, lam):
        cache: dict[int, list] = {}

        def sup(i, y):
            if y not in cache:
                cache[y] = self.consistent(lam, y)
            if not cache[y]:
                return -1
            return max(c[i - 1] for _, c in cache[y])

        return sup

    def argmax_lasso(self, lam, i, y) -> Lasso:
        pool = self.consistent(lam, y)
        if not pool:
            raise LambdaStarError(f"no consistent lasso from {self.g.names[y]} within the bound")
        best = max(c[i - 1] for _, c in pool)
        return min((l for l, c in pool if c[i - 1] == best), key=lambda l: (l.length, l.vertices))


def is_spe_outcome(xg: ExtendedGame, lasso: Lasso, lam=None) -> bool:
    if lasso.start != xg.x0:
        raise ValueError("extended lasso does not start at x0")
    lam = lambda_star(xg) if lam is None else lam
    return lambda_consistent(xg.game, lasso, lam)


# --------------------------------------------------------------------------
# symbolic witnesses


def index_set(xg: ExtendedGame) -> list[tuple[int, int]]:
    g = xg.game
    keys = {(g.owner[x], y) for x in range(g.size) for y in g.succ[x]}
    return [(0, xg.x0)] + sorted(keys)


@dataclass
class SymbolicWitness:
    xg: ExtendedGame
    lassoes: dict[tuple[int, int], Lasso]


class GoodViolation(NamedTuple):
    key: tuple[int, int]
    position: int
    successor: int


def build_witness(
    xg: ExtendedGame,
    lasso: Lasso,
    lam=None,
    *,
    residual: str = "exact",
    bound: int | None = None,
    check: bool = True,
) -> SymbolicWitness:
    """ρ_{0,x0} = the given play; ρ_{i,x'} a consistent play from x' maximizing Cost_i.

    ``check=False`` skips the consistency test on the given play (used to
    build attack profiles in tests).
    """
    lam = lambda_star(xg, residual=residual, bound=bound) if lam is None else lam
    if check and not is_spe_outcome(xg, lasso, lam):
        raise ValueError("lasso is not λ*-consistent")
    g = xg.game
    if residual == "exact":
        prod = _DeadlineProduct(xg, lam)
        pick = lambda i, y: prod.argmax_lasso(i, prod.starts[y])  # noqa: E731
    else:
        lr = _LassoResidual(xg, bound)
        pick = lambda i, y: lr.argmax_lasso(lam, i, y)  # noqa: E731
    lassoes = {(0, xg.x0): lasso.canonical()}
    for i, y in index_set(xg)[1:]:
        try:
            lassoes[(i, y)] = pick(i, y)
        except LambdaStarError as exc:
            raise LambdaStarError(f"index ({i}, {g.names[y]}): {exc}") from None
    return SymbolicWitness(xg, lassoes)


def goodness_violation(witness: SymbolicWitness) -> GoodViolation | None:
    g = witness.xg.game
    stored = witness.lassoes
    head = {key: first_visits(g, l) for key, l in stored.items()}
    for key in sorted(stored):
        lasso = stored[key]
        res = residual_costs(g, lasso)
        for t, x in enumerate(lasso.vertices):
            i = g.owner[x]
            if not _owner_pending(g, x):
                continue
            r = res[i - 1][t]
            for y in g.succ[x]:
                other = head.get((i, y))
                if other is None:
                    return GoodViolation(key, t, y)
                c = other[i - 1]
                bad = (c != INF and r == INF) if g.qualitative else r > 1 + c
                if bad:
                    return GoodViolation(key, t, y)
    return None


def check_good(witness: SymbolicWitness) -> bool:
    return goodness_violation(witness) is None


def synthesize_spe_machines(witness: SymbolicWitness, *, check: bool = True) -> list[StrategyMachine]:
    """All players share one memory tracking (index, position in its lasso).

    A deviation from an i-owned extended vertex into (v', I') switches every
    player to the lasso stored at (i, v', I').
    """
    if check and not check_good(witness):
        raise ValueError("witness is not good")
    xg = witness.xg
    base, g = xg.base, xg.game
    keys = sorted(witness.lassoes)
    offset, names = {}, ["init"]
    for key in keys:
        offset[key] = len(names)
        label = f"{key[0]}:{g.names[key[1]]}"
        names += [f"{label}@{t}" for t in range(len(witness.lassoes[key].vertices))]
    owner_of = [None] * len(names)
    for key in keys:
        for t in range(len(witness.lassoes[key].vertices)):
            owner_of[offset[key] + t] = (key, t)
    main = (0, xg.x0)

    def nxt_pos(lasso: Lasso, t: int) -> int:
        return t + 1 if t + 1 < len(lasso.vertices) else len(lasso.prefix)

    def upd(s: int, w: int) -> int:
        if s == 0:
            return offset[main]
        key, t = owner_of[s]
        lasso = witness.lassoes[key]
        x = lasso.vertices[t]
        t2 = nxt_pos(lasso, t)
        if xg.pairs[lasso.vertices[t2]][0] == w:
            return offset[key] + t2
        v, mask = xg.pairs[x]
        if w not in base.succ[v]:
            return s
        y = xg.index[(w, mask | base.tmask[w])]
        return offset[(g.owner[x], y)]

    def move(s: int, v: int) -> int:
        key, t = owner_of[s]
        lasso = witness.lassoes[key]
        w = xg.pairs[lasso.vertices[nxt_pos(lasso, t)]][0]
        # memory and vertex disagree only off every play of the profile
        return w if w in base.succ[v] else base.succ[v][0]

    update = tuple(tuple(upd(s, w) for w in range(base.size)) for s in range(len(names)))
    machines = []
    for p in range(1, base.players + 1):
        nxt = tuple(
            tuple(move(update[s][v], v) if base.owner[v] == p else -1 for v in range(base.size))
            for s in range(len(names))
        )
        machines.append(StrategyMachine(p, tuple(names), 0, update, nxt))
    return machines


def verify_spe(game: Game, machines) -> bool:
    """No player gains by deviating in any subgame of the composed profile."""
    return profitable_deviation(game, machines) is None


# --------------------------------------------------------------------------
# decisions


def decide_spe(
    game: Game,
    query,
    *,
    jobs: int = 1,
    machines: bool = True,
    residual: str = "exact",
    bound: int | None = None,
) -> Verdict:
    xg = build_extended(game)
    lam = lambda_star(xg, residual=residual, bound=bound)
    verdict = solve_query(xg.game, lam, query, solution="spe", base_size=game.size, jobs=jobs)
    if verdict.answer:
        ext = verdict.lasso
        verdict.extra["extended_lasso"] = ext
        verdict.lasso = xg.project(ext)
        if machines:
            witness = build_witness(xg, ext, lam, residual=residual, bound=bound)
            verdict.machines = synthesize_spe_machines(witness)
    return verdict


def visit_all_spe_qual(game: Game) -> tuple[list[StrategyMachine], Lasso]:
    """Tour every nonempty target set and return to v0; after any deviation walk back to v0."""
    if not game.qualitative:
        raise ValueError("visit-all construction needs a qualitative game")
    if not game.is_strongly_connected():
        raise ValueError("arena is not strongly connected")
    v0 = game.init

    def bfs_path(src: int, goal) -> list[int]:
        parent = {src: None}
        queue = deque([src])
        while queue:
            v = queue.popleft()
            if goal(v):
                path = []
                while v is not None:
                    path.append(v)
                    v = parent[v]
                return path[::-1]
            for w in game.succ[v]:
                if w not in parent:
                    parent[w] = v
                    queue.append(w)
        raise ValueError("unreachable")

    tour = [v0]
    mask = game.tmask[v0]
    for i in range(1, game.players + 1):
        target = game.targets[i - 1]
        if not target or mask >> (i - 1) & 1:
            continue
        path = bfs_path(tour[-1], lambda v: v in target)
        tour += path[1:]
        for v in path:
            mask |= game.tmask[v]
    cur = tour[-1]
    if cur == v0:
        first = min(game.succ[v0], key=lambda w: game.names[w])
        back = [first] + (bfs_path(first, lambda v: v == v0)[1:] if first != v0 else [v0])
    else:
        back = bfs_path(cur, lambda v: v == v0)[1:]
    tour += back
    cycle = tuple(tour[:-1])
    lasso = Lasso((), cycle)
    L = len(cycle)

    dist = {v0: 0}
    queue = deque([v0])
    pred = [[] for _ in range(game.size)]
    for v, ws in enumerate(game.succ):
        for w in ws:
            pred[w].append(v)
    while queue:
        w = queue.popleft()
        for v in pred[w]:
            if v not in dist:
                dist[v] = dist[w] + 1
                queue.append(v)
    homeward = {
        v: min((w for w in game.succ[v] if dist[w] == dist[v] - 1), key=lambda w: game.names[w])
        for v in range(game.size)
        if v != v0
    }

    names = ["init", "back"] + [f"tour@{t}" for t in range(L)]
    BACK, TOUR = 1, 2

    def upd(s: int, w: int) -> int:
        if s >= TOUR and w == cycle[(s - TOUR + 1) % L]:
            return TOUR + (s - TOUR + 1) % L
        return TOUR if w == v0 else BACK

    def move(s: int, v: int) -> int:
        t = upd(s, v)
        return cycle[(t - TOUR + 1) % L] if t >= TOUR else homeward[v]

    update = tuple(tuple(upd(s, w) for w in range(game.size)) for s in range(len(names)))
    machines = []
    for p in range(1, game.players + 1):
        nxt = tuple(
            tuple(move(s, v) if game.owner[v] == p else -1 for v in range(game.size))
            for s in range(len(names))
        )
        machines.append(StrategyMachine(p, tuple(names), 0, update, nxt))
    return machines, lasso
