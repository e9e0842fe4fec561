"""Arenas, reachability games, lassoes and their text formats."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Sequence

INF = math.inf

QUANTITATIVE = "quantitative"
QUALITATIVE = "qualitative"
MODES = (QUANTITATIVE, QUALITATIVE)


class GameFormatError(ValueError):
    """Raised on malformed game or lasso text."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def fmt_value(x: float) -> str:
    return "inf" if x == INF else str(int(x))


def parse_value(text: str) -> float:
    text = text.strip()
    if text in ("inf", "+inf", "∞"):
        return INF
    value = int(text)
    if value < 0:
        raise ValueError(f"negative value {text!r}")
    return value


@dataclass(frozen=True)
class Game:
    """A multiplayer reachability game on a finite sink-free arena.

    Vertices are integers ``0..n-1`` with display names; players are numbered
    from 1. ``targets[i - 1]`` is the target set of player ``i``.
    """

    mode: str
    players: int
    names: tuple[str, ...]
    owner: tuple[int, ...]
    succ: tuple[tuple[int, ...], ...]
    targets: tuple[frozenset[int], ...]
    init: int
    index: dict = field(init=False, repr=False, compare=False, hash=False)
    tmask: tuple[int, ...] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        n = len(self.names)
        if self.mode not in MODES:
            raise GameFormatError(f"unknown mode {self.mode!r}")
        if self.players < 1:
            raise GameFormatError("at least one player required")
        if len(self.owner) != n or len(self.succ) != n:
            raise GameFormatError("owner and successor tables must cover every vertex")
        if len(set(self.names)) != n:
            raise GameFormatError("duplicate vertex names")
        if len(self.targets) != self.players:
            raise GameFormatError("one target set per player required")
        for v in range(n):
            if not 1 <= self.owner[v] <= self.players:
                raise GameFormatError(f"owner of {self.names[v]} out of range")
            if not self.succ[v]:
                raise GameFormatError(f"vertex {self.names[v]} has no outgoing edge")
            if any(not 0 <= w < n for w in self.succ[v]):
                raise GameFormatError(f"dangling edge from {self.names[v]}")
        for f in self.targets:
            if any(not 0 <= v < n for v in f):
                raise GameFormatError("target outside the vertex set")
        if not 0 <= self.init < n:
            raise GameFormatError("initial vertex outside the vertex set")
        masks = [0] * n
        for i, f in enumerate(self.targets):
            for v in f:
                masks[v] |= 1 << i
        object.__setattr__(self, "index", {name: v for v, name in enumerate(self.names)})
        object.__setattr__(self, "tmask", tuple(masks))

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def qualitative(self) -> bool:
        return self.mode == QUALITATIVE

    @property
    def all_players(self) -> int:
        return (1 << self.players) - 1

    def vertex(self, name: str) -> int:
        try:
            return self.index[name]
        except KeyError:
            raise GameFormatError(f"unknown vertex {name!r}") from None

    def with_mode(self, mode: str) -> Game:
        return Game(mode, self.players, self.names, self.owner, self.succ, self.targets, self.init)

    def with_init(self, init: int) -> Game:
        return Game(self.mode, self.players, self.names, self.owner, self.succ, self.targets, init)

    def is_strongly_connected(self) -> bool:
        def reach(adj):
            seen = {0}
            stack = [0]
            while stack:
                v = stack.pop()
                for w in adj[v]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            return len(seen) == self.size

        pred = [[] for _ in range(self.size)]
        for v, ws in enumerate(self.succ):
            for w in ws:
                pred[w].append(v)
        return reach(self.succ) and reach(pred)


def players_of(mask: int) -> frozenset[int]:
    return frozenset(i + 1 for i in range(mask.bit_length()) if mask >> i & 1)


def mask_of(players: Iterable[int]) -> int:
    m = 0
    for i in players:
        m |= 1 << (i - 1)
    return m


# --------------------------------------------------------------------------
# game text format


def parse_game(text: str) -> Game:
    """Parse the line-oriented game format, expanding ``len=k`` edges into chains."""
    mode = None
    players = None
    vertices: list[tuple[str, int, list[int], int]] = []
    edges: list[tuple[str, str, int, int]] = []
    init = None
    seen_names: set[str] = set()

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head, args = parts[0], parts[1:]
        if head == "game":
            if len(args) != 1 or args[0] not in MODES:
                raise GameFormatError("expected 'game quantitative|qualitative'", lineno)
            mode = args[0]
        elif head == "players":
            if len(args) != 1 or not args[0].isdigit() or int(args[0]) < 1:
                raise GameFormatError("expected 'players <n>' with n >= 1", lineno)
            players = int(args[0])
        elif head == "vertex":
            if not args:
                raise GameFormatError("vertex name missing", lineno)
            name, owner, tids = args[0], None, []
            if name in seen_names:
                raise GameFormatError(f"duplicate vertex {name!r}", lineno)
            for a in args[1:]:
                key, _, val = a.partition("=")
                try:
                    if key == "owner":
                        owner = int(val)
                    elif key == "targets":
                        tids = [int(t) for t in val.split(",") if t]
                    else:
                        raise GameFormatError(f"unknown vertex attribute {key!r}", lineno)
                except GameFormatError:
                    raise
                except ValueError:
                    raise GameFormatError(f"bad attribute {a!r}", lineno) from None
            if owner is None:
                raise GameFormatError(f"vertex {name!r} has no owner", lineno)
            seen_names.add(name)
            vertices.append((name, owner, tids, lineno))
        elif head == "edge":
            if len(args) not in (2, 3):
                raise GameFormatError("expected 'edge <src> <dst> [len=<k>]'", lineno)
            length = 1
            if len(args) == 3:
                key, _, val = args[2].partition("=")
                if key != "len" or not val.isdigit() or int(val) < 1:
                    raise GameFormatError("edge length must be 'len=<k>' with k >= 1", lineno)
                length = int(val)
            edges.append((args[0], args[1], length, lineno))
        elif head == "init":
            if len(args) != 1:
                raise GameFormatError("expected 'init <name>'", lineno)
            init = (args[0], lineno)
        else:
            raise GameFormatError(f"unknown directive {head!r}", lineno)

    if mode is None:
        raise GameFormatError("missing 'game' line")
    if players is None:
        raise GameFormatError("missing 'players' line")
    if init is None:
        raise GameFormatError("missing 'init' line")

    names = [v[0] for v in vertices]
    owner = []
    targets: list[set[int]] = [set() for _ in range(players)]
    index = {}
    for idx, (name, own, tids, lineno) in enumerate(vertices):
        if not 1 <= own <= players:
            raise GameFormatError(f"owner {own} out of range 1..{players}", lineno)
        for t in tids:
            if not 1 <= t <= players:
                raise GameFormatError(f"target id {t} out of range 1..{players}", lineno)
            targets[t - 1].add(idx)
        owner.append(own)
        index[name] = idx

    succ: list[list[int]] = [[] for _ in names]
    seen_edges = set()
    for src, dst, length, lineno in edges:
        for end in (src, dst):
            if end not in index:
                raise GameFormatError(f"edge references undeclared vertex {end!r}", lineno)
        if (src, dst) in seen_edges:
            raise GameFormatError(f"duplicate edge {src} -> {dst}", lineno)
        seen_edges.add((src, dst))
        prev = index[src]
        for k in range(1, length):
            fresh = f"{src}_{dst}_{k}"
            if fresh in index:
                raise GameFormatError(f"chain vertex name {fresh!r} already in use", lineno)
            index[fresh] = len(names)
            names.append(fresh)
            owner.append(owner[index[src]])
            succ.append([])
            succ[prev].append(index[fresh])
            prev = index[fresh]
        succ[prev].append(index[dst])

    for v, ws in enumerate(succ):
        if not ws:
            raise GameFormatError(f"vertex {names[v]!r} has no outgoing edge")
    if init[0] not in index:
        raise GameFormatError(f"unknown initial vertex {init[0]!r}", init[1])

    return Game(
        mode=mode,
        players=players,
        names=tuple(names),
        owner=tuple(owner),
        succ=tuple(tuple(ws) for ws in succ),
        targets=tuple(frozenset(f) for f in targets),
        init=index[init[0]],
    )


def serialize_game(game: Game) -> str:
    """Write the (already expanded) game back in the text format."""
    lines = [f"game {game.mode}", f"players {game.players}"]
    for v, name in enumerate(game.names):
        line = f"vertex {name} owner={game.owner[v]}"
        tids = sorted(players_of(game.tmask[v]))
        if tids:
            line += " targets=" + ",".join(map(str, tids))
        lines.append(line)
    for v, ws in enumerate(game.succ):
        for w in ws:
            lines.append(f"edge {game.names[v]} {game.names[w]}")
    lines.append(f"init {game.names[game.init]}")
    return "\n".join(lines) + "\n"


def load_game(path: str) -> Game:
    with open(path, encoding="utf-8") as fh:
        return parse_game(fh.read())


# --------------------------------------------------------------------------
# lassoes


@dataclass(frozen=True)
class Lasso:
    """The ultimately periodic play ``prefix · cycle^ω`` (vertex indices)."""

    prefix: tuple[int, ...]
    cycle: tuple[int, ...]

    def __post_init__(self):
        if not self.cycle:
            raise GameFormatError("lasso cycle must be nonempty")

    @property
    def vertices(self) -> tuple[int, ...]:
        return self.prefix + self.cycle

    @property
    def length(self) -> int:
        """Number of edges of the finite part hℓ."""
        return len(self.prefix) + len(self.cycle) - 1

    @property
    def start(self) -> int:
        return self.prefix[0] if self.prefix else self.cycle[0]

    def at(self, k: int) -> int:
        p = len(self.prefix)
        return self.prefix[k] if k < p else self.cycle[(k - p) % len(self.cycle)]

    def unroll(self, n: int) -> list[int]:
        return [self.at(k) for k in range(n)]

    def canonical(self) -> Lasso:
        """Same play, cycle starting as early as possible, shortest period."""
        h, c = list(self.prefix), list(self.cycle)
        while h and h[-1] == c[-1]:
            c = [h.pop()] + c[:-1]
        n = len(c)
        for per in range(1, n + 1):
            if n % per == 0 and c == c[:per] * (n // per):
                c = c[:per]
                break
        return Lasso(tuple(h), tuple(c))

    def same_play(self, other: Lasso) -> bool:
        return self.canonical() == other.canonical()

    def suffix(self, k: int) -> Lasso:
        p = len(self.prefix)
        if k < p:
            return Lasso(self.prefix[k:], self.cycle)
        r = (k - p) % len(self.cycle)
        return Lasso((), self.cycle[r:] + self.cycle[:r])


def check_lasso(game: Game, lasso: Lasso) -> None:
    seq = lasso.vertices + (lasso.cycle[0],)
    for a, b in zip(seq, seq[1:]):
        if b not in game.succ[a]:
            raise GameFormatError(f"{game.names[a]} -> {game.names[b]} is not an edge")


def parse_lasso(game: Game, text: str) -> Lasso:
    if text.count("|") != 1:
        raise GameFormatError("lasso must have the form 'prefix | cycle'")
    left, right = text.split("|")
    prefix = tuple(game.vertex(t) for t in left.split())
    cycle = tuple(game.vertex(t) for t in right.split())
    if not cycle:
        raise GameFormatError("lasso cycle must be nonempty")
    lasso = Lasso(prefix, cycle)
    check_lasso(game, lasso)
    return lasso


def format_lasso(game: Game, lasso: Lasso) -> str:
    left = " ".join(game.names[v] for v in lasso.prefix)
    right = " ".join(game.names[v] for v in lasso.cycle)
    return f"{left} | {right}" if left else f"| {right}"


# --------------------------------------------------------------------------
# costs, gains, welfare


def first_visits(game: Game, lasso: Lasso) -> tuple[float, ...]:
    """Per player, index of the first visit to its target set (INF if none)."""
    cost = [INF] * game.players
    todo = game.all_players
    for k, v in enumerate(lasso.vertices):
        hit = game.tmask[v] & todo
        if hit:
            todo &= ~hit
            for i in range(game.players):
                if hit >> i & 1:
                    cost[i] = k
            if not todo:
                break
    return tuple(cost)


def cost_or_gain_profile(game: Game, lasso: Lasso) -> tuple[float, ...]:
    costs = first_visits(game, lasso)
    if game.qualitative:
        return tuple(0 if c == INF else 1 for c in costs)
    return costs


def visit_set(game: Game, path: Sequence[int]) -> frozenset[int]:
    m = 0
    for v in path:
        m |= game.tmask[v]
    return players_of(m)


def visit_mask(game: Game, path: Iterable[int]) -> int:
    m = 0
    for v in path:
        m |= game.tmask[v]
    return m


class Welfare(NamedTuple):
    count: int
    total: int


def social_welfare(game: Game, lasso: Lasso) -> Welfare:
    costs = first_visits(game, lasso)
    finite = [c for c in costs if c != INF]
    return Welfare(len(finite), int(sum(finite)))


def lex_compare(a: Welfare, b: Welfare) -> int:
    """1 if a is strictly better than b, 0 if equal, -1 if worse."""
    if a.count != b.count:
        return 1 if a.count > b.count else -1
    if a.total != b.total:
        return 1 if a.total < b.total else -1
    return 0


def welfare_at_least(a: Welfare, b: Welfare) -> bool:
    return lex_compare(a, b) >= 0


# --------------------------------------------------------------------------
# enumeration


def enumerate_lassoes(
    game: Game,
    max_len: int,
    start: int | None = None,
    *,
    normalized: bool = False,
    free_prefix: int = 0,
    labeling: Sequence[float] | None = None,
    caps: Sequence[float] | None = None,
) -> Iterator[Lasso]:
    """Yield each lasso with at most ``max_len`` edges in its finite part, once.

    Lassoes come out in canonical form. With ``normalized`` the finite part is
    restricted to paths without an unnecessary cycle (a repeated vertex with
    no new visit in between) among positions ``>= free_prefix``.
    ``labeling`` prunes histories that already break a finite deadline and
    ``caps`` prunes histories where an unvisited player exceeds its cap;
    both are quantitative pruning aids, callers still check the result.
    """
    if max_len < 1:
        return
    v0 = game.init if start is None else start
    succ, tmask, owner = game.succ, game.tmask, game.owner
    quantitative = not game.qualitative
    n_players = game.players
    path = [v0]
    masks = [tmask[v0]]
    where: dict[int, list[int]] = {v0: [0]}
    seg: list[set[int]] = [set() if free_prefix > 0 else {v0}]

    def deadlines_ok(k_new: int, mask: int, deadline: list[float]) -> bool:
        for i in range(n_players):
            if not mask >> i & 1 and deadline[i] < k_new:
                return False
        return True

    def caps_ok(k: int, mask: int) -> bool:
        for i in range(n_players):
            if not mask >> i & 1 and caps[i] <= k:
                return False
        return True

    def closures() -> Iterator[Lasso]:
        n = len(path) - 1
        last = path[n]
        for w in succ[last]:
            for k in where.get(w, ()):
                if k > 0 and path[k - 1] == last:
                    continue
                cyc = path[k:]
                m = len(cyc)
                if any(m % per == 0 and cyc == cyc[:per] * (m // per) for per in range(1, m)):
                    continue
                yield Lasso(tuple(path[:k]), tuple(cyc))

    def push_deadline(deadline: list[float], v: int, k: int, mask: int) -> list[float]:
        o = owner[v] - 1
        lam = labeling[v]
        if not mask >> o & 1 and lam != INF and k + lam < deadline[o]:
            deadline = list(deadline)
            deadline[o] = k + lam
        return deadline

    init_deadline = [INF] * n_players
    if labeling is not None and quantitative:
        init_deadline = push_deadline(init_deadline, v0, 0, masks[0])
    if caps is not None and quantitative and not caps_ok(0, masks[0]):
        return

    def dfs(deadline: list[float]) -> Iterator[Lasso]:
        yield from closures()
        n = len(path) - 1
        if n >= max_len:
            return
        mask = masks[n]
        cur_seg = seg[-1]
        for w in succ[path[n]]:
            k = n + 1
            new_mask = mask | tmask[w]
            if normalized and k > free_prefix and new_mask == mask and w in cur_seg:
                continue
            d = deadline
            if labeling is not None and quantitative:
                if not deadlines_ok(k, new_mask, d):
                    continue
                d = push_deadline(d, w, k, new_mask)
            if caps is not None and quantitative and not caps_ok(k, new_mask):
                continue
            path.append(w)
            masks.append(new_mask)
            where.setdefault(w, []).append(k)
            added = False
            if normalized and k >= free_prefix:
                if new_mask != mask or k == free_prefix:
                    seg.append({w})
                else:
                    cur_seg.add(w)
                    added = True
                    seg.append(cur_seg)
            else:
                seg.append(cur_seg)
            yield from dfs(d)
            if added:
                cur_seg.discard(w)
            seg.pop()
            where[w].pop()
            path.pop()
            masks.pop()

    yield from dfs(init_deadline)
