"""Hardness gadgets from SAT and QBF, with brute-force logic oracles."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .game import Game, parse_game

SAT_CAP = 20
QBF_CAP = 12


@dataclass(frozen=True)
class CnfFormula:
    variables: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.variables < 0:
            raise ValueError("negative variable count")
        for c in self.clauses:
            if not c:
                raise ValueError("empty clause")
            for lit in c:
                if lit == 0 or abs(lit) > self.variables:
                    raise ValueError(f"literal {lit} outside 1..{self.variables}")

    def satisfied_by(self, valuation) -> bool:
        return all(any(valuation[abs(l) - 1] == (l > 0) for l in c) for c in self.clauses)


@dataclass(frozen=True)
class QbfFormula:
    """Q1 x1 Q2 x2 ... Qm xm φ with ∃ on odd and ∀ on even indices."""

    matrix: CnfFormula

    @property
    def variables(self) -> int:
        return self.matrix.variables

    @staticmethod
    def quantifier(k: int) -> str:
        return "e" if k % 2 == 1 else "a"


def _dimacs_body(text: str, kind: str):
    header = None
    quants: list[tuple[str, list[int]]] = []
    lits: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {lineno}: expected 'p cnf <vars> <clauses>'")
            header = (int(parts[2]), int(parts[3]))
            continue
        if header is None:
            raise ValueError(f"line {lineno}: clause before the problem line")
        if parts[0] in ("e", "a"):
            if kind != "qbf":
                raise ValueError(f"line {lineno}: quantifier line in a CNF file")
            if lits:
                raise ValueError(f"line {lineno}: quantifier after clauses")
            nums = [int(p) for p in parts[1:]]
            if not nums or nums[-1] != 0:
                raise ValueError(f"line {lineno}: quantifier block must end with 0")
            quants.append((parts[0], nums[:-1]))
            continue
        try:
            lits.extend(int(p) for p in parts)
        except ValueError:
            raise ValueError(f"line {lineno}: bad literal") from None
    if header is None:
        raise ValueError("missing problem line")
    clauses, cur = [], []
    for l in lits:
        if l == 0:
            clauses.append(tuple(cur))
            cur = []
        else:
            cur.append(l)
    if cur:
        clauses.append(tuple(cur))
    if len(clauses) != header[1]:
        raise ValueError(f"problem line announces {header[1]} clauses, found {len(clauses)}")
    return CnfFormula(header[0], tuple(clauses)), quants


def parse_dimacs(text: str) -> CnfFormula:
    return _dimacs_body(text, "cnf")[0]


def parse_qdimacs(text: str) -> QbfFormula:
    """Quantifier blocks must list x1..xm in order, alternating and starting with ∃."""
    cnf, quants = _dimacs_body(text, "qbf")
    order = [(q, v) for q, vs in quants for v in vs]
    expected = [(QbfFormula.quantifier(k), k) for k in range(1, cnf.variables + 1)]
    if order != expected:
        raise ValueError("quantifier prefix must be e x1, a x2, e x3, ... over all variables")
    return QbfFormula(cnf)


def format_dimacs(cnf: CnfFormula) -> str:
    lines = [f"p cnf {cnf.variables} {len(cnf.clauses)}"]
    lines += [" ".join(map(str, c)) + " 0" for c in cnf.clauses]
    return "\n".join(lines) + "\n"


def format_qdimacs(qbf: QbfFormula) -> str:
    cnf = qbf.matrix
    lines = [f"p cnf {cnf.variables} {len(cnf.clauses)}"]
    lines += [f"{QbfFormula.quantifier(k)} {k} 0" for k in range(1, cnf.variables + 1)]
    lines += [" ".join(map(str, c)) + " 0" for c in cnf.clauses]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# oracles


def brute_sat(cnf: CnfFormula) -> bool:
    if cnf.variables > SAT_CAP:
        raise ValueError(f"brute_sat handles at most {SAT_CAP} variables")
    return any(cnf.satisfied_by(val) for val in product((False, True), repeat=cnf.variables))


def brute_qbf(qbf: QbfFormula) -> bool:
    m = qbf.variables
    if m > QBF_CAP:
        raise ValueError(f"brute_qbf handles at most {QBF_CAP} variables")

    def value(prefix: tuple[bool, ...]) -> bool:
        k = len(prefix) + 1
        if k > m:
            return qbf.matrix.satisfied_by(prefix)
        branches = (value(prefix + (b,)) for b in (False, True))
        return any(branches) if QbfFormula.quantifier(k) == "e" else all(branches)

    return value(())


# --------------------------------------------------------------------------
# gadgets


def _clause_targets(cnf: CnfFormula, i: int, zero: str, one: str) -> list[str]:
    names = []
    for l in cnf.clauses[i]:
        names.append((one if l > 0 else zero).format(abs(l)))
    return names


def _build(mode: str, players: int, owners: dict, targets: dict, edges, init: str) -> Game:
    lines = [f"game {mode}", f"players {players}"]
    for name, own in owners.items():
        t = sorted(targets.get(name, ()))
        lines.append(f"vertex {name} owner={own}" + (" targets=" + ",".join(map(str, t)) if t else ""))
    for e in edges:
        lines.append("edge " + " ".join(map(str, e[:2])) + (f" len={e[2]}" if len(e) > 2 else ""))
    lines.append(f"init {init}")
    return parse_game("\n".join(lines) + "\n")


def _sat_arena(cnf: CnfFormula, mode: str, bottom: bool) -> Game:
    m, n = cnf.variables, len(cnf.clauses)
    if m == 0 or n == 0:
        raise ValueError("gadget needs at least one variable and one clause")
    env = n + 1
    owners, targets, edges = {}, {}, []
    for k in range(1, m + 1):
        owners[f"x{k}"] = env
        owners[f"zero{k}"] = env
        owners[f"one{k}"] = env
        nxt = f"x{k + 1}" if k < m else "P1"
        edges += [(f"x{k}", f"zero{k}"), (f"x{k}", f"one{k}"), (f"zero{k}", nxt), (f"one{k}", nxt)]
    for i in range(1, n + 1):
        owners[f"P{i}"] = i
        edges += [(f"P{i}", f"P{i + 1}" if i < n else "Tw"), (f"P{i}", "Tl")]
    owners["Tw"] = env
    owners["Tl"] = env
    edges += [("Tw", "Tw"), ("Tl", "Tl")]
    targets["Tw"] = {env}
    for i in range(n):
        for name in _clause_targets(cnf, i, "zero{}", "one{}") + ["Tl"]:
            targets.setdefault(name, set()).add(i + 1)
    if bottom:
        owners["bot"] = env
        edges += [("x1", "bot"), ("bot", "bot")]
        targets["bot"] = {env}
    return _build(mode, n + 1, owners, targets, edges, "x1")


def sat_to_game(cnf: CnfFormula) -> tuple[Game, tuple[int, ...]]:
    """Quantitative gadget: satisfiable iff an NE meets (2m,…,2m,2m+n)."""
    m, n = cnf.variables, len(cnf.clauses)
    game = _sat_arena(cnf, "quantitative", bottom=False)
    return game, (2 * m,) * n + (2 * m + n,)


def sat_to_pareto_game_qual(cnf: CnfFormula) -> Game:
    """Qualitative gadget with a ⊥ escape: satisfiable iff a Pareto-optimal NE exists."""
    return _sat_arena(cnf, "qualitative", bottom=True)


def qbf_weight(qbf: QbfFormula) -> int:
    m, n = qbf.variables, len(qbf.matrix.clauses)
    return 2 * m * n + 2 * m + n


def qbf_to_game(qbf: QbfFormula) -> tuple[Game, tuple[int, int]]:
    """Quantitative gadget: true iff an SPE has welfare ⪰ (|Π|−1, S).

    Players 1..n are clauses, n+1 is ∃ and n+2 is ∀. Clause player k owns c_k
    and may leave to t_k, shared with ∀; ∃ wins at t_{n+1} or, late, at ⊥.
    """
    cnf = qbf.matrix
    m, n = cnf.variables, len(cnf.clauses)
    if m == 0 or n == 0:
        raise ValueError("gadget needs at least one variable and one clause")
    ex, al = n + 1, n + 2
    S = qbf_weight(qbf)
    owners, targets, edges = {}, {}, []
    for k in range(1, m + 1):
        owners[f"q{k}"] = ex if k % 2 == 1 else al
        owners[f"pos{k}"] = ex
        owners[f"neg{k}"] = ex
        nxt = f"q{k + 1}" if k < m else "c1"
        edges += [(f"q{k}", f"pos{k}"), (f"q{k}", f"neg{k}"), (f"pos{k}", nxt), (f"neg{k}", nxt)]
    for i in range(1, n + 1):
        owners[f"c{i}"] = i
        owners[f"t{i}"] = al
        edges += [(f"c{i}", f"t{i}"), (f"c{i}", f"c{i + 1}" if i < n else f"t{n + 1}"), (f"t{i}", f"t{i}")]
        targets.setdefault(f"t{i}", set()).update({i, al})
    owners[f"t{n + 1}"] = ex
    edges.append((f"t{n + 1}", f"t{n + 1}"))
    targets.setdefault(f"t{n + 1}", set()).add(ex)
    owners["bot"] = ex
    edges += [("q1", "bot", 2 * S), ("bot", "bot")]
    targets["bot"] = {ex}
    for i in range(n):
        for name in _clause_targets(cnf, i, "neg{}", "pos{}"):
            targets.setdefault(name, set()).add(i + 1)
    return _build("quantitative", n + 2, owners, targets, edges, "q1"), (n + 1, S)
