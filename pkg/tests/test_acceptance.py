"""Acceptance criteria 1-12; each test records one pass/fail line for the summary."""

from __future__ import annotations

from itertools import product

from corpora import cnf_corpus, ne_corpus, qbf_matrices, qual_corpus, spe_corpus
from oracles import brute_val_labeling, good_fixpoint

from reacheq.game import INF, cost_or_gain_profile, enumerate_lassoes, first_visits, parse_lasso
from reacheq.lassos import (
    Violation,
    apply_p1,
    apply_p2,
    find_unnecessary_cycle,
    first_violation,
    lambda_consistent,
    normalize,
)
from reacheq.machines import StrategyMachine, outcome
from reacheq.ne import decide_ne, is_ne_outcome, synthesize_ne_machines, verify_ne
from reacheq.queries import ParetoQuery, Threshold, WelfareQuery, achievable_profiles, \
    pareto_front, search_bound
from reacheq.reductions import QbfFormula, brute_qbf, brute_sat, qbf_to_game, sat_to_game, \
    sat_to_pareto_game_qual
from reacheq.spe import build_extended, build_witness, check_good, decide_spe, lambda_star, \
    synthesize_spe_machines, verify_spe, visit_all_spe_qual
from reacheq.values import val_labeling

# pinned tolerances: every criterion is an exact comparison
EXACT = 0
MAX_MISMATCHES = 0
NE_GAMES = 200
SPE_GAMES = 50
CNF_MIN = 100
WITNESS_BOUND = 10
LASSO_INPUT_LEN = 8

THREE_THREE = "| v0 v2 v2_v4_1 v4"
SIX_THREE = "v0 v0_v1_1 v0_v1_2 v1 | v0 v2 v3"


def test_c01_val_labeling(ex1, criterion):
    val = val_labeling(ex1)
    named = {ex1.names[v]: val[v] for v in range(ex1.size)}
    base = {k: named[k] for k in ("v0", "v1", "v2", "v3", "v4")}
    expected = {"v0": 3, "v1": INF, "v2": 1, "v3": 0, "v4": 0}
    chains_ok = list(val) == brute_val_labeling(ex1)
    ok = base == expected and chains_ok
    criterion(1, ok, f"Val(ex1) base={base} chains match owner oracle={chains_ok}")
    assert base == expected
    assert chains_ok


def test_c02_lambda_consistency(ex1, criterion):
    val = val_labeling(ex1)
    bad = first_violation(ex1, parse_lasso(ex1, THREE_THREE), val)
    good = first_violation(ex1, parse_lasso(ex1, SIX_THREE), val)
    want = Violation(position=1, vertex=ex1.vertex("v2"), player=1, residual=2, bound=1)
    ok = bad == want and good is None
    criterion(2, ok, f"(3,3) violation={bad}, (6,3) accepted={good is None}")
    assert bad == want
    assert good is None


def test_c03_ne_threshold(ex1, criterion):
    q33 = decide_ne(ex1, Threshold(upper=(3, 3)))
    q63 = decide_ne(ex1, Threshold(upper=(6, 3)))
    witness_ok = q63.answer and cost_or_gain_profile(ex1, q63.lasso) == (6, 3)
    verified = q63.answer and verify_ne(ex1, q63.machines)
    ok = not q33.answer and witness_ok and verified
    criterion(3, ok, f"y=(3,3) {q33.answer}, y=(6,3) {q63.answer} profile={q63.profile} verified={verified}")
    assert not q33.answer
    assert witness_ok and verified


def test_c04_ne_welfare(ex1, criterion):
    v = decide_ne(ex1, WelfareQuery(2, 9))
    ok = v.answer and v.welfare.count == 2 and v.welfare.total <= 9
    criterion(4, ok, f"(k,c)=(2,9) answer={v.answer} welfare={v.welfare}")
    assert ok


def test_c05_pareto_none(ex1, criterion):
    ne = decide_ne(ex1, ParetoQuery())
    spe = decide_spe(ex1, ParetoQuery())
    ok = not ne.answer and not spe.answer
    criterion(5, ok, f"NE={ne.answer} SPE={spe.answer} front={ne.front}")
    assert ok


def test_c06_qualitative_fixtures(ex0, three, criterion):
    lower = decide_ne(ex0, Threshold(lower=(0, 1)))
    front = pareto_front(achievable_profiles(three), qualitative=True)
    pareto = decide_ne(three, ParetoQuery())
    ok = not lower.answer and set(front) == {(1, 0, 1), (1, 1, 0)} and not pareto.answer
    criterion(6, ok, f"ex0 lower(0,1)={lower.answer}; three front={front} pareto NE={pareto.answer}")
    assert ok


def test_c07_ne_oracle_equivalence(criterion):
    games = mismatches = lassoes = 0
    for g in ne_corpus(NE_GAMES):
        assert g.size <= 6 and 2 <= g.players <= 3
        games += 1
        for l in enumerate_lassoes(g, search_bound(g), normalized=True):
            lassoes += 1
            machines = synthesize_ne_machines(g, l, check=False)
            if is_ne_outcome(g, l) != verify_ne(g, machines):
                mismatches += 1
    ok = games >= NE_GAMES and mismatches <= MAX_MISMATCHES
    criterion(7, ok, f"{games} games, {lassoes} normalized lassoes, {mismatches} mismatches")
    assert ok


def _positional_profiles(g):
    """Every profile of one-state machines."""
    own = {p: [v for v in range(g.size) if g.owner[v] == p] for p in range(1, g.players + 1)}
    choices = [list(product(*(g.succ[v] for v in own[p]))) for p in range(1, g.players + 1)]
    update = ((0,) * g.size,)
    for combo in product(*choices):
        profile = []
        for p, pick in enumerate(combo, 1):
            row = [-1] * g.size
            for v, w in zip(own[p], pick):
                row[v] = w
            profile.append(StrategyMachine(p, ("m",), 0, update, (tuple(row),)))
        yield profile


def test_c08_spe_oracle_soundness(criterion):
    """Acceptance: witness, goodness, synthesis, verify_spe all succeed.

    Rejection: a rejected lasso must be no verified SPE outcome. Enumerating
    all profiles of up to six states is out of reach, so three independent
    routes check it: every one-state profile exhaustively, a labeling-free
    greatest fixpoint over bounded witness lassoes, and the two natural
    attack profiles (punishment machines and a forced witness) per lasso.
    """
    games = accepted = rejected = mismatches = fixpoints = positional = pruned = 0
    for g in spe_corpus(SPE_GAMES):
        assert g.size <= 5 and g.players == 2
        games += 1
        xg = build_extended(g)
        lam = lambda_star(xg)
        fixpoints += 1
        X = xg.game
        for l in enumerate_lassoes(X, search_bound(X, g.size), start=0, normalized=True):
            if lambda_consistent(X, l, lam):
                accepted += 1
                w = build_witness(xg, l, lam)
                machines = synthesize_spe_machines(w)
                same = outcome(g, machines).same_play(xg.project(l))
                if not (check_good(w) and verify_spe(g, machines) and same):
                    mismatches += 1
            else:
                rejected += 1
                base = xg.project(l)
                if verify_spe(g, synthesize_ne_machines(g, base, check=False)):
                    mismatches += 1
                forced = build_witness(xg, l, lam, check=False)
                if verify_spe(g, synthesize_spe_machines(forced, check=False)):
                    mismatches += 1
        for profile in _positional_profiles(g):
            if verify_spe(g, profile):
                positional += 1
                if not lambda_consistent(X, xg.lift(outcome(g, profile)), lam):
                    mismatches += 1
        survivors = good_fixpoint(X, WITNESS_BOUND)
        pruned += sum(1 for _ in enumerate_lassoes(X, WITNESS_BOUND, start=0)) - len(survivors[0])
        for pool in survivors.values():
            mismatches += sum(1 for l in pool if not lambda_consistent(X, l, lam))
    ok = games >= SPE_GAMES and mismatches <= MAX_MISMATCHES and fixpoints == games
    criterion(
        8,
        ok,
        f"{games} games, λ* converged on {fixpoints}, {accepted} accepted / {rejected} rejected, "
        f"{positional} verified one-state SPEs, {pruned} lassoes cut by the fixpoint oracle, "
        f"{mismatches} mismatches",
    )
    assert ok


def test_c09_lasso_bounds(criterion):
    checked = violations = 0
    for g in list(ne_corpus(60)) + list(spe_corpus(SPE_GAMES)):
        n, p = g.size, g.players
        for l in enumerate_lassoes(g, LASSO_INPUT_LEN):
            checked += 1
            costs = first_visits(g, l)
            norm, trace = normalize(g, l)
            finite = [c for c in first_visits(g, norm) if c != INF]
            if norm.length > (p + 1) * n or any(c > p * n for c in finite):
                violations += 1
            if trace.replay(g, l) != norm:
                violations += 1
            found = find_unnecessary_cycle(g, l, l.length + len(l.cycle))
            if found is not None:
                after = first_visits(g, apply_p1(g, l, *found))
                if any(a > b for a, b in zip(after, costs)):
                    violations += 1
            if first_visits(g, apply_p2(g, l)) != costs:
                violations += 1
    ok = violations <= MAX_MISMATCHES
    criterion(9, ok, f"{checked} lassoes, {violations} bound or cost violations")
    assert ok


def test_c10_reduction_faithfulness(criterion):
    cnfs = list(cnf_corpus())
    sat_bad = pareto_bad = 0
    for f in cnfs:
        truth = brute_sat(f)
        game, threshold = sat_to_game(f)
        if decide_ne(game, Threshold(upper=threshold), machines=False).answer != truth:
            sat_bad += 1
        if decide_ne(sat_to_pareto_game_qual(f), ParetoQuery(), machines=False).answer != truth:
            pareto_bad += 1
    qbfs = [QbfFormula(m) for m in qbf_matrices()]
    qbf_bad = 0
    for q in qbfs:
        game, (k, s) = qbf_to_game(q)
        assert s == 2 * 2 * len(q.matrix.clauses) + 2 * 2 + len(q.matrix.clauses)
        if decide_spe(game, WelfareQuery(k, s), machines=False).answer != brute_qbf(q):
            qbf_bad += 1
    ok = len(cnfs) >= CNF_MIN and sat_bad + pareto_bad + qbf_bad <= MAX_MISMATCHES
    criterion(
        10,
        ok,
        f"{len(cnfs)} CNF classes: threshold {sat_bad}, pareto {pareto_bad} mismatches; "
        f"{len(qbfs)} QBFs (m=2): {qbf_bad} mismatches",
    )
    assert ok


def test_c11_existence(criterion):
    ne_no = spe_no = 0
    games = list(ne_corpus(60)) + list(spe_corpus(SPE_GAMES))
    for g in games:
        top = Threshold(upper=(INF,) * g.players)
        ne_no += not decide_ne(g, top, machines=False).answer
        spe_no += not decide_spe(g, top, machines=False).answer
    visit_bad = visit_games = 0
    for g in qual_corpus(40, players=3, strongly_connected=True):
        visit_games += 1
        machines, lasso = visit_all_spe_qual(g)
        gains = cost_or_gain_profile(g, outcome(g, machines))
        need = all(gains[i] == 1 for i in range(g.players) if g.targets[i])
        if not (verify_spe(g, machines) and need and outcome(g, machines).same_play(lasso)):
            visit_bad += 1
    pareto_no = pareto_games = 0
    for g in qual_corpus(60, players=2):
        pareto_games += 1
        pareto_no += not decide_spe(g, ParetoQuery(), machines=False).answer
    ok = ne_no == spe_no == visit_bad == pareto_no == 0
    criterion(
        11,
        ok,
        f"trivial threshold no-answers NE={ne_no} SPE={spe_no} over {len(games)}; "
        f"visit-all failures {visit_bad}/{visit_games}; 2-player qualitative Pareto no {pareto_no}/{pareto_games}",
    )
    assert ok


def test_c12_ne_machine_size(ex1, criterion):
    wrong = total = 0
    ex = synthesize_ne_machines(ex1, parse_lasso(ex1, SIX_THREE))
    sizes_ex1 = {m.size for m in ex}
    for g in ne_corpus(NE_GAMES):
        for l in enumerate_lassoes(g, search_bound(g), normalized=True):
            total += 1
            want = l.length + 2 + g.players
            if any(m.size != want for m in synthesize_ne_machines(g, l, check=False)):
                wrong += 1
    ok = wrong == EXACT and sizes_ex1 == {6 + 2 + 2}
    criterion(12, ok, f"ex1 (6,3) machines have {sizes_ex1} states; {wrong}/{total} size mismatches")
    assert ok
