from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from reacheq.game import INF, QUALITATIVE, enumerate_lassoes, parse_lasso
from reacheq.generate import random_game
from reacheq.machines import (
    ConfigGraph,
    best_response_cost,
    check_machine,
    format_machines,
    outcome,
    parse_machines,
    profitable_deviation,
)
from reacheq.ne import decide_ne, is_ne_outcome, synthesize_ne_machines, verify_ne
from reacheq.queries import ParetoQuery, Threshold, WelfareQuery, parse_bounds, search_bound, within

SIX_THREE = "v0 v0_v1_1 v0_v1_2 v1 | v0 v2 v3"


def test_outcome_replays_lasso(ex1):
    l = parse_lasso(ex1, SIX_THREE)
    machines = synthesize_ne_machines(ex1, l)
    assert outcome(ex1, machines).same_play(l)
    for m in machines:
        check_machine(ex1, m)


def test_synthesis_refuses_inconsistent(ex1):
    with pytest.raises(ValueError, match="Val-consistent"):
        synthesize_ne_machines(ex1, parse_lasso(ex1, "| v0 v2 v2_v4_1 v4"))
    unchecked = synthesize_ne_machines(ex1, parse_lasso(ex1, "| v0 v2 v2_v4_1 v4"), check=False)
    assert not verify_ne(ex1, unchecked)


def test_best_response_on_three_three(ex1):
    l = parse_lasso(ex1, "| v0 v2 v2_v4_1 v4")
    machines = synthesize_ne_machines(ex1, l, check=False)
    assert best_response_cost(ex1, machines, 1) == 2


def test_machine_text_roundtrip(ex1):
    machines = synthesize_ne_machines(ex1, parse_lasso(ex1, SIX_THREE))
    again = parse_machines(ex1, format_machines(ex1, machines))
    assert [m.size for m in again] == [m.size for m in machines]
    assert outcome(ex1, again).same_play(outcome(ex1, machines))
    assert verify_ne(ex1, again)


def test_machine_parse_errors(ex1):
    with pytest.raises(ValueError):
        parse_machines(ex1, "machine player=1 states=1 initial=s\nend\n")
    with pytest.raises(ValueError):
        parse_machines(ex1, "bogus line\n")


def test_ne_decisions_on_ex1(ex1):
    assert not decide_ne(ex1, Threshold(upper=(3, 3))).answer
    yes = decide_ne(ex1, Threshold(upper=(6, 3)))
    assert yes.answer and yes.profile == (6, 3)
    assert decide_ne(ex1, Threshold(upper=(INF, INF))).answer
    assert not decide_ne(ex1, Threshold(upper=(6, 3), strict_upper=(True, False))).answer
    assert decide_ne(ex1, WelfareQuery(2, 9)).answer
    assert not decide_ne(ex1, WelfareQuery(2, 8)).answer
    assert decide_ne(ex1, Threshold(lower=(6, 3))).answer
    assert not decide_ne(ex1, Threshold(lower=(7, 0), upper=(7, INF))).answer
    pareto = decide_ne(ex1, ParetoQuery())
    assert not pareto.answer and pareto.front == [(2, 6), (3, 3)]


def test_lower_bound_search_reaches_past_normal_form(ex1):
    # cost 10 for player 1 needs an extra idle v1 loop
    v = decide_ne(ex1, Threshold(lower=(10, 0), upper=(10, INF)))
    assert v.answer and v.profile[0] == 10


def test_thresholds_validated(ex1):
    with pytest.raises(ValueError):
        decide_ne(ex1, Threshold(upper=(1,)))
    with pytest.raises(ValueError):
        decide_ne(ex1, WelfareQuery(3))
    with pytest.raises(ValueError):
        decide_ne(ex1.with_mode(QUALITATIVE), Threshold(lower=(2, 0)))


def test_parse_bounds():
    assert parse_bounds("3<,inf", 2) == ((3, INF), (True, False))
    with pytest.raises(ValueError):
        parse_bounds("1,2,3", 2)


def test_within_semantics(ex1):
    q = Threshold(upper=(3, 3), strict_upper=(True, False), lower=(1, 0))
    assert within(ex1, (2, 3), q)
    assert not within(ex1, (3, 3), q)
    assert not within(ex1, (0, 3), q)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5), st.integers(2, 3), st.integers(0, 50_000))
def test_verify_ne_agrees_with_config_graph(n, p, seed):
    g = random_game(n, p, seed)
    for l in enumerate_lassoes(g, search_bound(g), normalized=True):
        machines = synthesize_ne_machines(g, l, check=False)
        graph = ConfigGraph(g, machines)
        follow = {i: graph.follow_costs(i)[0] for i in range(1, p + 1)}
        best = {i: graph.best_costs(i)[0] for i in range(1, p + 1)}
        ok = all(best[i] >= follow[i] for i in follow)
        assert ok == verify_ne(g, machines) == is_ne_outcome(g, l)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(2, 3), st.integers(0, 50_000))
def test_ne_witnesses_verify(n, p, seed):
    g = random_game(n, p, seed)
    v = decide_ne(g, Threshold(upper=(INF,) * p))
    assert v.answer
    assert verify_ne(g, v.machines)
    assert outcome(g, v.machines).same_play(v.lasso)


def test_punishment_is_not_always_subgame_perfect():
    # on some game an NE punishment profile has a profitable deviation in a subgame
    for seed in range(200):
        g = random_game(4, 2, seed)
        for l in enumerate_lassoes(g, search_bound(g), normalized=True):
            if is_ne_outcome(g, l):
                machines = synthesize_ne_machines(g, l)
                if profitable_deviation(g, machines) is not None:
                    return
    pytest.fail("no NE punishment profile failed subgame perfection")
