"""Nash and subgame perfect equilibria in multiplayer reachability games."""

from .game import INF, QUALITATIVE, QUANTITATIVE, Game, GameFormatError, Lasso, \
    cost_or_gain_profile, enumerate_lassoes, first_visits, format_lasso, load_game, \
    parse_game, parse_lasso, serialize_game, social_welfare
from .lassos import apply_p1, apply_p2, first_violation, lambda_consistent, normalize
from .machines import StrategyMachine, format_machines, parse_machines
from .ne import decide_ne, is_ne_outcome, synthesize_ne_machines, verify_ne
from .queries import ParetoQuery, Threshold, Verdict, WelfareQuery
from .spe import build_extended, build_witness, check_good, decide_spe, is_spe_outcome, \
    lambda_star, synthesize_spe_machines, verify_spe, visit_all_spe_qual
from .values import solve_view, val_labeling

__version__ = "0.1.0"

__all__ = [
    "INF",
    "QUALITATIVE",
    "QUANTITATIVE",
    "Game",
    "GameFormatError",
    "Lasso",
    "ParetoQuery",
    "StrategyMachine",
    "Threshold",
    "Verdict",
    "WelfareQuery",
    "apply_p1",
    "apply_p2",
    "build_extended",
    "build_witness",
    "check_good",
    "cost_or_gain_profile",
    "decide_ne",
    "decide_spe",
    "enumerate_lassoes",
    "first_violation",
    "first_visits",
    "format_lasso",
    "format_machines",
    "is_ne_outcome",
    "is_spe_outcome",
    "lambda_consistent",
    "lambda_star",
    "load_game",
    "normalize",
    "parse_game",
    "parse_lasso",
    "parse_machines",
    "serialize_game",
    "social_welfare",
    "solve_view",
    "synthesize_ne_machines",
    "synthesize_spe_machines",
    "val_labeling",
    "verify_ne",
    "verify_spe",
    "visit_all_spe_qual",
]
