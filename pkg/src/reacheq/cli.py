"""Command-line front end: ``reacheq solve|check|values|synth|verify|gen``.

Exit codes: 0 yes/success, 1 no, 2 usage or input error, 3 internal limit.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
import time

from . import __version__
from .dot import game_to_dot, machines_to_dot
from .game import GameFormatError, fmt_value, format_lasso, load_game, parse_lasso, \
    parse_value, serialize_game
from .generate import random_game
from .lassos import first_violation
from .machines import format_machines, parse_machines
from .ne import decide_ne, synthesize_ne_machines, verify_ne
from .queries import ParetoQuery, Threshold, WelfareQuery, parse_bounds
from .reductions import parse_dimacs, parse_qdimacs, qbf_to_game, sat_to_game, \
    sat_to_pareto_game_qual
from .spe import LambdaStarError, build_extended, build_witness, decide_spe, lambda_star, \
    synthesize_spe_machines, verify_spe, visit_all_spe_qual
from .values import val_labeling

EXIT_YES, EXIT_NO, EXIT_INPUT, EXIT_LIMIT = 0, 1, 2, 3


class SizeLimit(RuntimeError):
    pass


def write_atomic(path: str, text: str) -> None:
    """Write through a temporary file in the target directory, then rename."""
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".reacheq-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(text: str, path: str | None) -> None:
    if path:
        write_atomic(path, text)
    else:
        sys.stdout.write(text)


def kv(pairs) -> str:
    return "".join(f"{k}={v}\n" for k, v in pairs)


def fmt_vec(values) -> str:
    return ",".join(fmt_value(x) for x in values)


# --------------------------------------------------------------------------
# subcommands


def _query(args, game):
    if args.problem == "threshold":
        upper = lower = su = sl = None
        if args.upper:
            upper, su = parse_bounds(args.upper, game.players)
        if args.lower:
            lower, sl = parse_bounds(args.lower, game.players)
        return Threshold(upper, lower, su, sl)
    if args.problem == "welfare":
        if args.k is None:
            raise ValueError("--k is required for the welfare problem")
        return WelfareQuery(args.k, parse_value(args.c))
    return ParetoQuery()


def _guard_size(game, args) -> None:
    if args.solution == "spe":
        size = build_extended(game).game.size
        if size > args.max_states:
            raise SizeLimit(f"extended game has {size} vertices (cap {args.max_states})")


def cmd_solve(args) -> int:
    game = load_game(args.game)
    query = _query(args, game)
    _guard_size(game, args)
    t0 = time.perf_counter()
    want = not args.no_machines
    if args.solution == "ne":
        verdict = decide_ne(game, query, jobs=args.jobs, machines=want)
    else:
        verdict = decide_spe(game, query, jobs=args.jobs, machines=want, residual=args.residual)
    elapsed = time.perf_counter() - t0
    pairs = [
        ("answer", "yes" if verdict.answer else "no"),
        ("problem", verdict.problem),
        ("solution", verdict.solution),
    ]
    if verdict.answer:
        pairs += [
            ("lasso", format_lasso(game, verdict.lasso)),
            ("profile", fmt_vec(verdict.profile)),
            ("welfare", f"{verdict.welfare.count},{verdict.welfare.total}"),
        ]
    if "best_welfare" in verdict.extra:
        w = verdict.extra["best_welfare"]
        pairs.append(("best_welfare", f"{w.count},{w.total}"))
    if verdict.front is not None:
        pairs.append(("front", ";".join(fmt_vec(p) for p in verdict.front)))
    if verdict.machines:
        pairs.append(("machine_states", ",".join(str(m.size) for m in verdict.machines)))
        if args.machines_out:
            write_atomic(args.machines_out, format_machines(game, verdict.machines))
            pairs.append(("machines", args.machines_out))
        if args.emit_dot:
            write_atomic(args.emit_dot, machines_to_dot(game, verdict.machines))
            pairs.append(("dot", args.emit_dot))
    pairs.append(("elapsed_s", f"{elapsed:.4f}"))
    if args.format == "dot":
        if verdict.machines:
            emit(machines_to_dot(game, verdict.machines), args.out)
        else:
            emit(game_to_dot(game), args.out)
    else:
        emit(kv(pairs), args.out)
    return EXIT_YES if verdict.answer else EXIT_NO


def _read_labeling(game, source: str):
    if source == "val":
        return val_labeling(game)
    labels = {}
    with open(source, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].split()
            if not line:
                continue
            if len(line) != 2:
                raise GameFormatError("expected '<vertex> <value>'", lineno)
            labels[game.vertex(line[0])] = parse_value(line[1])
    missing = [game.names[v] for v in range(game.size) if v not in labels]
    if missing:
        raise GameFormatError(f"labeling misses vertices: {' '.join(missing)}")
    return tuple(labels[v] for v in range(game.size))


def cmd_check(args) -> int:
    game = load_game(args.game)
    lasso = parse_lasso(game, args.lasso)
    if args.labeling == "lambda-star":
        xg = build_extended(game)
        target, lasso = xg.game, xg.lift(lasso)
        labeling = lambda_star(xg, residual=args.residual)
    else:
        target, labeling = game, _read_labeling(game, args.labeling)
    bad = first_violation(target, lasso, labeling)
    pairs = [("consistent", "yes" if bad is None else "no")]
    if bad is not None:
        pairs += [
            ("position", bad.position),
            ("vertex", target.names[bad.vertex]),
            ("player", bad.player),
            ("residual", fmt_value(bad.residual)),
            ("bound", fmt_value(bad.bound)),
        ]
    emit(kv(pairs), args.out)
    return EXIT_YES if bad is None else EXIT_NO


def cmd_values(args) -> int:
    game = load_game(args.game)
    if args.solution == "spe":
        xg = build_extended(game)
        if xg.game.size > args.max_states:
            raise SizeLimit(f"extended game has {xg.game.size} vertices (cap {args.max_states})")
        target, labels = xg.game, lambda_star(xg, residual=args.residual)
    else:
        target, labels = game, val_labeling(game)
    if args.format == "dot":
        emit(game_to_dot(target), args.out)
    else:
        emit(
            "".join(
                f"{target.names[v]} {target.owner[v]} {fmt_value(labels[v])}\n"
                for v in range(target.size)
            ),
            args.out,
        )
    return EXIT_YES


def cmd_synth(args) -> int:
    game = load_game(args.game)
    if args.visit_all:
        machines, lasso = visit_all_spe_qual(game)
    else:
        if not args.lasso:
            raise ValueError("--lasso is required unless --visit-all is given")
        lasso = parse_lasso(game, args.lasso)
        if args.solution == "ne":
            try:
                machines = synthesize_ne_machines(game, lasso)
            except ValueError as exc:
                sys.stderr.write(f"no: {exc}\n")
                return EXIT_NO
        else:
            xg = build_extended(game)
            ext = xg.lift(lasso)
            try:
                witness = build_witness(xg, ext, residual=args.residual)
            except ValueError as exc:
                sys.stderr.write(f"no: {exc}\n")
                return EXIT_NO
            machines = synthesize_spe_machines(witness)
    if args.format == "dot":
        emit(machines_to_dot(game, machines), args.out)
    else:
        emit(format_machines(game, machines), args.out)
    if args.emit_dot and args.format != "dot":
        write_atomic(args.emit_dot, machines_to_dot(game, machines))
    return EXIT_YES


def cmd_verify(args) -> int:
    game = load_game(args.game)
    with open(args.machines, encoding="utf-8") as fh:
        machines = parse_machines(game, fh.read())
    ok = verify_ne(game, machines) if args.solution == "ne" else verify_spe(game, machines)
    emit(kv([("verified", "yes" if ok else "no"), ("solution", args.solution)]), args.out)
    return EXIT_YES if ok else EXIT_NO


def cmd_gen(args) -> int:
    threshold = None
    if args.kind == "random":
        if args.vertices is None or args.players is None:
            raise ValueError("gen random needs --vertices and --players")
        game = random_game(
            args.vertices,
            args.players,
            args.seed,
            mode=args.mode,
            strongly_connected=args.strongly_connected,
        )
    else:
        if not args.input:
            raise ValueError(f"gen {args.kind} needs --cnf or --qbf")
        with open(args.input, encoding="utf-8") as fh:
            text = fh.read()
        if args.kind == "sat":
            game, threshold = sat_to_game(parse_dimacs(text))
            threshold = fmt_vec(threshold)
        elif args.kind == "pareto-qual":
            game = sat_to_pareto_game_qual(parse_dimacs(text))
        else:
            game, (k, c) = qbf_to_game(parse_qdimacs(text))
            threshold = f"{k},{c}"
    emit(serialize_game(game), args.out)
    if args.print_threshold and threshold is not None:
        sys.stdout.write(f"threshold={threshold}\n")
    return EXIT_YES


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="reacheq", description="Equilibria in multiplayer reachability games.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, solution=True):
        sp.add_argument("--game", required=True, help="game file")
        if solution:
            sp.add_argument("--solution", choices=("ne", "spe"), default="ne")
        sp.add_argument("--out", help="write the main output here (atomically)")
        sp.add_argument("--residual", choices=("exact", "lasso"), default="exact",
                        help="how λ* residual plays are explored")
        sp.add_argument("--max-states", type=int, default=200_000,
                        help="cap on extended-game vertices (exit 3 beyond it)")

    s = sub.add_parser("solve", help="decide a threshold, welfare or Pareto query")
    common(s)
    s.add_argument("--problem", choices=("threshold", "welfare", "pareto"), required=True)
    s.add_argument("--upper", help="upper bounds y, e.g. 3<,inf")
    s.add_argument("--lower", help="lower bounds x")
    s.add_argument("--k", type=int, help="welfare: number of visiting players")
    s.add_argument("--c", default="inf", help="welfare: accumulated cost bound")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--format", choices=("kv", "dot"), default="kv")
    s.add_argument("--emit-dot", help="write the witness machines as DOT")
    s.add_argument("--machines-out", help="write the witness machines in text form")
    s.add_argument("--no-machines", action="store_true", help="skip strategy synthesis")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("check", help="λ-consistency of a lasso")
    common(c, solution=False)
    c.add_argument("--lasso", required=True)
    c.add_argument("--labeling", default="val", help="val, lambda-star, or a file of '<vertex> <value>'")
    c.set_defaults(func=cmd_check)

    v = sub.add_parser("values", help="Val (or λ* with --solution spe) per vertex")
    common(v)
    v.add_argument("--format", choices=("kv", "dot"), default="kv")
    v.set_defaults(func=cmd_values)

    y = sub.add_parser("synth", help="strategy machines realizing a lasso")
    common(y)
    y.add_argument("--lasso")
    y.add_argument("--visit-all", action="store_true", help="qualitative visit-all SPE")
    y.add_argument("--format", choices=("kv", "dot"), default="kv")
    y.add_argument("--emit-dot")
    y.set_defaults(func=cmd_synth)

    r = sub.add_parser("verify", help="check a machine profile is an NE or SPE")
    common(r)
    r.add_argument("--machines", required=True)
    r.set_defaults(func=cmd_verify)

    g = sub.add_parser("gen", help="generate gadget or random games")
    g.add_argument("kind", choices=("sat", "qbf", "pareto-qual", "random"))
    g.add_argument("--cnf", "--qbf", dest="input", help="DIMACS / QDIMACS input")
    g.add_argument("--out")
    g.add_argument("--print-threshold", action="store_true")
    g.add_argument("--vertices", type=int)
    g.add_argument("--players", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--mode", choices=("quantitative", "qualitative"), default="quantitative")
    g.add_argument("--strongly-connected", action="store_true")
    g.set_defaults(func=cmd_gen)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_YES
    try:
        return args.func(args)
    except (LambdaStarError, SizeLimit, RecursionError) as exc:
        sys.stderr.write(f"limit: {exc}\n")
        return EXIT_LIMIT
    except (GameFormatError, ValueError, KeyError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())
