"""Graphviz DOT text for games, extended games and strategy machines."""

from __future__ import annotations

from typing import Sequence

from .game import Game, players_of
from .machines import StrategyMachine

SHAPES = ("circle", "box", "diamond", "hexagon", "triangle", "pentagon", "octagon", "house")


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def game_to_dot(game: Game, name: str = "game") -> str:
    """Shape encodes the owner, the label lists target memberships, init has a double border."""
    lines = [f"digraph {_quote(name)} {{"]
    for v, label in enumerate(game.names):
        shape = SHAPES[(game.owner[v] - 1) % len(SHAPES)]
        tids = sorted(players_of(game.tmask[v]))
        text = label + (f"\\nF{','.join(map(str, tids))}" if tids else "")
        attrs = [f"shape={shape}", f"label={_quote(text)}", f"tooltip={_quote(f'player {game.owner[v]}')}"]
        if v == game.init:
            attrs.append("peripheries=2")
        lines.append(f"  {_quote(label)} [{', '.join(attrs)}];")
    for v, ws in enumerate(game.succ):
        for w in ws:
            lines.append(f"  {_quote(game.names[v])} -> {_quote(game.names[w])};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def machines_to_dot(game: Game, profile: Sequence[StrategyMachine]) -> str:
    """One cluster per machine; edges are labelled ``vertex / move`` (move only at own vertices)."""
    lines = ["digraph machines {"]
    for m in profile:
        lines.append(f"  subgraph {_quote(f'cluster_p{m.player}')} {{")
        lines.append(f"    label={_quote(f'player {m.player}')};")
        for s, label in enumerate(m.states):
            extra = ", peripheries=2" if s == m.initial else ""
            lines.append(f"    {_quote(f'p{m.player}:{label}')} [label={_quote(label)}{extra}];")
        for s in range(m.size):
            grouped: dict[int, list[str]] = {}
            for v in range(game.size):
                text = game.names[v]
                if game.owner[v] == m.player:
                    text += "/" + game.names[m.next[s][v]]
                grouped.setdefault(m.update[s][v], []).append(text)
            for t, labels in grouped.items():
                src, dst = f"p{m.player}:{m.states[s]}", f"p{m.player}:{m.states[t]}"
                lines.append(f"    {_quote(src)} -> {_quote(dst)} [label={_quote(' '.join(labels))}];")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"
