"""Exact linear algebra on diagram levels: heights, stochastic rows, simplex metric.

All quantities are integers or ``fractions.Fraction``; nothing here rounds.
Heights are computed by the downward cone recursion, so they are exact for
every built-in family; ``heights_closed_form`` exposes the per-family closed
forms so the two routes can be compared.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .core import Diagram, DiagramError, LevelWindow, vertex_window


def heights(diagram: Diagram, level: int, vertices: Iterable | None = None,
            bound: int | None = None) -> dict:
    """Exact heights H^(level)_v (number of paths down to the base level).

    Computed by the cone recursion H^(base) = 1, H^(n+1)_v = sum of
    multiplicities times the heights one level down.  ``vertices`` defaults
    to the canonical window at ``level``.
    """
    if vertices is None:
        vertices = vertex_window(diagram, level, bound).vertices
    vertices = list(vertices)
    need = diagram.cone_levels(level, vertices)
    h = {v: 1 for v in need[diagram.base_level]}
    for lvl in range(diagram.base_level + 1, level + 1):
        nxt = {}
        for v in need[lvl]:
            nxt[v] = sum(m * h[w] for w, m in diagram.predecessors(lvl, v).items())
        h = nxt
    return {v: h[v] for v in vertices}


def heights_closed_form(diagram: Diagram, level: int, vertices: Iterable | None = None,
                        bound: int | None = None) -> dict:
    """Closed-form heights for families that have one; DiagramError otherwise."""
    if vertices is None:
        vertices = vertex_window(diagram, level, bound).vertices
    out = {}
    for v in vertices:
        value = diagram.closed_form_height(level, v)
        if value is None:
            raise DiagramError("%s has no closed-form height" % diagram.family)
        out[v] = value
    return out


def stochastic_row(diagram: Diagram, level: int, v,
                   height_cache: dict | None = None) -> dict:
    """The stochastic row f_(v w) = f'_(v w) H_w / H_v for target ``v`` at ``level``.

    Rows sum to exactly 1.  ``height_cache`` maps (level, vertex) -> height
    and is filled on demand, so repeated calls share work.
    """
    row = diagram.predecessors(level, v)
    needed = [(level, v)] + [(level - 1, w) for w in row]
    cache = height_cache if height_cache is not None else {}
    missing_by_level: dict[int, list] = {}
    for lvl, u in needed:
        if (lvl, u) not in cache:
            missing_by_level.setdefault(lvl, []).append(u)
    for lvl, us in missing_by_level.items():
        for u, hval in heights(diagram, lvl, us).items():
            cache[(lvl, u)] = hval
    hv = cache[(level, v)]
    return {w: Fraction(m * cache[(level - 1, w)], hv) for w, m in row.items()}


def stochastic_rows(diagram: Diagram, level: int, targets: Iterable) -> dict:
    """Stochastic rows for several targets at one level, sharing the height work."""
    cache: dict = {}
    return {v: stochastic_row(diagram, level, v, cache) for v in targets}


def simplex_distance(x: Mapping, y: Mapping, ranks: Mapping[object, int]) -> Fraction:
    """d(x, y) = sum over v of 2^(-a(v)) |x_v - y_v|, with a = ``ranks``."""
    total = Fraction(0)
    for v in set(x) | set(y):
        diff = Fraction(x.get(v, 0)) - Fraction(y.get(v, 0))
        if diff:
            total += abs(diff) * Fraction(1, 2 ** ranks[v])
    return total


def weighted_row_norm(row: Mapping, ranks: Mapping[object, int]) -> Fraction:
    """|g_v| = sum over sources w of 2^(-a(w)) f_(v w).

    The transpose of the stochastic incidence acts continuously on the
    simplex metric exactly when these norms tend to 0 as the target rank
    grows; this is the quantity the continuity probe tracks.
    """
    return sum(
        (Fraction(f) * Fraction(1, 2 ** ranks[w]) for w, f in row.items()),
        Fraction(0),
    )


def continuity_profile(diagram: Diagram, level: int, targets: Iterable) -> dict:
    """|g_v| for each target v at ``level`` (sources ranked at ``level - 1``)."""
    cache: dict = {}
    out = {}
    for v in targets:
        row = stochastic_row(diagram, level, v, cache)
        ranks = {w: diagram.rank(level - 1, w) for w in row}
        out[v] = weighted_row_norm(row, ranks)
    return out


def window_ranks(window: LevelWindow) -> dict:
    return dict(zip(window.vertices, window.ranks))
