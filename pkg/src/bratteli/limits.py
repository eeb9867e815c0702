"""Inverse-limit vectors: multi-level transition counts and their normalized limits.

``product_row(diagram, n, m, v)`` counts the paths from each level-``n``
vertex up to ``v`` at level ``n + m`` (the row of the m-fold incidence
product).  Normalizing such a row gives a point of the level-``n`` simplex;
following a sequence of top vertices upward and watching these points
stabilize is the engine used to locate tail-invariant measures.  Iterates
are exact rationals; only the stopping rule is heuristic, and results say so.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial, floor
from typing import Callable, Mapping

from .core import (
    BinftyDiagram,
    BoundedDiagram,
    Diagram,
    DiagramError,
    PascalDiagram,
    key_level,
    step_polynomial_coefficients,
    support_key,
)
from .linalg import heights, simplex_distance


def product_row(diagram: Diagram, n: int, m: int, v) -> dict:
    """Path counts from each level-``n`` vertex to ``v`` at level ``n + m``.

    Computed by descending through the predecessor lists, so it is exact for
    every family and subdiagram.
    """
    if m < 0:
        raise DiagramError("m must be >= 0")
    diagram.check_vertex(n + m, v)
    cur = {v: 1}
    for lvl in range(n + m, n, -1):
        nxt: dict = {}
        for u, c in cur.items():
            for w, mult in diagram.predecessors(lvl, u).items():
                nxt[w] = nxt.get(w, 0) + c * mult
        cur = nxt
    return cur


def closed_form_product_row(diagram: Diagram, n: int, m: int, v) -> dict:
    """Closed-form transition counts for the families that admit one."""
    if m < 0:
        raise DiagramError("m must be >= 0")
    diagram.check_vertex(n + m, v)
    if m == 0:
        return {v: 1}
    if isinstance(diagram, BinftyDiagram):
        return {j: comb(v - j + m - 1, m - 1) for j in range(1, v + 1)}
    if isinstance(diagram, PascalDiagram):
        out = {}
        for s in _subkeys_at_level(v, n):
            count = factorial(m)
            for c, t_mult in v:
                count //= factorial(t_mult - key_mult_of(s, c))
            out[s] = count
        return out
    if isinstance(diagram, BoundedDiagram):
        coeffs = step_polynomial_coefficients(diagram.k, m)
        out = {}
        for delta, count in coeffs.items():
            w = v - delta
            if diagram.level_contains(n, w):
                out[w] = count
        return out
    raise DiagramError("%s has no closed-form transition counts" % diagram.family)


def key_mult_of(key, coord: int) -> int:
    for c, mult in key:
        if c == coord:
            return mult
    return 0


def _subkeys_at_level(key, level: int):
    """All support keys s <= key (coordinatewise) with total ``level``."""
    items = list(key)

    def rec(i: int, remaining: int, acc):
        if remaining == 0:
            rest = [(c, 0) for c, _ in items[i:]]
            yield tuple((c, m) for c, m in acc if m)
            return
        if i == len(items):
            return
        c, cap = items[i]
        for take in range(min(cap, remaining) + 1):
            yield from rec(i + 1, remaining - take, acc + [(c, take)])

    seen = set()
    for s in rec(0, level, []):
        if s not in seen:
            seen.add(s)
            yield s


def normalized_product_row(diagram: Diagram, n: int, m: int, v,
                           method: str = "auto") -> dict:
    """The transition row scaled to total mass 1 (a level-``n`` simplex point)."""
    if method == "closed":
        row = closed_form_product_row(diagram, n, m, v)
    elif method == "recursion":
        row = product_row(diagram, n, m, v)
    else:
        try:
            row = closed_form_product_row(diagram, n, m, v)
        except DiagramError:
            row = product_row(diagram, n, m, v)
    total = sum(row.values())
    if total == 0:
        raise DiagramError("no paths reach level %d from %r" % (n, v))
    return {w: Fraction(c, total) for w, c in row.items() if c}


def q_from_y(diagram: Diagram, n: int, y: Mapping) -> dict:
    """Tower masses q_w proportional to y_w H_w, normalized to total 1."""
    hs = heights(diagram, n, list(y))
    weighted = {w: Fraction(y[w]) * hs[w] for w in y}
    total = sum(weighted.values())
    if total == 0:
        raise DiagramError("the vector has no mass on level %d" % n)
    return {w: val / total for w, val in weighted.items() if val}


@dataclass
class LimitResult:
    """Outcome of the inverse-limit iteration at one level.

    ``vector`` is the last normalized iterate (exact rationals), ``distances``
    the successive simplex distances, ``mass_sums`` the successive values of
    sum(y_w H_w).  ``converged`` reports the heuristic stopping rule: five
    consecutive distances below tolerance with the mass sum relatively stable.
    The iterates themselves are exact; only the convergence claim is evidence.
    """

    level: int
    vector: dict
    steps: int
    distances: list = field(default_factory=list)
    mass_sums: list = field(default_factory=list)
    converged: bool = False
    note: str = "exact iterates; stopping rule is numerical evidence, not a proof"


STABLE_STEPS = 5


def limit_along(diagram: Diagram, n: int, top_rule: Callable[[int, int], object],
                tol: Fraction = Fraction(1, 10**6), m_max: int = 200,
                method: str = "auto") -> LimitResult:
    """Follow normalized transition rows up a vertex ray and watch them settle.

    ``top_rule(m, level)`` names the top vertex at ``level = n + m`` for each
    m >= 1.  Stops once the last ``STABLE_STEPS`` successive simplex distances
    fall below ``tol`` and the mass sums are relatively stable at the same
    scale, or at ``m_max``.
    """
    tol = Fraction(tol)
    prev = None
    distances: list = []
    mass_sums: list = []
    height_cache: dict = {}
    ranks: dict = {}
    result_vector: dict = {}
    steps = 0
    converged = False
    for m in range(1, m_max + 1):
        v = top_rule(m, n + m)
        y = normalized_product_row(diagram, n, m, v, method=method)
        for w in y:
            if w not in ranks:
                ranks[w] = diagram.rank(n, w)
            if w not in height_cache:
                height_cache[w] = heights(diagram, n, [w])[w]
        mass_sums.append(sum(y[w] * height_cache[w] for w in y))
        if prev is not None:
            distances.append(simplex_distance(prev, y, ranks))
        prev = y
        result_vector = y
        steps = m
        if len(distances) >= STABLE_STEPS:
            recent = distances[-STABLE_STEPS:]
            sums = mass_sums[-(STABLE_STEPS + 1):]
            rel = [
                abs(a - b) / b if b else abs(a - b)
                for a, b in zip(sums, sums[1:])
            ]
            if all(d < tol for d in recent) and all(r < tol for r in rel):
                converged = True
                break
    return LimitResult(
        level=n,
        vector=result_vector,
        steps=steps,
        distances=distances,
        mass_sums=mass_sums,
        converged=converged,
    )


# -- top-vertex rules -------------------------------------------------------


def constant_top(v) -> Callable[[int, int], object]:
    return lambda m, level: v


def index_ray(slope) -> Callable[[int, int], int]:
    """Integer-index tops growing like slope * m (at least 1)."""
    slope = Fraction(slope)
    return lambda m, level: max(1, floor(slope * m + Fraction(1, 2)))


def pascal_ray(d: Mapping[int, Fraction]) -> Callable[[int, int], tuple]:
    """Support keys tracking the direction ``d`` by largest-remainder rounding.

    ``d`` maps coordinates to positive rationals summing to 1; the top at
    ``level`` is the level-``level`` key whose multiplicities apportion
    ``level`` among the coordinates proportionally to ``d``.
    """
    d = {int(c): Fraction(x) for c, x in d.items()}
    if sum(d.values()) != 1 or any(x <= 0 for x in d.values()):
        raise DiagramError("direction weights must be positive and sum to 1")
    coords = sorted(d)

    def rule(m: int, level: int) -> tuple:
        quotas = {c: d[c] * level for c in coords}
        base = {c: floor(quotas[c]) for c in coords}
        remaining = level - sum(base.values())
        by_remainder = sorted(coords, key=lambda c: (base[c] - quotas[c], c))
        for c in by_remainder[:remaining]:
            base[c] += 1
        return support_key((c, mult) for c, mult in base.items() if mult)

    return rule


# -- closed-form limit vectors ----------------------------------------------


def binfty_limit_vector(a, n: int = 1, bound: int = 20) -> dict:
    """The limit of normalized rows along the slope-``a`` ray: y_j = a^(j-1)/(a+1)^j.

    The same vector works at every level ``n``; entries are reported for
    j = 1..bound (the full vector has infinite support when a > 0 and total
    mass exactly 1).
    """
    a = Fraction(a)
    if a < 0:
        raise DiagramError("the ray parameter must be >= 0")
    out = {}
    for j in range(1, bound + 1):
        val = a ** (j - 1) / (a + 1) ** j
        if val:
            out[j] = val
    if a == 0:
        out = {1: Fraction(1)}
    return out


def pascal_limit_vector(d: Mapping[int, Fraction], n: int) -> dict:
    """Tower masses of the direction-``d`` limit at level ``n``.

    Entries are multinomial(key) * prod d_c^(mult_c) over the level-``n``
    keys supported inside supp(d); they sum to exactly 1.
    """
    d = {int(c): Fraction(x) for c, x in d.items()}
    if sum(d.values()) != 1 or any(x <= 0 for x in d.values()):
        raise DiagramError("direction weights must be positive and sum to 1")
    coords = sorted(d)
    out = {}

    def rec(i: int, remaining: int, acc):
        if i == len(coords):
            if remaining == 0:
                key = tuple((c, mult) for c, mult in acc if mult)
                weight = factorial(n)
                prob = Fraction(1)
                for c, mult in acc:
                    weight //= factorial(mult)
                    prob *= d[c] ** mult
                out[key] = weight * prob
            return
        for mult in range(remaining + 1):
            rec(i + 1, remaining - mult, acc + [(coords[i], mult)])

    rec(0, n, [])
    return out
