"""Tail-invariant measures on the built-in diagram families.

A tail-invariant measure assigns every path-cylinder through a level-``n``
vertex ``v`` the same mass p_n(v), subject to the balance rule: p_n(w)
equals the multiplicity-weighted sum of p_(n+1) over the successors of w.
Tower masses q_n(v) = H_v p_n(v) then describe how much of the path space
sits over each vertex.

Every number here is a ``fractions.Fraction``; invariance and probability
checks are exact identities, with geometric or binomial-tail closed forms
standing in for the infinite parts of the sums.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb, lcm, sqrt
from typing import Iterable, Mapping, Sequence

from .core import (
    BinftyDiagram,
    Diagram,
    DiagramError,
    OdometerChainDiagram,
    PascalDiagram,
    Subdiagram,
    key_add,
    support_key,
)
from .linalg import heights


class TailInvariantMeasure:
    """Base interface: exact cylinder masses plus family-specific sum rules."""

    name = "abstract"

    def __init__(self, diagram: Diagram):
        self.diagram = diagram

    def p(self, n: int, v) -> Fraction:
        """Mass of one cylinder through vertex ``v`` at level ``n``."""
        raise NotImplementedError

    def q(self, n: int, v) -> Fraction:
        """Tower mass H_v * p_n(v)."""
        hv = self.diagram.closed_form_height(n, v)
        if hv is None:
            hv = heights(self.diagram, n, [v])[v]
        return hv * self.p(n, v)

    def successor_mass(self, n: int, w) -> Fraction:
        """Sum of multiplicities times p_(n+1) over the successors of ``w``.

        The default walks the (finite) successor list; families with
        infinitely many successors override this with an exact closed form.
        """
        total = Fraction(0)
        for v, mult in self.diagram.successors(n, w).items():
            total += mult * self.p(n + 1, v)
        return total

    def level_support(self, n: int, bound: int | None = None) -> tuple:
        """Vertices carrying mass at level ``n`` (cut to ``bound`` if infinite)."""
        return self.diagram.level_vertices(n, bound)

    def level_mass(self, n: int) -> Fraction:
        """Total tower mass of level ``n``, computed exactly."""
        raise NotImplementedError

    level_mass_method = "exact-finite-sum"


@dataclass
class BalanceRecord:
    level: int
    vertex: object
    cylinder_mass: Fraction
    successor_mass: Fraction

    @property
    def ok(self) -> bool:
        return self.cylinder_mass == self.successor_mass


def invariance_report(measure: TailInvariantMeasure, levels: Iterable[int],
                      bound: int | None = None) -> list[BalanceRecord]:
    """Exact balance check p_n(w) == successor mass, vertex by vertex."""
    out = []
    for n in levels:
        for w in measure.level_support(n, bound):
            out.append(
                BalanceRecord(n, w, measure.p(n, w), measure.successor_mass(n, w))
            )
    return out


def is_invariant(measure: TailInvariantMeasure, levels: Iterable[int],
                 bound: int | None = None) -> bool:
    return all(r.ok for r in invariance_report(measure, levels, bound))


class PascalMeasure(TailInvariantMeasure):
    """Product measure on a multinomial diagram with direction ``d``.

    ``d`` maps coordinates to positive rationals summing to 1.  A cylinder
    through the key ``v`` has mass prod d_c^(mult_c); keys touching
    coordinates outside supp(d) carry no mass.
    """

    name = "pascal-mu"

    def __init__(self, d: Mapping[int, Fraction], diagram: PascalDiagram | None = None):
        self.d = {int(c): Fraction(x) for c, x in d.items()}
        if not self.d or any(x <= 0 for x in self.d.values()):
            raise DiagramError("direction weights must be positive")
        if sum(self.d.values()) != 1:
            raise DiagramError("direction weights must sum to exactly 1")
        if diagram is None:
            diagram = PascalDiagram("z" if min(self.d) <= 0 else "n")
        for c in self.d:
            if not diagram.coord_in_domain(c):
                raise DiagramError("coordinate %d is outside %s" % (c, diagram.family))
        super().__init__(diagram)

    def p(self, n: int, v) -> Fraction:
        self.diagram.check_vertex(n, v)
        mass = Fraction(1)
        for c, mult in v:
            if c not in self.d:
                return Fraction(0)
            mass *= self.d[c] ** mult
        return mass

    def successor_mass(self, n: int, w) -> Fraction:
        self.diagram.check_vertex(n, w)
        coords = set(self.d) | {c for c, _ in w}
        total = Fraction(0)
        for c in coords:
            total += self.p(n + 1, key_add(w, c))
        return total

    def level_support(self, n: int, bound: int | None = None) -> tuple:
        coords = sorted(self.d)
        out = []

        def rec(i, remaining, acc):
            if i == len(coords):
                if remaining == 0:
                    out.append(tuple((c, m) for c, m in acc if m))
                return
            for m in range(remaining + 1):
                rec(i + 1, remaining - m, acc + [(coords[i], m)])

        rec(0, n, [])
        return tuple(out)

    def level_mass(self, n: int) -> Fraction:
        return sum((self.q(n, v) for v in self.level_support(n)), Fraction(0))


class BinftyMeasure(TailInvariantMeasure):
    """The slope-``a`` geometric measure on the triangular diagram.

    p_n(j) = a^(j-1) / (a+1)^(n+j-1) for j >= 1, n >= 1.  At a = 0 this is
    the point mass on the leftmost vertical path.
    """

    name = "binfty-mu"

    #: how many successor terms are summed explicitly before the geometric tail
    EXPLICIT_TERMS = 25

    def __init__(self, a, diagram: BinftyDiagram | None = None):
        self.a = Fraction(a)
        if self.a < 0:
            raise DiagramError("the slope parameter must be >= 0")
        super().__init__(diagram or BinftyDiagram())

    def p(self, n: int, j) -> Fraction:
        self.diagram.check_vertex(n, j)
        a = self.a
        return a ** (j - 1) / (a + 1) ** (n + j - 1)

    def tail_from(self, n: int, j_from: int) -> Fraction:
        """Exact sum of p_n(j) for j >= j_from (a geometric series)."""
        a = self.a
        x = a / (a + 1)
        return x ** (j_from - 1) / (a + 1) ** (n - 1)

    def successor_mass(self, n: int, w) -> Fraction:
        cut = w + self.EXPLICIT_TERMS
        partial = sum(
            (self.p(n + 1, v) for v in range(w, cut)), Fraction(0)
        )
        return partial + self.tail_from(n + 1, cut)

    def level_support(self, n: int, bound: int | None = None) -> tuple:
        return self.diagram.level_vertices(n, bound or 12)

    def level_tail_mass(self, n: int, j_max: int) -> Fraction:
        """Exact tower mass above index ``j_max``: sum_{j > j_max} q_n(j).

        Uses the binomial-tail identity: with x = a/(a+1), the tail equals
        sum_{i=0}^{n-1} C(n+J-1, i) x^(n+J-1-i) (1-x)^i at J = j_max.
        """
        x = self.a / (self.a + 1)
        big = n + j_max - 1
        return sum(
            (comb(big, i) * x ** (big - i) * (1 - x) ** i for i in range(n)),
            Fraction(0),
        )

    def level_mass(self, n: int, j_max: int = 40) -> Fraction:
        partial = sum(
            (self.q(n, j) for j in range(1, j_max + 1)), Fraction(0)
        )
        return partial + self.level_tail_mass(n, j_max)

    level_mass_method = "finite sum plus exact binomial tail"


class StaircaseMeasure(TailInvariantMeasure):
    """The boundary measures on the staircase subdiagram of the triangle.

    On levels W_n = {k, ..., k+n-1} the cylinder masses are
    p_n(j) = a^(j-k) / (1+a)^(n+j-k) * T(n+k-j+1), with the truncated
    geometric total T(s) = 1 + a + ... + a^(s-1).  Every level has total
    tower mass exactly 1, for every a > 0.
    """

    name = "staircase-nu"

    def __init__(self, a, subdiagram: Subdiagram):
        self.a = Fraction(a)
        if self.a <= 0:
            raise DiagramError("the staircase parameter must be > 0")
        if subdiagram.spec.get("rule") != "staircase":
            raise DiagramError("this measure lives on staircase subdiagrams")
        self.k = subdiagram.k
        super().__init__(subdiagram)

    def _t(self, s: int) -> Fraction:
        a = self.a
        if a == 1:
            return Fraction(s)
        return (1 - a**s) / (1 - a)

    def p(self, n: int, j) -> Fraction:
        self.diagram.check_vertex(n, j)
        a, k = self.a, self.k
        return a ** (j - k) / (1 + a) ** (n + j - k) * self._t(n + k - j + 1)

    def successor_mass(self, n: int, w) -> Fraction:
        top = self.k + n  # largest vertex of level n+1
        return sum(
            (self.p(n + 1, v) for v in range(w, top + 1)), Fraction(0)
        )

    def level_mass(self, n: int) -> Fraction:
        total = Fraction(0)
        for j in self.diagram.level_vertices(n):
            total += self.diagram.closed_form_height(n, j) * self.p(n, j)
        return total

    def determining_value(self, n: int) -> Fraction:
        """p_n at the top vertex k+n-1: a^(n-1)/(1+a)^(2n-2)."""
        return self.p(n, self.k + n - 1)


class BinomialEdgeMeasure(TailInvariantMeasure):
    """Binomial measure on the two-edge (pascal) subdiagram of the triangle.

    A cylinder through vertex ``i`` of level ``n`` (cone {k, ..., k+n-1})
    has mass prob^(k+n-1-i) (1-prob)^(i-k): each level chooses the vertical
    edge with probability ``prob`` and the diagonal with ``1-prob``.
    """

    name = "edge-binomial"

    def __init__(self, prob, subdiagram: Subdiagram):
        self.prob = Fraction(prob)
        if not 0 < self.prob < 1:
            raise DiagramError("the edge weight must lie strictly between 0 and 1")
        if subdiagram.spec.get("rule") != "pascal" or subdiagram.kind != "edge":
            raise DiagramError("this measure lives on two-edge pascal subdiagrams")
        self.k = subdiagram.k
        super().__init__(subdiagram)

    def p(self, n: int, i) -> Fraction:
        self.diagram.check_vertex(n, i)
        pr, k = self.prob, self.k
        return pr ** (k + n - 1 - i) * (1 - pr) ** (i - k)

    def level_mass(self, n: int) -> Fraction:
        total = Fraction(0)
        for i in self.diagram.level_vertices(n):
            total += self.diagram.closed_form_height(n, i) * self.p(n, i)
        return total


class OdometerColumnMeasure(TailInvariantMeasure):
    """The unique invariant measure on one vertical column of an odometer chain.

    On the constant subdiagram at column ``i`` the level-``L`` cylinder mass
    is 1 / (a_0(i) a_1(i) ... a_(L-1)(i)); every level has tower mass 1.
    """

    name = "odometer-column"

    def __init__(self, subdiagram: Subdiagram):
        if subdiagram.spec.get("rule") != "constant":
            raise DiagramError("this measure lives on constant-column subdiagrams")
        if not isinstance(subdiagram.ambient, OdometerChainDiagram):
            raise DiagramError("the column measure needs an odometer-chain ambient")
        self.column = subdiagram.spec["vertex"]
        super().__init__(subdiagram)

    def p(self, n: int, v) -> Fraction:
        self.diagram.check_vertex(n, v)
        denom = 1
        for j in range(self.diagram.base_level, n):
            denom *= self.diagram.ambient.entry(j, self.column)
        return Fraction(1, denom)

    def level_mass(self, n: int) -> Fraction:
        h = heights(self.diagram, n, [self.column])[self.column]
        return h * self.p(n, self.column)


def restricted_level_mass(p_func, sub: Subdiagram, n: int) -> Fraction:
    """Mass the ambient cylinder function ``p_func`` leaves on a subdiagram level.

    Sums internal heights times ambient cylinder masses over the kept level:
    the portion of the ambient path space that has stayed inside the
    subdiagram through level ``n``.
    """
    total = Fraction(0)
    internal = None
    for v in sub.level_vertices(n):
        h = sub.closed_form_height(n, v)
        if h is None:
            if internal is None:
                internal = heights(sub, n, sub.level_vertices(n))
            h = internal[v]
        total += h * Fraction(p_func(n, v))
    return total


# -- difference tables and complete monotonicity ------------------------------


def difference_table(seq: Sequence[Fraction], max_order: int) -> list[list[Fraction]]:
    """Rows 0..max_order of forward differences, row k using (c_i - c_(i+1))."""
    rows = [[Fraction(x) for x in seq]]
    for _ in range(max_order):
        prev = rows[-1]
        rows.append([prev[i] - prev[i + 1] for i in range(len(prev) - 1)])
    return rows


def completely_monotone_witness(seq: Sequence[Fraction], max_order: int):
    """None if every available difference is positive, else the first (k, i) failing."""
    rows = difference_table(seq, max_order)
    for k, row in enumerate(rows):
        for i, val in enumerate(row):
            if val <= 0:
                return (k, i)
    return None


# -- path sampling -------------------------------------------------------------


@dataclass
class SampleReport:
    """Summary of a Monte Carlo draw of product-measure paths.

    ``means`` holds, per coordinate, the exact average of (increments at the
    coordinate) / depth over the sampled paths; ``stderrs`` the matching
    standard errors sqrt(d_c (1 - d_c) / depth) / sqrt(count) as floats.
    """

    depth: int
    count: int
    seed: int
    coordinates: tuple
    means: dict
    stderrs: dict
    endpoint_counts: dict


def sample_paths(measure: PascalMeasure, depth: int, count: int, seed: int) -> SampleReport:
    """Draw ``count`` independent depth-``depth`` paths of a product measure.

    Each level adds one unit at coordinate c with probability d_c,
    independently of the past.  The draws are integer-exact: a step compares
    randrange(D) against cumulative numerators over the common denominator D
    of the weights, so no floating point enters the sampling.  Every path
    runs on its own generator seeded from the master stream, which makes any
    single path reproducible independent of ``count``.
    """
    if not isinstance(measure, PascalMeasure):
        raise DiagramError("path sampling is defined for product measures")
    if depth < 1 or count < 1:
        raise DiagramError("sampling needs positive depth and count")
    coords = sorted(measure.d)
    denom = lcm(*(measure.d[c].denominator for c in coords))
    thresholds = []
    acc = 0
    for c in coords:
        acc += int(measure.d[c] * denom)
        thresholds.append(acc)
    master = random.Random(seed)
    totals = dict.fromkeys(coords, 0)
    endpoints: dict = {}
    for _ in range(count):
        rng = random.Random(master.getrandbits(64))
        if len(coords) == 2:
            t1 = thresholds[0]
            first = sum(1 for _ in range(depth) if rng.randrange(denom) < t1)
            counts = {coords[0]: first, coords[1]: depth - first}
        else:
            counts = dict.fromkeys(coords, 0)
            for _ in range(depth):
                r = rng.randrange(denom)
                for c, t in zip(coords, thresholds):
                    if r < t:
                        counts[c] += 1
                        break
        end = support_key(tuple((c, m) for c, m in counts.items() if m))
        endpoints[end] = endpoints.get(end, 0) + 1
        for c in coords:
            totals[c] += counts[c]
    means = {c: Fraction(totals[c], depth * count) for c in coords}
    stderrs = {
        c: sqrt(float(measure.d[c] * (1 - measure.d[c])) / depth / count) for c in coords
    }
    return SampleReport(depth, count, seed, tuple(coords), means, stderrs, endpoints)


def endpoint_distribution(measure: PascalMeasure, depth: int) -> dict:
    """The exact law of the level-``depth`` vertex: tower masses over the support."""
    if not isinstance(measure, PascalMeasure):
        raise DiagramError("endpoint distributions are defined for product measures")
    return {v: measure.q(depth, v) for v in measure.level_support(depth)}
