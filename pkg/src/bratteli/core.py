"""Generalized Bratteli diagrams: vertex keys, diagram families, windows, subdiagrams.

A diagram is an infinite sequence of countable vertex levels joined by
row-finite incidence matrices.  Levels are numbered from ``base_level``
upward; the incidence matrix between level ``n`` and level ``n+1`` is read
through ``predecessors(n+1, v)``, the multiset of level-``n`` sources of the
edges whose range is ``v``.  Every vertex has finitely many predecessors, so
any quantity defined by downward recursion (heights, path counts) is exactly
computable without truncation error for the built-in families.

Vertex keys are either plain integers (index-labelled levels) or "support
keys": tuples of ``(coordinate, multiplicity)`` pairs with strictly
increasing coordinates and positive multiplicities, encoding a finitely
supported multiplicity vector whose total is the level number.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial
from typing import Callable, Iterable, Iterator, Mapping, Sequence

FAMILIES = (
    "pascal-n",
    "pascal-z",
    "pascal-k",
    "bounded-finite",
    "bounded-generalized",
    "odometer-io",
    "binfty",
    "custom",
)


class DiagramError(ValueError):
    """Invalid diagram specification or out-of-domain request."""


class TruncationIncompleteError(DiagramError):
    """A computation needs vertices or rows outside the declared data.

    ``missing`` lists ``(level, vertex)`` pairs that would be required.
    """

    def __init__(self, message: str, missing: Sequence[tuple] = ()):
        super().__init__(message)
        self.missing = list(missing)


def zigzag(i: int) -> int:
    """Enumeration of the signed integers: 0->1, 1->2, -1->3, 2->4, -2->5, ..."""
    if i == 0:
        return 1
    if i > 0:
        return 2 * i
    return 2 * (-i) + 1


def support_key(pairs: Iterable[Sequence[int]]) -> tuple[tuple[int, int], ...]:
    """Build a canonical support key from (coordinate, multiplicity) pairs."""
    items = [(int(c), int(m)) for c, m in pairs]
    items.sort()
    coords = [c for c, _ in items]
    if len(set(coords)) != len(coords):
        raise DiagramError("support key has a repeated coordinate: %r" % (items,))
    if any(m < 1 for _, m in items):
        raise DiagramError("support key multiplicities must be >= 1: %r" % (items,))
    return tuple(items)


def key_level(key: tuple[tuple[int, int], ...]) -> int:
    return sum(m for _, m in key)


def key_mult(key: tuple[tuple[int, int], ...], coord: int) -> int:
    for c, m in key:
        if c == coord:
            return m
    return 0


def key_add(key: tuple[tuple[int, int], ...], coord: int) -> tuple[tuple[int, int], ...]:
    """The key with one more unit at ``coord``."""
    out = []
    placed = False
    for c, m in key:
        if c == coord:
            out.append((c, m + 1))
            placed = True
        else:
            out.append((c, m))
    if not placed:
        out.append((coord, 1))
        out.sort()
    return tuple(out)


def key_sub(key: tuple[tuple[int, int], ...], coord: int) -> tuple[tuple[int, int], ...]:
    """The key with one unit removed at ``coord`` (which must be present)."""
    out = []
    found = False
    for c, m in key:
        if c == coord:
            found = True
            if m > 1:
                out.append((c, m - 1))
        else:
            out.append((c, m))
    if not found:
        raise DiagramError("coordinate %r absent from key %r" % (coord, key))
    return tuple(out)


def _coord_rank(coord: int, signed: bool) -> int:
    return zigzag(coord) if signed else coord


def _coords_with_rank_upto(r: int, signed: bool) -> list[int]:
    """The coordinates whose enumeration rank is <= r, in rank order."""
    if not signed:
        return list(range(1, r + 1))
    out = []
    i = 0
    while True:
        for c in ((i,) if i == 0 else (i, -i)):
            if zigzag(c) <= r:
                out.append(c)
        i += 1
        if zigzag(i) > r and zigzag(-i) > r:
            break
    return sorted(out, key=zigzag)


def _pascal_sort_triple(key: tuple[tuple[int, int], ...], signed: bool):
    """(largest coordinate, support size, lex pairs); signed coords compare by zig-zag."""
    if not key:
        return (0, 0, ())
    if signed:
        ranked = tuple(sorted((zigzag(c), m) for c, m in key))
        return (max(r for r, _ in ranked), len(key), ranked)
    return (max(c for c, _ in key), len(key), tuple(key))


def _compositions(total: int, coords: Sequence[int]) -> Iterator[tuple[tuple[int, int], ...]]:
    """All support keys of level ``total`` using only the given coordinates."""
    coords = list(coords)

    def rec(i: int, remaining: int, acc: list[tuple[int, int]]):
        if remaining == 0:
            yield tuple(sorted(acc))
            return
        if i == len(coords):
            return
        yield from rec(i + 1, remaining, acc)
        for m in range(1, remaining + 1):
            yield from rec(i + 1, remaining - m, acc + [(coords[i], m)])

    yield from rec(0, total, [])


@lru_cache(maxsize=None)
def _pascal_positions(level: int, r: int, signed: bool) -> dict:
    """Rank of every level-``level`` key whose coordinates stay within the
    first ``r`` enumeration ranks.

    The level enumeration orders primarily by the largest coordinate rank,
    so this finite slice is a prefix of the whole level and positions in it
    are the global ranks.
    """
    domain = _coords_with_rank_upto(r, signed)
    keys = sorted(
        _compositions(level, domain),
        key=lambda k: _pascal_sort_triple(k, signed),
    )
    return {k: i + 1 for i, k in enumerate(keys)}


def _pascal_rank(key: tuple[tuple[int, int], ...], level: int, signed: bool) -> int:
    if level == 0:
        return 1
    r = max(_coord_rank(c, signed) for c, _ in key)
    return _pascal_positions(level, r, signed)[key]


@dataclass(frozen=True)
class LevelWindow:
    """A finite, ordered snapshot of one level with its enumeration ranks."""

    level: int
    vertices: tuple
    ranks: tuple[int, ...]

    def __post_init__(self):
        if len(self.vertices) != len(set(self.vertices)):
            raise DiagramError("window vertices must be distinct")
        if len(self.ranks) != len(self.vertices):
            raise DiagramError("one rank per vertex required")
        if any(r < 1 for r in self.ranks) or len(set(self.ranks)) != len(self.ranks):
            raise DiagramError("ranks must be distinct positive integers")

    def rank_of(self, v) -> int:
        return self.ranks[self.vertices.index(v)]

    def __iter__(self):
        return iter(self.vertices)

    def __len__(self):
        return len(self.vertices)


class Diagram:
    """Base class for diagram families.  Instances are immutable."""

    family: str = "abstract"
    base_level: int = 0
    integer_keys: bool = True

    def __init__(self, params: Mapping | None = None):
        self.params = dict(params or {})

    # -- structure ---------------------------------------------------------

    def predecessors(self, level: int, v) -> dict:
        """Sources (with multiplicities) of the edges whose range is ``v`` at ``level``."""
        raise NotImplementedError

    def successors(self, level: int, w, bound: int | None = None) -> dict:
        """Targets (with multiplicities) at ``level+1`` of edges with source ``w``.

        Families with infinitely many successors require ``bound``.
        """
        raise NotImplementedError

    def level_contains(self, level: int, v) -> bool:
        raise NotImplementedError

    def level_vertices(self, level: int, bound: int | None = None) -> tuple:
        """The level's vertices within the truncation bound, in rank order."""
        raise NotImplementedError

    def rank(self, level: int, v) -> int:
        """The enumeration a(v) of the level: distinct positive integers."""
        raise NotImplementedError

    # -- conveniences -------------------------------------------------------

    def check_level(self, level: int) -> None:
        if level < self.base_level:
            raise DiagramError(
                "%s has no level %d (base level is %d)"
                % (self.family, level, self.base_level)
            )

    def check_vertex(self, level: int, v) -> None:
        self.check_level(level)
        if not self.level_contains(level, v):
            raise DiagramError("%r is not a vertex of level %d of %s" % (v, level, self.family))

    def cone_levels(self, level: int, vertices: Iterable) -> dict[int, set]:
        """All vertices at each level reachable downward from ``vertices``."""
        need = {level: set(vertices)}
        for lvl in range(level, self.base_level, -1):
            below: set = set()
            for v in need[lvl]:
                below.update(self.predecessors(lvl, v).keys())
            need[lvl - 1] = below
        return need

    def closed_form_height(self, level: int, v):
        """Exact closed-form height, or None when the family has none."""
        return None


class PascalDiagram(Diagram):
    """Multinomial diagrams: vertices are multiplicity vectors summing to the level.

    ``coords`` is one of "n" (positive integer coordinates), "z" (signed
    integers), or a fixed finite count k >= 1 (coordinates 1..k).  An edge
    joins s-bar to s-bar + e^(i) for every coordinate i in the domain.
    """

    integer_keys = False
    base_level = 0

    def __init__(self, coords="n"):
        if coords not in ("n", "z") and (not isinstance(coords, int) or coords < 1):
            raise DiagramError("pascal coords must be 'n', 'z', or a positive integer")
        self.coords = coords
        if coords == "n":
            self.family = "pascal-n"
        elif coords == "z":
            self.family = "pascal-z"
        else:
            self.family = "pascal-k"
        super().__init__({"coords": coords})

    @property
    def signed(self) -> bool:
        return self.coords == "z"

    def coord_in_domain(self, c: int) -> bool:
        if self.coords == "n":
            return c >= 1
        if self.coords == "z":
            return True
        return 1 <= c <= self.coords

    def _coord_domain(self, bound: int | None) -> list[int]:
        if isinstance(self.coords, int):
            cap = self.coords if bound is None else min(self.coords, bound)
            return list(range(1, cap + 1))
        if bound is None:
            raise DiagramError("%s needs a truncation bound to list coordinates" % self.family)
        if self.coords == "n":
            return list(range(1, bound + 1))
        return list(range(-bound, bound + 1))

    def predecessors(self, level: int, v) -> dict:
        self.check_vertex(level, v)
        if level == self.base_level:
            raise DiagramError("base level vertices have no predecessors")
        return {key_sub(v, c): 1 for c, _ in v}

    def successors(self, level: int, w, bound: int | None = None) -> dict:
        self.check_vertex(level, w)
        if isinstance(self.coords, int):
            domain = range(1, self.coords + 1)
        else:
            if bound is None:
                raise DiagramError("successor set is infinite; pass a coordinate bound")
            domain = self._coord_domain(bound)
        return {key_add(w, c): 1 for c in domain}

    def level_contains(self, level: int, v) -> bool:
        if not isinstance(v, tuple):
            return False
        try:
            canon = support_key(v)
        except (DiagramError, TypeError, ValueError):
            return False
        if canon != tuple(v):
            return False
        return key_level(canon) == level and all(self.coord_in_domain(c) for c, _ in canon)

    def level_vertices(self, level: int, bound: int | None = None) -> tuple:
        self.check_level(level)
        domain = self._coord_domain(bound)
        keys = list(_compositions(level, domain))
        keys.sort(key=lambda k: _pascal_sort_triple(k, self.signed))
        return tuple(keys)

    def rank(self, level: int, v) -> int:
        self.check_vertex(level, v)
        return _pascal_rank(v, level, self.signed)

    def closed_form_height(self, level: int, v):
        num = factorial(level)
        denom = 1
        for _, m in v:
            denom *= factorial(m)
        return num // denom


class BinftyDiagram(Diagram):
    """The triangular diagram: every level is 1, 2, 3, ...; an edge i -> j
    exists for every pair j <= i of consecutive-level vertices.  Levels start
    at 1, where all heights are 1.
    """

    family = "binfty"
    base_level = 1

    def __init__(self):
        super().__init__()

    def predecessors(self, level: int, v) -> dict:
        self.check_vertex(level, v)
        if level == self.base_level:
            raise DiagramError("base level vertices have no predecessors")
        return {w: 1 for w in range(1, v + 1)}

    def successors(self, level: int, w, bound: int | None = None) -> dict:
        self.check_vertex(level, w)
        if bound is None:
            raise DiagramError("successor set is infinite; pass an index bound")
        return {v: 1 for v in range(w, bound + 1)}

    def level_contains(self, level: int, v) -> bool:
        return isinstance(v, int) and v >= 1

    def level_vertices(self, level: int, bound: int | None = None) -> tuple:
        self.check_level(level)
        if bound is None:
            raise DiagramError("binfty levels are infinite; pass an index bound")
        return tuple(range(1, bound + 1))

    def rank(self, level: int, v) -> int:
        self.check_vertex(level, v)
        return v

    def closed_form_height(self, level: int, v):
        return comb(v + level - 2, level - 1)


class BoundedDiagram(Diagram):
    """Integer levels with steps of size at most k.

    ``finite=True``: level n is {-nk..nk} (single root 0), heights are the
    central polynomial coefficients of (x^-k + ... + x^k)^n.
    ``finite=False``: every level is all signed integers, heights (2k+1)^n.
    """

    def __init__(self, k: int, finite: bool):
        if not isinstance(k, int) or k < 1:
            raise DiagramError("bounded-size parameter k must be a positive integer")
        self.k = k
        self.finite = finite
        self.family = "bounded-finite" if finite else "bounded-generalized"
        super().__init__({"k": k})

    def predecessors(self, level: int, v) -> dict:
        self.check_vertex(level, v)
        if level == self.base_level:
            raise DiagramError("base level vertices have no predecessors")
        lo, hi = v - self.k, v + self.k
        if self.finite:
            cap = (level - 1) * self.k
            lo, hi = max(lo, -cap), min(hi, cap)
        return {w: 1 for w in range(lo, hi + 1)}

    def successors(self, level: int, w, bound: int | None = None) -> dict:
        self.check_vertex(level, w)
        return {v: 1 for v in range(w - self.k, w + self.k + 1)}

    def level_contains(self, level: int, v) -> bool:
        if not isinstance(v, int):
            return False
        if self.finite:
            return abs(v) <= level * self.k
        return True

    def level_vertices(self, level: int, bound: int | None = None) -> tuple:
        self.check_level(level)
        if self.finite:
            cap = level * self.k if bound is None else min(level * self.k, bound)
        else:
            if bound is None:
                raise DiagramError("levels are infinite; pass a bound")
            cap = bound
        return tuple(sorted(range(-cap, cap + 1), key=zigzag))

    def rank(self, level: int, v) -> int:
        self.check_vertex(level, v)
        return zigzag(v)

    def closed_form_height(self, level: int, v):
        if not self.finite:
            return (2 * self.k + 1) ** level
        return step_polynomial_coefficients(self.k, level).get(v, 0)


@lru_cache(maxsize=None)
def step_polynomial_coefficients(k: int, power: int) -> dict[int, int]:
    """Coefficients of (x^-k + ... + 1 + ... + x^k)^power as {exponent: coefficient}."""
    coeffs = {0: 1}
    for _ in range(power):
        new: dict[int, int] = {}
        for e, c in coeffs.items():
            for d in range(-k, k + 1):
                new[e + d] = new.get(e + d, 0) + c
        coeffs = new
    return coeffs


class OdometerChainDiagram(Diagram):
    """Countably many odometer columns, each linked to the next by one edge.

    Every level is 1, 2, 3, ...; the vertex i at level n+1 receives a_n(i)
    edges from vertex i and one edge from vertex i+1 at level n.  Entry rules:
    an integer (stationary), an explicit list (level-indexed from 0), or the
    name "pow2" (a_n = 2^(n+1)).  ``columns`` optionally overrides the rule
    for individual columns.
    """

    family = "odometer-io"
    base_level = 0

    def __init__(self, a, columns: Mapping[int, object] | None = None):
        self._default_rule = _parse_entry_rule(a)
        self._column_rules = {int(i): _parse_entry_rule(r) for i, r in (columns or {}).items()}
        super().__init__({"a": a, "columns": dict(columns or {})})

    def entry(self, level: int, column: int) -> int:
        """a_level(column): the vertical multiplicity between levels level, level+1."""
        if level < self.base_level:
            raise DiagramError("no entries below the base level")
        rule = self._column_rules.get(column, self._default_rule)
        return rule(level)

    def predecessors(self, level: int, v) -> dict:
        self.check_vertex(level, v)
        if level == self.base_level:
            raise DiagramError("base level vertices have no predecessors")
        return {v: self.entry(level - 1, v), v + 1: 1}

    def successors(self, level: int, w, bound: int | None = None) -> dict:
        self.check_vertex(level, w)
        out = {w: self.entry(level, w)}
        if w > 1:
            out[w - 1] = 1
        return out

    def level_contains(self, level: int, v) -> bool:
        return isinstance(v, int) and v >= 1

    def level_vertices(self, level: int, bound: int | None = None) -> tuple:
        self.check_level(level)
        if bound is None:
            raise DiagramError("levels are infinite; pass an index bound")
        return tuple(range(1, bound + 1))

    def rank(self, level: int, v) -> int:
        self.check_vertex(level, v)
        return v

    def closed_form_height(self, level: int, v):
        if self._column_rules:
            return None  # column-dependent entries: use the recursion
        h = 1
        for j in range(self.base_level, level):
            h *= self.entry(j, v) + 1
        return h


def _parse_entry_rule(a) -> Callable[[int], int]:
    if isinstance(a, bool):
        raise DiagramError("odometer entries must be integers >= 2")
    if isinstance(a, int):
        if a < 2:
            raise DiagramError("odometer entries must be >= 2, got %d" % a)
        return lambda n: a
    if isinstance(a, (list, tuple)):
        vals = [int(x) for x in a]
        if any(x < 2 for x in vals):
            raise DiagramError("odometer entries must be >= 2: %r" % (vals,))

        def from_list(n: int) -> int:
            if n >= len(vals):
                raise TruncationIncompleteError(
                    "odometer entry sequence exhausted at index %d" % n,
                    missing=[("entry", n)],
                )
            return vals[n]

        return from_list
    if a == "pow2":
        return lambda n: 2 ** (n + 1)
    raise DiagramError("unknown odometer entry rule: %r" % (a,))


class CustomDiagram(Diagram):
    """A diagram given by explicit finite level lists and predecessor rows."""

    family = "custom"
    integer_keys = True

    def __init__(self, levels: Mapping[int, Sequence], rows: Mapping[int, Mapping], base_level: int = 0):
        self.base_level = int(base_level)
        self._levels = {int(n): tuple(vs) for n, vs in levels.items()}
        self._rows = {
            int(n): {v: dict(preds) for v, preds in level_rows.items()}
            for n, level_rows in rows.items()
        }
        for n, vs in self._levels.items():
            if not vs:
                raise DiagramError("custom level %d is empty" % n)
            if any(isinstance(v, tuple) for v in vs):
                self.integer_keys = False
        super().__init__({"base_level": base_level})

    def predecessors(self, level: int, v) -> dict:
        self.check_level(level)
        if level == self.base_level:
            raise DiagramError("base level vertices have no predecessors")
        row = self._rows.get(level, {}).get(v)
        if row is None:
            raise TruncationIncompleteError(
                "no incidence row declared for vertex %r at level %d" % (v, level),
                missing=[(level, v)],
            )
        return dict(row)

    def successors(self, level: int, w, bound: int | None = None) -> dict:
        self.check_level(level)
        rows = self._rows.get(level + 1)
        if rows is None:
            raise TruncationIncompleteError(
                "no incidence rows declared between levels %d and %d" % (level, level + 1),
                missing=[(level + 1, None)],
            )
        out = {}
        for v, preds in rows.items():
            if w in preds:
                out[v] = preds[w]
        return out

    def level_contains(self, level: int, v) -> bool:
        return v in self._levels.get(level, ())

    def level_vertices(self, level: int, bound: int | None = None) -> tuple:
        self.check_level(level)
        if level not in self._levels:
            raise TruncationIncompleteError(
                "custom diagram declares no level %d" % level, missing=[(level, None)]
            )
        vs = self._levels[level]
        return vs if bound is None else vs[:bound]

    def rank(self, level: int, v) -> int:
        self.check_vertex(level, v)
        return self._levels[level].index(v) + 1


class Subdiagram(Diagram):
    """A vertex or edge subdiagram, itself usable as a diagram.

    Vertex kind: keeps the declared vertex sets W_n with every ambient edge
    between kept vertices.  ``outside_predecessors`` lists the ambient
    sources of a kept target that fall outside W_{n-1}.

    Edge kind: keeps a declared subset of edges (here: the retained sources
    per target).  Its own levels are the forward cone of the declared seed
    under retained edges; ``deleted_predecessors`` lists ambient sources per
    kept target with retained multiplicities subtracted, over the ambient
    vertex sets.
    """

    def __init__(self, ambient: Diagram, kind: str, spec: Mapping):
        if kind not in ("vertex", "edge"):
            raise DiagramError("subdiagram kind must be 'vertex' or 'edge'")
        self.ambient = ambient
        self.kind = kind
        self.spec = dict(spec)
        self.base_level = ambient.base_level
        self.integer_keys = ambient.integer_keys
        self.family = "%s-sub-%s" % (ambient.family, kind)
        rule = spec.get("rule")
        if kind == "vertex":
            if rule == "staircase":
                if ambient.family != "binfty":
                    raise DiagramError("staircase subdiagrams live inside binfty")
                k = int(spec["k"])
                if k < 1:
                    raise DiagramError("staircase offset k must be >= 1")
                self.k = k
                self._level_set = lambda n: tuple(range(k, k + (n - self.base_level) + 1))
            elif rule == "constant":
                vtx = spec["vertex"]
                if not ambient.level_contains(ambient.base_level, vtx):
                    raise DiagramError("constant subdiagram vertex %r not in the diagram" % (vtx,))
                self._level_set = lambda n: (vtx,)
            elif rule == "explicit":
                levels = {int(n): tuple(vs) for n, vs in spec["levels"].items()}
                if any(len(vs) == 0 for vs in levels.values()):
                    raise DiagramError("vertex subdiagram levels must be nonempty")
                self._explicit_levels = levels

                def lookup(n: int) -> tuple:
                    if n not in levels:
                        raise TruncationIncompleteError(
                            "subdiagram declares no level %d" % n, missing=[(n, None)]
                        )
                    return levels[n]

                self._level_set = lookup
            else:
                raise DiagramError("unknown vertex subdiagram rule: %r" % (rule,))
        else:
            if rule == "pascal":
                if ambient.family != "binfty":
                    raise DiagramError("the pascal edge subdiagram lives inside binfty")
                k = int(spec["k"])
                if k < 1:
                    raise DiagramError("pascal edge subdiagram offset k must be >= 1")
                self.k = k
                self._level_set = lambda n: tuple(range(k, k + (n - self.base_level) + 1))
                self._retained = lambda n, v: {
                    w: 1 for w in (v - 1, v) if ambient.level_contains(n - 1, w)
                }
            elif rule == "explicit":
                retained = {
                    int(n): {v: dict(srcs) for v, srcs in rows.items()}
                    for n, rows in spec["retained"].items()
                }
                seeds = tuple(spec["seed"])

                def level_set(n: int) -> tuple:
                    if n == self.base_level:
                        return seeds
                    prev = set(level_set(n - 1))
                    rows = retained.get(n)
                    if rows is None:
                        raise TruncationIncompleteError(
                            "no retained rows declared at level %d" % n, missing=[(n, None)]
                        )
                    out = [v for v, srcs in rows.items() if any(w in prev for w in srcs)]
                    if not out:
                        raise DiagramError("edge subdiagram cone dies at level %d" % n)
                    return tuple(out)

                self._level_set = level_set
                self._retained = lambda n, v: dict(retained.get(n, {}).get(v, {}))
            else:
                raise DiagramError("unknown edge subdiagram rule: %r" % (rule,))
        super().__init__(spec)
        self._validate_small_levels()

    def _validate_small_levels(self):
        for n in range(self.base_level, self.base_level + 3):
            try:
                vs = self._level_set(n)
            except TruncationIncompleteError:
                continue  # explicit data may cover fewer levels; fail on use instead
            if not vs:
                raise DiagramError("subdiagram level %d is empty" % n)
            if self.kind == "edge":
                for v in vs:
                    if n == self.base_level:
                        continue
                    ambient_row = self.ambient.predecessors(n, v)
                    for w, m in self._retained(n, v).items():
                        if m > ambient_row.get(w, 0):
                            raise DiagramError(
                                "retained multiplicity exceeds the ambient edge count at %r" % ((n, v, w),)
                            )

    # -- Diagram interface --------------------------------------------------

    def predecessors(self, level: int, v) -> dict:
        self.check_vertex(level, v)
        if level == self.base_level:
            raise DiagramError("base level vertices have no predecessors")
        kept = set(self._level_set(level - 1))
        if self.kind == "vertex":
            amb = self.ambient.predecessors(level, v)
            return {w: m for w, m in amb.items() if w in kept}
        return {w: m for w, m in self._retained(level, v).items() if w in kept}

    def successors(self, level: int, w, bound: int | None = None) -> dict:
        self.check_vertex(level, w)
        out = {}
        for v in self._level_set(level + 1):
            mult = self.predecessors(level + 1, v).get(w, 0)
            if mult:
                out[v] = mult
        return out

    def level_contains(self, level: int, v) -> bool:
        try:
            return v in self._level_set(level)
        except TruncationIncompleteError:
            raise

    def level_vertices(self, level: int, bound: int | None = None) -> tuple:
        self.check_level(level)
        vs = self._level_set(level)
        return vs if bound is None else vs[:bound]

    def rank(self, level: int, v) -> int:
        self.check_vertex(level, v)
        return self.ambient.rank(level, v)

    def closed_form_height(self, level: int, v):
        if self.kind == "vertex" and self.spec.get("rule") == "staircase":
            n = level
            if v == self.k:
                return 1
            a = self.ambient.closed_form_height(n, v - self.k + 1)
            b = self.ambient.closed_form_height(n + 1, v - self.k)
            return a - b
        if self.kind == "edge" and self.spec.get("rule") == "pascal":
            return comb(level - self.base_level, v - self.k)
        return None

    # -- complement views ----------------------------------------------------

    def outside_predecessors(self, level: int, v) -> dict:
        """Ambient predecessors of kept vertex ``v`` lying outside the kept level below."""
        if self.kind != "vertex":
            raise DiagramError("outside_predecessors applies to vertex subdiagrams")
        self.check_vertex(level, v)
        kept = set(self._level_set(level - 1))
        amb = self.ambient.predecessors(level, v)
        return {w: m for w, m in amb.items() if w not in kept}

    def deleted_predecessors(self, level: int, v) -> dict:
        """Ambient-minus-retained edge multiset into kept vertex ``v``."""
        if self.kind != "edge":
            raise DiagramError("deleted_predecessors applies to edge subdiagrams")
        self.check_vertex(level, v)
        amb = self.ambient.predecessors(level, v)
        kept = self._retained(level, v)
        out = {}
        for w, m in amb.items():
            d = m - kept.get(w, 0)
            if d > 0:
                out[w] = d
        return out


def build_diagram(spec) -> Diagram:
    """Build a diagram from a family name + params mapping (or a JSON string/dict)."""
    if isinstance(spec, str):
        spec = json.loads(spec)
    if not isinstance(spec, Mapping):
        raise DiagramError("diagram spec must be a mapping or JSON string")
    family = spec.get("family")
    params = dict(spec.get("params", {}))
    if family == "pascal-n":
        d = PascalDiagram("n")
    elif family == "pascal-z":
        d = PascalDiagram("z")
    elif family == "pascal-k":
        d = PascalDiagram(int(params.get("k", 0)))
    elif family == "binfty":
        d = BinftyDiagram()
    elif family == "bounded-finite":
        d = BoundedDiagram(int(params.get("k", 0)), finite=True)
    elif family == "bounded-generalized":
        d = BoundedDiagram(int(params.get("k", 0)), finite=False)
    elif family == "odometer-io":
        if "a" not in params:
            raise DiagramError("odometer-io needs an entry rule 'a'")
        d = OdometerChainDiagram(params["a"], params.get("columns"))
    elif family == "custom":
        levels = {int(n): [_vertex_from_json(v) for v in vs] for n, vs in params["levels"].items()}
        rows = {
            int(n): {
                _vertex_from_json(json.loads(v) if isinstance(v, str) else v): {
                    _vertex_from_json(json.loads(w) if isinstance(w, str) else w): int(m)
                    for w, m in preds.items()
                }
                for v, preds in level_rows.items()
            }
            for n, level_rows in params["rows"].items()
        }
        d = CustomDiagram(levels, rows, base_level=int(params.get("base_level", 0)))
    else:
        raise DiagramError("unknown family %r (expected one of %s)" % (family, ", ".join(FAMILIES)))
    trunc = spec.get("truncation")
    if trunc:
        d.params["truncation"] = dict(trunc)
    return d


def _vertex_from_json(v):
    if isinstance(v, int):
        return v
    if isinstance(v, (list, tuple)):
        return support_key(v)
    raise DiagramError("vertices must be integers or [coordinate, multiplicity] pair lists")


def vertex_window(diagram: Diagram, level: int, bound: int | None = None) -> LevelWindow:
    """The level's canonical finite window (cone of the base level cut by ``bound``)."""
    diagram.check_level(level)
    if bound is None:
        trunc = diagram.params.get("truncation") or {}
        bound = trunc.get("bound")
    vs = diagram.level_vertices(level, bound)
    ranks = tuple(diagram.rank(level, v) for v in vs)
    return LevelWindow(level=level, vertices=vs, ranks=ranks)


def build_subdiagram(diagram: Diagram, spec: Mapping) -> Subdiagram:
    """Build a vertex or edge subdiagram from a spec mapping.

    Vertex kinds: {"kind": "vertex", "rule": "staircase", "k": 2}
                  {"kind": "vertex", "rule": "constant", "vertex": 3}
                  {"kind": "vertex", "rule": "explicit", "levels": {...}}
    Edge kinds:   {"kind": "edge", "rule": "pascal", "k": 2}
                  {"kind": "edge", "rule": "explicit", "seed": [...], "retained": {...}}
    """
    if isinstance(spec, str):
        spec = json.loads(spec)
    kind = spec.get("kind")
    body = {k: v for k, v in spec.items() if k != "kind"}
    return Subdiagram(diagram, kind, body)
