"""Ordered diagrams and the adic successor map on their path spaces.

An edge order assigns to every vertex ``v`` a total order on the finite set
of edges into ``v`` (pairs ``(source, slot)``, where ``slot`` numbers
parallel edges from 1).  The adic successor of a path replaces its first
non-maximal edge by the next edge in that order and rebuilds the segment
below with the minimal path to the new source; the predecessor map mirrors
this with minimal edges and maximal refills.

Paths are finite prefixes plus an optional symbolic tail.  Because levels
never end, a path whose explicit edges are all maximal is not necessarily
maximal: the answer lives in the unspecified remainder.  Symbolic tails make
that remainder exact.  For each supported (order, tail, family) combination
the module either proves every tail edge extremal or locates the first
non-extremal tail edge and materializes the prefix up to it; combinations
with no such analysis raise ``DeepenPrefixError`` instead of guessing.

Extremal paths that no finite prefix-plus-tail can carry (multinomial paths
whose support grows forever) are handled by ``PascalPathDescriptor``: the
pair of position and multiplicity data that pins down a maximal or minimal
path exactly.  Descriptors classify into countable and uncountable extremal
classes, answer successor/predecessor candidate queries, and reflect from
the maximal side to the minimal side.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .core import (
    BinftyDiagram,
    Diagram,
    DiagramError,
    OdometerChainDiagram,
    PascalDiagram,
    Subdiagram,
    TruncationIncompleteError,
    key_add,
    key_sub,
    support_key,
)


class MaximalPathError(DiagramError):
    """The path is provably maximal: it has no adic successor."""


class MinimalPathError(DiagramError):
    """The path is provably minimal: it has no adic predecessor."""


class DeepenPrefixError(TruncationIncompleteError):
    """Every specified edge is extremal and the tail decides nothing.

    Recoverable: extend the prefix (or attach a symbolic tail) and retry.
    """


# ---------------------------------------------------------------------------
# symbolic tails


@dataclass(frozen=True)
class Unspecified:
    """No information beyond the explicit prefix."""

    kind = "unspecified"


@dataclass(frozen=True)
class VerticalAt:
    """Beyond the prefix the path repeats the vertex forever.

    ``slot`` picks among parallel edges: "first" / "last" in the level's
    edge order (integer-multiplicity families only ever need these two).
    """

    vertex: object
    slot: str = "first"
    kind = "vertical"

    def __post_init__(self):
        if self.slot not in ("first", "last"):
            raise DiagramError("vertical tail slot must be 'first' or 'last'")


@dataclass(frozen=True)
class DiagonalFrom:
    """Beyond the prefix the path slants: v -> v+1 -> v+2 -> ..."""

    vertex: int
    kind = "diagonal"


@dataclass(frozen=True)
class PascalConcentrating:
    """Beyond the prefix every step adds one unit at the same coordinate."""

    coordinate: int
    kind = "concentrating"


_TAIL_KINDS = {
    "unspecified": Unspecified,
    "vertical": VerticalAt,
    "diagonal": DiagonalFrom,
    "concentrating": PascalConcentrating,
}


# ---------------------------------------------------------------------------
# path representation


@dataclass(frozen=True)
class PathRep:
    """A finite path prefix plus a symbolic tail.

    ``start`` is the level of the path's first vertex; ``edges`` lists
    ``(source, target, slot)`` triples level by level, slots numbering
    parallel edges from 1.
    """

    start: int
    edges: tuple = ()
    tail: object = Unspecified()

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))

    @property
    def end_level(self) -> int:
        return self.start + len(self.edges)

    @property
    def end_vertex(self):
        """The deepest known vertex: prefix end, or the tail's anchor."""
        if self.edges:
            return self.edges[-1][1]
        if isinstance(self.tail, (VerticalAt, DiagonalFrom)):
            return self.tail.vertex
        if isinstance(self.tail, PascalConcentrating):
            return ()  # an empty concentrating path starts at the root key
        return None

    def vertex_at(self, level: int):
        if not self.start <= level <= self.end_level:
            raise DiagramError(
                "path covers levels %d..%d, not %d" % (self.start, self.end_level, level)
            )
        if level == self.start:
            return self.edges[0][0] if self.edges else self.end_vertex
        return self.edges[level - self.start - 1][1]


def validate_path(diagram: Diagram, path: PathRep) -> None:
    """Check composition, membership, slot bounds, and tail admissibility."""
    diagram.check_level(path.start)
    prev = None
    for j, (w, v, slot) in enumerate(path.edges):
        level = path.start + j + 1
        if prev is not None and w != prev:
            raise DiagramError("edges %d and %d of the path do not compose" % (j - 1, j))
        preds = diagram.predecessors(level, v)
        mult = preds.get(w, 0)
        if mult == 0:
            raise DiagramError("no edge %r -> %r between levels %d and %d" % (w, v, level - 1, level))
        if not 1 <= slot <= mult:
            raise DiagramError("slot %d outside 1..%d for edge %r -> %r" % (slot, mult, w, v))
        prev = v
    _validate_tail(diagram, path)


def _validate_tail(diagram: Diagram, path: PathRep) -> None:
    tail = path.tail
    if isinstance(tail, Unspecified):
        if not path.edges:
            raise DiagramError("an empty path needs a symbolic tail to anchor it")
        return
    kind = _family_kind(diagram)
    if isinstance(tail, VerticalAt):
        allowed = ("binfty", "staircase", "column-binfty", "column-odometer")
        if kind not in allowed:
            raise DiagramError("vertical tails are not defined on %s" % diagram.family)
        anchor_level = path.end_level
        if not diagram.level_contains(anchor_level, tail.vertex):
            raise DiagramError("vertical tail vertex %r is not at level %d" % (tail.vertex, anchor_level))
        if path.edges and path.edges[-1][1] != tail.vertex:
            raise DiagramError("vertical tail must anchor at the prefix end")
    elif isinstance(tail, DiagonalFrom):
        if kind not in ("binfty", "staircase"):
            raise DiagramError("diagonal tails are not defined on %s" % diagram.family)
        if not diagram.level_contains(path.end_level, tail.vertex):
            raise DiagramError("diagonal tail vertex %r is not at level %d" % (tail.vertex, path.end_level))
        if path.edges and path.edges[-1][1] != tail.vertex:
            raise DiagramError("diagonal tail must anchor at the prefix end")
    elif isinstance(tail, PascalConcentrating):
        if kind != "pascal":
            raise DiagramError("concentrating tails are not defined on %s" % diagram.family)
        if not diagram.coord_in_domain(tail.coordinate):
            raise DiagramError("coordinate %d is outside %s" % (tail.coordinate, diagram.family))
        if not path.edges and path.start != diagram.base_level:
            raise DiagramError("an empty concentrating path must start at the base level")
    else:
        raise DiagramError("unknown tail %r" % (tail,))


def _family_kind(diagram: Diagram) -> str:
    if isinstance(diagram, PascalDiagram):
        return "pascal"
    if isinstance(diagram, BinftyDiagram):
        return "binfty"
    if isinstance(diagram, Subdiagram) and diagram.kind == "vertex":
        rule = diagram.spec.get("rule")
        if rule == "staircase":
            return "staircase"
        if rule == "constant":
            if isinstance(diagram.ambient, OdometerChainDiagram):
                return "column-odometer"
            if isinstance(diagram.ambient, BinftyDiagram):
                return "column-binfty"
    return "other"


def _leftmost(diagram: Diagram, kind: str):
    if kind == "binfty":
        return 1
    if kind == "staircase":
        return diagram.k
    raise DiagramError("no leftmost vertex rule for %s" % diagram.family)


# ---------------------------------------------------------------------------
# edge orders


class EdgeOrder:
    """A rule giving, per vertex, the edges into it in increasing order."""

    name = "abstract"

    def edges_into(self, diagram: Diagram, level: int, v) -> tuple:
        raise NotImplementedError


def _slots_ascending(items: Iterable) -> list:
    out = []
    for w, mult in items:
        out.extend((w, slot) for slot in range(1, mult + 1))
    return out


class LeftToRightOrder(EdgeOrder):
    """Sources in increasing enumeration order, parallel slots ascending."""

    name = "left-to-right"

    def edges_into(self, diagram, level, v):
        preds = diagram.predecessors(level, v)
        items = sorted(preds.items(), key=lambda wm: diagram.rank(level - 1, wm[0]))
        return tuple(_slots_ascending(items))


class AlternatingOrder(EdgeOrder):
    """Left-to-right into odd levels, right-to-left into even levels."""

    name = "alternating"

    def edges_into(self, diagram, level, v):
        preds = diagram.predecessors(level, v)
        items = sorted(preds.items(), key=lambda wm: diagram.rank(level - 1, wm[0]))
        flat = _slots_ascending(items)
        if level % 2 == 0:
            flat.reverse()
        return tuple(flat)


class NaturalPascalOrder(EdgeOrder):
    """Multinomial edges ordered by removal position, ascending.

    The edges into a key are its single-unit removals; the edge removing at
    position i precedes the edge removing at position j exactly when i < j
    (signed positions use the integer order).
    """

    name = "natural-pascal"

    def edges_into(self, diagram, level, v):
        if not isinstance(diagram, PascalDiagram):
            raise DiagramError("the natural order is defined on multinomial diagrams")
        diagram.check_vertex(level, v)
        if level == diagram.base_level:
            raise DiagramError("base level vertices have no incoming edges")
        return tuple((key_sub(v, c), 1) for c, _ in v)


class CyclicBinftyOrder(EdgeOrder):
    """The stationary cyclic order on the triangular diagram.

    Edges into vertex i are ordered (i-1) < 1 < 2 < ... < (i-2) < i; vertex 2
    gets 1 < 2 and vertex 1 has its single edge.  The diagonal edge is always
    first and the vertical edge always last.
    """

    name = "cyclic-binfty"

    def edges_into(self, diagram, level, v):
        preds = diagram.predecessors(level, v)
        if any(m != 1 for m in preds.values()) or not all(isinstance(w, int) for w in preds):
            raise DiagramError("the cyclic order needs simple integer-indexed edges")
        if v == 1:
            seq = [1]
        elif v == 2:
            seq = [1, 2]
        else:
            seq = [v - 1] + list(range(1, v - 1)) + [v]
        present = [w for w in seq if w in preds]
        if len(present) != len(preds):
            raise DiagramError("cyclic order expects sources among 1..%d" % v)
        return tuple((w, 1) for w in present)


class CustomOrder(EdgeOrder):
    """An explicit per-vertex permutation rule.

    ``rule(diagram, level, v)`` must return every edge into ``v`` exactly
    once, in increasing order.
    """

    name = "custom"

    def __init__(self, rule: Callable):
        self.rule = rule

    def edges_into(self, diagram, level, v):
        seq = tuple(tuple(e) for e in self.rule(diagram, level, v))
        expected = set(_slots_ascending(diagram.predecessors(level, v).items()))
        if set(seq) != expected or len(seq) != len(expected):
            raise DiagramError("custom order is not a permutation of the edges into %r" % (v,))
        return seq


_ORDER_NAMES = {
    "natural": NaturalPascalOrder,
    "natural-pascal": NaturalPascalOrder,
    "left-to-right": LeftToRightOrder,
    "ltr": LeftToRightOrder,
    "alternating": AlternatingOrder,
    "cyclic": CyclicBinftyOrder,
    "cyclic-binfty": CyclicBinftyOrder,
}


def make_order(spec) -> EdgeOrder:
    """An order from its name, an EdgeOrder instance, or a callable rule."""
    if isinstance(spec, EdgeOrder):
        return spec
    if isinstance(spec, str):
        cls = _ORDER_NAMES.get(spec)
        if cls is None:
            raise DiagramError("unknown order %r (choose from %s)" % (spec, sorted(set(_ORDER_NAMES))))
        return cls()
    if callable(spec):
        return CustomOrder(spec)
    raise DiagramError("cannot interpret %r as an edge order" % (spec,))


@dataclass(eq=False)
class OrderedDiagram:
    """A diagram together with an edge order; caches the per-vertex orders."""

    diagram: Diagram
    order: EdgeOrder
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.order = make_order(self.order)

    def edges_into(self, level: int, v) -> tuple:
        key = (level, v)
        got = self._cache.get(key)
        if got is None:
            got = self._cache[key] = self.order.edges_into(self.diagram, level, v)
        return got


# ---------------------------------------------------------------------------
# extremality of single edges and extremal refills


def _edge_is_extremal(od: OrderedDiagram, level: int, v, w, slot: int, side: str) -> bool:
    seq = od.edges_into(level, v)
    return seq[-1] == (w, slot) if side == "max" else seq[0] == (w, slot)


def _first_nonextremal_index(od: OrderedDiagram, path: PathRep, side: str):
    for j, (w, v, slot) in enumerate(path.edges):
        if not _edge_is_extremal(od, path.start + j + 1, v, w, slot, side):
            return j
    return None


def extremal_path_to(od: OrderedDiagram, level: int, vertex, side: str,
                     stop_level: int | None = None) -> tuple:
    """The minimal ("min") or maximal ("max") path from ``stop_level`` up to
    ``vertex``, as an edge tuple.

    Multinomial diagrams under the natural order use the closed recipe:
    walking down, remove one unit at the smallest (minimal side) or largest
    (maximal side) occupied position.  Everywhere else the refill picks the
    first or last edge of the order level by level.
    """
    d = od.diagram
    stop = d.base_level if stop_level is None else stop_level
    if level < stop:
        raise DiagramError("vertex level %d below the stop level %d" % (level, stop))
    edges = []
    u = vertex
    if isinstance(d, PascalDiagram) and od.order.name == "natural-pascal":
        for lvl in range(level, stop, -1):
            c = u[0][0] if side == "min" else u[-1][0]
            w = key_sub(u, c)
            edges.append((w, u, 1))
            u = w
    else:
        for lvl in range(level, stop, -1):
            seq = od.edges_into(lvl, u)
            w, slot = seq[0] if side == "min" else seq[-1]
            edges.append((w, u, slot))
            u = w
    edges.reverse()
    return tuple(edges)


def minimal_path_to(od, level, vertex, stop_level=None) -> tuple:
    return extremal_path_to(od, level, vertex, "min", stop_level)


def maximal_path_to(od, level, vertex, stop_level=None) -> tuple:
    return extremal_path_to(od, level, vertex, "max", stop_level)


# ---------------------------------------------------------------------------
# symbolic tail analysis


def _tail_edge(od: OrderedDiagram, tail, anchor_level: int, anchor, j: int):
    """The j-th tail edge (1-based) as (source, target, slot)."""
    d = od.diagram
    if isinstance(tail, VerticalAt):
        v = tail.vertex
        if tail.slot == "first":
            slot = 1
        else:
            slot = d.predecessors(anchor_level + j, v)[v]
        return (v, v, slot)
    if isinstance(tail, DiagonalFrom):
        return (tail.vertex + j - 1, tail.vertex + j, 1)
    raise DiagramError("tail %r has no edge sequence" % (tail,))


def _concentrating_vertices(anchor, coordinate: int, depth: int) -> list:
    out = [anchor]
    for _ in range(depth):
        out.append(key_add(out[-1], coordinate))
    return out


def _tail_decision(od: OrderedDiagram, tail, kind: str, anchor_level: int, anchor, side: str):
    """Decide the tail: "all" (every tail edge extremal), a search cap, or "unknown".

    Each finite cap is justified by the order's shape: a witness edge of the
    opposite kind occurs within that many levels whenever one occurs at all.
    """
    order = od.order.name
    d = od.diagram
    if isinstance(tail, VerticalAt):
        if kind in ("binfty", "staircase"):
            leftmost = _leftmost(d, kind)
            if order == "left-to-right":
                if side == "max":
                    return "all"
                return "all" if anchor == leftmost else 1
            if order == "alternating":
                return "all" if anchor == leftmost else 2
            if order == "cyclic-binfty" and kind == "binfty":
                if side == "max":
                    return "all"
                return "all" if anchor == 1 else 1
            return "unknown"
        if kind == "column-binfty":
            # the column has one simple edge per level: everything is extremal
            return "all" if order in ("left-to-right", "alternating") else "unknown"
        if kind == "column-odometer":
            if order == "left-to-right":
                wants_first = side == "min"
                is_first = tail.slot == "first"
                return "all" if wants_first == is_first else 1
            if order == "alternating":
                return 2
            return "unknown"
        return "unknown"
    if isinstance(tail, DiagonalFrom):
        if kind not in ("binfty", "staircase"):
            return "unknown"
        if order == "left-to-right":
            if side == "max" and kind == "staircase":
                top = d.k + anchor_level - d.base_level
                if anchor == top:
                    return "all"  # the frontier diagonal is the level's last edge
            return 2
        if order == "alternating":
            return 4
        if order == "cyclic-binfty" and kind == "binfty":
            # diagonal edges are first in the cyclic order: minimal forever
            return "all" if side == "min" else 1
        return "unknown"
    if isinstance(tail, PascalConcentrating):
        if kind != "pascal" or order != "natural-pascal":
            return "unknown"
        i = tail.coordinate
        supp = [c for c, _ in anchor] if anchor else []
        if side == "max":
            return "all" if not supp or i >= max(supp) else 1
        return "all" if not supp or i <= min(supp) else 1
    return "unknown"


def scan_tail(od: OrderedDiagram, path: PathRep, side: str):
    """Resolve the tail: ("all", None), ("found", depth), or ("unknown", None)."""
    tail = path.tail
    if isinstance(tail, Unspecified):
        return ("unknown", None)
    kind = _family_kind(od.diagram)
    anchor_level = path.end_level
    anchor = path.end_vertex
    decision = _tail_decision(od, tail, kind, anchor_level, anchor, side)
    if decision == "all":
        return ("all", None)
    if decision == "unknown":
        return ("unknown", None)
    if isinstance(tail, PascalConcentrating):
        vertices = _concentrating_vertices(anchor, tail.coordinate, decision)
        for j in range(1, decision + 1):
            w, v = vertices[j - 1], vertices[j]
            if not _edge_is_extremal(od, anchor_level + j, v, w, 1, side):
                return ("found", j)
    else:
        for j in range(1, decision + 1):
            w, v, slot = _tail_edge(od, tail, anchor_level, anchor, j)
            if not _edge_is_extremal(od, anchor_level + j, v, w, slot, side):
                return ("found", j)
    raise DiagramError(
        "internal: tail scan cap %d exhausted for %r under %s" % (decision, tail, od.order.name)
    )


def materialize(od: OrderedDiagram, path: PathRep, depth: int) -> PathRep:
    """Append ``depth`` tail edges to the prefix, keeping the tail."""
    if depth < 0:
        raise DiagramError("materialize depth must be >= 0")
    tail = path.tail
    anchor_level = path.end_level
    anchor = path.end_vertex
    if isinstance(tail, PascalConcentrating):
        vertices = _concentrating_vertices(anchor, tail.coordinate, depth)
        new = tuple((vertices[j - 1], vertices[j], 1) for j in range(1, depth + 1))
    elif isinstance(tail, (VerticalAt, DiagonalFrom)):
        new = tuple(_tail_edge(od, tail, anchor_level, anchor, j) for j in range(1, depth + 1))
        if isinstance(tail, DiagonalFrom) and depth:
            tail = DiagonalFrom(new[-1][1])
    else:
        raise DiagramError("cannot materialize an unspecified tail")
    return PathRep(path.start, path.edges + new, tail)


# ---------------------------------------------------------------------------
# the adic step


def _step(od: OrderedDiagram, path: PathRep, side: str) -> PathRep:
    validate_path(od.diagram, path)
    work = path
    m = _first_nonextremal_index(od, work, side)
    if m is None:
        state, depth = scan_tail(od, work, side)
        if state == "unknown":
            raise DeepenPrefixError(
                "every specified edge is %s; extend the prefix beyond level %d"
                % ("maximal" if side == "max" else "minimal", work.end_level),
                missing=[("prefix-level", work.end_level + 1)],
            )
        if state == "all":
            if side == "max":
                raise MaximalPathError("the path is maximal: every edge, tail included, is maximal")
            raise MinimalPathError("the path is minimal: every edge, tail included, is minimal")
        work = materialize(od, work, depth)
        m = len(work.edges) - 1
    w, v, slot = work.edges[m]
    level = work.start + m + 1
    seq = od.edges_into(level, v)
    pos = seq.index((w, slot))
    new_w, new_slot = seq[pos + 1] if side == "max" else seq[pos - 1]
    refill = extremal_path_to(
        od, level - 1, new_w, "min" if side == "max" else "max", stop_level=work.start
    )
    edges = refill + ((new_w, v, new_slot),) + work.edges[m + 1:]
    return PathRep(work.start, edges, work.tail)


def vershik_step(od: OrderedDiagram, path: PathRep) -> PathRep:
    """The adic successor of ``path``.

    Raises ``MaximalPathError`` when the path is provably maximal and
    ``DeepenPrefixError`` when the explicit prefix is exhausted without a
    decision.
    """
    return _step(od, path, "max")


def vershik_inverse(od: OrderedDiagram, path: PathRep) -> PathRep:
    """The adic predecessor of ``path`` (mirror of ``vershik_step``)."""
    return _step(od, path, "min")


# ---------------------------------------------------------------------------
# extremal classification


class ExtremalClass(enum.Enum):
    NOT_EXTREMAL = "NotExtremal"
    MAX_U = "MaxU"
    MAX_C = "MaxC"
    MIN_U = "MinU"
    MIN_C = "MinC"
    SPECIAL = "Special"


def _provably_extremal(od: OrderedDiagram, path: PathRep, side: str) -> bool:
    if _first_nonextremal_index(od, path, side) is not None:
        return False
    state, _ = scan_tail(od, path, side)
    return state == "all"


def classify_extremal(od: OrderedDiagram, path: PathRep) -> ExtremalClass:
    """Classify a prefix-plus-tail path.

    Paths proved maximal and minimal at once are Special.  Every extremal
    path a finite prefix plus symbolic tail can carry belongs to a countable
    class, so one-sided results are MaxC / MinC; the uncountable classes
    arrive through ``classify_descriptor``.  Unspecified tails never certify
    extremality: the verdict NotExtremal then means "not extremal as far as
    the prefix shows".
    """
    validate_path(od.diagram, path)
    mx = _provably_extremal(od, path, "max")
    mn = _provably_extremal(od, path, "min")
    if mx and mn:
        return ExtremalClass.SPECIAL
    if mx:
        return ExtremalClass.MAX_C
    if mn:
        return ExtremalClass.MIN_C
    return ExtremalClass.NOT_EXTREMAL


# ---------------------------------------------------------------------------
# descriptors for multinomial extremal paths


@dataclass(frozen=True)
class PascalPathDescriptor:
    """Exact data for an extremal path of a multinomial diagram.

    ``positions`` lists the occupied coordinates in filling order: strictly
    increasing for side "max", strictly decreasing for side "min".
    ``values`` gives the final multiplicity at each position; ``None`` in the
    last slot marks an unbounded final multiplicity.  ``position_tail =
    (start, step)`` continues the positions arithmetically forever (away
    from the first position), each carrying ``value_tail``; a descriptor
    with a position tail describes a path whose support never stops growing.
    """

    side: str
    positions: tuple
    values: tuple
    position_tail: tuple | None = None
    value_tail: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(int(i) for i in self.positions))
        object.__setattr__(
            self, "values", tuple(None if x is None else int(x) for x in self.values)
        )
        if self.position_tail is not None:
            s, d = self.position_tail
            object.__setattr__(self, "position_tail", (int(s), int(d)))


def classify_descriptor(desc: PascalPathDescriptor, domain: str = "z") -> ExtremalClass:
    """Validate a descriptor and name its extremal class.

    Growing support gives the uncountable classes MaxU / MinU; a finite
    position list whose last multiplicity is unbounded gives MaxC / MinC;
    a single position with unbounded multiplicity is the Special class of
    vertical paths, maximal and minimal simultaneously.
    """
    if domain not in ("z", "n"):
        raise DiagramError("domain must be 'z' or 'n'")
    if desc.side not in ("max", "min"):
        raise DiagramError("descriptor side must be 'max' or 'min'")
    ps, vs = desc.positions, desc.values
    if not ps or len(ps) != len(vs):
        raise DiagramError("descriptor needs matching nonempty positions and values")
    direction = 1 if desc.side == "max" else -1
    for a, b in zip(ps, ps[1:]):
        if (b - a) * direction <= 0:
            raise DiagramError("positions must be strictly %s" %
                               ("increasing" if direction > 0 else "decreasing"))
    if domain == "n" and any(i < 1 for i in ps):
        raise DiagramError("positions must be >= 1 in the unsigned domain")
    for j, x in enumerate(vs):
        if x is None:
            if j != len(vs) - 1:
                raise DiagramError("only the final multiplicity may be unbounded")
        elif x < 1:
            raise DiagramError("multiplicities must be positive")
    if desc.position_tail is not None:
        start, step = desc.position_tail
        if step < 1:
            raise DiagramError("position tail step must be >= 1")
        if (start - ps[-1]) * direction <= 0:
            raise DiagramError("position tail must continue past the listed positions")
        if vs[-1] is None:
            raise DiagramError("an unbounded multiplicity leaves no room for more positions")
        if desc.value_tail is None or desc.value_tail < 1:
            raise DiagramError("a position tail needs a positive value_tail")
        if domain == "n" and desc.side == "min":
            raise DiagramError(
                "positions cannot decrease forever in the unsigned domain: "
                "no uncountable-class minimal paths exist there"
            )
        return ExtremalClass.MAX_U if desc.side == "max" else ExtremalClass.MIN_U
    if vs[-1] is not None:
        raise DiagramError(
            "a finite position list needs an unbounded final multiplicity "
            "to describe an infinite path"
        )
    if len(ps) == 1:
        return ExtremalClass.SPECIAL
    return ExtremalClass.MAX_C if desc.side == "max" else ExtremalClass.MIN_C


def _descriptor_entry(desc: PascalPathDescriptor, idx: int):
    ps = desc.positions
    if idx < len(ps):
        return ps[idx], desc.values[idx]
    if desc.position_tail is None:
        raise DiagramError("descriptor has only %d positions" % len(ps))
    start, step = desc.position_tail
    direction = 1 if desc.side == "max" else -1
    return start + direction * step * (idx - len(ps)), desc.value_tail


def descriptor_vertex(desc: PascalPathDescriptor, n: int):
    """The vertex at level ``n`` of the path the descriptor pins down.

    Positions fill in listed order: the level-``n`` vertex carries the first
    completed multiplicities plus the remainder at the currently filling
    position.
    """
    if n < 0:
        raise DiagramError("levels start at 0")
    remaining = n
    pairs = []
    idx = 0
    while remaining > 0:
        pos, val = _descriptor_entry(desc, idx)
        if val is None or val >= remaining:
            pairs.append((pos, remaining))
            remaining = 0
        else:
            pairs.append((pos, val))
            remaining -= val
        idx += 1
    return support_key(pairs)


def descriptor_prefix(desc: PascalPathDescriptor, diagram: PascalDiagram, depth: int) -> PathRep:
    """The depth-``depth`` prefix of the descriptor's path as a ``PathRep``.

    Once the prefix has entered the final unbounded position, the remainder
    is exactly a concentrating tail; before that point (and for descriptors
    whose support keeps growing) the tail stays unspecified.
    """
    if not isinstance(diagram, PascalDiagram):
        raise DiagramError("descriptors describe multinomial paths")
    cls = classify_descriptor(desc, "z" if diagram.signed else "n")
    vertices = [descriptor_vertex(desc, n) for n in range(depth + 1)]
    edges = []
    for u, v in zip(vertices, vertices[1:]):
        grown = [c for c, _ in v if dict(v)[c] != dict(u).get(c, 0)]
        edges.append((u, v, 1))
        if len(grown) != 1:
            raise DiagramError("internal: consecutive descriptor vertices differ oddly")
    tail: object = Unspecified()
    if cls in (ExtremalClass.MAX_C, ExtremalClass.MIN_C, ExtremalClass.SPECIAL):
        settled = sum(x for x in desc.values if x is not None)
        if depth >= settled:
            tail = PascalConcentrating(desc.positions[-1])
    return PathRep(diagram.base_level, tuple(edges), tail)


def succ_pred_descriptor(desc: PascalPathDescriptor, domain: str = "z") -> frozenset:
    """Successor (side "max") or predecessor (side "min") candidate set.

    Uncountable-class paths admit no candidates at all.  A countable-class
    path with final unbounded position i has exactly one candidate: the
    vertical path at i.  Special paths are their own candidate: they are the
    fixed targets of the continuous extension.
    """
    cls = classify_descriptor(desc, domain)
    if cls in (ExtremalClass.MAX_U, ExtremalClass.MIN_U):
        return frozenset()
    if cls is ExtremalClass.SPECIAL:
        return frozenset({desc})
    pivot = desc.positions[-1]
    return frozenset({PascalPathDescriptor(desc.side, (pivot,), (None,))})


def mirror_descriptor(desc: PascalPathDescriptor, domain: str = "z"):
    """Reflect a maximal descriptor through its first position.

    Positions map by i -> 2*i_1 - i (the first position is fixed), values
    ride along, and the result is a minimal descriptor.  On the unsigned
    domain a reflected final position below 1 is clamped to 1 per the stated
    rule — the returned flag reports the clamp — and any deeper excursion
    below 1 has no stated image, so it raises.

    Returns ``(descriptor, clipped)``.
    """
    cls = classify_descriptor(desc, domain)
    if desc.side != "max":
        raise DiagramError("the reflection maps maximal descriptors to minimal ones")
    i1 = desc.positions[0]
    mirrored = tuple(2 * i1 - i for i in desc.positions)
    tail = desc.position_tail
    if tail is not None:
        start, step = tail
        tail = (2 * i1 - start, step)
    clipped = False
    if domain == "n":
        if cls is ExtremalClass.MAX_U:
            raise DiagramError(
                "reflecting an ever-growing descriptor drops below position 1 "
                "infinitely often; only a single clamped position is defined"
            )
        below = [i for i in mirrored if i < 1]
        if below:
            if len(below) == 1 and len(mirrored) >= 2 and mirrored[-2] > 1:
                mirrored = mirrored[:-1] + (1,)
                clipped = True
            else:
                raise DiagramError(
                    "reflection sends %d positions below 1; only a single "
                    "clamped position is defined" % len(below)
                )
    out = PascalPathDescriptor("min", mirrored, desc.values, tail, desc.value_tail)
    classify_descriptor(out, domain)
    return out, clipped


# ---------------------------------------------------------------------------
# successor / predecessor candidate sets on paths


def succ_pred(od: OrderedDiagram, x) -> frozenset:
    """Candidate successor (maximal side) or predecessor (minimal side) set.

    Accepts a descriptor (multinomial diagrams under the natural order) or a
    classified extremal ``PathRep``.  Verdicts follow the order's structure:
    the natural order sends countable-class paths to the vertical path at
    their final position; the left-to-right order sends every maximal path
    to the leftmost vertical path; the cyclic order leaves every extremal
    path without candidates.  Non-extremal input is rejected.
    """
    if isinstance(x, PascalPathDescriptor):
        if not isinstance(od.diagram, PascalDiagram) or od.order.name != "natural-pascal":
            raise DiagramError("descriptors pair with multinomial diagrams under the natural order")
        return succ_pred_descriptor(x, "z" if od.diagram.signed else "n")
    cls = classify_extremal(od, x)
    if cls is ExtremalClass.NOT_EXTREMAL:
        raise DiagramError("the path is not provably extremal; it has an ordinary adic image")
    order = od.order.name
    kind = _family_kind(od.diagram)
    base = od.diagram.base_level
    if order == "cyclic-binfty":
        return frozenset()
    if cls is ExtremalClass.SPECIAL:
        return frozenset({x})
    if order == "natural-pascal" and kind == "pascal":
        if not isinstance(x.tail, PascalConcentrating):
            raise DiagramError("extremal multinomial paths need a concentrating tail")
        return frozenset({PathRep(base, (), PascalConcentrating(x.tail.coordinate))})
    if order == "left-to-right" and kind in ("binfty", "staircase"):
        if cls is ExtremalClass.MAX_C:
            leftmost = _leftmost(od.diagram, kind)
            return frozenset({PathRep(base, (), VerticalAt(leftmost))})
        raise DiagramError(
            "the minimal path's predecessor candidates form an infinite family "
            "under the left-to-right order; no finite representation is returned"
        )
    if order == "left-to-right" and kind == "column-odometer":
        flipped = "last" if x.tail.slot == "first" else "first"
        return frozenset({PathRep(base, (), VerticalAt(x.tail.vertex, flipped))})
    raise DiagramError("no candidate rule for class %s under order %s" % (cls.value, order))


# ---------------------------------------------------------------------------
# exhaustive truncated checks


def enumerate_prefixes(od: OrderedDiagram, depth: int, tops: Sequence | None = None,
                       stop_level: int | None = None) -> dict:
    """All depth-``depth`` paths grouped by top vertex, as ``PathRep`` values."""
    d = od.diagram
    stop = d.base_level if stop_level is None else stop_level
    if depth < 1:
        raise DiagramError("depth must be >= 1")
    top_level = stop + depth
    if tops is None:
        tops = d.level_vertices(top_level)

    def paths_to(level, v):
        if level == stop:
            return [()]
        out = []
        for w, mult in sorted(d.predecessors(level, v).items(), key=repr):
            for below in paths_to(level - 1, w):
                for slot in range(1, mult + 1):
                    out.append(below + ((w, v, slot),))
        return out

    return {v: [PathRep(stop, e) for e in paths_to(top_level, v)] for v in tops}


@dataclass
class TowerCheck:
    top_vertex: object
    paths: int
    unique_extremes: bool
    bijective: bool
    inverse_ok: bool
    cycle_ok: bool

    @property
    def ok(self) -> bool:
        return self.unique_extremes and self.bijective and self.inverse_ok and self.cycle_ok


@dataclass
class BijectionReport:
    depth: int
    stop_level: int
    towers: list
    total_paths: int

    @property
    def ok(self) -> bool:
        return all(t.ok for t in self.towers)


def bijection_check(od: OrderedDiagram, depth: int, tops: Sequence | None = None,
                    stop_level: int | None = None) -> BijectionReport:
    """Verify the adic step on every truncated path of the given depth.

    Per top vertex: exactly one all-maximal and one all-minimal prefix, the
    step is a bijection from the non-maximal onto the non-minimal prefixes,
    the inverse undoes it, and iterating from the minimal prefix walks the
    whole tower before running out.
    """
    d = od.diagram
    stop = d.base_level if stop_level is None else stop_level
    groups = enumerate_prefixes(od, depth, tops, stop)
    towers = []
    total = 0
    for v, paths in groups.items():
        total += len(paths)
        keyed = {p.edges: p for p in paths}
        maxes = [p for p in paths if _first_nonextremal_index(od, p, "max") is None]
        mins = [p for p in paths if _first_nonextremal_index(od, p, "min") is None]
        unique = len(maxes) == 1 and len(mins) == 1
        images = {}
        inverse_ok = True
        for p in paths:
            if p in maxes:
                continue
            y = vershik_step(od, p)
            images[p.edges] = y
            if y.edges not in keyed:
                inverse_ok = False
                continue
            back = vershik_inverse(od, y)
            if back.edges != p.edges:
                inverse_ok = False
        distinct = {y.edges for y in images.values()}
        expected = set(keyed) - {mins[0].edges} if unique else None
        bijective = unique and len(distinct) == len(images) and distinct == expected
        cycle_ok = False
        if unique:
            seen = [mins[0]]
            cur = mins[0]
            try:
                for _ in range(len(paths) - 1):
                    cur = vershik_step(od, cur)
                    seen.append(cur)
                vershik_step(od, cur)
            except DeepenPrefixError:
                cycle_ok = (
                    len({p.edges for p in seen}) == len(paths)
                    and cur.edges == maxes[0].edges
                )
            except (MaximalPathError, DiagramError):
                cycle_ok = False
        towers.append(TowerCheck(v, len(paths), unique, bijective, inverse_ok, cycle_ok))
    return BijectionReport(depth, stop, towers, total)


# ---------------------------------------------------------------------------
# orbits


@dataclass
class OrbitResult:
    paths: list
    visit_level: int | None
    visits: dict


def orbit(od: OrderedDiagram, path: PathRep, steps: int,
          visit_level: int | None = None) -> OrbitResult:
    """Iterate the adic step ``steps`` times, collecting visited prefixes.

    Step errors propagate with the failing step index attached as
    ``step_index``.  With a ``visit_level``, the result counts how often the
    orbit sits over each vertex of that level.
    """
    if steps < 0:
        raise DiagramError("steps must be >= 0")
    validate_path(od.diagram, path)
    paths = [path]
    cur = path
    for i in range(steps):
        try:
            cur = vershik_step(od, cur)
        except DiagramError as e:
            e.step_index = i
            e.args = ("step %d: %s" % (i, e.args[0]),) + e.args[1:]
            raise
        paths.append(cur)
    visits: dict = {}
    if visit_level is not None:
        for p in paths:
            u = p.vertex_at(visit_level)
            visits[u] = visits.get(u, 0) + 1
    return OrbitResult(paths, visit_level, visits)


# ---------------------------------------------------------------------------
# serialization


def _vertex_to_json(v):
    return [list(pair) for pair in v] if isinstance(v, tuple) else v


def _vertex_from_json(v):
    if isinstance(v, list):
        return support_key(tuple(tuple(p) for p in v))
    return v


def tail_to_json(tail) -> dict:
    if isinstance(tail, Unspecified):
        return {"kind": "unspecified"}
    if isinstance(tail, VerticalAt):
        return {"kind": "vertical", "vertex": _vertex_to_json(tail.vertex), "slot": tail.slot}
    if isinstance(tail, DiagonalFrom):
        return {"kind": "diagonal", "vertex": tail.vertex}
    if isinstance(tail, PascalConcentrating):
        return {"kind": "concentrating", "coordinate": tail.coordinate}
    raise DiagramError("unknown tail %r" % (tail,))


def tail_from_json(obj: Mapping):
    kind = obj.get("kind", "unspecified")
    if kind == "unspecified":
        return Unspecified()
    if kind == "vertical":
        return VerticalAt(_vertex_from_json(obj["vertex"]), obj.get("slot", "first"))
    if kind == "diagonal":
        return DiagonalFrom(int(obj["vertex"]))
    if kind == "concentrating":
        return PascalConcentrating(int(obj["coordinate"]))
    raise DiagramError("unknown tail kind %r" % (kind,))


def path_to_json(path: PathRep) -> dict:
    return {
        "start": path.start,
        "edges": [[_vertex_to_json(w), _vertex_to_json(v), slot] for w, v, slot in path.edges],
        "tail": tail_to_json(path.tail),
    }


def path_from_json(obj: Mapping) -> PathRep:
    edges = tuple(
        (_vertex_from_json(w), _vertex_from_json(v), int(slot)) for w, v, slot in obj.get("edges", [])
    )
    return PathRep(int(obj["start"]), edges, tail_from_json(obj.get("tail", {})))


def descriptor_to_json(desc: PascalPathDescriptor) -> dict:
    return {
        "side": desc.side,
        "positions": list(desc.positions),
        "values": list(desc.values),
        "position_tail": list(desc.position_tail) if desc.position_tail else None,
        "value_tail": desc.value_tail,
    }


def descriptor_from_json(obj: Mapping) -> PascalPathDescriptor:
    tail = obj.get("position_tail")
    return PascalPathDescriptor(
        obj["side"],
        tuple(obj["positions"]),
        tuple(obj["values"]),
        tuple(tail) if tail else None,
        obj.get("value_tail"),
    )
