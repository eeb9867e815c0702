from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bratteli.core import (
    BinftyDiagram,
    DiagramError,
    OdometerChainDiagram,
    PascalDiagram,
    build_subdiagram,
    key_add,
    support_key,
)
from bratteli.linalg import heights
from bratteli.vershik import (
    CustomOrder,
    DeepenPrefixError,
    DiagonalFrom,
    ExtremalClass,
    MaximalPathError,
    MinimalPathError,
    OrderedDiagram,
    PascalConcentrating,
    PascalPathDescriptor,
    PathRep,
    Unspecified,
    VerticalAt,
    bijection_check,
    classify_descriptor,
    classify_extremal,
    descriptor_from_json,
    descriptor_prefix,
    descriptor_to_json,
    descriptor_vertex,
    enumerate_prefixes,
    make_order,
    materialize,
    maximal_path_to,
    minimal_path_to,
    mirror_descriptor,
    orbit,
    path_from_json,
    path_to_json,
    succ_pred,
    succ_pred_descriptor,
    validate_path,
    vershik_inverse,
    vershik_step,
)

import oracles


def staircase(k=2):
    return build_subdiagram(BinftyDiagram(), {"kind": "vertex", "rule": "staircase", "k": k})


def odometer_column(a=2):
    return build_subdiagram(
        OdometerChainDiagram(a), {"kind": "vertex", "rule": "constant", "vertex": 1}
    )


def key(*pairs):
    return support_key(pairs)


# ---------------------------------------------------------------------------
# oracle adapters


def oracle_order(od, stop):
    """Adapt OrderedDiagram.edges_into to the oracle's (offset, target) callable."""

    def order(offset, tgt):
        return [(w, slot - 1) for w, slot in od.edges_into(stop + offset, tgt)]

    return order


def to_oracle(path):
    """PathRep -> the oracle's ((vertex, copy), ...) encoding."""
    first = path.edges[0][0]
    return ((first, 0),) + tuple((v, slot - 1) for _, v, slot in path.edges)


def from_oracle(stop, path):
    edges = tuple(
        (path[i - 1][0], path[i][0], path[i][1] + 1) for i in range(1, len(path))
    )
    return PathRep(stop, edges)


def assert_matches_oracle(od, depth):
    """The adic step agrees with sorting all paths, tower by tower."""
    d = od.diagram
    stop = d.base_level
    mapping, maximal, minimal = oracles.exhaustive_successor_map(
        d, depth, oracle_order(od, stop)
    )
    for p, q in mapping.items():
        assert to_oracle(vershik_step(od, from_oracle(stop, p))) == q
        assert to_oracle(vershik_inverse(od, from_oracle(stop, q))) == p
    for p in maximal:
        with pytest.raises(DeepenPrefixError):
            vershik_step(od, from_oracle(stop, p))
    for p in minimal:
        with pytest.raises(DeepenPrefixError):
            vershik_inverse(od, from_oracle(stop, p))


# ---------------------------------------------------------------------------
# edge orders


def test_left_to_right_order_on_binfty():
    od = OrderedDiagram(BinftyDiagram(), "left-to-right")
    assert od.edges_into(3, 3) == ((1, 1), (2, 1), (3, 1))
    assert od.edges_into(2, 1) == ((1, 1),)


def test_left_to_right_order_spreads_parallel_slots():
    od = OrderedDiagram(odometer_column(2), "left-to-right")
    assert od.edges_into(3, 1) == ((1, 1), (1, 2))


def test_alternating_order_flips_into_even_levels():
    od = OrderedDiagram(BinftyDiagram(), "alternating")
    assert od.edges_into(3, 3) == ((1, 1), (2, 1), (3, 1))
    assert od.edges_into(2, 3) == ((3, 1), (2, 1), (1, 1))
    assert od.edges_into(4, 2) == ((2, 1), (1, 1))


def test_natural_order_sorts_by_removal_position():
    od = OrderedDiagram(PascalDiagram("z"), "natural")
    v = key((-1, 1), (2, 1))
    assert od.edges_into(2, v) == ((key((2, 1)), 1), (key((-1, 1)), 1))
    w = key((1, 2), (3, 1))
    assert od.edges_into(3, w) == ((key((1, 1), (3, 1)), 1), (key((1, 2)), 1))


def test_cyclic_order_puts_diagonal_first_and_vertical_last():
    od = OrderedDiagram(BinftyDiagram(), "cyclic")
    assert od.edges_into(5, 4) == ((3, 1), (1, 1), (2, 1), (4, 1))
    assert od.edges_into(5, 2) == ((1, 1), (2, 1))
    assert od.edges_into(5, 1) == ((1, 1),)


def test_custom_order_must_be_a_permutation():
    d = BinftyDiagram()
    reversed_ltr = OrderedDiagram(d, lambda dd, lvl, v: [(w, 1) for w in range(v, 0, -1)])
    assert reversed_ltr.edges_into(2, 3) == ((3, 1), (2, 1), (1, 1))
    broken = OrderedDiagram(d, lambda dd, lvl, v: [(1, 1)])
    with pytest.raises(DiagramError):
        broken.edges_into(2, 3)


def test_make_order_rejects_unknown_names():
    with pytest.raises(DiagramError):
        make_order("sideways")


def test_natural_order_rejects_non_multinomial_diagrams():
    od = OrderedDiagram(BinftyDiagram(), "natural")
    with pytest.raises(DiagramError):
        od.edges_into(2, 2)


# ---------------------------------------------------------------------------
# path validation


def test_validate_path_checks_composition_and_slots():
    d = BinftyDiagram()
    validate_path(d, PathRep(1, ((2, 3, 1), (3, 3, 1))))
    with pytest.raises(DiagramError):
        validate_path(d, PathRep(1, ((2, 3, 1), (2, 3, 1))))  # 3 then source 2
    with pytest.raises(DiagramError):
        validate_path(d, PathRep(1, ((2, 3, 2),)))  # only one parallel copy
    with pytest.raises(DiagramError):
        validate_path(d, PathRep(1, ((5, 3, 1),)))  # no edge 5 -> 3


def test_validate_path_checks_tail_admissibility():
    with pytest.raises(DiagramError):
        validate_path(BinftyDiagram(), PathRep(1, (), Unspecified()))
    with pytest.raises(DiagramError):
        validate_path(PascalDiagram("n"), PathRep(0, (), VerticalAt(1)))
    with pytest.raises(DiagramError):
        validate_path(BinftyDiagram(), PathRep(1, (), PascalConcentrating(1)))
    with pytest.raises(DiagramError):  # anchor mismatch
        validate_path(BinftyDiagram(), PathRep(1, ((2, 3, 1),), VerticalAt(2)))
    with pytest.raises(DiagramError):  # coordinate outside the domain
        validate_path(PascalDiagram(2), PathRep(0, (), PascalConcentrating(3)))
    validate_path(BinftyDiagram(), PathRep(1, ((2, 3, 1),), VerticalAt(3)))
    validate_path(PascalDiagram(2), PathRep(0, (), PascalConcentrating(2)))


# ---------------------------------------------------------------------------
# extremal refills


def test_minimal_and_maximal_refills_on_binfty():
    od = OrderedDiagram(BinftyDiagram(), "left-to-right")
    assert minimal_path_to(od, 4, 3) == ((1, 1, 1), (1, 1, 1), (1, 3, 1))
    assert maximal_path_to(od, 3, 2) == ((2, 2, 1), (2, 2, 1))


def test_natural_refill_recipe_matches_generic_descent():
    d = PascalDiagram("z")
    fast = OrderedDiagram(d, "natural")
    slow = OrderedDiagram(d, CustomOrder(lambda dd, lvl, v: make_order("natural").edges_into(dd, lvl, v)))
    v = key((-2, 2), (0, 1), (3, 2))
    for side_fn in (minimal_path_to, maximal_path_to):
        assert side_fn(fast, 5, v) == side_fn(slow, 5, v)


def test_minimal_refill_fills_smallest_position_first():
    od = OrderedDiagram(PascalDiagram("n"), "natural")
    v = key((1, 1), (3, 1))
    lo = minimal_path_to(od, 2, v)
    hi = maximal_path_to(od, 2, v)
    # minimal: the level-1 vertex still holds the larger position
    assert lo == ((key(), key((3, 1)), 1), (key((3, 1)), v, 1))
    assert hi == ((key(), key((1, 1)), 1), (key((1, 1)), v, 1))


# ---------------------------------------------------------------------------
# single adic steps


def test_step_replaces_first_nonmaximal_edge():
    od = OrderedDiagram(BinftyDiagram(), "left-to-right")
    x = PathRep(1, ((2, 3, 1),))
    y = vershik_step(od, x)
    assert y == PathRep(1, ((3, 3, 1),))
    assert vershik_inverse(od, y) == x


def test_step_rebuilds_minimally_below_the_changed_edge():
    od = OrderedDiagram(BinftyDiagram(), "left-to-right")
    x = PathRep(1, ((3, 3, 1), (3, 4, 1)))  # bottom edge maximal, top edge not
    y = vershik_step(od, x)
    assert y == PathRep(1, ((1, 4, 1), (4, 4, 1)))


def test_step_errors_without_tail_information():
    od = OrderedDiagram(BinftyDiagram(), "left-to-right")
    x = PathRep(1, ((3, 3, 1),))
    with pytest.raises(DeepenPrefixError) as info:
        vershik_step(od, x)
    assert info.value.missing == [("prefix-level", 3)]
    with pytest.raises(DeepenPrefixError):
        vershik_inverse(od, PathRep(1, ((1, 3, 1),)))


def test_step_resolves_vertical_tails():
    od = OrderedDiagram(BinftyDiagram(), "left-to-right")
    with pytest.raises(MaximalPathError):
        vershik_step(od, PathRep(1, (), VerticalAt(5)))
    with pytest.raises(MinimalPathError):
        vershik_inverse(od, PathRep(1, (), VerticalAt(1)))
    # vertical at 5 is not minimal: its predecessor exists
    x = PathRep(1, (), VerticalAt(5))
    y = vershik_inverse(od, x)
    assert y.edges == ((4, 5, 1),)
    assert isinstance(y.tail, VerticalAt) and y.tail.vertex == 5


def test_step_materializes_through_a_diagonal_tail():
    od = OrderedDiagram(BinftyDiagram(), "left-to-right")
    x = PathRep(1, (), DiagonalFrom(1))
    y = vershik_step(od, x)
    assert y.edges == ((2, 2, 1),)
    assert isinstance(y.tail, DiagonalFrom) and y.tail.vertex == 2


def test_step_on_concentrating_tail_raises_only_when_truly_extremal():
    od = OrderedDiagram(PascalDiagram("n"), "natural")
    top = PathRep(0, (), PascalConcentrating(3))
    with pytest.raises(MaximalPathError):
        vershik_step(od, top)
    with pytest.raises(MinimalPathError):
        vershik_inverse(od, top)
    # growing support: maximal but not minimal, so the inverse digs into the tail
    grown = PathRep(0, ((key(), key((1, 1)), 1),), PascalConcentrating(2))
    with pytest.raises(MaximalPathError):
        vershik_step(od, grown)
    y = vershik_inverse(od, grown)
    assert y.edges == (
        (key(), key((2, 1)), 1),
        (key((2, 1)), key((1, 1), (2, 1)), 1),
    )
    assert y.tail == PascalConcentrating(2)


# ---------------------------------------------------------------------------
# exhaustive agreement with the sorting oracle


def test_staircase_left_to_right_matches_oracle():
    od = OrderedDiagram(staircase(2), "left-to-right")
    assert_matches_oracle(od, 4)


def test_staircase_alternating_matches_oracle():
    od = OrderedDiagram(staircase(2), "alternating")
    assert_matches_oracle(od, 4)


def test_two_coordinate_multinomial_natural_matches_oracle():
    od = OrderedDiagram(PascalDiagram(2), "natural")
    assert_matches_oracle(od, 4)


def test_three_coordinate_multinomial_natural_matches_oracle():
    od = OrderedDiagram(PascalDiagram(3), "natural")
    assert_matches_oracle(od, 3)


def test_odometer_column_matches_oracle():
    od = OrderedDiagram(odometer_column(2), "left-to-right")
    assert_matches_oracle(od, 5)


def test_binfty_cyclic_tower_matches_oracle_sort():
    d = BinftyDiagram()
    od = OrderedDiagram(d, "cyclic")
    stop, top_level, v = 1, 4, 3
    paths = oracles.enumerate_paths_down(d, top_level, v, stop)
    paths.sort(key=lambda p: oracles.adic_sort_key(p, oracle_order(od, stop)))
    cur = from_oracle(stop, paths[0])
    for expected in paths[1:]:
        cur = vershik_step(od, cur)
        assert to_oracle(cur) == expected
    with pytest.raises(DeepenPrefixError):
        vershik_step(od, cur)


def test_odometer_column_walk_is_binary_counting():
    od = OrderedDiagram(odometer_column(2), "left-to-right")
    depth = 5
    cur = PathRep(0, tuple((1, 1, 1) for _ in range(depth)))
    for value in range(2 ** depth):
        expected = tuple((1, 1, ((value >> j) & 1) + 1) for j in range(depth))
        assert cur.edges == expected
        if value < 2 ** depth - 1:
            cur = vershik_step(od, cur)


def test_bijection_report_on_towers():
    od = OrderedDiagram(staircase(2), "left-to-right")
    report = bijection_check(od, 4)
    assert report.ok
    hs = heights(od.diagram, 5)
    assert {t.top_vertex: t.paths for t in report.towers} == hs
    assert report.total_paths == sum(hs.values())


def test_enumerate_prefixes_requires_positive_depth():
    od = OrderedDiagram(staircase(2), "left-to-right")
    with pytest.raises(DiagramError):
        enumerate_prefixes(od, 0)


def test_enumerate_prefixes_needs_tops_on_infinite_levels():
    od = OrderedDiagram(BinftyDiagram(), "left-to-right")
    with pytest.raises(DiagramError):
        enumerate_prefixes(od, 3)
    groups = enumerate_prefixes(od, 3, tops=[2])
    assert len(groups[2]) == heights(od.diagram, 4, [2])[2]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(min_value=1, max_value=2), min_size=1, max_size=5))
def test_step_then_inverse_is_identity(coords):
    od = OrderedDiagram(PascalDiagram(2), "natural")
    u = key()
    edges = []
    for c in coords:
        v = key_add(u, c)
        edges.append((u, v, 1))
        u = v
    x = PathRep(0, tuple(edges))
    try:
        y = vershik_step(od, x)
    except DeepenPrefixError:
        return  # the all-maximal prefix of its tower
    assert vershik_inverse(od, y) == x
    stop = 0
    before = oracles.adic_sort_key(to_oracle(x), oracle_order(od, stop))
    after = oracles.adic_sort_key(to_oracle(y), oracle_order(od, stop))
    assert after > before


# ---------------------------------------------------------------------------
# classification of prefix-plus-tail paths


def test_left_to_right_classification_on_binfty():
    od = OrderedDiagram(BinftyDiagram(), "left-to-right")
    assert classify_extremal(od, PathRep(1, (), VerticalAt(1))) is ExtremalClass.SPECIAL
    assert classify_extremal(od, PathRep(1, (), VerticalAt(3))) is ExtremalClass.MAX_C
    assert classify_extremal(od, PathRep(1, (), DiagonalFrom(2))) is ExtremalClass.NOT_EXTREMAL
    assert classify_extremal(od, PathRep(1, ((3, 3, 1),))) is ExtremalClass.NOT_EXTREMAL


def test_left_to_right_classification_on_the_staircase():
    od = OrderedDiagram(staircase(2), "left-to-right")
    # the slant-then-vertical frontier paths are maximal
    y1 = PathRep(1, ((2, 3, 1),), VerticalAt(3))
    assert classify_extremal(od, y1) is ExtremalClass.MAX_C
    # the rightmost frontier diagonal stays maximal forever
    y_inf = PathRep(1, (), DiagonalFrom(2))
    assert classify_extremal(od, y_inf) is ExtremalClass.MAX_C
    # a diagonal away from the frontier is not
    inner = PathRep(1, ((2, 2, 1),), DiagonalFrom(2))
    assert classify_extremal(od, inner) is ExtremalClass.NOT_EXTREMAL
    # the leftmost vertical is maximal and minimal at once
    assert classify_extremal(od, PathRep(1, (), VerticalAt(2))) is ExtremalClass.SPECIAL


def test_alternating_order_has_a_unique_two_sided_path():
    for d in (BinftyDiagram(), staircase(2)):
        od = OrderedDiagram(d, "alternating")
        leftmost = 1 if isinstance(d, BinftyDiagram) else 2
        z = PathRep(1, (), VerticalAt(leftmost))
        assert classify_extremal(od, z) is ExtremalClass.SPECIAL
        for v in range(leftmost + 1, leftmost + 4):
            start = 1 if isinstance(d, BinftyDiagram) else v - 1
            vert = PathRep(start, (), VerticalAt(v))
            assert classify_extremal(od, vert) is ExtremalClass.NOT_EXTREMAL
        diag = PathRep(1, (), DiagonalFrom(leftmost))
        assert classify_extremal(od, diag) is ExtremalClass.NOT_EXTREMAL


def test_cyclic_classification_on_binfty():
    od = OrderedDiagram(BinftyDiagram(), "cyclic")
    assert classify_extremal(od, PathRep(1, (), VerticalAt(1))) is ExtremalClass.SPECIAL
    for i in (2, 3, 5):
        assert classify_extremal(od, PathRep(1, (), VerticalAt(i))) is ExtremalClass.MAX_C
    assert classify_extremal(od, PathRep(1, (), DiagonalFrom(2))) is ExtremalClass.MIN_C
    # vertical at 1 for a while, then slanting: still minimal, never maximal
    z3 = PathRep(1, ((1, 1, 1), (1, 1, 1)), DiagonalFrom(1))
    assert classify_extremal(od, z3) is ExtremalClass.MIN_C


def test_concentrating_tail_classification():
    od = OrderedDiagram(PascalDiagram("n"), "natural")
    assert classify_extremal(od, PathRep(0, (), PascalConcentrating(4))) is ExtremalClass.SPECIAL
    grown = PathRep(
        0,
        ((key(), key((1, 1)), 1), (key((1, 1)), key((1, 1), (2, 1)), 1)),
        PascalConcentrating(2),
    )
    assert classify_extremal(od, grown) is ExtremalClass.MAX_C
    shrunk = PathRep(
        0,
        ((key(), key((2, 1)), 1), (key((2, 1)), key((1, 1), (2, 1)), 1)),
        PascalConcentrating(1),
    )
    assert classify_extremal(od, shrunk) is ExtremalClass.MIN_C
    # concentrating in the middle of the support is neither
    both = PathRep(
        0,
        (
            (key(), key((1, 1)), 1),
            (key((1, 1)), key((1, 1), (3, 1)), 1),
        ),
        PascalConcentrating(2),
    )
    assert classify_extremal(od, both) is ExtremalClass.NOT_EXTREMAL


def test_odometer_column_extremes():
    od = OrderedDiagram(odometer_column(2), "left-to-right")
    zero = PathRep(0, (), VerticalAt(1, "first"))
    ones = PathRep(0, (), VerticalAt(1, "last"))
    assert classify_extremal(od, zero) is ExtremalClass.MIN_C
    assert classify_extremal(od, ones) is ExtremalClass.MAX_C
    assert succ_pred(od, ones) == frozenset({zero})
    assert succ_pred(od, zero) == frozenset({ones})


# ---------------------------------------------------------------------------
# successor / predecessor candidate sets


def test_succ_pred_policies_by_order():
    ltr = OrderedDiagram(staircase(2), "left-to-right")
    y_inf = PathRep(1, (), DiagonalFrom(2))
    assert succ_pred(ltr, y_inf) == frozenset({PathRep(1, (), VerticalAt(2))})
    special = PathRep(1, (), VerticalAt(2))
    assert succ_pred(ltr, special) == frozenset({special})
    with pytest.raises(DiagramError):
        succ_pred(ltr, PathRep(1, ((2, 3, 1),)))  # not provably extremal

    cyc = OrderedDiagram(BinftyDiagram(), "cyclic")
    assert succ_pred(cyc, PathRep(1, (), VerticalAt(4))) == frozenset()
    assert succ_pred(cyc, PathRep(1, (), DiagonalFrom(3))) == frozenset()
    assert succ_pred(cyc, PathRep(1, (), VerticalAt(1))) == frozenset()

    nat = OrderedDiagram(PascalDiagram("n"), "natural")
    grown = PathRep(
        0,
        ((key(), key((1, 1)), 1), (key((1, 1)), key((1, 1), (2, 1)), 1)),
        PascalConcentrating(2),
    )
    assert succ_pred(nat, grown) == frozenset({PathRep(0, (), PascalConcentrating(2))})
    vert = PathRep(0, (), PascalConcentrating(7))
    assert succ_pred(nat, vert) == frozenset({vert})


def test_left_to_right_minimal_predecessors_are_an_infinite_family():
    ltr = OrderedDiagram(BinftyDiagram(), "left-to-right")
    # the big maximal class converges onto the leftmost vertical...
    assert succ_pred(ltr, PathRep(1, (), VerticalAt(9))) == frozenset(
        {PathRep(1, (), VerticalAt(1))}
    )
    # ...whose one-sided minimal relatives refuse a finite candidate set
    ltr_col = OrderedDiagram(odometer_column(2), "left-to-right")
    assert succ_pred(ltr_col, PathRep(0, (), VerticalAt(1, "first"))) == frozenset(
        {PathRep(0, (), VerticalAt(1, "last"))}
    )


# ---------------------------------------------------------------------------
# descriptors


def test_descriptor_classification_table():
    assert classify_descriptor(PascalPathDescriptor("max", (2,), (None,))) is ExtremalClass.SPECIAL
    assert (
        classify_descriptor(PascalPathDescriptor("max", (1, 3), (2, None)))
        is ExtremalClass.MAX_C
    )
    assert (
        classify_descriptor(PascalPathDescriptor("min", (3, 1), (2, None)))
        is ExtremalClass.MIN_C
    )
    up = PascalPathDescriptor("max", (1,), (1,), position_tail=(3, 2), value_tail=1)
    assert classify_descriptor(up) is ExtremalClass.MAX_U
    down = PascalPathDescriptor("min", (5,), (2,), position_tail=(3, 1), value_tail=2)
    assert classify_descriptor(down, "z") is ExtremalClass.MIN_U


def test_descriptor_validation_rules():
    with pytest.raises(DiagramError):  # positions must move monotonically
        classify_descriptor(PascalPathDescriptor("max", (3, 1), (1, None)))
    with pytest.raises(DiagramError):  # unbounded value only in the last slot
        classify_descriptor(PascalPathDescriptor("max", (1, 2), (None, None)))
    with pytest.raises(DiagramError):  # finite lists need an unbounded ending
        classify_descriptor(PascalPathDescriptor("max", (1, 2), (1, 1)))
    with pytest.raises(DiagramError):  # no infinite descent inside positive positions
        classify_descriptor(
            PascalPathDescriptor("min", (5,), (1,), position_tail=(4, 1), value_tail=1),
            "n",
        )
    with pytest.raises(DiagramError):  # positive domain starts at 1
        classify_descriptor(PascalPathDescriptor("max", (0, 2), (1, None)), "n")
    with pytest.raises(DiagramError):  # a tail cannot follow an unbounded value
        classify_descriptor(
            PascalPathDescriptor("max", (1,), (None,), position_tail=(2, 1), value_tail=1)
        )


def test_descriptor_vertices_fill_positions_in_order():
    desc = PascalPathDescriptor("max", (1, 3), (2, None))
    assert descriptor_vertex(desc, 1) == key((1, 1))
    assert descriptor_vertex(desc, 2) == key((1, 2))
    assert descriptor_vertex(desc, 3) == key((1, 2), (3, 1))
    assert descriptor_vertex(desc, 6) == key((1, 2), (3, 4))
    up = PascalPathDescriptor("max", (1,), (1,), position_tail=(2, 1), value_tail=1)
    assert descriptor_vertex(up, 4) == key((1, 1), (2, 1), (3, 1), (4, 1))


def test_descriptor_prefix_agrees_with_path_classification():
    d = PascalDiagram("n")
    od = OrderedDiagram(d, "natural")
    cases = [
        (PascalPathDescriptor("max", (2,), (None,)), ExtremalClass.SPECIAL),
        (PascalPathDescriptor("max", (1, 3), (2, None)), ExtremalClass.MAX_C),
        (PascalPathDescriptor("min", (3, 1), (2, None)), ExtremalClass.MIN_C),
    ]
    for desc, cls in cases:
        assert classify_descriptor(desc, "n") is cls
        path = descriptor_prefix(desc, d, 6)
        validate_path(d, path)
        assert classify_extremal(od, path) is cls
        for n in range(7):
            assert path.vertex_at(n) == descriptor_vertex(desc, n)
    up = PascalPathDescriptor("max", (1,), (1,), position_tail=(2, 1), value_tail=1)
    path = descriptor_prefix(up, d, 6)
    assert isinstance(path.tail, Unspecified)
    assert classify_extremal(od, path) is ExtremalClass.NOT_EXTREMAL  # no finite certificate
    from bratteli.vershik import _first_nonextremal_index

    assert _first_nonextremal_index(od, path, "max") is None  # every known edge is maximal


def test_descriptor_candidate_sets():
    up = PascalPathDescriptor("max", (1,), (1,), position_tail=(3, 2), value_tail=1)
    assert succ_pred_descriptor(up) == frozenset()
    down = PascalPathDescriptor("min", (5,), (2,), position_tail=(3, 1), value_tail=2)
    assert succ_pred_descriptor(down, "z") == frozenset()
    countable = PascalPathDescriptor("max", (1, 4), (3, None))
    assert succ_pred_descriptor(countable) == frozenset(
        {PascalPathDescriptor("max", (4,), (None,))}
    )
    special = PascalPathDescriptor("min", (2,), (None,))
    assert succ_pred_descriptor(special) == frozenset({special})


def test_succ_pred_accepts_descriptors_only_with_the_natural_order():
    nat = OrderedDiagram(PascalDiagram("z"), "natural")
    desc = PascalPathDescriptor("max", (1, 3), (2, None))
    assert succ_pred(nat, desc) == frozenset({PascalPathDescriptor("max", (3,), (None,))})
    ltr = OrderedDiagram(BinftyDiagram(), "left-to-right")
    with pytest.raises(DiagramError):
        succ_pred(ltr, desc)


# ---------------------------------------------------------------------------
# the max -> min reflection


def mirror_corpus():
    corpus = []
    for i1 in (-3, -1, 0, 2, 5):
        for extra in ((), (1,), (2, 5), (1, 2, 4)):
            positions = (i1,) + tuple(i1 + e for e in extra)
            values = tuple(1 + (j % 3) for j in range(len(positions) - 1)) + (None,)
            corpus.append(PascalPathDescriptor("max", positions, values))
    for i1 in (-2, 0, 3):
        for step in (1, 2):
            corpus.append(
                PascalPathDescriptor(
                    "max", (i1,), (2,), position_tail=(i1 + step, step), value_tail=1
                )
            )
    return corpus


def test_mirror_reflects_positions_and_keeps_values():
    corpus = mirror_corpus()
    assert len(corpus) >= 20
    images = set()
    for desc in corpus:
        out, clipped = mirror_descriptor(desc, "z")
        assert not clipped
        assert out.side == "min"
        assert out.values == desc.values
        assert out.positions[0] == desc.positions[0]
        i1 = desc.positions[0]
        assert out.positions == tuple(2 * i1 - i for i in desc.positions)
        # reflecting back recovers the original positions
        assert tuple(2 * i1 - i for i in out.positions) == desc.positions
        cls_in = classify_descriptor(desc, "z")
        cls_out = classify_descriptor(out, "z")
        assert (cls_in, cls_out) in {
            (ExtremalClass.MAX_C, ExtremalClass.MIN_C),
            (ExtremalClass.MAX_U, ExtremalClass.MIN_U),
            (ExtremalClass.SPECIAL, ExtremalClass.SPECIAL),
        }
        images.add(out)
    assert len(images) == len(corpus)  # the reflection is one-to-one


def test_mirror_fixes_vertical_descriptors():
    for i in (-4, 0, 7):
        desc = PascalPathDescriptor("max", (i,), (None,))
        out, clipped = mirror_descriptor(desc, "z")
        assert out == PascalPathDescriptor("min", (i,), (None,)) and not clipped


def test_mirror_on_the_positive_domain_clamps_a_single_overshoot():
    ok = PascalPathDescriptor("max", (3, 4), (1, None))
    out, clipped = mirror_descriptor(ok, "n")
    assert out.positions == (3, 2) and not clipped
    clamped = PascalPathDescriptor("max", (3, 4, 6), (1, 1, None))
    out, clipped = mirror_descriptor(clamped, "n")
    assert clipped and out.positions == (3, 2, 1)
    assert classify_descriptor(out, "n") is ExtremalClass.MIN_C
    with pytest.raises(DiagramError):  # two positions fall below 1
        mirror_descriptor(PascalPathDescriptor("max", (3, 4, 6, 7), (1, 1, 1, None)), "n")
    with pytest.raises(DiagramError):  # the clamp would collide with position 1
        mirror_descriptor(PascalPathDescriptor("max", (2, 3, 4), (1, 1, None)), "n")
    with pytest.raises(DiagramError):  # ever-growing support cannot reflect into positives
        mirror_descriptor(
            PascalPathDescriptor("max", (1,), (1,), position_tail=(2, 1), value_tail=1), "n"
        )


def test_mirror_requires_the_maximal_side():
    with pytest.raises(DiagramError):
        mirror_descriptor(PascalPathDescriptor("min", (2,), (None,)), "z")


# ---------------------------------------------------------------------------
# orbits


def test_orbit_counts_level_visits_like_path_counts():
    od = OrderedDiagram(staircase(2), "left-to-right")
    top_level, v = 5, 4
    hs = heights(od.diagram, top_level)
    start = PathRep(1, minimal_path_to(od, top_level, v))
    result = orbit(od, start, hs[v] - 1, visit_level=3)
    assert len(result.paths) == hs[v]
    expected = {}
    for w in od.diagram.level_vertices(3):
        through = heights(od.diagram, 3)[w] * oracles.transition_count(
            od.diagram, 3, top_level - 3, v, w
        )
        if through:
            expected[w] = through
    assert result.visits == expected


def test_orbit_reports_the_failing_step():
    od = OrderedDiagram(odometer_column(2), "left-to-right")
    start = PathRep(0, tuple((1, 1, 1) for _ in range(5)))
    full = orbit(od, start, 31)
    assert len({p.edges for p in full.paths}) == 32
    with pytest.raises(DeepenPrefixError) as info:
        orbit(od, start, 32)
    assert info.value.step_index == 31
    assert "step 31" in str(info.value)


def test_orbit_with_zero_steps_returns_the_path():
    od = OrderedDiagram(BinftyDiagram(), "left-to-right")
    x = PathRep(1, ((2, 3, 1),))
    result = orbit(od, x, 0, visit_level=2)
    assert result.paths == [x]
    assert result.visits == {3: 1}


# ---------------------------------------------------------------------------
# materialization and serialization


def test_materialize_advances_diagonal_anchors():
    od = OrderedDiagram(BinftyDiagram(), "left-to-right")
    x = PathRep(1, (), DiagonalFrom(2))
    y = materialize(od, x, 3)
    assert y.edges == ((2, 3, 1), (3, 4, 1), (4, 5, 1))
    assert y.tail == DiagonalFrom(5)
    assert materialize(od, x, 0) == x


def test_materialize_respects_parallel_slot_choice():
    od = OrderedDiagram(odometer_column(2), "left-to-right")
    lo = materialize(od, PathRep(0, (), VerticalAt(1, "first")), 2)
    hi = materialize(od, PathRep(0, (), VerticalAt(1, "last")), 2)
    assert lo.edges == ((1, 1, 1), (1, 1, 1))
    assert hi.edges == ((1, 1, 2), (1, 1, 2))


def test_path_serialization_round_trip():
    paths = [
        PathRep(1, ((2, 3, 1),), VerticalAt(3)),
        PathRep(0, (), PascalConcentrating(-2)),
        PathRep(1, ((1, 2, 1), (2, 2, 1)), DiagonalFrom(2)),
        PathRep(0, ((key(), key((2, 1)), 1), (key((2, 1)), key((2, 2)), 1))),
        PathRep(0, ((1, 1, 2),), VerticalAt(1, "last")),
    ]
    for p in paths:
        blob = path_to_json(p)
        assert path_from_json(blob) == p
    desc = PascalPathDescriptor("max", (1,), (2,), position_tail=(3, 2), value_tail=1)
    assert descriptor_from_json(descriptor_to_json(desc)) == desc
