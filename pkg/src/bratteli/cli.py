"""Command-line interface for exact Bratteli-diagram computations.

Every numeric result is computed in exact rational arithmetic and printed
as a ``p/q`` string; pass ``--precision BITS`` to append decimal
approximations (the output then also carries a ``precision_bits`` field).
JSON output is deterministic: keys are sorted and the encoder is
byte-stable, so identical invocations produce identical bytes.

Exit codes: 0 on success, 1 on domain errors (bad arguments, malformed
specs, values outside a family's domain), 2 when an answer would require
data beyond the supplied truncation depth or window.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import sys
from fractions import Fraction

import click

from .core import (
    BinftyDiagram,
    DiagramError,
    OdometerChainDiagram,
    PascalDiagram,
    TruncationIncompleteError,
    build_diagram,
    build_subdiagram,
    step_polynomial_coefficients,
    support_key,
    vertex_window,
)
from .extension import EXTENSION_CASES, run_extension_case
from .limits import (
    binfty_limit_vector,
    constant_top,
    index_ray,
    limit_along,
    normalized_product_row,
    pascal_limit_vector,
    pascal_ray,
)
from .linalg import continuity_profile, heights, heights_closed_form, stochastic_rows
from .measures import (
    BinftyMeasure,
    BinomialEdgeMeasure,
    OdometerColumnMeasure,
    PascalMeasure,
    StaircaseMeasure,
    completely_monotone_witness,
    difference_table,
    invariance_report,
    sample_paths,
)
from .vershik import (
    OrderedDiagram,
    classify_descriptor,
    classify_extremal,
    descriptor_from_json,
    descriptor_to_json,
    mirror_descriptor,
    orbit,
    path_from_json,
    path_to_json,
    succ_pred,
    succ_pred_descriptor,
    vershik_inverse,
    vershik_step,
)

# Usage mistakes (unknown flags, missing required options) are domain
# errors under this tool's exit-code contract; code 2 is reserved for
# truncation-incomplete answers.
click.UsageError.exit_code = 1

_FAMILIES = (
    "pascal-n",
    "pascal-z",
    "pascal-k",
    "binfty",
    "bounded-finite",
    "bounded-generalized",
    "odometer-io",
)

_MEASURE_NAMES = (
    "pascal-mu",
    "binfty-mu",
    "staircase-nu",
    "edge-binomial",
    "odometer-column",
)


# ---------------------------------------------------------------------------
# parsing helpers (all failures raise DiagramError so they map to exit 1)
# ---------------------------------------------------------------------------

def _fraction(text, what="value"):
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise DiagramError("bad %s %r: %s" % (what, text, exc))


def _fraction_list(text, what="list"):
    items = [t.strip() for t in str(text).split(",") if t.strip()]
    if not items:
        raise DiagramError("empty %s" % what)
    return [_fraction(t, what) for t in items]


def _int_list(text, what="list"):
    try:
        return [int(t.strip()) for t in str(text).split(",") if t.strip()]
    except ValueError as exc:
        raise DiagramError("bad %s %r: %s" % (what, text, exc))


def _entry_rule(text):
    """Odometer entry rule: 'pow2', a single integer, or a comma list."""
    text = str(text).strip()
    if text == "pow2":
        return "pow2"
    values = _int_list(text, "entry rule")
    return values[0] if len(values) == 1 else values


def _vertex(text):
    """A vertex argument: an integer, or a JSON [[coord, mult], ...] key."""
    text = str(text).strip()
    if text.startswith("["):
        try:
            pairs = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DiagramError("bad vertex %r: %s" % (text, exc))
        return support_key(pairs)
    try:
        return int(text)
    except ValueError:
        raise DiagramError(
            "bad vertex %r: pass an integer or a JSON [[coord, mult], ...] key"
            % text
        )


def _json_arg(text, what):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DiagramError("bad %s: %s" % (what, exc))


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _fr(x):
    return str(Fraction(x))


def _vkey(v):
    if isinstance(v, tuple):
        return json.dumps([[c, m] for c, m in v], separators=(",", ":"))
    return str(v)


def _digits(bits):
    # bits * log10(2), rounded up, floor 1
    return max(1, bits * 30103 // 100000 + 1)


def _decimal(value, digits):
    """Exact decimal rendering of a rational, half-up at the last digit."""
    x = Fraction(value)
    sign = "-" if x < 0 else ""
    scaled = abs(x) * 10 ** digits
    q = (scaled.numerator * 2 + scaled.denominator) // (2 * scaled.denominator)
    whole, frac = divmod(q, 10 ** digits)
    return "%s%d.%0*d" % (sign, whole, digits, frac)


def _approx_map(mapping, bits):
    digits = _digits(bits)
    return {k: _decimal(v, digits) for k, v in mapping.items()}


def _emit(payload, out, fmt, precision=None, rows=None, header=None,
          approx_fields=()):
    """Serialize ``payload`` deterministically to stdout or ``--out``.

    ``approx_fields`` names keys of ``payload`` holding {key: Fraction-string}
    maps; with ``--precision`` each gains an ``approx_<name>`` companion.
    """
    if precision is not None:
        if precision < 1:
            raise DiagramError("--precision must be a positive bit count")
        payload = dict(payload)
        payload["precision_bits"] = precision
        digits = _digits(precision)
        for name in approx_fields:
            payload["approx_" + name] = {
                k: _decimal(Fraction(v), digits)
                for k, v in payload[name].items()
            }
    if fmt == "csv":
        if rows is None:
            raise DiagramError("this command has no CSV form; use --format json")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


# ---------------------------------------------------------------------------
# shared option groups and error mapping
# ---------------------------------------------------------------------------

def _options(*opts):
    def deco(fn):
        for opt in reversed(opts):
            fn = opt(fn)
        return fn
    return deco


_DIAGRAM_OPTS = (
    click.option("--family", type=click.Choice(_FAMILIES), default=None,
                 help="Diagram family (or use --spec FILE)."),
    click.option("--spec", "spec_file", default=None, metavar="FILE",
                 help="JSON file with {family, params, ...} and an optional "
                      "'sub' block."),
    click.option("--k", "k_param", type=int, default=None,
                 help="Width parameter for pascal-k / bounded families."),
    click.option("--a", "a_rule", default=None,
                 help="Odometer entry rule: an integer, a comma list, or 'pow2'."),
    click.option("--sub", "sub_text", default=None,
                 help="Subdiagram shorthand: staircase:K, pascal-edge:K, or "
                      "constant:V."),
)

_ORDER_OPT = click.option(
    "--order", "order_name", default="left-to-right",
    help="Edge order: left-to-right, alternating, natural, cyclic, "
         "or 'slots:...' for none of these.")

_OUTPUT_OPTS = (
    click.option("--out", default=None, metavar="FILE",
                 help="Write output to FILE instead of stdout."),
    click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
                 default="json", help="Output format."),
    click.option("--precision", type=int, default=None, metavar="BITS",
                 help="Append decimal approximations at this bit precision."),
)

_MEASURE_OPTS = (
    click.option("--measure", "measure_name",
                 type=click.Choice(_MEASURE_NAMES), required=True,
                 help="Measure family."),
    click.option("--d", "d_text", default=None,
                 help="Comma list of direction masses for pascal-mu."),
    click.option("--coords", "coords_text", default=None,
                 help="Comma list of coordinates matching --d (default 1..n)."),
    click.option("--a", "a_text", default=None,
                 help="Slope (binfty-mu, staircase-nu) or odometer entry rule."),
    click.option("--k", "k_param", type=int, default=None,
                 help="Subdiagram width for staircase-nu / edge-binomial."),
    click.option("--p", "p_text", default=None,
                 help="Edge weight for edge-binomial."),
    click.option("--column", type=int, default=1,
                 help="Column for odometer-column (default 1)."),
)


def _mapped_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except TruncationIncompleteError as exc:
            click.echo("truncation-incomplete: %s" % exc, err=True)
            sys.exit(2)
        except DiagramError as exc:
            click.echo("error: %s" % exc, err=True)
            sys.exit(1)
    return wrapper


# ---------------------------------------------------------------------------
# object factories
# ---------------------------------------------------------------------------

def _sub_spec(text):
    kind, _, param = str(text).partition(":")
    if kind == "staircase":
        return {"kind": "vertex", "rule": "staircase", "k": int(param or 1)}
    if kind == "pascal-edge":
        return {"kind": "edge", "rule": "pascal", "k": int(param or 1)}
    if kind == "constant":
        return {"kind": "vertex", "rule": "constant", "vertex": int(param or 1)}
    raise DiagramError(
        "unknown subdiagram shorthand %r (expected staircase:K, "
        "pascal-edge:K, or constant:V)" % text)


def _diagram(family, spec_file, k_param, a_rule, sub_text):
    if spec_file:
        try:
            with open(spec_file) as fh:
                text = fh.read()
        except OSError as exc:
            raise DiagramError("cannot read spec file %s: %s" % (spec_file, exc))
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DiagramError("malformed JSON in %s: %s" % (spec_file, exc))
        if not isinstance(obj, dict):
            raise DiagramError("spec file %s must hold a JSON object" % spec_file)
        diagram = build_diagram(obj)
        if obj.get("sub"):
            diagram = build_subdiagram(diagram, obj["sub"])
        return diagram
    if family is None:
        raise DiagramError("pass --family or --spec FILE")
    params = {}
    if family in ("pascal-k", "bounded-finite", "bounded-generalized"):
        if k_param is None:
            raise DiagramError("--family %s needs --k" % family)
        params["k"] = k_param
    if family == "odometer-io":
        if a_rule is None:
            raise DiagramError("--family odometer-io needs --a (entry rule)")
        params["a"] = _entry_rule(a_rule)
    diagram = build_diagram({"family": family, "params": params})
    if sub_text:
        diagram = build_subdiagram(diagram, _sub_spec(sub_text))
    return diagram


def _measure(measure_name, d_text, coords_text, a_text, k_param, p_text,
             column):
    if measure_name == "pascal-mu":
        if d_text is None:
            raise DiagramError("pascal-mu needs --d (comma list of masses)")
        masses = _fraction_list(d_text, "direction")
        if coords_text is not None:
            coords = _int_list(coords_text, "coordinates")
            if len(coords) != len(masses):
                raise DiagramError("--coords and --d must have equal length")
        else:
            coords = list(range(1, len(masses) + 1))
        return PascalMeasure(dict(zip(coords, masses)))
    if measure_name == "binfty-mu":
        if a_text is None:
            raise DiagramError("binfty-mu needs --a (slope)")
        return BinftyMeasure(_fraction(a_text, "slope"))
    if measure_name == "staircase-nu":
        if a_text is None or k_param is None:
            raise DiagramError("staircase-nu needs --a and --k")
        sub = build_subdiagram(
            BinftyDiagram(),
            {"kind": "vertex", "rule": "staircase", "k": k_param})
        return StaircaseMeasure(_fraction(a_text, "slope"), sub)
    if measure_name == "edge-binomial":
        if p_text is None or k_param is None:
            raise DiagramError("edge-binomial needs --p and --k")
        sub = build_subdiagram(
            BinftyDiagram(), {"kind": "edge", "rule": "pascal", "k": k_param})
        return BinomialEdgeMeasure(_fraction(p_text, "edge weight"), sub)
    if measure_name == "odometer-column":
        if a_text is None:
            raise DiagramError("odometer-column needs --a (entry rule)")
        ambient = OdometerChainDiagram(_entry_rule(a_text))
        sub = build_subdiagram(
            ambient, {"kind": "vertex", "rule": "constant", "vertex": column})
        return OdometerColumnMeasure(sub)
    raise DiagramError("unknown measure %r" % measure_name)


def _window_vertices(diagram, level, window, vertex_text):
    if vertex_text is not None:
        return (_vertex(vertex_text),)
    return vertex_window(diagram, level, window).vertices


# ---------------------------------------------------------------------------
# the command group
# ---------------------------------------------------------------------------

@click.group()
@click.version_option(package_name="bratteli", prog_name="bratteli")
def cli():
    """Exact computations on generalized Bratteli diagrams."""


@cli.command(name="heights")
@_options(*_DIAGRAM_OPTS)
@click.option("--level", type=int, required=True, help="Level to evaluate.")
@click.option("--window", type=int, default=None,
              help="Index bound cutting infinite levels to a finite window.")
@click.option("--vertex", "vertex_text", default=None,
              help="Single vertex instead of the whole window.")
@_options(*_OUTPUT_OPTS)
@_mapped_errors
def heights_cmd(family, spec_file, k_param, a_rule, sub_text, level, window,
                vertex_text, out, fmt, precision):
    """Path-count heights at a level, with closed forms when available."""
    diagram = _diagram(family, spec_file, k_param, a_rule, sub_text)
    vertices = _window_vertices(diagram, level, window, vertex_text)
    values = heights(diagram, level, vertices)
    payload = {
        "family": diagram.family,
        "level": level,
        "heights": {_vkey(v): str(values[v]) for v in vertices},
    }
    try:
        closed = heights_closed_form(diagram, level, vertices)
    except DiagramError:
        closed = None
    if closed is not None:
        payload["closed_form_agrees"] = closed == values
    rows = [[_vkey(v), str(values[v])] for v in vertices]
    _emit(payload, out, fmt, precision, rows=rows, header=["vertex", "height"])


@cli.command()
@_options(*_DIAGRAM_OPTS)
@click.option("--level", type=int, required=True,
              help="Target level (sources live one level down).")
@click.option("--window", type=int, default=None,
              help="Index bound for infinite levels.")
@click.option("--vertex", "vertex_text", default=None,
              help="Single target vertex instead of the whole window.")
@_options(*_OUTPUT_OPTS)
@_mapped_errors
def stochastic(family, spec_file, k_param, a_rule, sub_text, level, window,
               vertex_text, out, fmt, precision):
    """Height-normalized incidence rows; each row sums to exactly 1."""
    diagram = _diagram(family, spec_file, k_param, a_rule, sub_text)
    targets = _window_vertices(diagram, level, window, vertex_text)
    rows_map = stochastic_rows(diagram, level, targets)
    payload = {
        "family": diagram.family,
        "level": level,
        "rows": {
            _vkey(v): {_vkey(w): _fr(f) for w, f in row.items()}
            for v, row in rows_map.items()
        },
        "row_sums_one": all(
            sum(row.values(), Fraction(0)) == 1 for row in rows_map.values()
        ),
    }
    csv_rows = [
        [_vkey(v), _vkey(w), _fr(f)]
        for v, row in rows_map.items()
        for w, f in sorted(row.items(), key=lambda item: repr(item[0]))
    ]
    _emit(payload, out, fmt, precision, rows=csv_rows,
          header=["target", "source", "weight"])


@cli.command()
@_options(*_DIAGRAM_OPTS)
@click.option("--level", type=int, required=True, help="Lower level n.")
@click.option("--m", "m_steps", type=int, required=True,
              help="Number of levels in the product (top level is n + m).")
@click.option("--vertex", "vertex_text", required=True,
              help="Top vertex at level n + m.")
@click.option("--method", type=click.Choice(["auto", "closed", "recursion"]),
              default="auto", help="How to compute the normalized row.")
@_options(*_OUTPUT_OPTS)
@_mapped_errors
def product(family, spec_file, k_param, a_rule, sub_text, level, m_steps,
            vertex_text, method, out, fmt, precision):
    """Normalized m-step incidence row from a top vertex down to level n."""
    diagram = _diagram(family, spec_file, k_param, a_rule, sub_text)
    top = _vertex(vertex_text)
    row = normalized_product_row(diagram, level, m_steps, top, method=method)
    payload = {
        "family": diagram.family,
        "level": level,
        "m": m_steps,
        "top": _vkey(top),
        "row": {_vkey(w): _fr(f) for w, f in row.items()},
        "row_sum": _fr(sum(row.values(), Fraction(0))),
    }
    csv_rows = [
        [_vkey(w), _fr(f)]
        for w, f in sorted(row.items(), key=lambda item: repr(item[0]))
    ]
    _emit(payload, out, fmt, precision, rows=csv_rows,
          header=["vertex", "weight"], approx_fields=("row",))


@cli.command()
@_options(*_DIAGRAM_OPTS)
@click.option("--level", type=int, default=None,
              help="Level the limit vector lives at (defaults to the base).")
@click.option("--rule", type=click.Choice(["constant", "ray", "pascal-ray"]),
              default=None, help="How the tops march upward.")
@click.option("--vertex", "vertex_text", default=None,
              help="Fixed top vertex for --rule constant.")
@click.option("--slope", default=None,
              help="Rational slope for --rule ray.")
@click.option("--d", "d_text", default=None,
              help="Direction masses for --rule pascal-ray.")
@click.option("--closed-form", "closed_form",
              type=click.Choice(["binfty", "pascal"]), default=None,
              help="Emit a known limit vector instead of iterating "
                   "(binfty reads its slope from --a).")
@click.option("--window", type=int, default=20,
              help="Entries reported for infinite-support vectors.")
@click.option("--tol", default="1/1000000",
              help="Stopping tolerance for the iteration (exact rational).")
@click.option("--m-max", type=int, default=200,
              help="Iteration budget before reporting non-convergence.")
@click.option("--method", type=click.Choice(["auto", "closed", "recursion"]),
              default="auto", help="Row computation method.")
@_options(*_OUTPUT_OPTS)
@_mapped_errors
def limits(family, spec_file, k_param, a_rule, sub_text, level, rule,
           vertex_text, slope, d_text, closed_form, window, tol,
           m_max, method, out, fmt, precision):
    """Limits of normalized incidence products along a march of tops."""
    if closed_form == "binfty":
        if a_rule is None:
            raise DiagramError("--closed-form binfty needs --a")
        n = 1 if level is None else level
        vector = binfty_limit_vector(_fraction(a_rule, "slope"), n, window)
        payload = {
            "closed_form": "binfty",
            "level": n,
            "vector": {_vkey(v): _fr(x) for v, x in vector.items()},
            "mass_reported": _fr(sum(vector.values(), Fraction(0))),
        }
        csv_rows = [[_vkey(v), _fr(x)] for v, x in sorted(vector.items())]
        _emit(payload, out, fmt, precision, rows=csv_rows,
              header=["vertex", "mass"], approx_fields=("vector",))
        return
    if closed_form == "pascal":
        if d_text is None or level is None:
            raise DiagramError("--closed-form pascal needs --d and --level")
        masses = _fraction_list(d_text, "direction")
        d = dict(enumerate(masses, start=1))
        vector = pascal_limit_vector(d, level)
        payload = {
            "closed_form": "pascal",
            "level": level,
            "vector": {_vkey(v): _fr(x) for v, x in vector.items()},
            "mass_reported": _fr(sum(vector.values(), Fraction(0))),
        }
        csv_rows = [
            [_vkey(v), _fr(x)]
            for v, x in sorted(vector.items(), key=lambda item: repr(item[0]))
        ]
        _emit(payload, out, fmt, precision, rows=csv_rows,
              header=["vertex", "mass"], approx_fields=("vector",))
        return
    diagram = _diagram(family, spec_file, k_param, a_rule, sub_text)
    n = diagram.base_level if level is None else level
    if rule is None:
        raise DiagramError("pass --rule (or --closed-form)")
    if rule == "constant":
        if vertex_text is None:
            raise DiagramError("--rule constant needs --vertex")
        top_rule = constant_top(_vertex(vertex_text))
    elif rule == "ray":
        if slope is None:
            raise DiagramError("--rule ray needs --slope")
        top_rule = index_ray(_fraction(slope, "slope"))
    else:
        if d_text is None:
            raise DiagramError("--rule pascal-ray needs --d")
        masses = _fraction_list(d_text, "direction")
        top_rule = pascal_ray(dict(enumerate(masses, start=1)))
    result = limit_along(diagram, n, top_rule,
                         tol=_fraction(tol, "tolerance"), m_max=m_max,
                         method=method)
    payload = {
        "family": diagram.family,
        "level": result.level,
        "converged": result.converged,
        "steps": result.steps,
        "vector": {_vkey(v): _fr(x) for v, x in result.vector.items()},
        "mass_sum": _fr(result.mass_sums[-1]) if result.mass_sums else "0",
        "last_distances": [_fr(x) for x in result.distances[-3:]],
        "note": result.note,
    }
    if not result.converged:
        raise TruncationIncompleteError(
            "no convergence within %d steps (last distance %s); raise "
            "--m-max or loosen --tol" % (
                result.steps,
                _fr(result.distances[-1]) if result.distances else "n/a"))
    csv_rows = [
        [_vkey(v), _fr(x)]
        for v, x in sorted(result.vector.items(),
                           key=lambda item: repr(item[0]))
    ]
    _emit(payload, out, fmt, precision, rows=csv_rows,
          header=["vertex", "mass"], approx_fields=("vector",))


@cli.command()
@_options(*_MEASURE_OPTS)
@click.option("--level", type=int, required=True, help="Level to report.")
@click.option("--window", type=int, default=None,
              help="Support cut for infinite levels.")
@click.option("--vertex", "vertex_text", default=None,
              help="Single vertex instead of the level's support.")
@_options(*_OUTPUT_OPTS)
@_mapped_errors
def measure(measure_name, d_text, coords_text, a_text, k_param, p_text,
            column, level, window, vertex_text, out, fmt, precision):
    """Cylinder and tower masses of a tail-invariant measure at a level."""
    mu = _measure(measure_name, d_text, coords_text, a_text, k_param, p_text,
                  column)
    if vertex_text is not None:
        vertices = (_vertex(vertex_text),)
    else:
        vertices = mu.level_support(level, window)
    cylinders = {v: mu.p(level, v) for v in vertices}
    towers = {v: mu.q(level, v) for v in vertices}
    payload = {
        "measure": mu.name,
        "level": level,
        "cylinder_masses": {_vkey(v): _fr(x) for v, x in cylinders.items()},
        "tower_masses": {_vkey(v): _fr(x) for v, x in towers.items()},
        "level_mass": _fr(mu.level_mass(level)),
    }
    csv_rows = [
        [_vkey(v), _fr(cylinders[v]), _fr(towers[v])]
        for v in sorted(vertices, key=repr)
    ]
    _emit(payload, out, fmt, precision, rows=csv_rows,
          header=["vertex", "cylinder_mass", "tower_mass"],
          approx_fields=("cylinder_masses", "tower_masses"))


@cli.command()
@_options(*_MEASURE_OPTS)
@click.option("--levels", type=int, required=True,
              help="Number of levels checked, starting at the base.")
@click.option("--window", type=int, default=None,
              help="Support cut for infinite levels.")
@_options(*_OUTPUT_OPTS)
@_mapped_errors
def invariance(measure_name, d_text, coords_text, a_text, k_param, p_text,
               column, levels, window, out, fmt, precision):
    """Exact balance check: cylinder mass equals its successor mass."""
    mu = _measure(measure_name, d_text, coords_text, a_text, k_param, p_text,
                  column)
    base = mu.diagram.base_level
    records = invariance_report(mu, range(base, base + levels), bound=window)
    payload = {
        "measure": mu.name,
        "levels": [base, base + levels - 1],
        "checks": len(records),
        "invariant": all(r.ok for r in records),
        "failures": [
            {
                "level": r.level,
                "vertex": _vkey(r.vertex),
                "cylinder_mass": _fr(r.cylinder_mass),
                "successor_mass": _fr(r.successor_mass),
            }
            for r in records if not r.ok
        ],
    }
    csv_rows = [
        [r.level, _vkey(r.vertex), _fr(r.cylinder_mass),
         _fr(r.successor_mass), r.ok]
        for r in records
    ]
    _emit(payload, out, fmt, precision, rows=csv_rows,
          header=["level", "vertex", "cylinder_mass", "successor_mass", "ok"])


@cli.command()
@_options(*_MEASURE_OPTS)
@click.option("--levels", type=int, required=True,
              help="Number of levels summed, starting at the base.")
@_options(*_OUTPUT_OPTS)
@_mapped_errors
def probability(measure_name, d_text, coords_text, a_text, k_param, p_text,
                column, levels, out, fmt, precision):
    """Total tower mass per level; a probability measure reports exactly 1."""
    mu = _measure(measure_name, d_text, coords_text, a_text, k_param, p_text,
                  column)
    base = mu.diagram.base_level
    masses = {n: mu.level_mass(n) for n in range(base, base + levels)}
    payload = {
        "measure": mu.name,
        "level_masses": {str(n): _fr(x) for n, x in masses.items()},
        "all_one": all(x == 1 for x in masses.values()),
        "method": mu.level_mass_method,
    }
    csv_rows = [[n, _fr(x)] for n, x in sorted(masses.items())]
    _emit(payload, out, fmt, precision, rows=csv_rows,
          header=["level", "mass"], approx_fields=("level_masses",))


@cli.command()
@click.option("--case", "case_name",
              type=click.Choice(sorted(EXTENSION_CASES)), required=True,
              help="Which extension boundary to test.")
@click.option("--a", "a_text", default=None,
              help="Slope (rational) or odometer entry rule.")
@click.option("--p", "p_text", default=None,
              help="Edge weight for nu-p-pascal-edge.")
@click.option("--k", "k_param", type=int, default=None,
              help="Subdiagram width (default 2).")
@click.option("--column", type=int, default=1,
              help="Column for odometer-column (default 1).")
@click.option("--n-max", "n_max", type=int, default=None,
              help="Series depth before declaring a partial-sum verdict.")
@_options(*_OUTPUT_OPTS)
@_mapped_errors
def extension(case_name, a_text, p_text, k_param, column, n_max, out, fmt,
              precision):
    """Decide whether a subdiagram measure extends to a finite measure."""
    k = 2 if k_param is None else k_param
    kwargs = {}
    if case_name == "mu-a-pascal-edge":
        if a_text is None:
            raise DiagramError("mu-a-pascal-edge needs --a")
        kwargs = {"a": _fraction(a_text, "slope"), "k": k}
        if n_max is not None:
            kwargs["n_check"] = n_max
    elif case_name == "nu-a-staircase":
        if a_text is None:
            raise DiagramError("nu-a-staircase needs --a")
        kwargs = {"a": _fraction(a_text, "slope"), "k": k}
        if n_max is not None:
            kwargs["n_max"] = n_max
    elif case_name == "nu-p-pascal-edge":
        if p_text is None:
            raise DiagramError("nu-p-pascal-edge needs --p")
        kwargs = {"prob": _fraction(p_text, "edge weight"), "k": k}
        if n_max is not None:
            kwargs["n_max"] = n_max
    elif case_name == "odometer-column":
        if a_text is None:
            raise DiagramError("odometer-column needs --a")
        kwargs = {"a": _entry_rule(a_text), "column": column}
        if n_max is not None:
            kwargs["n_max"] = n_max
    verdict = run_extension_case(case_name, **kwargs)
    payload = dict(verdict.to_json())
    payload["case"] = case_name
    _emit(payload, out, fmt, precision)


@cli.command()
@click.option("--a", "a_text", required=True, help="Staircase slope.")
@click.option("--k", "k_param", type=int, default=2,
              help="Staircase width (default 2).")
@click.option("--orders", type=int, default=5,
              help="Highest finite-difference order checked.")
@click.option("--terms", type=int, default=12,
              help="Length of the determining sequence.")
@_options(*_OUTPUT_OPTS)
@_mapped_errors
def monotone(a_text, k_param, orders, terms, out, fmt, precision):
    """Complete monotonicity of the staircase determining sequence."""
    a = _fraction(a_text, "slope")
    sub = build_subdiagram(
        BinftyDiagram(), {"kind": "vertex", "rule": "staircase", "k": k_param})
    nu = StaircaseMeasure(a, sub)
    seq = [nu.determining_value(n) for n in range(1, terms + 1)]
    witness = completely_monotone_witness(seq, orders)
    table = difference_table(seq, orders)
    payload = {
        "measure": nu.name,
        "k": k_param,
        "orders": orders,
        "sequence": {str(n): _fr(x) for n, x in enumerate(seq, start=1)},
        "differences": {
            str(order): [_fr(x) for x in row]
            for order, row in enumerate(table)
        },
        "completely_monotone": witness is None,
        "first_failure": None if witness is None else list(witness),
    }
    csv_rows = [[n, _fr(x)] for n, x in enumerate(seq, start=1)]
    _emit(payload, out, fmt, precision, rows=csv_rows,
          header=["n", "value"], approx_fields=("sequence",))


@cli.command()
@click.option("--d", "d_text", required=True,
              help="Comma list of direction masses.")
@click.option("--coords", "coords_text", default=None,
              help="Comma list of coordinates matching --d.")
@click.option("--depth", type=int, required=True, help="Path length.")
@click.option("--count", type=int, required=True, help="Number of paths.")
@click.option("--seed", type=int, required=True, help="Generator seed.")
@_options(*_OUTPUT_OPTS)
@_mapped_errors
def sample(d_text, coords_text, depth, count, seed, out, fmt, precision):
    """Sample random paths from a product measure; report coordinate means."""
    mu = _measure("pascal-mu", d_text, coords_text, None, None, None, 1)
    report = sample_paths(mu, depth, count, seed)
    payload = {
        "measure": mu.name,
        "depth": report.depth,
        "count": report.count,
        "seed": report.seed,
        "means": {str(c): _fr(x) for c, x in report.means.items()},
        "expected": {str(c): _fr(mu.d[c]) for c in report.coordinates},
        "stderrs": {str(c): x for c, x in report.stderrs.items()},
        "endpoint_counts": {
            _vkey(v): n for v, n in report.endpoint_counts.items()
        },
        "precision_bits": 53,
    }
    csv_rows = [
        [c, _fr(report.means[c]), _fr(mu.d[c]), report.stderrs[c]]
        for c in report.coordinates
    ]
    _emit(payload, out, fmt, None, rows=csv_rows,
          header=["coordinate", "mean", "expected", "stderr"])


def _ordered(family, spec_file, k_param, a_rule, sub_text, order_name):
    diagram = _diagram(family, spec_file, k_param, a_rule, sub_text)
    return OrderedDiagram(diagram, order_name)


@cli.command()
@_options(*_DIAGRAM_OPTS)
@_ORDER_OPT
@click.option("--path", "path_text", required=True,
              help="Path as JSON: {start, edges, tail}.")
@click.option("--inverse", is_flag=True, default=False,
              help="Apply the inverse step instead.")
@_options(*_OUTPUT_OPTS)
@_mapped_errors
def vershik(family, spec_file, k_param, a_rule, sub_text, order_name,
            path_text, inverse, out, fmt, precision):
    """One step of the adic transformation on an explicit path."""
    od = _ordered(family, spec_file, k_param, a_rule, sub_text, order_name)
    path = path_from_json(_json_arg(path_text, "path"))
    result = vershik_inverse(od, path) if inverse else vershik_step(od, path)
    payload = {
        "direction": "inverse" if inverse else "forward",
        "input": path_to_json(path),
        "output": path_to_json(result),
    }
    _emit(payload, out, fmt, precision)


@cli.command()
@_options(*_DIAGRAM_OPTS)
@_ORDER_OPT
@click.option("--path", "path_text", default=None,
              help="Path as JSON: {start, edges, tail}.")
@click.option("--descriptor", "descriptor_text", default=None,
              help="Extremal-path descriptor as JSON.")
@click.option("--domain", type=click.Choice(["z", "n"]), default="z",
              help="Coordinate domain for descriptors.")
@_options(*_OUTPUT_OPTS)
@_mapped_errors
def classify(family, spec_file, k_param, a_rule, sub_text, order_name,
             path_text, descriptor_text, domain, out, fmt, precision):
    """Extremality class of a path or descriptor, with step candidates."""
    if (path_text is None) == (descriptor_text is None):
        raise DiagramError("pass exactly one of --path or --descriptor")
    if descriptor_text is not None:
        desc = descriptor_from_json(_json_arg(descriptor_text, "descriptor"))
        cls = classify_descriptor(desc, domain)
        payload = {
            "kind": "descriptor",
            "domain": domain,
            "class": cls.value,
            "candidates": sorted(
                (descriptor_to_json(c)
                 for c in succ_pred_descriptor(desc, domain)),
                key=json.dumps),
        }
        if desc.side == "max":
            try:
                mirrored, clipped = mirror_descriptor(desc, domain)
                payload["mirror"] = descriptor_to_json(mirrored)
                payload["mirror_clipped"] = clipped
            except DiagramError as exc:
                payload["mirror_note"] = str(exc)
        _emit(payload, out, fmt, precision)
        return
    od = _ordered(family, spec_file, k_param, a_rule, sub_text, order_name)
    path = path_from_json(_json_arg(path_text, "path"))
    cls = classify_extremal(od, path)
    payload = {
        "kind": "path",
        "class": cls.value,
        "path": path_to_json(path),
    }
    try:
        candidates = succ_pred(od, path)
    except DiagramError as exc:
        payload["candidates_note"] = str(exc)
    else:
        payload["candidates"] = sorted(
            (path_to_json(c) for c in candidates), key=json.dumps)
    _emit(payload, out, fmt, precision)


@cli.command(name="orbit")
@_options(*_DIAGRAM_OPTS)
@_ORDER_OPT
@click.option("--path", "path_text", required=True,
              help="Starting path as JSON.")
@click.option("--steps", type=int, required=True,
              help="Forward steps to take.")
@click.option("--visit-level", type=int, default=None,
              help="Count vertex visits at this level along the orbit.")
@_options(*_OUTPUT_OPTS)
@_mapped_errors
def orbit_cmd(family, spec_file, k_param, a_rule, sub_text, order_name,
              path_text, steps, visit_level, out, fmt, precision):
    """Iterate the adic transformation and tally vertex visits."""
    od = _ordered(family, spec_file, k_param, a_rule, sub_text, order_name)
    path = path_from_json(_json_arg(path_text, "path"))
    result = orbit(od, path, steps, visit_level=visit_level)
    payload = {
        "steps": steps,
        "first": path_to_json(result.paths[0]),
        "last": path_to_json(result.paths[-1]),
        "paths_seen": len(result.paths),
    }
    if visit_level is not None:
        payload["visit_level"] = visit_level
        payload["visits"] = {
            _vkey(v): n for v, n in result.visits.items()
        }
    _emit(payload, out, fmt, precision)


@cli.command()
@_options(*_DIAGRAM_OPTS)
@click.option("--level", type=int, required=True,
              help="Target level (sources ranked one level down).")
@click.option("--window", type=int, default=None,
              help="Index bound for infinite levels.")
@_options(*_OUTPUT_OPTS)
@_mapped_errors
def continuity(family, spec_file, k_param, a_rule, sub_text, level, window,
               out, fmt, precision):
    """Rank-weighted row norms tracking continuity of the transpose action."""
    diagram = _diagram(family, spec_file, k_param, a_rule, sub_text)
    targets = vertex_window(diagram, level, window).vertices
    norms = continuity_profile(diagram, level, targets)
    payload = {
        "family": diagram.family,
        "level": level,
        "norms": {_vkey(v): _fr(x) for v, x in norms.items()},
        "max_norm": _fr(max(norms.values())) if norms else "0",
    }
    csv_rows = [
        [_vkey(v), _fr(x)]
        for v, x in sorted(norms.items(), key=lambda item: repr(item[0]))
    ]
    _emit(payload, out, fmt, precision, rows=csv_rows,
          header=["vertex", "norm"], approx_fields=("norms",))


@cli.command(name="bk-decay")
@click.option("--k", "k_param", type=int, required=True,
              help="Band half-width of the bounded diagram.")
@click.option("--m-max", "m_max", type=int, required=True,
              help="Largest power examined.")
@_options(*_OUTPUT_OPTS)
@_mapped_errors
def bk_decay(k_param, m_max, out, fmt, precision):
    """Central-coefficient decay ratios K_0^(m) / (2k+1)^m for powers m."""
    if k_param < 1 or m_max < 1:
        raise DiagramError("--k and --m-max must be positive")
    width = 2 * k_param + 1
    ratios = {}
    for m in range(1, m_max + 1):
        central = step_polynomial_coefficients(k_param, m)[0]
        ratios[m] = Fraction(central, width ** m)
    values = [ratios[m] for m in range(1, m_max + 1)]
    payload = {
        "k": k_param,
        "m_max": m_max,
        "ratios": {str(m): _fr(x) for m, x in ratios.items()},
        "nonincreasing": all(
            values[i] <= values[i - 1] for i in range(1, len(values))),
        "final": _fr(values[-1]),
    }
    csv_rows = [[m, _fr(ratios[m])] for m in range(1, m_max + 1)]
    _emit(payload, out, fmt, precision, rows=csv_rows,
          header=["m", "ratio"], approx_fields=("ratios",))


def main(argv=None):
    """Console entry point with the documented exit-code mapping."""
    return cli.main(args=argv, prog_name="bratteli")


if __name__ == "__main__":
    main()
