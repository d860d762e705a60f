"""Free-format MPS reader and writer.

Sections handled: NAME, OBJSENSE (extension, needed to round-trip Max
problems), ROWS, COLUMNS with INTORG/INTEND markers, RHS, RANGES, BOUNDS,
ENDATA.  Section keywords are case-insensitive; row and column names are
case-sensitive.  Lines starting with ``*`` are comments.

Conventions, matching mainstream solvers:

- the first N row is the objective; later N rows are ignored with a warning
- an RHS entry on the objective row is the negated objective constant
- an integer column with no BOUNDS entry gets bounds [0, +inf); pass
  ``legacy_integer_bounds=True`` for the historical [0, 1] default
- an integer-kind variable whose final bounds are exactly [0, 1] is Binary
- ``UP`` with a negative value on a column whose lower bound is still the
  default 0 drops the lower bound to -inf (classic MPS behaviour), with a
  warning
"""
from __future__ import annotations

import gzip
import io
import logging
import sys
from dataclasses import dataclass

import numpy as np

from .model import INF, MilpInstance, ObjectiveSense, Sense, VarKind

__all__ = ["MpsParseError", "parse_mps", "write_mps", "read_instance"]

log = logging.getLogger("oseakit.mps")

_SECTIONS = {"NAME", "OBJSENSE", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA"}
_BOUND_KEYS = {"LO", "UP", "FX", "FR", "MI", "PL", "BV", "LI", "UI"}


class MpsParseError(ValueError):
    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


def _num(token: str, line_no: int) -> float:
    try:
        v = float(token)
    except ValueError:
        raise MpsParseError(f"expected a number, got {token!r}", line_no) from None
    if not np.isfinite(v):
        raise MpsParseError(f"non-finite value {token!r}", line_no)
    return v


@dataclass
class _Col:
    index: int
    integer: bool
    lower: float = 0.0
    upper: float = INF
    has_bound_entry: bool = False
    explicit_binary: bool = False


def parse_mps(text: str, name_hint: str = "", legacy_integer_bounds: bool = False) -> MilpInstance:
    """Parse free-format MPS text into a validated instance."""
    problem_name = name_hint
    objective_sense = ObjectiveSense.Min

    row_kind: dict[str, str] = {}
    row_index: dict[str, int] = {}
    row_order: list[str] = []
    obj_row: str | None = None

    cols: dict[str, _Col] = {}
    col_order: list[str] = []
    entries: list[tuple[int, int, float]] = []
    obj_coeff: dict[int, float] = {}

    rhs: dict[int, float] = {}
    ranges: dict[int, float] = {}
    obj_rhs = 0.0

    section = None
    seen: set[str] = set()
    in_int = False
    int_open_line = 0
    objsense_pending = False
    saw_endata = False

    lines = text.splitlines()
    for line_no, raw in enumerate(lines, start=1):
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        is_header = not raw[0].isspace()
        tokens = raw.split()

        if is_header:
            key = tokens[0].upper()
            if key not in _SECTIONS:
                raise MpsParseError(f"unknown section {tokens[0]!r}", line_no)
            if key in seen:
                raise MpsParseError(f"duplicate section {key}", line_no)
            seen.add(key)
            if key == "COLUMNS" and "ROWS" not in seen:
                raise MpsParseError("COLUMNS section before ROWS", line_no)
            if key in ("RHS", "RANGES", "BOUNDS") and "COLUMNS" not in seen:
                raise MpsParseError(f"{key} section before COLUMNS", line_no)
            section = key
            objsense_pending = key == "OBJSENSE"
            if key == "NAME":
                if len(tokens) > 1:
                    problem_name = tokens[1]
            elif key == "OBJSENSE" and len(tokens) > 1:
                objective_sense = _parse_objsense(tokens[1], line_no)
                objsense_pending = False
            elif key == "ENDATA":
                if in_int:
                    raise MpsParseError("ENDATA inside INTORG/INTEND marker pair", line_no)
                saw_endata = True
                break
            continue

        if section is None:
            raise MpsParseError("data line before any section header", line_no)

        if objsense_pending:
            objective_sense = _parse_objsense(tokens[0], line_no)
            objsense_pending = False
            continue

        if section == "ROWS":
            if len(tokens) != 2:
                raise MpsParseError("ROWS line needs a type and a name", line_no)
            kind, rname = tokens[0].upper(), tokens[1]
            if kind not in ("N", "G", "L", "E"):
                raise MpsParseError(f"unknown row type {tokens[0]!r}", line_no)
            if rname in row_kind or rname == obj_row:
                raise MpsParseError(f"duplicate row name {rname!r}", line_no)
            if kind == "N":
                if obj_row is None:
                    obj_row = rname
                    row_kind[rname] = "N"
                else:
                    log.warning("line %d: extra N row %r ignored", line_no, rname)
                    row_kind[rname] = "N-ignored"
                continue
            row_kind[rname] = kind
            row_index[rname] = len(row_order)
            row_order.append(rname)

        elif section == "COLUMNS":
            if len(tokens) >= 3 and tokens[1] == "'MARKER'":
                marker = tokens[2].strip("'\"").upper()
                if marker == "INTORG":
                    if in_int:
                        raise MpsParseError("nested INTORG marker", line_no)
                    in_int, int_open_line = True, line_no
                elif marker == "INTEND":
                    if not in_int:
                        raise MpsParseError("INTEND without INTORG", line_no)
                    in_int = False
                else:
                    raise MpsParseError(f"unknown marker {tokens[2]!r}", line_no)
                continue
            if len(tokens) < 3 or len(tokens) % 2 == 0:
                raise MpsParseError("COLUMNS line needs name plus (row, value) pairs", line_no)
            cname = tokens[0]
            col = cols.get(cname)
            if col is None:
                col = _Col(index=len(col_order), integer=in_int)
                if in_int and legacy_integer_bounds:
                    col.upper = 1.0
                cols[cname] = col
                col_order.append(cname)
            for k in range(1, len(tokens), 2):
                rname, value = tokens[k], _num(tokens[k + 1], line_no)
                if rname == obj_row:
                    obj_coeff[col.index] = obj_coeff.get(col.index, 0.0) + value
                elif rname in row_index:
                    entries.append((row_index[rname], col.index, value))
                elif row_kind.get(rname) == "N-ignored":
                    continue
                else:
                    raise MpsParseError(f"reference to undeclared row {rname!r}", line_no)

        elif section == "RHS":
            if len(tokens) < 3 or len(tokens) % 2 == 0:
                raise MpsParseError("RHS line needs a set name plus (row, value) pairs", line_no)
            for k in range(1, len(tokens), 2):
                rname, value = tokens[k], _num(tokens[k + 1], line_no)
                if rname == obj_row:
                    obj_rhs = value
                elif rname in row_index:
                    rhs[row_index[rname]] = value
                elif row_kind.get(rname) == "N-ignored":
                    continue
                else:
                    raise MpsParseError(f"reference to undeclared row {rname!r}", line_no)

        elif section == "RANGES":
            if len(tokens) < 3 or len(tokens) % 2 == 0:
                raise MpsParseError("RANGES line needs a set name plus (row, value) pairs", line_no)
            for k in range(1, len(tokens), 2):
                rname, value = tokens[k], _num(tokens[k + 1], line_no)
                if rname not in row_index:
                    raise MpsParseError(f"reference to undeclared row {rname!r}", line_no)
                ranges[row_index[rname]] = value

        elif section == "BOUNDS":
            if len(tokens) < 3:
                raise MpsParseError("BOUNDS line needs type, set name, column", line_no)
            btype = tokens[0].upper()
            if btype not in _BOUND_KEYS:
                raise MpsParseError(f"unknown bound type {tokens[0]!r}", line_no)
            cname = tokens[2]
            col = cols.get(cname)
            if col is None:
                raise MpsParseError(f"reference to undeclared column {cname!r}", line_no)
            needs_value = btype in ("LO", "UP", "FX", "LI", "UI")
            if needs_value and len(tokens) < 4:
                raise MpsParseError(f"bound type {btype} needs a value", line_no)
            value = _num(tokens[3], line_no) if needs_value else 0.0
            _apply_bound(col, btype, value, line_no)

        else:
            raise MpsParseError(f"data line in section {section}", line_no)

    if in_int:
        raise MpsParseError("INTORG marker never closed", int_open_line)
    if not saw_endata:
        raise MpsParseError("missing ENDATA", len(lines))
    if obj_row is None:
        raise MpsParseError("no objective (type N) row", len(lines))

    n = len(col_order)
    m = len(row_order)
    c = np.zeros(n)
    for j, v in obj_coeff.items():
        c[j] = v
    lower = np.zeros(n)
    upper = np.full(n, INF)
    kinds = np.full(n, int(VarKind.Continuous), dtype=np.int8)
    for cname in col_order:
        col = cols[cname]
        lower[col.index] = col.lower
        upper[col.index] = col.upper
        if col.integer or col.explicit_binary:
            binary = col.lower == 0.0 and col.upper == 1.0
            kinds[col.index] = int(VarKind.Binary) if binary else int(VarKind.Integer)

    b = np.zeros(m)
    senses: list[Sense] = []
    for i, rname in enumerate(row_order):
        kind = row_kind[rname]
        rv = rhs.get(i, 0.0)
        if i in ranges:
            senses.append(Sense.range(*_range_interval(kind, rv, ranges[i])))
            b[i] = senses[-1].low
        else:
            b[i] = rv
            senses.append(Sense(kind))

    return MilpInstance(
        name=problem_name or "unnamed",
        objective_sense=objective_sense,
        c=c,
        a_rows=np.array([e[0] for e in entries], dtype=np.int64),
        a_cols=np.array([e[1] for e in entries], dtype=np.int64),
        a_vals=np.array([e[2] for e in entries], dtype=np.float64),
        b=b,
        senses=tuple(senses),
        lower=lower,
        upper=upper,
        kinds=kinds,
        objective_offset=-obj_rhs,
        col_names=tuple(col_order),
        row_names=tuple(row_order),
    )


def _parse_objsense(token: str, line_no: int) -> ObjectiveSense:
    t = token.upper()
    if t in ("MIN", "MINIMIZE"):
        return ObjectiveSense.Min
    if t in ("MAX", "MAXIMIZE"):
        return ObjectiveSense.Max
    raise MpsParseError(f"unknown objective sense {token!r}", line_no)


def _apply_bound(col: _Col, btype: str, value: float, line_no: int) -> None:
    if btype == "LO":
        col.lower = value
    elif btype == "UP":
        if value < 0.0 and not col.has_bound_entry and col.lower == 0.0:
            log.warning("line %d: negative UP bound drops default lower bound to -inf", line_no)
            col.lower = -INF
        col.upper = value
    elif btype == "FX":
        col.lower = col.upper = value
    elif btype == "FR":
        col.lower, col.upper = -INF, INF
    elif btype == "MI":
        col.lower = -INF
    elif btype == "PL":
        col.upper = INF
    elif btype == "BV":
        col.lower, col.upper = 0.0, 1.0
        col.explicit_binary = True
    elif btype == "LI":
        col.lower = value
        col.integer = True
    elif btype == "UI":
        col.upper = value
        col.integer = True
    col.has_bound_entry = True


def _range_interval(kind: str, rv: float, rng: float) -> tuple[float, float]:
    # Standard RANGES semantics: the sign of the range value matters only
    # for E rows.
    if kind == "G":
        return rv, rv + abs(rng)
    if kind == "L":
        return rv - abs(rng), rv
    if rng >= 0:
        return rv, rv + rng
    return rv + rng, rv


def _fmt(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def write_mps(instance: MilpInstance) -> str:
    """Emit free-format MPS that parses back to a structurally equal instance."""
    out = io.StringIO()
    w = out.write
    w(f"NAME {instance.name}\n")
    if instance.objective_sense is ObjectiveSense.Max:
        w("OBJSENSE\n MAX\n")
    w("ROWS\n")
    w(" N OBJ\n")
    for i, s in enumerate(instance.senses):
        kind = s.kind if s.kind != "R" else "G"
        w(f" {kind} {instance.row_names[i]}\n")

    # column-major entries, integer columns wrapped in marker pairs
    by_col: list[list[tuple[int, float]]] = [[] for _ in range(instance.n)]
    for r, cc, v in zip(instance.a_rows, instance.a_cols, instance.a_vals):
        by_col[int(cc)].append((int(r), float(v)))
    w("COLUMNS\n")
    in_int = False
    marker_id = 0
    for j in range(instance.n):
        is_int = instance.kinds[j] != VarKind.Continuous
        if is_int and not in_int:
            w(f" MARKER{marker_id} 'MARKER' 'INTORG'\n")
            marker_id += 1
            in_int = True
        elif not is_int and in_int:
            w(f" MARKER{marker_id} 'MARKER' 'INTEND'\n")
            marker_id += 1
            in_int = False
        cname = instance.col_names[j]
        if instance.c[j] != 0.0:
            w(f" {cname} OBJ {_fmt(instance.c[j])}\n")
        elif not by_col[j]:
            # empty column: keep it declared so dimensions survive the trip
            w(f" {cname} OBJ 0\n")
        for r, v in by_col[j]:
            w(f" {cname} {instance.row_names[r]} {_fmt(v)}\n")
    if in_int:
        w(f" MARKER{marker_id} 'MARKER' 'INTEND'\n")

    w("RHS\n")
    if instance.objective_offset != 0.0:
        w(f" RHS OBJ {_fmt(-instance.objective_offset)}\n")
    for i, s in enumerate(instance.senses):
        rv = s.low if s.kind == "R" else instance.b[i]
        if rv != 0.0:
            w(f" RHS {instance.row_names[i]} {_fmt(rv)}\n")

    has_ranges = any(s.kind == "R" for s in instance.senses)
    if has_ranges:
        w("RANGES\n")
        for i, s in enumerate(instance.senses):
            if s.kind == "R":
                w(f" RNG {instance.row_names[i]} {_fmt(s.high - s.low)}\n")

    bound_lines: list[str] = []
    for j in range(instance.n):
        cname = instance.col_names[j]
        lo, up = instance.lower[j], instance.upper[j]
        if instance.kinds[j] == VarKind.Binary:
            if lo == 0.0 and up == 1.0:
                bound_lines.append(f" BV BND {cname}")
            else:
                bound_lines.append(f" LO BND {cname} {_fmt(lo)}")
                bound_lines.append(f" UP BND {cname} {_fmt(up)}")
            continue
        if lo == 0.0 and up == INF:
            continue
        if lo == up:
            bound_lines.append(f" FX BND {cname} {_fmt(lo)}")
            continue
        if lo == -INF and up == INF:
            bound_lines.append(f" FR BND {cname}")
            continue
        if lo == -INF:
            bound_lines.append(f" MI BND {cname}")
        elif lo != 0.0:
            bound_lines.append(f" LO BND {cname} {_fmt(lo)}")
        if up != INF:
            bound_lines.append(f" UP BND {cname} {_fmt(up)}")
    if bound_lines:
        w("BOUNDS\n")
        for line in bound_lines:
            w(line + "\n")
    w("ENDATA\n")
    return out.getvalue()


def read_instance(path: str, legacy_integer_bounds: bool = False) -> MilpInstance:
    """Read an instance from a file path, ``-`` (stdin), or a .gz file."""
    if path == "-":
        text = sys.stdin.read()
        return parse_mps(text, legacy_integer_bounds=legacy_integer_bounds)
    if path.endswith(".gz"):
        with gzip.open(path, "rt", encoding="utf-8") as fh:
            text = fh.read()
    else:
        with open(path, "rt", encoding="utf-8") as fh:
            text = fh.read()
    return parse_mps(text, legacy_integer_bounds=legacy_integer_bounds)
