"""Canonical MILP data model.

A problem is ``min/max c.x + offset`` over variables with bounds and kinds
(binary / general integer / continuous), subject to linear rows whose
feasible activity is an interval derived from the row sense.  Instances are
immutable after construction; every mutating operation returns a new
instance, so they are safe to share across concurrent solves.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModelError",
    "VarKind",
    "ObjectiveSense",
    "Sense",
    "ProblemClass",
    "MilpInstance",
    "SolutionStatus",
    "Solution",
    "Violation",
    "FeasibilityReport",
    "evaluate_objective",
    "check_feasibility",
    "normalize",
    "classify",
    "fix_variables_to_zero",
]

INF = float("inf")

DEFAULT_FEAS_TOL = 1e-6
DEFAULT_INT_TOL = 1e-6


class ModelError(ValueError):
    """Invalid instance data or an operation precondition violation."""


class VarKind(enum.IntEnum):
    Binary = 0
    Integer = 1
    Continuous = 2


class ObjectiveSense(enum.Enum):
    Min = "min"
    Max = "max"


class ProblemClass(enum.Enum):
    LP = "LP"
    BP = "BP"
    MBP = "MBP"
    PureInteger = "PureInteger"
    MILP = "MILP"


@dataclass(frozen=True)
class Sense:
    """Row sense: >=, <=, ==, or a two-sided range with low <= high."""

    kind: str  # one of "G", "L", "E", "R"
    low: float = 0.0
    high: float = 0.0

    def __post_init__(self):
        if self.kind not in ("G", "L", "E", "R"):
            raise ModelError(f"unknown sense kind {self.kind!r}")
        if self.kind == "R":
            if not (np.isfinite(self.low) and np.isfinite(self.high)):
                raise ModelError("range sense requires finite endpoints")
            if self.low > self.high:
                raise ModelError(f"range sense has low {self.low} > high {self.high}")

    @staticmethod
    def ge() -> "Sense":
        return Sense("G")

    @staticmethod
    def le() -> "Sense":
        return Sense("L")

    @staticmethod
    def eq() -> "Sense":
        return Sense("E")

    @staticmethod
    def range(low: float, high: float) -> "Sense":
        return Sense("R", float(low), float(high))

    def interval(self, rhs: float) -> tuple[float, float]:
        """Feasible interval for the row activity given the rhs value."""
        if self.kind == "G":
            return rhs, INF
        if self.kind == "L":
            return -INF, rhs
        if self.kind == "E":
            return rhs, rhs
        return self.low, self.high


def _as_float_vector(x, length, what) -> np.ndarray:
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != length:
        raise ModelError(f"{what} must be a vector of length {length}")
    return arr


@dataclass(frozen=True)
class MilpInstance:
    """One MILP: objective, sparse rows (sorted triplets), bounds, kinds.

    ``b[i]`` is the rhs for G/L/E rows; for an R row it must equal the
    range's low endpoint.  ``objective_offset`` is a constant added to
    reported objectives.  ``sense_flipped`` records that :func:`normalize`
    negated a Max objective, so results can be reported in the caller's
    original orientation.
    """

    name: str
    objective_sense: ObjectiveSense
    c: np.ndarray
    a_rows: np.ndarray
    a_cols: np.ndarray
    a_vals: np.ndarray
    b: np.ndarray
    senses: tuple[Sense, ...]
    lower: np.ndarray
    upper: np.ndarray
    kinds: np.ndarray
    objective_offset: float = 0.0
    sense_flipped: bool = False
    col_names: tuple[str, ...] = field(default=())
    row_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        n = np.asarray(self.c).shape[0] if np.ndim(self.c) == 1 else -1
        if n < 0:
            raise ModelError("c must be a 1-d vector")
        m = len(self.senses)
        _set = object.__setattr__
        _set(self, "c", _as_float_vector(self.c, n, "c"))
        _set(self, "b", _as_float_vector(self.b, m, "b"))
        _set(self, "lower", _as_float_vector(self.lower, n, "lower"))
        _set(self, "upper", _as_float_vector(self.upper, n, "upper"))
        kinds = np.ascontiguousarray(self.kinds, dtype=np.int8)
        if kinds.shape != (n,):
            raise ModelError(f"kinds must have length {n}")
        _set(self, "kinds", kinds)
        rows = np.ascontiguousarray(self.a_rows, dtype=np.int64)
        cols = np.ascontiguousarray(self.a_cols, dtype=np.int64)
        vals = np.ascontiguousarray(self.a_vals, dtype=np.float64)
        if not (rows.shape == cols.shape == vals.shape) or rows.ndim != 1:
            raise ModelError("triplet arrays must be 1-d and equally long")
        if rows.size:
            if rows.min() < 0 or rows.max() >= m:
                raise ModelError("triplet row index out of range")
            if cols.min() < 0 or cols.max() >= n:
                raise ModelError("triplet column index out of range")
            order = np.lexsort((cols, rows))
            rows, cols, vals = rows[order], cols[order], vals[order]
            key = rows * n + cols
            if np.any(np.diff(key) == 0):
                dup = int(np.argmax(np.diff(key) == 0))
                raise ModelError(
                    f"duplicate matrix entry at row {int(rows[dup])}, col {int(cols[dup])}"
                )
        _set(self, "a_rows", rows)
        _set(self, "a_cols", cols)
        _set(self, "a_vals", vals)

        for arr, what in ((self.c, "c"), (vals, "A"), (self.b, "b")):
            if arr.size and not np.all(np.isfinite(arr)):
                raise ModelError(f"non-finite value in {what}")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)):
            raise ModelError("NaN in bounds")
        if not np.isfinite(self.objective_offset):
            raise ModelError("objective offset must be finite")
        if np.any(self.lower > self.upper):
            j = int(np.argmax(self.lower > self.upper))
            raise ModelError(f"lower > upper for variable {j}")
        is_bin = kinds == VarKind.Binary
        if np.any(is_bin):
            if np.any(self.lower[is_bin] < 0.0) or np.any(self.upper[is_bin] > 1.0):
                raise ModelError("binary variable bounds must lie within [0, 1]")
        for i, s in enumerate(self.senses):
            if not isinstance(s, Sense):
                raise ModelError(f"senses[{i}] is not a Sense")
            if s.kind == "R" and self.b[i] != s.low:
                raise ModelError(f"b[{i}] must equal range low endpoint {s.low}")

        col_names = tuple(self.col_names) or tuple(f"x{j}" for j in range(n))
        row_names = tuple(self.row_names) or tuple(f"r{i}" for i in range(m))
        if len(col_names) != n or len(set(col_names)) != n:
            raise ModelError("column names must be unique and match n")
        if len(row_names) != m or len(set(row_names)) != m:
            raise ModelError("row names must be unique and match m")
        _set(self, "col_names", col_names)
        _set(self, "row_names", row_names)
        for arr in (self.c, rows, cols, vals, self.b, self.lower, self.upper, kinds):
            arr.setflags(write=False)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_dense(
        cls,
        name: str,
        c,
        a,
        senses: list[Sense] | tuple[Sense, ...],
        b,
        lower,
        upper,
        kinds,
        objective_sense: ObjectiveSense = ObjectiveSense.Min,
        objective_offset: float = 0.0,
        col_names: tuple[str, ...] = (),
        row_names: tuple[str, ...] = (),
    ) -> "MilpInstance":
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2:
            raise ModelError("dense matrix must be 2-d")
        rr, cc = np.nonzero(a)
        return cls(
            name=name,
            objective_sense=objective_sense,
            c=c,
            a_rows=rr,
            a_cols=cc,
            a_vals=a[rr, cc],
            b=b,
            senses=tuple(senses),
            lower=lower,
            upper=upper,
            kinds=np.asarray(
                [int(k) for k in kinds] if not isinstance(kinds, np.ndarray) else kinds,
                dtype=np.int8,
            ),
            objective_offset=objective_offset,
            col_names=col_names,
            row_names=row_names,
        )

    def replace(self, **changes) -> "MilpInstance":
        import dataclasses

        return dataclasses.replace(self, **changes)

    # -- basic queries --------------------------------------------------------

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def m(self) -> int:
        return len(self.senses)

    @property
    def nnz(self) -> int:
        return self.a_vals.shape[0]

    def binary_indices(self) -> np.ndarray:
        return np.flatnonzero(self.kinds == VarKind.Binary)

    def general_integer_indices(self) -> np.ndarray:
        return np.flatnonzero(self.kinds == VarKind.Integer)

    def integer_indices(self) -> np.ndarray:
        """Indices of all integer-constrained variables (binary + general)."""
        return np.flatnonzero(self.kinds != VarKind.Continuous)

    def continuous_indices(self) -> np.ndarray:
        return np.flatnonzero(self.kinds == VarKind.Continuous)

    def row_intervals(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-row feasible activity interval (rlo, rhi)."""
        m = self.m
        rlo = np.empty(m)
        rhi = np.empty(m)
        for i, s in enumerate(self.senses):
            rlo[i], rhi[i] = s.interval(self.b[i])
        return rlo, rhi

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.m, self.n))
        a[self.a_rows, self.a_cols] = self.a_vals
        return a

    def row_activity(self, x: np.ndarray) -> np.ndarray:
        acts = np.zeros(self.m)
        np.add.at(acts, self.a_rows, self.a_vals * x[self.a_cols])
        return acts

    def to_user_objective(self, value: float) -> float:
        """Map a Min-orientation objective back to the caller's orientation."""
        if self.sense_flipped or self.objective_sense is ObjectiveSense.Max:
            return -value
        return value


class SolutionStatus(enum.Enum):
    Feasible = "Feasible"
    IntegerInfeasible = "IntegerInfeasible"
    ConstraintInfeasible = "ConstraintInfeasible"
    Unknown = "Unknown"


@dataclass(frozen=True)
class Solution:
    """A variable assignment with its Min-orientation objective value."""

    x: np.ndarray
    objective: float
    status: SolutionStatus = SolutionStatus.Unknown

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=np.float64)
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    @classmethod
    def evaluated(cls, instance: MilpInstance, x, status=SolutionStatus.Unknown) -> "Solution":
        x = np.asarray(x, dtype=np.float64)
        return cls(x=x, objective=evaluate_objective(instance, x), status=status)


@dataclass(frozen=True)
class Violation:
    kind: str  # "row", "lower", "upper", "integrality"
    index: int
    amount: float


@dataclass(frozen=True)
class FeasibilityReport:
    status: SolutionStatus
    violations: tuple[Violation, ...]


def evaluate_objective(instance: MilpInstance, x: np.ndarray) -> float:
    """Objective value c.x + offset in Min orientation (negated for Max)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (instance.n,):
        raise ModelError(f"x has length {x.shape}, expected {instance.n}")
    value = float(instance.c @ x) + instance.objective_offset
    if instance.objective_sense is ObjectiveSense.Max:
        return -value
    return value


def check_feasibility(
    instance: MilpInstance, x: np.ndarray, tol: float = DEFAULT_FEAS_TOL
) -> FeasibilityReport:
    """Classify x as Feasible / IntegerInfeasible / ConstraintInfeasible.

    Bound violations count as constraint violations.  Integrality is judged
    at ``tol`` as well unless the two tolerances are overridden separately
    by the caller wrapping this function.
    """
    if tol <= 0:
        raise ModelError("tol must be positive")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (instance.n,):
        raise ModelError(f"x has length {x.shape}, expected {instance.n}")

    violations: list[Violation] = []
    lo_gap = instance.lower - x
    up_gap = x - instance.upper
    for j in np.flatnonzero(lo_gap > tol):
        violations.append(Violation("lower", int(j), float(lo_gap[j])))
    for j in np.flatnonzero(up_gap > tol):
        violations.append(Violation("upper", int(j), float(up_gap[j])))

    rlo, rhi = instance.row_intervals()
    acts = instance.row_activity(x)
    low_v = rlo - acts
    high_v = acts - rhi
    for i in range(instance.m):
        worst = max(low_v[i], high_v[i])
        if worst > tol:
            violations.append(Violation("row", i, float(worst)))

    if violations:
        return FeasibilityReport(SolutionStatus.ConstraintInfeasible, tuple(violations))

    int_idx = instance.integer_indices()
    frac = np.abs(x[int_idx] - np.round(x[int_idx]))
    bad = int_idx[frac > tol]
    if bad.size:
        vio = tuple(
            Violation("integrality", int(j), float(abs(x[j] - round(x[j])))) for j in bad
        )
        return FeasibilityReport(SolutionStatus.IntegerInfeasible, vio)
    return FeasibilityReport(SolutionStatus.Feasible, ())


def normalize(instance: MilpInstance) -> MilpInstance:
    """Return an equivalent Min-orientation instance.

    Max problems get negated costs and offset, with ``sense_flipped`` set so
    reported objectives can be mapped back.  Min instances pass through
    unchanged, which makes the operation idempotent.
    """
    if instance.objective_sense is ObjectiveSense.Min:
        return instance
    return instance.replace(
        objective_sense=ObjectiveSense.Min,
        c=-np.asarray(instance.c),
        objective_offset=-instance.objective_offset,
        sense_flipped=True,
    )


def classify(instance: MilpInstance) -> ProblemClass:
    """Problem taxonomy by variable-kind census."""
    has_b = bool(np.any(instance.kinds == VarKind.Binary))
    has_g = bool(np.any(instance.kinds == VarKind.Integer))
    has_c = bool(np.any(instance.kinds == VarKind.Continuous))
    if not has_b and not has_g:
        return ProblemClass.LP
    if not has_c:
        if has_g:
            return ProblemClass.PureInteger
        return ProblemClass.BP
    if not has_g:
        return ProblemClass.MBP
    return ProblemClass.MILP


def fix_variables_to_zero(instance: MilpInstance, fix_set) -> MilpInstance:
    """Pin the given integer variables at 0 via bounds.

    Dimensions are unchanged (bound tightening, not column deletion), so
    solutions of the reduced instance map back index-for-index.
    """
    fix = np.asarray(sorted(set(int(j) for j in fix_set)), dtype=np.int64)
    if fix.size == 0:
        return instance
    if fix.min() < 0 or fix.max() >= instance.n:
        raise ModelError("fix_set index out of range")
    kinds = instance.kinds[fix]
    if np.any(kinds == VarKind.Continuous):
        j = int(fix[np.argmax(kinds == VarKind.Continuous)])
        raise ModelError(f"cannot fix continuous variable {j}")
    if np.any(instance.lower[fix] > 0.0) or np.any(instance.upper[fix] < 0.0):
        raise ModelError("fix_set contains a variable whose bounds exclude 0")
    lower = np.array(instance.lower)
    upper = np.array(instance.upper)
    lower[fix] = 0.0
    upper[fix] = 0.0
    return instance.replace(lower=lower, upper=upper)
