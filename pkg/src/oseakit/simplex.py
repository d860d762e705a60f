"""LP solver: two-phase primal simplex with explicit variable bounds.

Rows are turned into equalities ``A x - s = 0`` with the rhs folded into
the slack bounds, so scaling iterations that change only the objective can
be warm-started from the previous optimal basis (phase 2 only).  The basis
inverse is dense with periodic refactorization, which is the documented
scalability boundary: intended problem sizes are n, m up to a few thousand.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .backend import get_kernels
from .model import (
    INF,
    MilpInstance,
    ModelError,
    ObjectiveSense,
    VarKind,
    evaluate_objective,
)

__all__ = ["LpStatus", "LpOptions", "WarmBasis", "LpResult", "SolverError", "relax", "solve_lp"]

BASIC, AT_LB, AT_UB, FREE = _kernels.BASIC, _kernels.AT_LB, _kernels.AT_UB, _kernels.FREE


class SolverError(RuntimeError):
    """Numerical breakdown that should never occur on valid input."""


class LpStatus(enum.Enum):
    Optimal = "Optimal"
    Infeasible = "Infeasible"
    Unbounded = "Unbounded"
    IterationLimit = "IterationLimit"


@dataclass(frozen=True)
class LpOptions:
    max_iterations: int | None = None  # default 50 * (n + m)
    feas_tol: float = 1e-7
    opt_tol: float = 1e-7
    pivot_tol: float = 1e-9
    refactor_every: int = 100
    backend: str | None = None

    def __post_init__(self):
        if self.feas_tol <= 0 or self.opt_tol <= 0 or self.pivot_tol <= 0:
            raise ModelError("tolerances must be positive")
        if self.max_iterations is not None and self.max_iterations <= 0:
            raise ModelError("max_iterations must be positive")


@dataclass(frozen=True)
class WarmBasis:
    """Restartable basis snapshot over structural + slack columns."""

    basis: np.ndarray  # (m,) int64
    status: np.ndarray  # (n + m,) int64

    def __post_init__(self):
        b = np.ascontiguousarray(self.basis, dtype=np.int64)
        s = np.ascontiguousarray(self.status, dtype=np.int64)
        b.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "status", s)


@dataclass(frozen=True)
class LpResult:
    status: LpStatus
    x: np.ndarray | None
    objective: float
    iterations: int
    duals: np.ndarray | None = None
    basis: WarmBasis | None = None
    phase1_infeasibility: float = 0.0


def relax(instance: MilpInstance) -> MilpInstance:
    """Drop integrality: kinds become continuous, bounds are kept.

    Binary bounds already lie within [0, 1], so the relaxed box is the
    usual unit box for binaries (or tighter, if they were fixed).
    """
    if instance.integer_indices().size == 0:
        return instance
    kinds = np.full(instance.n, int(VarKind.Continuous), dtype=np.int8)
    return instance.replace(kinds=kinds)


def _effective_min_costs(instance: MilpInstance) -> tuple[np.ndarray, float]:
    if instance.objective_sense is ObjectiveSense.Max:
        return -np.asarray(instance.c), -instance.objective_offset
    return np.asarray(instance.c), instance.objective_offset


def _nonbasic_start(lower: np.ndarray, upper: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Status and value for each variable parked at a bound (FREE at 0)."""
    n = lower.shape[0]
    status = np.empty(n, dtype=np.int64)
    vals = np.zeros(n)
    for j in range(n):
        lo, up = lower[j], upper[j]
        if lo == -INF and up == INF:
            status[j] = FREE
        elif lo == -INF:
            status[j] = AT_UB
            vals[j] = up
        elif up == INF:
            status[j] = AT_LB
            vals[j] = lo
        elif abs(lo) <= abs(up):
            status[j] = AT_LB
            vals[j] = lo
        else:
            status[j] = AT_UB
            vals[j] = up
    return status, vals


def _solve_box_only(instance, c_eff, opts) -> LpResult:
    # m == 0: minimize each coordinate independently over its bounds
    n = instance.n
    x = np.zeros(n)
    for j in range(n):
        lo, up = instance.lower[j], instance.upper[j]
        if c_eff[j] > 0:
            if lo == -INF:
                return LpResult(LpStatus.Unbounded, None, -INF, 0)
            x[j] = lo
        elif c_eff[j] < 0:
            if up == INF:
                return LpResult(LpStatus.Unbounded, None, -INF, 0)
            x[j] = up
        else:
            x[j] = min(max(0.0, lo), up)
    obj = evaluate_objective(instance, x)
    return LpResult(LpStatus.Optimal, x, obj, 0, duals=np.zeros(0))


def solve_lp(
    instance: MilpInstance,
    opts: LpOptions | None = None,
    warm: WarmBasis | None = None,
) -> LpResult:
    """Solve a continuous instance to optimality.

    ``warm`` restarts from a previous basis; it is validated and silently
    falls back to a cold start unless the basis is still primal feasible
    (which objective-only changes preserve).  Identical input and options
    give identical output on one platform and backend.
    """
    if opts is None:
        opts = LpOptions()
    if instance.integer_indices().size != 0:
        raise ModelError("solve_lp requires a continuous instance; call relax() first")

    n, m = instance.n, instance.m
    c_eff, _ = _effective_min_costs(instance)

    if m == 0:
        return _solve_box_only(instance, c_eff, opts)
    if n == 0:
        rlo, rhi = instance.row_intervals()
        if np.all((rlo <= 0.0) & (0.0 <= rhi)):
            obj = evaluate_objective(instance, np.zeros(0))
            return LpResult(LpStatus.Optimal, np.zeros(0), obj, 0, duals=np.zeros(m))
        resid = float(np.max(np.maximum(rlo, -rhi)))
        return LpResult(LpStatus.Infeasible, None, INF, 0, phase1_infeasibility=resid)

    kern = get_kernels(opts.backend)
    max_iter = opts.max_iterations if opts.max_iterations is not None else 50 * (n + m)

    at = np.ascontiguousarray(instance.to_dense().T)
    rlo, rhi = instance.row_intervals()
    nn = n + 2 * m
    lb = np.concatenate([instance.lower, rlo, np.zeros(m)])
    ub = np.concatenate([instance.upper, rhi, np.zeros(m)])
    sigma = np.ones(m)

    status = np.empty(nn, dtype=np.int64)
    xvals = np.zeros(nn)
    basis = np.empty(m, dtype=np.int64)
    xb = np.empty(m)
    binv = np.zeros((m, m))

    iterations = 0
    phase1_residual = 0.0

    warm_ok = False
    if warm is not None:
        warm_ok = _try_warm_init(instance, warm, at, lb, ub, status, xvals, basis, xb, binv, opts.feas_tol)

    if not warm_ok:
        # a rejected warm attempt may have written into these; reset fully
        xvals[:] = 0.0
        binv[:, :] = 0.0
        s_struct, v_struct = _nonbasic_start(instance.lower, instance.upper)
        status[:n] = s_struct
        xvals[:n] = v_struct
        act = np.dot(xvals[:n], at)
        need_phase1 = False
        for i in range(m):
            if rlo[i] <= act[i] <= rhi[i]:
                basis[i] = n + i
                status[n + i] = BASIC
                xb[i] = act[i]
                binv[i, i] = -1.0
                status[n + m + i] = AT_LB
            else:
                clamped = rlo[i] if act[i] < rlo[i] else rhi[i]
                status[n + i] = AT_LB if act[i] < rlo[i] else AT_UB
                xvals[n + i] = clamped
                resid = act[i] - clamped
                sigma[i] = -1.0 if resid > 0 else 1.0
                ub[n + m + i] = INF
                basis[i] = n + m + i
                status[n + m + i] = BASIC
                xb[i] = abs(resid)
                binv[i, i] = sigma[i]
                need_phase1 = True

        if need_phase1:
            cost1 = np.zeros(nn)
            cost1[n + m :] = 1.0
            code, used = kern.run_phase(
                at, cost1, lb, ub, sigma, basis, status, xvals, binv, xb,
                True, max_iter, opts.opt_tol, opts.pivot_tol, opts.refactor_every, 3 * (n + m),
            )
            iterations += int(used)
            if code == _kernels.EXIT_UNBOUNDED:
                raise SolverError("phase-1 objective reported unbounded")
            infeas = float(np.dot(cost1[basis], xb))
            if code == _kernels.EXIT_ITER_LIMIT:
                return LpResult(LpStatus.IterationLimit, None, INF, iterations,
                                phase1_infeasibility=max(infeas, 0.0))
            if infeas > opts.feas_tol:
                return LpResult(LpStatus.Infeasible, None, INF, iterations,
                                phase1_infeasibility=infeas)
            phase1_residual = max(infeas, 0.0)
            ub[n + m :] = 0.0

    cost2 = np.concatenate([c_eff, np.zeros(2 * m)])
    code, used = kern.run_phase(
        at, cost2, lb, ub, sigma, basis, status, xvals, binv, xb,
        False, max_iter - iterations, opts.opt_tol, opts.pivot_tol, opts.refactor_every, 3 * (n + m),
    )
    iterations += int(used)

    x = _extract_x(instance, n, basis, status, xvals, xb)
    if code == _kernels.EXIT_UNBOUNDED:
        return LpResult(LpStatus.Unbounded, None, -INF, iterations,
                        phase1_infeasibility=phase1_residual)
    obj = evaluate_objective(instance, x)
    duals = np.asarray(np.dot(cost2[basis], binv))
    if code == _kernels.EXIT_ITER_LIMIT:
        return LpResult(LpStatus.IterationLimit, x, obj, iterations, duals=duals,
                        phase1_infeasibility=phase1_residual)

    wb = None
    if np.all(basis < n + m):
        wb = WarmBasis(basis=basis.copy(), status=status[: n + m].copy())
    return LpResult(LpStatus.Optimal, x, obj, iterations, duals=duals, basis=wb,
                    phase1_infeasibility=phase1_residual)


def _extract_x(instance, n, basis, status, xvals, xb) -> np.ndarray:
    x = np.array(xvals[:n])
    for i in range(basis.shape[0]):
        bi = basis[i]
        if bi < n:
            x[bi] = xb[i]
    # project out sub-tolerance arithmetic drift
    return np.minimum(np.maximum(x, instance.lower), instance.upper)


def _try_warm_init(instance, warm, at, lb, ub, status, xvals, basis, xb, binv, feas_tol) -> bool:
    n, m = instance.n, instance.m
    if warm.basis.shape != (m,) or warm.status.shape != (n + m,):
        return False
    if np.any(warm.basis < 0) or np.any(warm.basis >= n + m):
        return False
    if np.unique(warm.basis).shape[0] != m:
        return False

    status[: n + m] = warm.status
    status[n + m :] = AT_LB
    xvals[:] = 0.0
    for j in range(n + m):
        st = warm.status[j]
        if st == BASIC:
            continue
        if st == AT_LB:
            if lb[j] == -INF:
                return False
            xvals[j] = lb[j]
        elif st == AT_UB:
            if ub[j] == INF:
                return False
            xvals[j] = ub[j]
        elif st == FREE:
            xvals[j] = 0.0
        else:
            return False

    bmat = np.zeros((m, m))
    for i in range(m):
        bi = int(warm.basis[i])
        if warm.status[bi] != BASIC:
            return False
        if bi < n:
            bmat[:, i] = at[bi]
        else:
            bmat[bi - n, i] = -1.0
    try:
        binv[:, :] = np.linalg.inv(bmat)
    except np.linalg.LinAlgError:
        return False
    w = np.dot(xvals[:n], at) - xvals[n : n + m]
    xb[:] = -np.dot(binv, w)
    basis[:] = warm.basis
    lbb = lb[basis]
    ubb = ub[basis]
    if np.any(xb < lbb - feas_tol) or np.any(xb > ubb + feas_tol):
        return False
    return True
