"""Hot numeric kernel for the bounded-variable primal simplex.

The whole phase loop lives in one function so it can be compiled by numba
as a single unit (cross-function calls would force everything it touches to
be jitted too).  The source is plain vectorized numpy, so the function also
runs uncompiled as the pure-numpy fallback backend.

Column space layout for a problem with n structural variables and m rows:

    [0, n)        structural columns (rows of ``at``)
    [n, n+m)      row slack i with column -e_i and bounds = row interval
    [n+m, n+2m)   artificial i with column sigma[i] * e_i

The constraint system is ``A x - s + diag(sigma) z = 0``; the rhs is folded
into the slack bounds.  All arrays are mutated in place.
"""
import numpy as np

BASIC = 0
AT_LB = 1
AT_UB = 2
FREE = 3

EXIT_OPTIMAL = 0
EXIT_UNBOUNDED = 1
EXIT_ITER_LIMIT = 2

DEGEN_TOL = 1e-10
PHASE1_EXIT_TOL = 1e-11


def run_phase(
    at,
    cost,
    lb,
    ub,
    sigma,
    basis,
    status,
    xvals,
    binv,
    xb,
    phase1,
    max_iter,
    dual_tol,
    piv_tol,
    refactor_every,
    bland_trigger,
):
    """Run one simplex phase to optimality, unboundedness, or the limit.

    at:      (n, m) transpose of the structural columns, C-contiguous
    cost:    (n + 2m,) objective for this phase
    lb, ub:  (n + 2m,) variable bounds (inf allowed)
    sigma:   (m,) artificial column signs
    basis:   (m,) int64 variable index basic in each row position
    status:  (n + 2m,) int64 BASIC / AT_LB / AT_UB / FREE
    xvals:   (n + 2m,) nonbasic values (0 for basic entries)
    binv:    (m, m) basis inverse
    xb:      (m,) basic variable values

    Returns (exit_code, iterations_used).
    """
    n = at.shape[0]
    m = at.shape[1]
    big = np.inf

    iters = 0
    pivots_since_refactor = 0
    degen_run = 0
    bland = False

    while True:
        if iters >= max_iter:
            return EXIT_ITER_LIMIT, iters

        if phase1:
            obj = 0.0
            for i in range(m):
                obj += cost[basis[i]] * xb[i]
            if obj < PHASE1_EXIT_TOL:
                return EXIT_OPTIMAL, iters

        # pricing: duals then reduced costs over all three column segments
        y = np.dot(cost[basis], binv)
        d = np.empty(n + 2 * m)
        d[:n] = cost[:n] - np.dot(at, y)
        d[n : n + m] = cost[n : n + m] + y
        d[n + m :] = cost[n + m :] - sigma * y

        at_lb = status == AT_LB
        at_ub = status == AT_UB
        free = status == FREE
        score = np.where(at_lb, -d, -big)
        score = np.where(at_ub, d, score)
        score = np.where(free, np.abs(d), score)
        score = np.where(lb < ub, score, -big)

        if bland:
            improving = np.where(score > dual_tol)[0]
            if improving.shape[0] == 0:
                return EXIT_OPTIMAL, iters
            q = improving[0]
        else:
            q = int(np.argmax(score))
            if score[q] <= dual_tol:
                return EXIT_OPTIMAL, iters

        t = 1.0
        if status[q] == AT_UB or (status[q] == FREE and d[q] > 0.0):
            t = -1.0

        if q < n:
            alpha = np.dot(binv, at[q])
        elif q < n + m:
            alpha = -binv[:, q - n].copy()
        else:
            alpha = sigma[q - n - m] * binv[:, q - n - m]

        # ratio test: entering moves theta >= 0 in direction t,
        # basic values move by -theta * delta
        delta = t * alpha
        lbb = lb[basis]
        ubb = ub[basis]
        pos = delta > piv_tol
        neg = delta < -piv_tol
        safe = np.where(pos | neg, delta, 1.0)
        tlow = np.where(pos, (xb - lbb) / safe, big)
        tup = np.where(neg, (xb - ubb) / safe, big)
        theta_rows = np.maximum(np.minimum(tlow, tup), 0.0)
        rmin = theta_rows.min()
        theta_bound = ub[q] - lb[q]

        if theta_bound <= rmin:
            if theta_bound == big:
                return EXIT_UNBOUNDED, iters
            # bound flip: no basis change
            xb -= (t * theta_bound) * alpha
            if status[q] == AT_LB:
                status[q] = AT_UB
                xvals[q] = ub[q]
            else:
                status[q] = AT_LB
                xvals[q] = lb[q]
            iters += 1
            degen_run = 0
            bland = False
            continue
        if rmin == big:
            return EXIT_UNBOUNDED, iters

        tie = theta_rows <= rmin + 1e-12 + 1e-12 * rmin
        cand = np.where(tie)[0]
        if bland:
            r = cand[int(np.argmin(basis[cand]))]
        else:
            r = cand[int(np.argmax(np.abs(delta[cand])))]
        theta = theta_rows[r]
        piv = alpha[r]

        xb -= (t * theta) * alpha
        leave = basis[r]
        if delta[r] > 0.0:
            status[leave] = AT_LB
            xvals[leave] = lb[leave]
        else:
            status[leave] = AT_UB
            xvals[leave] = ub[leave]
        enter_val = xvals[q] + t * theta
        xvals[q] = 0.0
        status[q] = BASIC
        basis[r] = q
        xb[r] = enter_val

        brow = binv[r] / piv
        alpha_masked = alpha.copy()
        alpha_masked[r] = 0.0
        binv -= alpha_masked.reshape(m, 1) * brow.reshape(1, m)
        binv[r] = brow

        iters += 1
        pivots_since_refactor += 1
        if theta <= DEGEN_TOL:
            degen_run += 1
            if degen_run > bland_trigger:
                bland = True
        else:
            degen_run = 0
            bland = False

        if pivots_since_refactor >= refactor_every:
            pivots_since_refactor = 0
            bmat = np.zeros((m, m))
            for i in range(m):
                bi = basis[i]
                if bi < n:
                    for k in range(m):
                        bmat[k, i] = at[bi, k]
                elif bi < n + m:
                    bmat[bi - n, i] = -1.0
                else:
                    bmat[bi - n - m, i] = sigma[bi - n - m]
            binv[:, :] = np.linalg.inv(bmat)
            w = np.dot(xvals[:n], at)
            w -= xvals[n : n + m]
            w += sigma * xvals[n + m :]
            xb[:] = -np.dot(binv, w)
