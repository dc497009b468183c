"""Dense bounded-variable simplex for small LPs.

Rows are brought to equality form ``A x + s = b`` with one slack per row
(``s >= 0`` for <=, ``s <= 0`` for >=, ``s = 0`` for =) and an artificial
column per row for phase 1.  Variables keep their bounds implicitly:
a nonbasic variable sits at its lower or upper bound (or at zero if free).

Cold starts run the primal method (phase 1 on the artificials, then
phase 2).  Warm starts from a previous basis run the dual method, which is
what branch-and-bound needs after tightening a bound.  Dantzig pricing is
used until a run of degenerate pivots, then Bland's rule takes over until
progress resumes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

AT_LB, AT_UB, FREE, BASIC = 0, 1, 2, 3

PRIMAL_TOL = 1e-9
DUAL_TOL = 1e-9
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 64
DEGENERATE_RUN = 30


class LPStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


@dataclass
class Basis:
    head: np.ndarray  # column index of the basic variable in each row
    status: np.ndarray  # per column: AT_LB, AT_UB, FREE or BASIC

    def copy(self) -> "Basis":
        return Basis(self.head.copy(), self.status.copy())


@dataclass
class LPResult:
    status: LPStatus
    x: np.ndarray | None = None
    objective: float = math.nan
    basis: Basis | None = None
    iterations: int = 0


class BoundedSimplex:
    """LP ``min c x  s.t.  A x (sense) rhs,  lb <= x <= ub``; bounds vary per solve."""

    def __init__(self, A: np.ndarray, sense: np.ndarray, rhs: np.ndarray, c: np.ndarray, scale: bool = True):
        A = np.asarray(A, dtype=float)
        m, n = A.shape
        rhs = np.asarray(rhs, dtype=float).copy()
        if scale and m:
            # normalise each row to unit max-coefficient so big-M rows don't dominate
            norm = np.abs(A).max(axis=1)
            norm[norm == 0] = 1.0
            A = A / norm[:, None]
            rhs = rhs / norm
        self.m, self.n = m, n
        self.cols = np.hstack([A, np.eye(m), np.eye(m)])
        self.b = rhs
        self.c = np.concatenate([np.asarray(c, dtype=float), np.zeros(2 * m)])
        slack_lb = np.where(sense == "G", -np.inf, 0.0)
        slack_ub = np.where(sense == "L", np.inf, 0.0)
        self._slack_bounds = (slack_lb, slack_ub)

    @property
    def n_total(self) -> int:
        return self.n + 2 * self.m

    def _full_bounds(self, lb: np.ndarray, ub: np.ndarray, art_ub: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        slb, sub = self._slack_bounds
        return (
            np.concatenate([lb, slb, np.zeros(self.m)]),
            np.concatenate([ub, sub, art_ub]),
        )

    # ------------------------------------------------------------------
    def solve(self, lb: np.ndarray, ub: np.ndarray, warm: Basis | None = None, max_iter: int = 50_000) -> LPResult:
        lb = np.asarray(lb, dtype=float)
        ub = np.asarray(ub, dtype=float)
        if np.any(lb > ub + PRIMAL_TOL):
            return LPResult(LPStatus.INFEASIBLE)
        if warm is not None:
            res = self._solve_warm(lb, ub, warm, max_iter)
            if res is not None:
                return res
        return self._solve_cold(lb, ub, max_iter)

    def _solve_cold(self, lb, ub, max_iter) -> LPResult:
        m, n = self.m, self.n
        cols = self.cols.copy()
        xs = np.zeros(n)
        status = np.full(self.n_total, AT_LB, dtype=np.int8)
        for j in range(n):
            if np.isfinite(lb[j]):
                xs[j], status[j] = lb[j], AT_LB
            elif np.isfinite(ub[j]):
                xs[j], status[j] = ub[j], AT_UB
            else:
                xs[j], status[j] = 0.0, FREE
        r = self.b - cols[:, :n] @ xs
        slb, sub = self._slack_bounds
        head = np.empty(m, dtype=np.int64)
        art_ub = np.zeros(m)
        for i in range(m):
            s_col, a_col = n + i, n + m + i
            if slb[i] - PRIMAL_TOL <= r[i] <= sub[i] + PRIMAL_TOL:
                head[i] = s_col
                status[s_col] = BASIC
            else:
                near = min(max(r[i], slb[i]), sub[i])
                status[s_col] = AT_LB if near == slb[i] else AT_UB
                if cols[i, s_col] and slb[i] == sub[i]:
                    status[s_col] = AT_LB
                # artificial carries the residual with a positive value
                cols[i, a_col] = 1.0 if r[i] - near > 0 else -1.0
                art_ub[i] = np.inf
                head[i] = a_col
                status[a_col] = BASIC
        flb, fub = self._full_bounds(lb, ub, art_ub)
        state = _State(self, cols, flb, fub, Basis(head, status))
        iters = 0
        if np.any(art_ub > 0):
            cost1 = np.zeros(self.n_total)
            cost1[n + m:] = (art_ub > 0).astype(float)
            st, it = state.primal(cost1, max_iter)
            iters += it
            if st is LPStatus.ITERATION_LIMIT:
                return LPResult(st, iterations=iters)
            if cost1 @ state.x > 1e-7 * max(1.0, np.abs(self.b).max(initial=0.0)):
                return LPResult(LPStatus.INFEASIBLE, iterations=iters)
            # artificials are fixed at zero from here on
            state.ub[n + m:] = 0.0
            state.x[n + m:] = np.where(state.basis.status[n + m:] == BASIC, state.x[n + m:], 0.0)
            state.recompute()
        st, it = state.primal(self.c, max_iter - iters)
        iters += it
        return state.result(st, iters)

    def _solve_warm(self, lb, ub, warm: Basis, max_iter) -> LPResult | None:
        n, m = self.n, self.m
        # artificial signs are not carried over; reuse the basis only if no artificial is basic
        if np.any(warm.status[n + m:] == BASIC):
            return None
        flb, fub = self._full_bounds(lb, ub, np.zeros(m))
        basis = warm.copy()
        st = basis.status
        for j in range(self.n_total):
            if st[j] == BASIC:
                continue
            if st[j] == AT_LB and not np.isfinite(flb[j]):
                st[j] = AT_UB if np.isfinite(fub[j]) else FREE
            elif st[j] == AT_UB and not np.isfinite(fub[j]):
                st[j] = AT_LB if np.isfinite(flb[j]) else FREE
        try:
            state = _State(self, self.cols, flb, fub, basis)
        except np.linalg.LinAlgError:
            return None
        d = state.reduced_costs(self.c)
        if not state.dual_feasible(d):
            st_, it = state.primal_from_infeasible(self.c, max_iter)
            if st_ is None:
                return None
            return state.result(st_, it)
        st_, it = state.dual(self.c, max_iter)
        if st_ is LPStatus.OPTIMAL:
            # clean up any residual dual infeasibility from round-off
            st2, it2 = state.primal(self.c, max_iter - it)
            return state.result(st2, it + it2)
        return state.result(st_, it)


class _State:
    """Mutable simplex iterate: basis, basis inverse and variable values."""

    def __init__(self, lp: BoundedSimplex, cols: np.ndarray, lb: np.ndarray, ub: np.ndarray, basis: Basis):
        self.lp = lp
        self.cols = cols
        self.lb = lb
        self.ub = ub
        self.basis = basis
        self.x = np.zeros(lp.n_total)
        self.bland = False
        self.since_refactor = 0
        self.recompute()

    # -- linear algebra -------------------------------------------------
    def recompute(self) -> None:
        st = self.basis.status
        nb = st != BASIC
        self.x[nb & (st == AT_LB)] = self.lb[nb & (st == AT_LB)]
        self.x[nb & (st == AT_UB)] = self.ub[nb & (st == AT_UB)]
        self.x[nb & (st == FREE)] = 0.0
        B = self.cols[:, self.basis.head]
        self.Binv = np.linalg.inv(B)
        xN = np.where(nb, self.x, 0.0)
        self.x[self.basis.head] = self.Binv @ (self.lp.b - self.cols @ xN)
        self.since_refactor = 0

    def reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        y = cost[self.basis.head] @ self.Binv
        d = cost - y @ self.cols
        d[self.basis.head] = 0.0
        return d

    def dual_feasible(self, d: np.ndarray) -> bool:
        st = self.basis.status
        movable = self.ub > self.lb
        bad = (
            ((st == AT_LB) & movable & (d < -DUAL_TOL))
            | ((st == AT_UB) & movable & (d > DUAL_TOL))
            | ((st == FREE) & (np.abs(d) > DUAL_TOL))
        )
        return not bad.any()

    def _pivot(self, r: int, q: int, alpha: np.ndarray) -> None:
        piv = alpha[r]
        row = self.Binv[r] / piv
        self.Binv -= np.outer(alpha, row)
        self.Binv[r] = row
        self.basis.head[r] = q
        self.basis.status[q] = BASIC
        self.since_refactor += 1
        if self.since_refactor >= REFACTOR_EVERY:
            self.recompute()

    # -- primal ---------------------------------------------------------
    def primal(self, cost: np.ndarray, max_iter: int) -> tuple[LPStatus, int]:
        st = self.basis.status
        degenerate = 0
        for it in range(max_iter):
            d = self.reduced_costs(cost)
            movable = self.ub > self.lb
            cand = np.zeros_like(d)
            up = (st == AT_LB) & movable & (d < -DUAL_TOL)
            down = (st == AT_UB) & movable & (d > DUAL_TOL)
            free = (st == FREE) & (np.abs(d) > DUAL_TOL)
            cand[up | down | free] = np.abs(d[up | down | free])
            if not cand.any():
                return LPStatus.OPTIMAL, it
            q = int(np.flatnonzero(cand)[0]) if self.bland else int(np.argmax(cand))
            direction = 1.0 if (up[q] or (free[q] and d[q] < 0)) else -1.0
            alpha = self.Binv @ self.cols[:, q]
            step, r, to_upper = self._primal_ratio(alpha * direction, q)
            if step == math.inf:
                return LPStatus.UNBOUNDED, it
            degenerate = degenerate + 1 if step < PRIMAL_TOL else 0
            if degenerate > DEGENERATE_RUN:
                self.bland = True
            elif degenerate == 0:
                self.bland = False
            self.x[self.basis.head] -= step * direction * alpha
            self.x[q] += step * direction
            if r < 0:
                st[q] = AT_UB if direction > 0 else AT_LB
                self.x[q] = self.ub[q] if direction > 0 else self.lb[q]
                continue
            leaving = self.basis.head[r]
            st[leaving] = AT_UB if to_upper else AT_LB
            self.x[leaving] = self.ub[leaving] if to_upper else self.lb[leaving]
            self._pivot(r, q, alpha)
        return LPStatus.ITERATION_LIMIT, max_iter

    def _primal_ratio(self, a: np.ndarray, q: int) -> tuple[float, int, bool]:
        """Largest step along ``-a`` on the basics; ``r = -1`` means ``q`` hits its other bound."""
        head = self.basis.head
        xB = self.x[head]
        lbB, ubB = self.lb[head], self.ub[head]
        with np.errstate(divide="ignore", invalid="ignore"):
            dec = a > PIVOT_TOL
            inc = a < -PIVOT_TOL
            ratio = np.full(len(a), np.inf)
            ratio[dec] = (xB[dec] - lbB[dec]) / a[dec]
            ratio[inc] = (ubB[inc] - xB[inc]) / -a[inc]
        ratio = np.maximum(ratio, 0.0)
        span = self.ub[q] - self.lb[q]
        best = ratio.min(initial=np.inf)
        if span <= best:
            return span, -1, False
        if best == np.inf:
            return np.inf, -1, False
        ties = np.flatnonzero(ratio <= best + PRIMAL_TOL)
        if self.bland:
            r = int(ties[np.argmin(head[ties])])
        else:
            r = int(ties[np.argmax(np.abs(a[ties]))])
        return float(ratio[r]), r, bool(inc[r])

    def primal_from_infeasible(self, cost: np.ndarray, max_iter: int):
        """Primal run from a warm basis; only usable if it is primal feasible."""
        head = self.basis.head
        xB = self.x[head]
        if np.all(xB >= self.lb[head] - PRIMAL_TOL) and np.all(xB <= self.ub[head] + PRIMAL_TOL):
            return self.primal(cost, max_iter)
        return None, 0

    # -- dual -----------------------------------------------------------
    def dual(self, cost: np.ndarray, max_iter: int) -> tuple[LPStatus, int]:
        st = self.basis.status
        degenerate = 0
        for it in range(max_iter):
            head = self.basis.head
            xB = self.x[head]
            below = self.lb[head] - xB
            above = xB - self.ub[head]
            infeas = np.maximum(below, above)
            if infeas.max(initial=0.0) <= PRIMAL_TOL:
                return LPStatus.OPTIMAL, it
            r = int(np.flatnonzero(infeas > PRIMAL_TOL)[0]) if self.bland else int(np.argmax(infeas))
            leaving = head[r]
            to_lower = below[r] > 0
            target = self.lb[leaving] if to_lower else self.ub[leaving]
            d = self.reduced_costs(cost)
            alpha_r = self.Binv[r] @ self.cols
            movable = self.ub > self.lb
            sgn = -1.0 if to_lower else 1.0
            a = alpha_r * sgn
            ok = (
                ((st == AT_LB) & movable & (a > PIVOT_TOL))
                | ((st == AT_UB) & movable & (a < -PIVOT_TOL))
                | ((st == FREE) & (np.abs(a) > PIVOT_TOL))
            )
            if not ok.any():
                return LPStatus.INFEASIBLE, it
            idx = np.flatnonzero(ok)
            ratios = np.abs(d[idx]) / np.abs(alpha_r[idx])
            best = ratios.min()
            ties = idx[ratios <= best + DUAL_TOL]
            if self.bland:
                q = int(ties.min())
            else:
                q = int(ties[np.argmax(np.abs(alpha_r[ties]))])
            degenerate = degenerate + 1 if best < DUAL_TOL else 0
            if degenerate > DEGENERATE_RUN:
                self.bland = True
            elif degenerate == 0:
                self.bland = False
            alpha = self.Binv @ self.cols[:, q]
            delta_q = (self.x[leaving] - target) / alpha[r]
            self.x[head] -= delta_q * alpha
            self.x[q] += delta_q
            st[leaving] = AT_LB if to_lower else AT_UB
            self.x[leaving] = target
            self._pivot(r, q, alpha)
        return LPStatus.ITERATION_LIMIT, max_iter

    # -- output ---------------------------------------------------------
    def result(self, status: LPStatus, iters: int) -> LPResult:
        if status is not LPStatus.OPTIMAL:
            return LPResult(status, iterations=iters)
        self.recompute()
        n = self.lp.n
        head = self.basis.head
        xB = self.x[head]
        viol = max((self.lb[head] - xB).max(initial=0.0), (xB - self.ub[head]).max(initial=0.0))
        if viol > 1e-7:
            # refactorisation exposed drift; one more dual pass restores feasibility
            st, it = self.dual(self.lp.c, 1000)
            if st is not LPStatus.OPTIMAL:
                return LPResult(st, iterations=iters + it)
            self.recompute()
            iters += it
        x = np.clip(self.x[:n], self.lb[:n], self.ub[:n])
        return LPResult(LPStatus.OPTIMAL, x, float(self.lp.c[:n] @ x), self.basis.copy(), iters)
