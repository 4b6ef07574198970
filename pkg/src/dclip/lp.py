"""Dense two-phase simplex solver.

Problems have the form::

    minimize    c @ z
    subject to  A_eq @ z == b_eq
                A_ub @ z <= b_ub
                lo <= z <= hi        (either side may be None)

Every geometric query in the toolkit is a small LP of this shape (tens of
variables, a handful of rows), so the solver works on a dense tableau and
favours low per-call overhead over asymptotics.

Pricing is Dantzig's rule (most negative reduced cost).  After
``stall_limit`` consecutive pivots without a strict objective decrease the
solver switches to Bland's rule for the rest of the phase, which guarantees
termination on degenerate problems.  A basis that recurs within one stall
streak triggers the switch at once, so small problems, whose iteration cap
sits below the stall limit, still escape cycles.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InputError, NumericalError

__all__ = ["Status", "LpProblem", "LpSolution", "solve", "FEAS_TOL"]

FEAS_TOL = 1e-9
_PIVOT_TOL = 1e-11
_OPT_TOL = 1e-10
STALL_LIMIT = 1000

Bound = tuple[Optional[float], Optional[float]]


class Status(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


def _matrix(a, n: int, name: str) -> np.ndarray:
    if a is None:
        return np.zeros((0, n))
    a = np.asarray(a, dtype=float)
    if a.ndim == 1 and n == a.shape[0] and a.size:
        a = a.reshape(1, n)
    if a.ndim != 2 or a.shape[1] != n:
        raise InputError(f"{name} must have {n} columns, got shape {a.shape}")
    return a


def _rhs(b, m: int, name: str) -> np.ndarray:
    if b is None:
        b = np.zeros(0)
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.shape[0] != m:
        raise InputError(f"{name} must have length {m}, got {b.shape[0]}")
    return b


@dataclass(frozen=True, eq=False)
class LpProblem:
    """An LP in the mixed form described in the module docstring.

    ``bounds`` is either None (every variable ``>= 0``), a single
    ``(lo, hi)`` pair applied to all variables, or one pair per variable.
    """

    c: np.ndarray
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    A_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    bounds: Optional[Sequence[Bound] | Bound] = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        n = c.shape[0]
        A_eq = _matrix(self.A_eq, n, "A_eq")
        b_eq = _rhs(self.b_eq, A_eq.shape[0], "b_eq")
        A_ub = _matrix(self.A_ub, n, "A_ub")
        b_ub = _rhs(self.b_ub, A_ub.shape[0], "b_ub")
        bounds = self.bounds
        if bounds is None:
            bounds = [(0.0, None)] * n
        elif len(bounds) == 2 and not any(isinstance(v, (tuple, list)) for v in bounds):
            bounds = [tuple(bounds)] * n
        bounds = [tuple(bd) for bd in bounds]
        if len(bounds) != n:
            raise InputError(f"bounds must have {n} entries, got {len(bounds)}")
        for lo, hi in bounds:
            if lo is not None and hi is not None and lo > hi:
                raise InputError(f"empty variable bound [{lo}, {hi}]")
        for arr, name in ((c, "c"), (A_eq, "A_eq"), (b_eq, "b_eq"), (A_ub, "A_ub"), (b_ub, "b_ub")):
            if not np.all(np.isfinite(arr)):
                raise InputError(f"{name} has non-finite entries")
        for bd in bounds:
            for v in bd:
                if v is not None and not np.isfinite(v):
                    raise InputError("bounds must be finite or None")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A_eq", A_eq)
        object.__setattr__(self, "b_eq", b_eq)
        object.__setattr__(self, "A_ub", A_ub)
        object.__setattr__(self, "b_ub", b_ub)
        object.__setattr__(self, "bounds", bounds)

    @property
    def n_vars(self) -> int:
        return self.c.shape[0]

    def feasibility_scale(self) -> float:
        big = 0.0
        if self.b_eq.size:
            big = max(big, float(np.max(np.abs(self.b_eq))))
        if self.b_ub.size:
            big = max(big, float(np.max(np.abs(self.b_ub))))
        return 1.0 + big

    def residual(self, z) -> float:
        """Largest constraint violation of ``z`` (equalities, inequalities, bounds)."""
        z = np.asarray(z, dtype=float)
        worst = 0.0
        if self.A_eq.size:
            worst = max(worst, float(np.max(np.abs(self.A_eq @ z - self.b_eq))))
        if self.A_ub.size:
            worst = max(worst, float(np.max(self.A_ub @ z - self.b_ub, initial=0.0)))
        for v, (lo, hi) in zip(z, self.bounds):
            if lo is not None:
                worst = max(worst, lo - v)
            if hi is not None:
                worst = max(worst, v - hi)
        return worst


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: Status
    z: Optional[np.ndarray] = None
    objective_value: Optional[float] = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


@dataclass
class _Standard:
    """``min cost @ y  s.t.  M @ y == r, y >= 0`` plus the map ``z = z0 + T @ y``."""

    M: np.ndarray
    r: np.ndarray
    cost: np.ndarray
    T: np.ndarray
    z0: np.ndarray
    slack_start: int


def _standardize(p: LpProblem) -> _Standard:
    n = p.n_vars
    lo = np.array([np.nan if b[0] is None else b[0] for b in p.bounds], dtype=float).reshape(n)
    hi = np.array([np.nan if b[1] is None else b[1] for b in p.bounds], dtype=float).reshape(n)
    has_lo = ~np.isnan(lo)
    has_hi = ~np.isnan(hi)
    free = ~has_lo & ~has_hi
    width = 1 + free.astype(int)
    start = np.concatenate([[0], np.cumsum(width)[:-1]]).astype(int)
    ny = int(width.sum())
    rows = np.arange(n)
    T = np.zeros((n, ny))
    # z = lo + y, or z = hi - y, or z = y+ - y-
    T[rows, start] = np.where(has_lo | free, 1.0, -1.0)
    T[rows[free], start[free] + 1] = -1.0
    z0 = np.where(has_lo, lo, np.where(has_hi, hi, 0.0))
    boxed = np.flatnonzero(has_lo & has_hi)

    m_eq = p.A_eq.shape[0]
    m_ub = p.A_ub.shape[0]
    n_slack = m_ub + boxed.size
    m = m_eq + n_slack
    M = np.zeros((m, ny + n_slack))
    r = np.empty(m)
    if m_eq:
        M[:m_eq, :ny] = p.A_eq @ T
        r[:m_eq] = p.b_eq - p.A_eq @ z0
    if m_ub:
        M[m_eq:m_eq + m_ub, :ny] = p.A_ub @ T
        r[m_eq:m_eq + m_ub] = p.b_ub - p.A_ub @ z0
    if boxed.size:
        k = m_eq + m_ub + np.arange(boxed.size)
        M[k, start[boxed]] = 1.0
        r[k] = hi[boxed] - lo[boxed]
    M[m_eq + np.arange(n_slack), ny + np.arange(n_slack)] = 1.0
    cost = np.concatenate([p.c @ T, np.zeros(n_slack)])
    return _Standard(M, r, cost, T, z0, m_eq)


class _Tableau:
    """Tableau with the objective (reduced cost) row stored last."""

    def __init__(self, tab: np.ndarray, basis: list[int], cap: int, stall_limit: int):
        self.tab = tab
        self.basis = basis
        self.cap = cap
        self.stall_limit = stall_limit
        self.pivots = 0

    def pivot(self, row: int, col: int) -> None:
        tab = self.tab
        prow = tab[row] / tab[row, col]
        colv = tab[:, col].copy()
        colv[row] = 0.0
        tab -= colv[:, None] * prow
        tab[row] = prow
        self.basis[row] = col
        self.pivots += 1

    def run(self) -> bool:
        """Pivot to optimality; False if the objective is unbounded below."""
        tab = self.tab
        m = tab.shape[0] - 1
        bland = False
        stall = 0
        seen: set = set()
        best = -tab[m, -1]
        while True:
            if self.pivots >= self.cap:
                raise NumericalError(f"simplex iteration cap {self.cap} exceeded")
            red = tab[m, :-1]
            if bland:
                neg = red < -_OPT_TOL
                col = int(neg.argmax())
                if not neg[col]:
                    return True
            else:
                col = int(red.argmin())
                if red[col] >= -_OPT_TOL:
                    return True
            column = tab[:m, col]
            pos = column > _PIVOT_TOL
            if not pos.any():
                return False
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(pos, tab[:m, -1] / column, np.inf)
            row = int(ratios.argmin())
            low = ratios[row]
            ties = np.flatnonzero(ratios <= low + 1e-12 * max(1.0, abs(low)))
            if ties.size > 1:
                if bland:
                    row = int(ties[np.argmin([self.basis[i] for i in ties])])
                else:
                    row = int(ties[np.argmax(column[ties])])
            self.pivot(row, col)
            # the corner entry holds minus the current objective value
            obj = -tab[m, -1]
            if obj < best - 1e-12 * max(1.0, abs(best)):
                best = obj
                stall = 0
                seen.clear()
            elif not bland:
                stall += 1
                key = frozenset(self.basis)
                # a repeated basis inside a stall is a cycle: no point waiting
                if stall >= self.stall_limit or key in seen:
                    bland = True
                seen.add(key)


def solve(p: LpProblem, stall_limit: int = STALL_LIMIT) -> LpSolution:
    """Solve ``p`` with the two-phase simplex method.

    Raises :class:`NumericalError` when the pivot count exceeds
    ``50 * (variables + constraints)`` of the standard-form problem.
    """
    std = _standardize(p)
    M, r = std.M, std.r
    m, ny = M.shape
    feas_tol = FEAS_TOL * p.feasibility_scale()
    cap = 50 * (ny + m)

    neg = r < 0
    M[neg] *= -1.0
    r[neg] *= -1.0
    # rows with an untouched slack start basic on it; the rest need artificials
    has_slack = np.zeros(m, dtype=bool)
    has_slack[std.slack_start:] = True
    art_rows = np.flatnonzero(~has_slack | neg)
    n_art = art_rows.size
    n_slack = m - std.slack_start
    basis = [-1] * m
    for i in range(std.slack_start, m):
        basis[i] = ny - n_slack + (i - std.slack_start)
    width = ny + n_art
    tab = np.zeros((m + 1, width + 1))
    tab[:m, :ny] = M
    tab[:m, -1] = r
    if n_art:
        tab[art_rows, ny + np.arange(n_art)] = 1.0
        for k, i in enumerate(art_rows):
            basis[i] = ny + k
    tableau = _Tableau(tab, basis, cap, stall_limit)

    if n_art:
        # phase one: minimise the sum of artificials
        tab[m, :ny] = -tab[art_rows, :ny].sum(axis=0)
        tab[m, -1] = -tab[art_rows, -1].sum()
        tableau.run()
        if -tab[m, -1] > feas_tol:
            return LpSolution(Status.INFEASIBLE, iterations=tableau.pivots)
        # drive zero-level artificials out of the basis, dropping redundant rows
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if tableau.basis[i] >= ny:
                row = np.abs(tab[i, :ny])
                j = int(row.argmax())
                if row[j] > 1e-9:
                    tableau.pivot(i, j)
                else:
                    keep[i] = False
        if not keep.all():
            rows = np.flatnonzero(keep)
            tab = np.vstack([tab[rows], tab[m:m + 1]])
            tableau.basis = [tableau.basis[i] for i in rows]
            M, r = M[rows], r[rows]
            m = rows.size
        tab = np.ascontiguousarray(np.delete(tab, np.s_[ny:width], axis=1))
        tableau.tab = tab

    # phase two
    basis = np.array(tableau.basis, dtype=int)
    tab[m, :ny] = std.cost
    tab[m, -1] = 0.0
    cb = std.cost[basis]
    if np.any(cb):
        tab[m] -= cb @ tab[:m]
    if not tableau.run():
        return LpSolution(Status.UNBOUNDED, iterations=tableau.pivots)

    basis = np.array(tableau.basis, dtype=int)
    y = np.zeros(ny)
    y[basis] = tab[:m, -1]
    if m:
        # recompute basic values from the original data to shed pivot round-off
        try:
            yb = np.linalg.solve(M[:, basis], r)
        except np.linalg.LinAlgError:
            yb = None
        if yb is not None and np.all(np.isfinite(yb)):
            y[basis] = yb
    np.maximum(y, 0.0, out=y)
    z = std.z0 + std.T @ y[:std.T.shape[1]]
    lo = [b[0] for b in p.bounds]
    hi = [b[1] for b in p.bounds]
    # snap onto bounds that the round-off nudged across
    for j in range(z.shape[0]):
        if lo[j] is not None and z[j] < lo[j]:
            z[j] = lo[j]
        elif hi[j] is not None and z[j] > hi[j]:
            z[j] = hi[j]
    return LpSolution(Status.OPTIMAL, z, float(p.c @ z), tableau.pivots)
