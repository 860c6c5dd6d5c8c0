"""Self-contained dense linear-programming solver.

Standard-form translation: free variables are split into positive/negative
parts, finite lower bounds are shifted out, finite upper bounds become extra
rows, slacks/surpluses are added per inequality and artificials only where
the slack basis is not already feasible.

Two solution paths share one tableau engine:

* all-inequality problems whose standardized costs are nonnegative (every
  error-bound inversion program has this shape) start from the all-slack
  basis, which is dual feasible, and run dual simplex -- no artificials and
  no phase 1;
* everything else runs two-phase primal simplex.  Phase 1 exits as soon as
  the infeasibility sum is below tolerance instead of polishing a degenerate
  zero.  Pricing is Dantzig by default with a permanent switch to Bland's
  lowest-index rule after a long degenerate streak (``pricing="bland"``
  forces Bland throughout); ratio-test ties break on the lowest row index.

Claimed optima are confirmed by recomputing the reduced costs from the
pristine constraint data, which stops rounding drift in the tableau from
either stalling the solve or ending it early; the returned point is likewise
re-solved from the basis columns.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .linalg import DimensionMismatch, Vector

try:
    from scipy.linalg.blas import dger as _dger
except ImportError:  # pragma: no cover
    _dger = None

FEASIBILITY_TOLERANCE = 1e-9
OPTIMALITY_TOLERANCE = 1e-9

_RATIO_PIVOT_TOL = 1e-9
_STALL_LIMIT = 200
_MAX_REFRESHES = 4
_PERTURB_SCALE = 1e-7


def _positive_noise(n: int, tag: int) -> np.ndarray:
    """Deterministic values in [0.5, 1.5) used to break degeneracy; seeded by
    size and role only, so repeated solves stay bit-identical."""
    rng = np.random.Generator(np.random.PCG64([n, tag, 0x9E3779B9]))
    return 0.5 + rng.random(n)


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class IterationLimit(Exception):
    """Raised when the pivot budget is exhausted before a status is proven."""


@dataclass(frozen=True)
class LinearConstraint:
    coeffs: Vector
    relation: str  # "<=", "=", ">="
    rhs: float

    def __post_init__(self):
        if self.relation not in ("<=", "=", ">="):
            raise ValueError(f"unknown relation {self.relation!r}")
        if not np.isfinite(self.rhs):
            raise ValueError("constraint rhs must be finite")


@dataclass(frozen=True)
class LpProblem:
    """Linear program: optimize ``objective . x`` subject to row constraints
    and per-variable bounds (``None`` means unbounded on that side)."""

    sense: str  # "min" or "max"
    objective: Vector
    constraints: tuple[LinearConstraint, ...]
    bounds: tuple[tuple[Optional[float], Optional[float]], ...]

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")
        n = self.objective.dim
        if len(self.bounds) != n:
            raise ValueError(f"expected {n} bound pairs, got {len(self.bounds)}")
        for c in self.constraints:
            if c.coeffs.dim != n:
                raise DimensionMismatch(
                    f"constraint has {c.coeffs.dim} coefficients for {n} variables")
        for lo, hi in self.bounds:
            for b in (lo, hi):
                if b is not None and not np.isfinite(b):
                    raise ValueError("finite bounds must be finite numbers; use None")
            if lo is not None and hi is not None and lo > hi:
                raise ValueError(f"empty bound interval [{lo}, {hi}]")

    @property
    def num_vars(self) -> int:
        return self.objective.dim


def problem(sense: str,
            objective: Sequence[float],
            constraints: Sequence[tuple[Sequence[float], str, float]],
            bounds: Optional[Sequence[tuple[Optional[float], Optional[float]]]] = None,
            ) -> LpProblem:
    """Convenience builder from plain sequences; bounds default to free."""
    obj = Vector(objective)
    rows = tuple(LinearConstraint(Vector(a), rel, float(b)) for a, rel, b in constraints)
    if bounds is None:
        bounds = tuple((None, None) for _ in range(obj.dim))
    return LpProblem(sense, obj, rows, tuple(bounds))


@dataclass
class LpSolution:
    status: LpStatus
    point: Optional[Vector] = None
    objective: Optional[float] = None
    iterations: int = 0


@dataclass
class _Standardized:
    A: np.ndarray           # m x N constraint matrix over nonnegative variables
    b: np.ndarray           # m right-hand sides
    c: np.ndarray           # N objective costs (minimization)
    basis: np.ndarray       # m starting basis columns
    artificial: np.ndarray  # bool mask over columns
    num_artificial: int
    # original-variable reconstruction: x_i = offset_i + sum(sign * y[col])
    var_terms: list[list[tuple[int, float]]] = field(default_factory=list)
    var_offsets: np.ndarray = field(default_factory=lambda: np.zeros(0))


def _variable_transform(p: LpProblem):
    """Map each variable to nonnegative parts plus an offset; finite upper
    bounds of shifted variables come back as extra <= rows."""
    n = p.num_vars
    var_terms: list[list[tuple[int, float]]] = []
    offsets = np.zeros(n)
    bound_rows: list[tuple[int, float]] = []
    col = 0
    for i, (lo, hi) in enumerate(p.bounds):
        if lo is not None:
            var_terms.append([(col, 1.0)])
            offsets[i] = lo
            if hi is not None:
                bound_rows.append((col, hi - lo))
            col += 1
        elif hi is not None:
            var_terms.append([(col, -1.0)])
            offsets[i] = hi
            col += 1
        else:
            var_terms.append([(col, 1.0), (col + 1, -1.0)])
            col += 2
    return var_terms, offsets, bound_rows, col


def _assemble_rows(p: LpProblem, var_terms, offsets, bound_rows, ny):
    m = len(p.constraints) + len(bound_rows)
    A = np.zeros((m, ny))
    b = np.zeros(m)
    rels: list[str] = []
    n = p.num_vars
    for r, cons in enumerate(p.constraints):
        coeffs = cons.coeffs.data
        rhs = cons.rhs
        row = A[r]
        for i in range(n):
            ci = coeffs[i]
            if ci != 0.0:
                for (yc, s) in var_terms[i]:
                    row[yc] += ci * s
                rhs -= ci * offsets[i]
        b[r] = rhs
        rels.append(cons.relation)
    base = len(p.constraints)
    for k, (yc, ub) in enumerate(bound_rows):
        A[base + k, yc] = 1.0
        b[base + k] = ub
        rels.append("<=")
    return A, b, rels


def _standard_costs(p: LpProblem, var_terms, ny) -> np.ndarray:
    c = np.zeros(ny)
    obj = p.objective.data if p.sense == "min" else -p.objective.data
    for i in range(p.num_vars):
        oi = obj[i]
        if oi != 0.0:
            for (yc, s) in var_terms[i]:
                c[yc] += oi * s
    return c


def _standardize_primal(p: LpProblem) -> _Standardized:
    """Row signs normalized to b >= 0; artificials only where neither a slack
    nor a crashed structural unit column can start the basis.

    The crash pass matters for deviation-split formulations (one equality row
    per residual with fresh over/undershoot variables): every row then owns a
    singleton column with a positive coefficient, so the whole solve starts
    from a feasible identity basis and phase 1 disappears.
    """
    var_terms, offsets, bound_rows, ny = _variable_transform(p)
    A_rows, b, rels = _assemble_rows(p, var_terms, offsets, bound_rows, ny)
    m = A_rows.shape[0]
    for r in range(m):
        if b[r] < 0.0:
            A_rows[r] *= -1.0
            b[r] = -b[r]
            rels[r] = {"<=": ">=", ">=": "<=", "=": "="}[rels[r]]

    col_nnz = (A_rows != 0.0).sum(axis=0)
    crashed: dict[int, int] = {}  # row -> singleton structural column
    for r, rel in enumerate(rels):
        if rel == "<=":
            continue
        row = A_rows[r]
        singles = np.nonzero((row > _RATIO_PIVOT_TOL) & (col_nnz == 1))[0]
        if singles.size:
            c0 = int(singles[np.argmax(row[singles])])
            scale = row[c0]
            A_rows[r] /= scale
            b[r] /= scale
            crashed[r] = c0

    num_slack = sum(1 for rel in rels if rel != "=")
    num_art = sum(1 for r, rel in enumerate(rels) if rel != "<=" and r not in crashed)
    N = ny + num_slack + num_art
    A = np.zeros((m, N))
    A[:, :ny] = A_rows
    basis = np.zeros(m, dtype=np.int64)
    artificial = np.zeros(N, dtype=bool)
    s_at, a_at = ny, ny + num_slack
    for r, rel in enumerate(rels):
        if rel == "<=":
            A[r, s_at] = 1.0
            basis[r] = s_at
            s_at += 1
            continue
        if rel == ">=":
            A[r, s_at] = -1.0
            s_at += 1
        if r in crashed:
            basis[r] = crashed[r]
        else:
            A[r, a_at] = 1.0
            artificial[a_at] = True
            basis[r] = a_at
            a_at += 1
    c = np.zeros(N)
    c[:ny] = _standard_costs(p, var_terms, ny)
    return _Standardized(A=A, b=b, c=c, basis=basis, artificial=artificial,
                         num_artificial=num_art, var_terms=var_terms,
                         var_offsets=offsets)


def _standardize_dual(p: LpProblem) -> Optional[_Standardized]:
    """Slack-basis form for all-<= problems with nonnegative standardized
    costs; right-hand sides keep their signs.  Returns None when the problem
    does not have that shape."""
    if any(c.relation != "<=" for c in p.constraints):
        return None
    var_terms, offsets, bound_rows, ny = _variable_transform(p)
    cost = _standard_costs(p, var_terms, ny)
    if np.any(cost < 0.0):
        return None
    A_rows, b, _ = _assemble_rows(p, var_terms, offsets, bound_rows, ny)
    m = A_rows.shape[0]
    N = ny + m
    A = np.zeros((m, N))
    A[:, :ny] = A_rows
    A[:, ny:] = np.eye(m)
    basis = np.arange(ny, ny + m, dtype=np.int64)
    c = np.zeros(N)
    c[:ny] = cost
    return _Standardized(A=A, b=b, c=c, basis=basis,
                         artificial=np.zeros(N, dtype=bool), num_artificial=0,
                         var_terms=var_terms, var_offsets=offsets)


def _pivot(T: np.ndarray, r: int, j: int) -> None:
    piv_row = T[r] / T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    if _dger is not None and T.flags.c_contiguous:
        # T -= outer(col, piv_row), allocation-free via BLAS on the transposed view
        _dger(-1.0, piv_row, col, a=T.T, overwrite_x=0, overwrite_y=0, overwrite_a=1)
    else:
        T -= np.multiply.outer(col, piv_row)
    T[r] = piv_row
    T[:, j] = 0.0
    T[r, j] = 1.0


class _Simplex:
    """Dense tableau shared by the primal and dual iterations."""

    def __init__(self, std: _Standardized, limit: int):
        self.std = std
        m, N = std.A.shape
        self.m, self.N = m, N
        self.T = np.zeros((m + 1, N + 1))
        self.T[:m, :N] = std.A
        self.T[:m, N] = std.b
        self.basis = std.basis.copy()
        self.banned = np.zeros(N, dtype=bool)
        self.limit = limit
        self.iterations = 0

    def set_costs(self, c: np.ndarray) -> None:
        self.T[-1, :-1] = c
        self.T[-1, -1] = 0.0
        for r in range(self.m):
            cb = c[self.basis[r]]
            if cb != 0.0:
                self.T[-1] -= cb * self.T[r]

    def refresh(self, c: np.ndarray) -> bool:
        """Recompute the cost row and rhs column from pristine data; clears
        the drift that tableau pivoting accumulates.  False if the basis is
        too ill-conditioned to refresh."""
        B = self.std.A[:, self.basis]
        try:
            yb = np.linalg.solve(B, self.std.b)
            pi = np.linalg.solve(B.T, c[self.basis])
        except np.linalg.LinAlgError:
            return False
        self.T[:-1, -1] = yb
        rc = c - self.std.A.T @ pi
        rc[self.basis] = 0.0
        self.T[-1, :-1] = rc
        self.T[-1, -1] = -float(np.dot(c[self.basis], yb))
        return True

    def _count(self) -> None:
        self.iterations += 1
        if self.iterations > self.limit:
            raise IterationLimit(f"simplex exceeded {self.limit} pivots")

    def run_primal(self, c: np.ndarray, bland: bool,
                   stop_objective: Optional[float] = None) -> str:
        """Minimize until optimal/unbounded; ``stop_objective`` lets phase 1
        end as soon as the infeasibility sum is provably small enough."""
        T = self.T
        stall = 0
        refreshes = 0
        last_corner = T[-1, -1]
        while True:
            if stop_objective is not None and -T[-1, -1] <= stop_objective:
                return "optimal"
            cost = T[-1, :-1]
            if bland:
                elig = np.nonzero((cost < -OPTIMALITY_TOLERANCE) & ~self.banned)[0]
                j = int(elig[0]) if elig.size else -1
            else:
                masked = np.where(self.banned, np.inf, cost)
                j = int(np.argmin(masked))
                if masked[j] >= -OPTIMALITY_TOLERANCE:
                    j = -1
            if j < 0:
                # confirm against pristine data before declaring optimality
                if refreshes < _MAX_REFRESHES and self.refresh(c):
                    refreshes += 1
                    cost = T[-1, :-1]
                    cand = np.nonzero((cost < -OPTIMALITY_TOLERANCE) & ~self.banned)[0]
                    if cand.size == 0:
                        return "optimal"
                    continue
                return "optimal"
            col = T[:-1, j]
            elig_rows = col > _RATIO_PIVOT_TOL
            if not elig_rows.any():
                return "unbounded"
            rhs = np.maximum(T[:-1, -1], 0.0)  # degenerate negatives count as 0
            ratios = np.where(elig_rows, rhs / np.where(elig_rows, col, 1.0), np.inf)
            rmin = ratios.min()
            r = int(np.nonzero(ratios <= rmin + 1e-12)[0][0])
            _pivot(T, r, j)
            self.basis[r] = j
            self._count()
            if not bland:
                # the corner holds minus the objective and rises on progress
                corner = T[-1, -1]
                if corner > last_corner + 1e-12:
                    stall = 0
                else:
                    stall += 1
                    if stall > _STALL_LIMIT:
                        bland = True  # anti-cycling fallback
                last_corner = corner

    def run_dual(self, c: np.ndarray, feas_tol: float) -> str:
        """Dual simplex from a dual-feasible basis: drive negative right-hand
        sides out while keeping reduced costs nonnegative."""
        T = self.T
        stall = 0
        refreshes = 0
        bland_rows = False
        last_min_b = -np.inf
        while True:
            b = T[:-1, -1]
            if bland_rows:
                neg = np.nonzero(b < -feas_tol)[0]
                r = int(neg[0]) if neg.size else -1
            else:
                r = int(np.argmin(b))
                if b[r] >= -feas_tol:
                    r = -1
            if r < 0:
                if refreshes < _MAX_REFRESHES and self.refresh(c):
                    refreshes += 1
                    if T[:-1, -1].min() < -feas_tol:
                        continue
                return "optimal"
            row = T[r, :-1]
            elig = row < -_RATIO_PIVOT_TOL
            if not elig.any():
                return "infeasible"  # the row certifies an empty polytope
            cost = T[-1, :-1]
            ratios = np.where(elig, cost / np.where(elig, -row, 1.0), np.inf)
            ratios = np.where(elig & (ratios < 0.0), 0.0, ratios)  # drift guard
            j = int(np.nonzero(ratios <= ratios.min() + 1e-12)[0][0])
            _pivot(T, r, j)
            self.basis[r] = j
            self._count()
            min_b = T[:-1, -1].min()
            if min_b > last_min_b + 1e-12:
                stall = 0
            else:
                stall += 1
                if stall > _STALL_LIMIT:
                    bland_rows = True
            last_min_b = min_b


def solve(p: LpProblem,
          pricing: str = "auto",
          max_iterations: Optional[int] = None) -> LpSolution:
    """Simplex solve.

    Returns an OPTIMAL solution at a vertex of the feasible polytope,
    INFEASIBLE when no point satisfies every row within tolerance, or
    UNBOUNDED when an improving ray with no blocking row exists.  Raises
    IterationLimit when the pivot budget max(10000, 50*(vars+constraints))
    is exhausted.
    """
    if pricing not in ("auto", "bland"):
        raise ValueError(f"unknown pricing rule {pricing!r}")
    limit = max_iterations if max_iterations is not None else max(
        10000, 50 * (p.num_vars + len(p.constraints)))

    if pricing == "auto":
        std = _standardize_dual(p)
        if std is not None:
            sx = _Simplex(std, limit)
            feas_tol = FEASIBILITY_TOLERANCE * (1.0 + float(np.abs(std.b).sum()))
            sx.set_costs(std.c)
            try:
                outcome = sx.run_dual(std.c, feas_tol)
            except IterationLimit:
                outcome = None  # fall through to the primal path
            if outcome == "infeasible":
                return LpSolution(LpStatus.INFEASIBLE, iterations=sx.iterations)
            if outcome == "optimal":
                return _finish(p, sx, std)

    std = _standardize_primal(p)
    sx = _Simplex(std, limit)
    bland = pricing == "bland"

    if std.num_artificial > 0:
        phase1 = np.where(std.artificial, 1.0, 0.0)
        feas_target = 0.5 * FEASIBILITY_TOLERANCE * (1.0 + float(std.b.sum()))
        sx.set_costs(phase1)
        outcome = sx.run_primal(phase1, bland, stop_objective=feas_target)
        if outcome == "unbounded":  # impossible for a bounded-below phase 1
            raise IterationLimit("phase-1 simplex reported an unbounded direction")
        phase1_obj = -sx.T[-1, -1]
        if phase1_obj > FEASIBILITY_TOLERANCE * (1.0 + float(std.b.sum())):
            return LpSolution(LpStatus.INFEASIBLE, iterations=sx.iterations)
        # pivot artificials out of the basis wherever a structural pivot exists
        for r in range(sx.m):
            if std.artificial[sx.basis[r]]:
                row = sx.T[r, :-1]
                cand = np.where(std.artificial, 0.0, np.abs(row))
                j = int(np.argmax(cand))
                if cand[j] > _RATIO_PIVOT_TOL:
                    _pivot(sx.T, r, j)
                    sx.basis[r] = j
        sx.banned = std.artificial.copy()

    sx.set_costs(std.c)
    outcome = sx.run_primal(std.c, bland)
    if outcome == "unbounded":
        return LpSolution(LpStatus.UNBOUNDED, iterations=sx.iterations)
    return _finish(p, sx, std)


def _finish(p: LpProblem, sx: _Simplex, std: _Standardized) -> LpSolution:
    """Map the basic solution back to original variables, re-solving against
    the pristine standardized system to shed tableau drift."""
    y = np.zeros(sx.N)
    if sx.m:
        B = std.A[:, sx.basis]
        try:
            yb = np.linalg.solve(B, std.b)
        except np.linalg.LinAlgError:
            yb = sx.T[:-1, -1]
        y[sx.basis] = np.maximum(yb, 0.0)
    x = np.array(std.var_offsets)
    for i, terms in enumerate(std.var_terms):
        for (yc, s) in terms:
            x[i] += s * y[yc]
    value = float(np.dot(p.objective.data, x))
    return LpSolution(LpStatus.OPTIMAL, point=Vector(x), objective=value,
                      iterations=sx.iterations)


def feasibility_check(p: LpProblem, point: Vector) -> float:
    """Maximum signed violation of all constraints and bounds at ``point``
    (<= 0 everywhere satisfied).  Equality rows contribute |residual|."""
    if point.dim != p.num_vars:
        raise DimensionMismatch(
            f"point has dim {point.dim}, problem has {p.num_vars} variables")
    x = point.data
    worst = float("-inf")
    for cons in p.constraints:
        ax = float(np.dot(cons.coeffs.data, x))
        if cons.relation == "<=":
            v = ax - cons.rhs
        elif cons.relation == ">=":
            v = cons.rhs - ax
        else:
            v = abs(ax - cons.rhs)
        worst = max(worst, v)
    for i, (lo, hi) in enumerate(p.bounds):
        if lo is not None:
            worst = max(worst, lo - x[i])
        if hi is not None:
            worst = max(worst, x[i] - hi)
    return worst


def dump_problem(p: LpProblem) -> str:
    """Plain-text rendering: sense line, objective coefficients, one
    constraint per line, then one 'lo hi' bounds line per variable."""
    out = ["minimize" if p.sense == "min" else "maximize",
           " ".join(repr(v) for v in p.objective.data),
           "subject to"]
    for cons in p.constraints:
        lhs = " ".join(repr(v) for v in cons.coeffs.data)
        out.append(f"{lhs} {cons.relation} {cons.rhs!r}")
    out.append("bounds")
    for lo, hi in p.bounds:
        out.append(f"{'-inf' if lo is None else repr(lo)} "
                   f"{'+inf' if hi is None else repr(hi)}")
    return "\n".join(out) + "\n"
