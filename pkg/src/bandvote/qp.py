"""Least-squares weight fitting on the probability simplex.

Solves min 1/2 w'Hw + c'w subject to sum(w) = 1, w >= 0 with a primal
active-set method, and the unconstrained normal-equation problem directly.
The working set holds the bound constraints currently treated as equalities;
the sum constraint is always active. Ties in the blocking-constraint ratio
test and in multiplier selection are broken by lowest variable index, so a
given problem always produces the same iterate sequence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConvergenceError,
    DimensionError,
    FeasibilityError,
    SymmetryError,
)
from .linalg import as_matrix, as_vector, solve_linear

MULTIPLIER_DROP_TOL = -1e-10
STEP_TOL = 1e-12


@dataclass(frozen=True)
class QpProblem:
    """min 1/2 w'Hw + c'w  s.t.  sum(w) = eq_sum, w >= 0."""

    h: np.ndarray
    c: np.ndarray
    eq_sum: float = 1.0

    def __post_init__(self):
        h = as_matrix(self.h, "H")
        c = as_vector(self.c, "c")
        if h.shape[0] != h.shape[1]:
            raise DimensionError(f"H must be square, got {h.shape}")
        if h.shape[0] != c.size:
            raise DimensionError(f"H is {h.shape} but c has length {c.size}")
        if np.abs(h - h.T).max() > 1e-10 * max(np.abs(h).max(), 1.0):
            raise SymmetryError("H is not symmetric within tolerance")
        object.__setattr__(self, "h", 0.5 * (h + h.T))
        object.__setattr__(self, "c", c)

    @property
    def dim(self) -> int:
        return self.c.size

    def objective(self, w) -> float:
        w = np.asarray(w, dtype=float)
        return float(0.5 * w @ self.h @ w + self.c @ w)

    def gradient(self, w) -> np.ndarray:
        return self.h @ np.asarray(w, dtype=float) + self.c


@dataclass(frozen=True)
class QpSolution:
    w: np.ndarray
    objective: float
    active_set: tuple[int, ...]
    multipliers: dict[int, float]
    eq_multiplier: float
    iterations: int
    trace: list[dict] = field(default_factory=list, repr=False)


@dataclass(frozen=True)
class KktReport:
    stationarity_residual: float
    bound_violation: float
    eq_violation: float
    min_multiplier: float
    passed: bool


def qp_from_least_squares(l_matrix, l_star) -> QpProblem:
    """Build the simplex QP for min 1/2 ||Lw - l*||^2 (constant term dropped)."""
    l_mat = as_matrix(l_matrix, "L")
    target = as_vector(l_star, "l_star")
    if l_mat.shape[0] != target.size:
        raise DimensionError(f"L has {l_mat.shape[0]} rows but l_star has length {target.size}")
    return QpProblem(h=l_mat.T @ l_mat, c=-(l_mat.T @ target))


def solve_unconstrained(l_matrix, l_star) -> np.ndarray:
    """Normal-equation least squares w = (L'L)^-1 L'l*; raises if L'L is singular."""
    l_mat = as_matrix(l_matrix, "L")
    target = as_vector(l_star, "l_star")
    if l_mat.shape[0] != target.size:
        raise DimensionError(f"L has {l_mat.shape[0]} rows but l_star has length {target.size}")
    return solve_linear(l_mat.T @ l_mat, l_mat.T @ target)


def _subproblem_step(problem: QpProblem, w: np.ndarray, free: np.ndarray):
    """Direction on the free variables keeping sum(w) fixed.

    Returns (p, mu) where p is the full-dimension step and mu the multiplier
    of the sum constraint. Falls back to a least-norm solve when H is
    singular on the working subspace.
    """
    g = problem.gradient(w)
    nf = free.size
    kkt = np.zeros((nf + 1, nf + 1))
    kkt[:nf, :nf] = problem.h[np.ix_(free, free)]
    kkt[:nf, nf] = 1.0
    kkt[nf, :nf] = 1.0
    rhs = np.concatenate([-g[free], [0.0]])
    try:
        sol = np.linalg.solve(kkt, rhs)
        if not np.all(np.isfinite(sol)) or np.linalg.norm(kkt @ sol - rhs) > 1e-8 * (1.0 + np.linalg.norm(rhs)):
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    p = np.zeros(problem.dim)
    p[free] = sol[:nf]
    return p, float(sol[nf])


def solve_simplex_qp(
    problem: QpProblem,
    w0=None,
    max_iter: int | None = None,
    keep_trace: bool = True,
) -> QpSolution:
    """Primal active-set solve starting from a feasible point (default uniform)."""
    m = problem.dim
    if w0 is None:
        w = np.full(m, problem.eq_sum / m)
    else:
        w = as_vector(w0, "w0").copy()
        if w.size != m:
            raise DimensionError(f"w0 has length {w.size}, expected {m}")
        if w.min() < -1e-12 or abs(w.sum() - problem.eq_sum) > 1e-10:
            raise FeasibilityError("starting point is not feasible")
        w = np.clip(w, 0.0, None)
    if max_iter is None:
        max_iter = 100 * m

    working = [i for i in range(m) if w[i] <= 0.0]
    trace: list[dict] = []
    scale = 1.0 + np.abs(problem.h).max() + np.abs(problem.c).max()

    for iteration in range(max_iter):
        obj = problem.objective(w)
        if keep_trace:
            trace.append({"iteration": iteration, "objective": obj, "working_set": sorted(working)})
        free = np.array([i for i in range(m) if i not in working], dtype=int)

        if free.size == 0:
            p, mu = np.zeros(m), 0.0
        else:
            p, mu = _subproblem_step(problem, w, free)

        if np.abs(p).max(initial=0.0) <= STEP_TOL * scale:
            g = problem.gradient(w)
            if free.size == 0:
                mu = -g.min()  # any mu making some multiplier zero; pick least binding
            lam = {i: float(g[i] + mu) for i in working}
            if not lam or min(lam.values()) >= MULTIPLIER_DROP_TOL:
                return QpSolution(
                    w=w,
                    objective=problem.objective(w),
                    active_set=tuple(sorted(working)),
                    multipliers=lam,
                    eq_multiplier=mu,
                    iterations=iteration + 1,
                    trace=trace,
                )
            drop = min((val, idx) for idx, val in lam.items())[1]
            working.remove(drop)
            continue

        # Ratio test against the bounds of decreasing free variables.
        alpha = 1.0
        blocking = None
        for i in free:
            if p[i] < -STEP_TOL * scale:
                ratio = -w[i] / p[i]
                if ratio < alpha - 1e-15:
                    alpha, blocking = ratio, int(i)
        alpha = max(alpha, 0.0)
        w = w + alpha * p
        np.clip(w, 0.0, None, out=w)
        if blocking is not None:
            w[blocking] = 0.0
            working.append(blocking)

    best = QpSolution(
        w=w,
        objective=problem.objective(w),
        active_set=tuple(sorted(working)),
        multipliers={},
        eq_multiplier=0.0,
        iterations=max_iter,
        trace=trace,
    )
    raise ConvergenceError(f"active-set solver did not converge in {max_iter} iterations", best=best)


def check_kkt(problem: QpProblem, w, tol: float = 1e-8, active_tol: float = 1e-9) -> KktReport:
    """Report KKT residuals of ``w`` for the simplex QP."""
    w = as_vector(w, "w")
    if w.size != problem.dim:
        raise DimensionError(f"w has length {w.size}, expected {problem.dim}")
    g = problem.gradient(w)
    active = w <= active_tol
    free = ~active
    if free.any():
        mu = -float(np.mean(g[free]))
        stationarity = float(np.abs(g[free] + mu).max())
    else:
        mu = -float(g.max())
        stationarity = 0.0
    multipliers = g[active] + mu
    min_mult = float(multipliers.min()) if active.any() else 0.0
    bound_violation = float(max(0.0, -w.min()))
    eq_violation = float(abs(w.sum() - problem.eq_sum))
    passed = (
        stationarity <= tol
        and bound_violation <= tol
        and eq_violation <= tol
        and min_mult >= -tol
    )
    return KktReport(stationarity, bound_violation, eq_violation, min_mult, passed)


def write_trace_jsonl(solution: QpSolution, path) -> None:
    """Dump the iteration trace as JSON lines (iteration, objective, working set)."""
    with open(path, "w") as fh:
        for rec in solution.trace:
            fh.write(json.dumps(rec) + "\n")
