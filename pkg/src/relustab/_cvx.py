"""Shared conic-solver plumbing.

All semidefinite programs in this package go through :func:`solve_problem`,
which normalises solver selection and maps backend termination statuses onto
a small, predictable contract: clean optima pass through, everything else
raises :class:`SolverFailure`.
"""

from __future__ import annotations

import cvxpy as cp

DEFAULT_SOLVER = "CLARABEL"

# Statuses that mean "the reported optimum can be trusted".
_CLEAN = (cp.OPTIMAL,)
# Statuses that mean "the solver finished but the answer is not reliable".
_DIRTY = (
    cp.OPTIMAL_INACCURATE,
    cp.INFEASIBLE_INACCURATE,
    cp.UNBOUNDED_INACCURATE,
    cp.USER_LIMIT,
)


class SolverFailure(RuntimeError):
    """A conic backend terminated abnormally or ambiguously."""

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


def solve_problem(problem: cp.Problem, solver: str | None = None,
                  verbose: bool = False, **solver_opts) -> float:
    """Solve a cvxpy problem and return the optimal value.

    Raises
    ------
    SolverFailure
        If the backend errors out or terminates with any status other than
        a clean optimum (inaccurate, infeasible, unbounded, iteration cap).
    """
    chosen = solver or DEFAULT_SOLVER
    try:
        problem.solve(solver=chosen, verbose=verbose, **solver_opts)
    except cp.error.SolverError as exc:
        raise SolverFailure(f"{chosen}: {exc}") from exc
    if problem.status in _CLEAN:
        return float(problem.value)
    if problem.status in _DIRTY or problem.status is None:
        raise SolverFailure(f"{chosen}: ambiguous termination status "
                            f"{problem.status!r}")
    # cp.INFEASIBLE / cp.UNBOUNDED: structurally impossible for the programs
    # built in this package (all are feasible by construction), so treat as
    # a backend fault rather than a mathematical verdict.
    raise SolverFailure(f"{chosen}: unexpected status {problem.status!r}")
