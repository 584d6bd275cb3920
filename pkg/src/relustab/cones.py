"""Matrix cone tests: PSD, entrywise-nonnegative, PSD+NN, copositive.

Copositivity (``x' A x >= 0`` for all ``x >= 0``) is co-NP-complete to decide
exactly, so :func:`copositivity_verdict` is three-valued: it layers cheap
sufficient certificates (entrywise nonnegativity, positive semidefiniteness,
a PSD-plus-nonnegative decomposition found by semidefinite programming) over
an exhaustive dyadic simplex grid search for counterexamples, and returns
``Unknown`` when neither side resolves.  For n <= 4 the PSD+NN layer is a
complete characterisation, so ``Unknown`` can only occur for n >= 5; the
classical 5x5 Horn matrix is copositive yet escapes every certificate layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import cvxpy as cp
import numpy as np

from ._cvx import SolverFailure, solve_problem

__all__ = [
    "COPOSITIVE",
    "NOT_COPOSITIVE",
    "UNKNOWN",
    "CopositivityVerdict",
    "symmetrize",
    "is_psd",
    "is_entrywise_nonneg",
    "psd_plus_nn_membership",
    "copositivity_verdict",
    "horn_matrix",
]

COPOSITIVE = "Copositive"
NOT_COPOSITIVE = "NotCopositive"
UNKNOWN = "Unknown"

# Lattice sizes beyond this are not enumerated; the verdict simply stays
# Unknown rather than exhausting memory on high-dimensional grids.
_GRID_BUDGET = 2_000_000


def symmetrize(A: np.ndarray) -> np.ndarray:
    """Return ``(A + A') / 2``; rejects non-square input."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return 0.5 * (A + A.T)


def is_psd(A: np.ndarray, tol: float = 1e-9) -> bool:
    """Eigenvalue test ``lambda_min(sym(A)) >= -tol``."""
    A = symmetrize(A)
    return bool(np.linalg.eigvalsh(A)[0] >= -tol)


def is_entrywise_nonneg(A: np.ndarray, tol: float = 1e-12) -> bool:
    """All entries ``>= -tol``."""
    return bool(np.min(np.asarray(A, dtype=float)) >= -tol)


def psd_plus_nn_membership(A: np.ndarray, tol: float = 1e-8,
                           solver: str | None = None) -> bool:
    """Decide whether ``sym(A) = Q1 + Q2`` with ``Q1`` PSD and ``Q2 >= 0``.

    Solved as the always-feasible slack program

        minimize t  s.t.  sym(A) - Q1 >= -t entrywise,  Q1 PSD,

    whose optimum is zero exactly on the (closed) cone PSD + NN; membership
    is declared when the optimal slack is below ``tol`` relative to the
    entry scale.

    Raises
    ------
    SolverFailure
        If the backend terminates abnormally.
    """
    A = symmetrize(A)
    n = A.shape[0]
    scale = max(1.0, float(np.abs(A).max()))
    Q1 = cp.Variable((n, n), PSD=True)
    t = cp.Variable()
    prob = cp.Problem(cp.Minimize(t), [A - Q1 >= -t])
    t_opt = solve_problem(prob, solver=solver)
    return t_opt <= tol * scale


@dataclass(frozen=True)
class CopositivityVerdict:
    """Outcome of :func:`copositivity_verdict`.

    ``witness`` and ``value`` are populated exactly when ``status`` is
    ``NotCopositive``; the witness lies on the unit simplex and its quadratic
    value is strictly negative.  ``method`` names the deciding layer.
    """

    status: str
    witness: np.ndarray | None = None
    value: float | None = None
    method: str = ""


def _simplex_lattice(n: int, total: int) -> np.ndarray:
    """All nonnegative integer n-vectors summing to ``total``, stacked."""
    if n == 1:
        return np.array([[total]], dtype=np.int64)
    blocks = []
    for first in range(total + 1):
        rest = _simplex_lattice(n - 1, total - first)
        block = np.empty((rest.shape[0], n), dtype=np.int64)
        block[:, 0] = first
        block[:, 1:] = rest
        blocks.append(block)
    return np.vstack(blocks)


def _verdict_2x2(A: np.ndarray) -> CopositivityVerdict:
    # Exact characterisation: a11 >= 0, a22 >= 0, a12 + sqrt(a11 a22) >= 0.
    a11, a22, a12 = A[0, 0], A[1, 1], A[0, 1]
    if a11 < 0.0:
        return CopositivityVerdict(NOT_COPOSITIVE, np.array([1.0, 0.0]),
                                   float(a11), "exact2x2")
    if a22 < 0.0:
        return CopositivityVerdict(NOT_COPOSITIVE, np.array([0.0, 1.0]),
                                   float(a22), "exact2x2")
    if a12 + np.sqrt(a11 * a22) >= 0.0:
        return CopositivityVerdict(COPOSITIVE, method="exact2x2")
    # Interior simplex minimiser of a strictly indefinite off-diagonal case.
    t = (a22 - a12) / (a11 + a22 - 2.0 * a12)
    x = np.array([t, 1.0 - t])
    return CopositivityVerdict(NOT_COPOSITIVE, x, float(x @ A @ x),
                               "exact2x2")


def copositivity_verdict(A: np.ndarray, depth: int = 4,
                         solver: str | None = None) -> CopositivityVerdict:
    """Three-valued copositivity test for a symmetric matrix.

    Certificate layers (in order): entrywise nonnegativity; the exact n <= 2
    characterisations; positive semidefiniteness; PSD+NN membership.  If none
    applies, dyadic simplex grids of resolution ``2**d`` for ``d = 0..depth``
    are scanned for a strictly negative sample, which is returned as a
    witness.  Deeper grids only refine previous ones, so verdicts never flip
    between ``Copositive`` and ``NotCopositive`` as ``depth`` grows.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    A = symmetrize(A)
    n = A.shape[0]
    if n == 1:
        if A[0, 0] >= 0.0:
            return CopositivityVerdict(COPOSITIVE, method="exact1x1")
        return CopositivityVerdict(NOT_COPOSITIVE, np.array([1.0]),
                                   float(A[0, 0]), "exact1x1")
    if is_entrywise_nonneg(A):
        return CopositivityVerdict(COPOSITIVE, method="entrywise")
    if n == 2:
        return _verdict_2x2(A)
    if is_psd(A):
        return CopositivityVerdict(COPOSITIVE, method="psd")
    try:
        if psd_plus_nn_membership(A, solver=solver):
            return CopositivityVerdict(COPOSITIVE, method="psd_plus_nn")
    except SolverFailure:
        # The certificate layer is optional for soundness: fall through to
        # the grid search rather than aborting.
        pass
    # Negative grid samples are accepted only beyond a roundoff guard so a
    # zero lattice value never masquerades as a counterexample.
    guard = 1e-12 * max(1.0, float(np.abs(A).max()))
    for d in range(depth + 1):
        total = 2 ** d
        if comb(total + n - 1, n - 1) > _GRID_BUDGET:
            break
        lattice = _simplex_lattice(n, total)
        X = lattice.astype(float) / float(total)
        vals = np.einsum("ij,jk,ik->i", X, A, X)
        idx = int(np.argmin(vals))
        if vals[idx] < -guard:
            x = X[idx]
            return CopositivityVerdict(NOT_COPOSITIVE, x, float(x @ A @ x),
                                       f"grid_depth_{d}")
    return CopositivityVerdict(UNKNOWN, method="exhausted")


def horn_matrix() -> np.ndarray:
    """The 5x5 Horn matrix: copositive but not in PSD + NN.

    Circulant with first row ``(1, -1, 1, 1, -1)``; the standard witness
    that the PSD+NN certificate layer is incomplete from dimension 5 on.
    """
    row = np.array([1.0, -1.0, 1.0, 1.0, -1.0])
    return np.array([np.roll(row, k) for k in range(5)])
