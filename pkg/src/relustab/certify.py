"""Stability test assembly, solving, verification, and gain bounds.

The central object is the feasibility condition: the network is certified
finite-gain l2 stable if there exist ``P`` PSD, ``S`` positive diagonal and
a multiplier ``Pi`` from a chosen family such that

    blkdiag(-P, -S)
      + [[Lam, W_in], [W_out, 0]]' blkdiag(P, S) [[Lam, W_in], [W_out, 0]]
      + [[W_out, 0], [0, I]]' Pi [[W_out, 0], [0, I]]   is negative definite.

Strictness is encoded as ``lmi <= -eps I`` and decided by maximising the
margin ``t`` in ``lmi <= -t I`` (always feasible in the decision variables,
since the constraint is homogeneous), so solver infeasibility codes never
have to be trusted: a clean optimum below ``eps`` *is* the infeasibility
verdict.  Every reported certificate is re-verified numerically, eigenvalue
by eigenvalue, independent of the conic backend.
"""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass
from typing import Any, Mapping

import cvxpy as cp
import numpy as np

from ._cvx import SolverFailure, solve_problem
from .dynamics import RnnModel
from .multipliers import (
    FREE,
    NONNEG,
    NONPOS,
    POS_DIAG,
    PSD,
    PSD_GEQ,
    SYM,
    MultiplierFamily,
    _bmat,
    _diag,
    assignment_violations,
    cop0_family,
    copositive_family,
    family_sum,
    polytopic_family,
    zames_falb_family,
    zero_family,
)

__all__ = [
    "FEASIBLE",
    "INFEASIBLE",
    "SOLVER_FAILURE",
    "TestId",
    "SolverOptions",
    "FeasibilityProblem",
    "Certificate",
    "SolveOutcome",
    "VerificationReport",
    "TestResult",
    "assemble",
    "solve",
    "verify_certificate",
    "family_for_test",
    "run_test",
    "certificate_gain_bound",
    "certificate_to_dict",
    "certificate_from_dict",
    "save_certificate",
    "load_certificate",
]

FEASIBLE = "Feasible"
INFEASIBLE = "Infeasible"
SOLVER_FAILURE = "SolverFailure"


class TestId(enum.Enum):
    """The stability test battery, ordered by multiplier richness.

    ``SG`` is the unscaled small-gain baseline (``Pi = 0``, ``S = I``
    frozen); ``SSG`` frees the diagonal scaling; the remaining tests add
    multiplier families on top of the scaled small-gain condition.
    """

    SG = "SG"
    SSG = "SSG"
    L2P_SSG = "L2P_SSG"
    SSG_ZF_POL = "SSG_ZF_POL"
    SSG_ZF_POL_COP = "SSG_ZF_POL_COP"

    @classmethod
    def parse(cls, token: str) -> "TestId":
        """Accept canonical names or the Roman-numeral aliases I..IV."""
        key = str(token).strip().upper()
        aliases = {
            "I": cls.SSG,
            "II": cls.L2P_SSG,
            "III": cls.SSG_ZF_POL,
            "IV": cls.SSG_ZF_POL_COP,
        }
        if key in aliases:
            return aliases[key]
        try:
            return cls[key]
        except KeyError:
            raise ValueError(
                f"unknown test {token!r}; expected one of "
                f"{[t.name for t in cls]} or I, II, III, IV") from None


def family_for_test(test: TestId, m: int) -> MultiplierFamily:
    """The multiplier family each test searches over."""
    if test in (TestId.SG, TestId.SSG):
        return zero_family(m)
    if test is TestId.L2P_SSG:
        return cop0_family(m)
    if test is TestId.SSG_ZF_POL:
        return family_sum([zames_falb_family(m), polytopic_family(m)])
    if test is TestId.SSG_ZF_POL_COP:
        return family_sum([zames_falb_family(m), polytopic_family(m),
                           copositive_family(m)])
    raise ValueError(f"unknown test {test!r}")


@dataclass
class SolverOptions:
    """Backend selection and numeric knobs shared by the test battery."""

    solver: str | None = None
    tolerance: float | None = None
    max_iter: int | None = None
    verbose: bool = False
    eps: float | None = None     # LMI strictness; None => data-scaled default
    s_min: float = 1e-6          # floor on the diagonal scaling S


def _solver_kwargs(opts: SolverOptions) -> dict[str, Any]:
    solver = (opts.solver or "CLARABEL").upper()
    kwargs: dict[str, Any] = {}
    if opts.tolerance is not None:
        if solver == "CLARABEL":
            kwargs.update(tol_gap_abs=opts.tolerance,
                          tol_gap_rel=opts.tolerance,
                          tol_feas=opts.tolerance)
        elif solver == "SCS":
            kwargs.update(eps=opts.tolerance)
    if opts.max_iter is not None:
        if solver == "SCS":
            kwargs.update(max_iters=opts.max_iter)
        else:
            kwargs.update(max_iter=opts.max_iter)
    return kwargs


@dataclass(frozen=True)
class FeasibilityProblem:
    """An assembled stability LMI for one model/family pair.

    ``s_fixed`` freezes the diagonal scaling (used by the unscaled
    small-gain test); otherwise ``S`` is a decision variable floored at
    ``s_min``.  The LMI map itself is backend-agnostic: it accepts numpy
    arrays or cvxpy expressions for ``P``, ``s`` and ``pi``.
    """

    model: RnnModel
    family: MultiplierFamily
    eps: float
    s_min: float
    s_fixed: np.ndarray | None = None

    def __post_init__(self):
        if self.family.m != self.model.m:
            raise ValueError(
                f"family channel m={self.family.m} does not match model "
                f"m={self.model.m}")
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")
        if self.s_min <= 0.0:
            raise ValueError("s_min must be positive")
        if self.s_fixed is not None:
            s = np.asarray(self.s_fixed, dtype=float)
            if s.shape != (self.model.m,):
                raise ValueError(f"s_fixed must have shape ({self.model.m},)")
            if s.min() < self.s_min:
                raise ValueError("s_fixed violates the s_min floor")
            object.__setattr__(self, "s_fixed", s)

    def lmi(self, P, s, pi):
        """Evaluate the stability LMI at ``(P, diag(s), pi)``."""
        model = self.model
        n, m = model.n, model.m
        G = np.block([[model.Lambda, model.W_in],
                      [model.W_out, np.zeros((m, m))]])
        K = np.block([[model.W_out, np.zeros((m, m))],
                      [np.zeros((m, n)), np.eye(m)]])
        PS = _bmat([[P, np.zeros((n, m))], [np.zeros((m, n)), _diag(s)]])
        return -PS + G.T @ PS @ G + K.T @ pi @ K


def assemble(model: RnnModel, family: MultiplierFamily,
             eps: float | None = None, s_min: float = 1e-6,
             s_fixed: np.ndarray | None = None) -> FeasibilityProblem:
    """Build the feasibility problem for a model and multiplier family.

    The default strictness parameter scales with the data,
    ``eps = 1e-6 * (1 + max |entry|)`` over the model matrices, so that
    certificates of large and small systems are equally meaningful.
    """
    if eps is None:
        scale = max(float(np.abs(M).max()) for M in
                    (model.Lambda, model.W_in, model.W_out))
        eps = 1e-6 * (1.0 + scale)
    return FeasibilityProblem(model=model, family=family, eps=eps,
                              s_min=s_min, s_fixed=s_fixed)


@dataclass
class Certificate:
    """A candidate stability certificate ``(P, S, multiplier assignment)``.

    ``margin`` is the recomputed strictness ``-lambda_max(lmi)`` at the
    stored values, not the raw solver objective; verification reproduces it
    independently.  ``model_ref`` optionally records how to rebuild the
    model (builtin ``(a, b)`` parameters) for certificate files.
    """

    P: np.ndarray
    S: np.ndarray
    assignment: dict[str, np.ndarray]
    pi: np.ndarray
    eps: float
    s_min: float
    margin: float
    solve_ms: float
    test: str | None = None
    model_ref: dict[str, float] | None = None


@dataclass(frozen=True)
class SolveOutcome:
    """Result of one margin-maximisation solve.

    ``status`` is one of ``Feasible`` (with certificate), ``Infeasible``
    (clean optimum below the strictness threshold) or ``SolverFailure``
    (abnormal/ambiguous backend termination; never a stability verdict).
    """

    status: str
    certificate: Certificate | None = None
    detail: str = ""
    solve_ms: float = 0.0


def _make_block_variable(shape: tuple[int, ...], cone: str):
    if cone == FREE:
        return cp.Variable(shape), []
    if cone == SYM:
        return cp.Variable(shape, symmetric=True), []
    if cone == PSD:
        return cp.Variable(shape, PSD=True), []
    if cone == NONNEG:
        V = cp.Variable(shape, symmetric=True)
        return V, [V >= 0]
    if cone == POS_DIAG:
        v = cp.Variable(shape)
        return v, [v >= 0]
    raise ValueError(f"unknown cone tag {cone!r}")


def solve(problem: FeasibilityProblem,
          options: SolverOptions | None = None) -> SolveOutcome:
    """Decide the feasibility problem by maximising the LMI margin.

    Solves ``max t  s.t.  lmi <= -t I, t <= 1`` plus the family membership
    constraints.  This program is always feasible, so a clean solver optimum
    is available on both sides of the verdict: ``t* >= eps`` certifies
    feasibility (values are extracted into a :class:`Certificate`) and
    ``t* < eps`` certifies that no eps-strict solution exists.
    """
    opts = options or SolverOptions()
    model, family = problem.model, problem.family
    n, m = model.n, model.m

    P = cp.Variable((n, n), PSD=True)
    constraints: list = []
    if problem.s_fixed is not None:
        s = problem.s_fixed
    else:
        s = cp.Variable(m)
        constraints.append(s >= problem.s_min)

    block_vars: dict[str, Any] = {}
    for blk in family.blocks:
        var, cons = _make_block_variable(blk.shape, blk.cone)
        block_vars[blk.name] = var
        constraints.extend(cons)
    for con in family.constraints:
        expr = con.fn(block_vars)
        if con.kind == NONPOS:
            constraints.append(expr <= 0)
        elif con.kind == PSD_GEQ:
            constraints.append(expr >> 0)
        else:
            raise ValueError(f"unknown constraint kind {con.kind!r}")

    pi = family.pi_map(block_vars) if family.blocks else \
        np.zeros((2 * m, 2 * m))
    t = cp.Variable()
    lmi = problem.lmi(P, s, pi)
    constraints += [lmi << -t * np.eye(n + m), t <= 1.0]

    prob = cp.Problem(cp.Maximize(t), constraints)
    start = time.perf_counter()
    try:
        t_opt = solve_problem(prob, solver=opts.solver,
                              verbose=opts.verbose, **_solver_kwargs(opts))
    except SolverFailure as exc:
        elapsed = 1e3 * (time.perf_counter() - start)
        return SolveOutcome(SOLVER_FAILURE, detail=exc.detail,
                            solve_ms=elapsed)
    elapsed = 1e3 * (time.perf_counter() - start)

    if t_opt < problem.eps:
        return SolveOutcome(
            INFEASIBLE, solve_ms=elapsed,
            detail=f"max margin {t_opt:.3e} below eps {problem.eps:.3e}")

    P_val = 0.5 * (P.value + P.value.T)
    s_val = (problem.s_fixed if problem.s_fixed is not None
             else np.asarray(s.value, dtype=float))
    assignment = {name: np.asarray(var.value, dtype=float)
                  for name, var in block_vars.items()}
    pi_val = (np.asarray(family.pi_map(assignment), dtype=float)
              if family.blocks else np.zeros((2 * m, 2 * m)))
    lmi_val = problem.lmi(P_val, s_val, pi_val)
    margin = -float(np.linalg.eigvalsh(lmi_val)[-1])
    cert = Certificate(P=P_val, S=s_val, assignment=assignment, pi=pi_val,
                       eps=problem.eps, s_min=problem.s_min, margin=margin,
                       solve_ms=elapsed)
    return SolveOutcome(FEASIBLE, certificate=cert, solve_ms=elapsed)


@dataclass(frozen=True)
class VerificationReport:
    """Independent numeric audit of a certificate.

    ``worst_constraint_violation`` covers the cone and family membership
    conditions; the LMI strictness and margin reproduction are reported
    separately.  All comparisons are relative to the certificate's entry
    scale, so large-valued certificates are not penalised.
    """

    verified: bool
    lmi_max_eig: float
    worst_constraint_violation: float
    details: dict[str, float]


def verify_certificate(model: RnnModel, family: MultiplierFamily,
                       cert: Certificate,
                       tol: float = 1e-8) -> VerificationReport:
    """Re-check a certificate with plain eigenvalue computations.

    Verifies, without consulting any solver: PSD-ness of ``P``, the
    ``S >= s_min I`` floor, every family cone/affine constraint, agreement
    of the stored multiplier with the one recomputed from the assignment,
    strictness ``lambda_max(lmi) <= -eps/2``, and reproduction of the
    recorded margin to 1e-6 relative accuracy.
    """
    details: dict[str, float] = {}
    scale = max(
        [1.0, float(np.abs(cert.P).max()), float(np.abs(cert.S).max())]
        + [float(np.abs(v).max()) for v in cert.assignment.values()])

    details["P_min_eig"] = float(np.linalg.eigvalsh(
        0.5 * (cert.P + cert.P.T))[0])
    details["P_asym"] = float(np.abs(cert.P - cert.P.T).max())
    details["S_min"] = float(np.min(cert.S))

    fam_report = assignment_violations(family, cert.assignment)
    details.update(fam_report)

    if family.blocks:
        pi_recomputed = np.asarray(family.pi_map(cert.assignment),
                                   dtype=float)
    else:
        pi_recomputed = np.zeros_like(cert.pi)
    details["pi_mismatch"] = float(np.abs(pi_recomputed - cert.pi).max())

    problem = FeasibilityProblem(model=model, family=family, eps=cert.eps,
                                 s_min=cert.s_min)
    lmi_val = problem.lmi(cert.P, cert.S, pi_recomputed)
    lmi_max_eig = float(np.linalg.eigvalsh(lmi_val)[-1])
    details["lmi_max_eig"] = lmi_max_eig

    margin_err = abs(-lmi_max_eig - cert.margin) / max(1.0, abs(cert.margin))
    details["margin_reproduction_error"] = margin_err

    cone_violations = (
        [max(0.0, -details["P_min_eig"]), details["P_asym"],
         max(0.0, cert.s_min - details["S_min"]),
         details["pi_mismatch"]]
        + list(fam_report.values()))
    worst = max(cone_violations)

    verified = bool(
        worst <= tol * scale
        and lmi_max_eig <= -cert.eps / 2.0
        and margin_err <= 1e-6)
    return VerificationReport(verified=verified, lmi_max_eig=lmi_max_eig,
                              worst_constraint_violation=worst,
                              details=details)


@dataclass(frozen=True)
class TestResult:
    """Outcome of one stability test on one model."""

    test: TestId
    status: str
    verified: bool
    margin: float | None
    solve_ms: float
    certificate: Certificate | None = None
    detail: str = ""


def run_test(model: RnnModel, test: TestId,
             options: SolverOptions | None = None) -> TestResult:
    """Assemble, solve and verify one test from the battery.

    A result is reported ``Feasible`` only if the extracted certificate
    passes :func:`verify_certificate`; a solver-feasible but unverifiable
    outcome is demoted to ``SolverFailure`` rather than trusted.
    """
    opts = options or SolverOptions()
    family = family_for_test(test, model.m)
    s_fixed = np.ones(model.m) if test is TestId.SG else None
    problem = assemble(model, family, eps=opts.eps, s_min=opts.s_min,
                       s_fixed=s_fixed)
    outcome = solve(problem, opts)
    if outcome.status != FEASIBLE:
        return TestResult(test=test, status=outcome.status, verified=False,
                          margin=None, solve_ms=outcome.solve_ms,
                          detail=outcome.detail)
    cert = outcome.certificate
    cert.test = test.name
    report = verify_certificate(model, family, cert)
    if not report.verified:
        return TestResult(
            test=test, status=SOLVER_FAILURE, verified=False, margin=None,
            solve_ms=outcome.solve_ms, certificate=cert,
            detail=("solver-feasible point failed verification: worst "
                    f"violation {report.worst_constraint_violation:.3e}, "
                    f"lmi max eig {report.lmi_max_eig:.3e}"))
    return TestResult(test=test, status=FEASIBLE, verified=True,
                      margin=cert.margin, solve_ms=outcome.solve_ms,
                      certificate=cert)


def certificate_gain_bound(cert: Certificate, model: RnnModel,
                           eps_grid: int = 32,
                           nu_rel_tol: float = 1e-3) -> float:
    """Extract a finite l2 gain bound ``gamma`` from a verified certificate.

    Searches for the smallest ``gamma = sqrt(nu^2 / eps^2 + 2)`` such that
    the dissipation inequality behind the stability LMI still closes with a
    loss term ``eps^2 |z|^2`` and a supply term ``nu^2 (|s|^2 + |v|^2)``:
    concretely, such that

        blkdiag(-P + eps^2 Wout' Wout, -S, -nu^2 I, -nu^2 I)
          + H' blkdiag(P, S) H + Ke' Pi Ke  <=  0,

    where ``H`` and ``Ke`` route the extended signal ``(x, w, v, s)``
    through the dynamics and the nonlinearity channel.  The matrix is
    monotone in ``nu^2``, so for each ``eps`` on a grid the least admissible
    ``nu`` is found by bisection.  The result is a true upper bound on the
    l2 gain from ``(s, v)`` to ``(z, w)``; it is not tight.

    Raises
    ------
    ValueError
        If the certificate's core conditions do not hold on re-check.
    """
    n, m = model.n, model.m
    P, s, pi = cert.P, cert.S, cert.pi
    base_problem = FeasibilityProblem(
        model=model, family=zero_family(m), eps=cert.eps, s_min=cert.s_min)
    lmi_val = base_problem.lmi(P, s, pi)
    margin = -float(np.linalg.eigvalsh(lmi_val)[-1])
    if (margin < cert.eps / 2.0
            or float(np.linalg.eigvalsh(0.5 * (P + P.T))[0]) < -1e-8
            or float(s.min()) < cert.s_min * (1 - 1e-6)):
        raise ValueError("certificate does not verify; gain bound refused")

    Wout = model.W_out
    Wq = Wout.T @ Wout
    lam_w = float(np.linalg.eigvalsh(Wq)[-1])
    # eps is capped so the -P + eps^2 Wout'Wout block cannot eat more than
    # the certified margin; with Wout = 0 the cap is only nominal.
    if lam_w > 1e-12:
        eps_max = np.sqrt(0.999 * margin / lam_w)
    else:
        eps_max = 1e6 * np.sqrt(max(margin, 1.0))

    H = np.block([
        [model.Lambda, model.W_in, np.eye(n), np.zeros((n, m))],
        [Wout, np.zeros((m, m)), np.zeros((m, n)), np.eye(m)],
    ])
    Ke = np.block([
        [Wout, np.zeros((m, m)), np.zeros((m, n)), np.eye(m)],
        [np.zeros((m, n)), np.eye(m), np.zeros((m, n)), np.zeros((m, m))],
    ])
    PS = np.block([[P, np.zeros((n, m))], [np.zeros((m, n)), np.diag(s)]])
    fixed = H.T @ PS @ H + Ke.T @ pi @ Ke

    def closes(eps_val: float, nu: float) -> bool:
        M = fixed.copy()
        M[:n, :n] += -0.5 * (P + P.T) + eps_val ** 2 * Wq
        M[n:n + m, n:n + m] += -np.diag(s)
        idx = n + m
        M[idx:idx + n, idx:idx + n] += -nu ** 2 * np.eye(n)
        M[idx + n:, idx + n:] += -nu ** 2 * np.eye(m)
        return float(np.linalg.eigvalsh(M)[-1]) <= 0.0

    best = np.inf
    grid = np.unique(np.concatenate([
        np.linspace(eps_max / eps_grid, eps_max, eps_grid),
        eps_max * np.logspace(-3, 0, 8),
    ]))
    for eps_val in grid:
        if closes(eps_val, 0.0):
            best = min(best, float(np.sqrt(2.0)))
            continue
        hi = 1.0
        for _ in range(80):
            if closes(eps_val, hi):
                break
            hi *= 2.0
        else:
            continue
        lo = 0.0
        while hi - lo > nu_rel_tol * max(hi, 1.0):
            mid = 0.5 * (lo + hi)
            if closes(eps_val, mid):
                hi = mid
            else:
                lo = mid
        best = min(best, float(np.sqrt(hi ** 2 / eps_val ** 2 + 2.0)))
    if not np.isfinite(best):
        raise ValueError("gain bound extraction failed to close the "
                         "dissipation inequality on the eps grid")
    return best


def _encode_array(arr: np.ndarray) -> dict[str, Any]:
    arr = np.asarray(arr, dtype=float)
    return {"shape": list(arr.shape), "data": arr.ravel(order="C").tolist()}


def _decode_array(obj: Mapping[str, Any]) -> np.ndarray:
    return np.asarray(obj["data"], dtype=float).reshape(obj["shape"])


def certificate_to_dict(cert: Certificate) -> dict[str, Any]:
    """JSON-ready encoding (matrices row-major, with dimensions)."""
    return {
        "format": "relustab-certificate-v1",
        "test": cert.test,
        "model": cert.model_ref,
        "eps": cert.eps,
        "s_min": cert.s_min,
        "margin": cert.margin,
        "solve_ms": cert.solve_ms,
        "P": _encode_array(cert.P),
        "S": _encode_array(cert.S),
        "pi": _encode_array(cert.pi),
        "assignment": {k: _encode_array(v)
                       for k, v in cert.assignment.items()},
    }


def certificate_from_dict(obj: Mapping[str, Any]) -> Certificate:
    if obj.get("format") != "relustab-certificate-v1":
        raise ValueError(f"unrecognised certificate format "
                         f"{obj.get('format')!r}")
    return Certificate(
        P=_decode_array(obj["P"]),
        S=_decode_array(obj["S"]),
        assignment={k: _decode_array(v)
                    for k, v in obj["assignment"].items()},
        pi=_decode_array(obj["pi"]),
        eps=float(obj["eps"]),
        s_min=float(obj["s_min"]),
        margin=float(obj["margin"]),
        solve_ms=float(obj["solve_ms"]),
        test=obj.get("test"),
        model_ref=obj.get("model"),
    )


def save_certificate(cert: Certificate, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(certificate_to_dict(cert), fh, indent=2)
        fh.write("\n")


def load_certificate(path: str) -> Certificate:
    with open(path, "r", encoding="utf-8") as fh:
        return certificate_from_dict(json.load(fh))
