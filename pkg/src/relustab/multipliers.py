"""IQC multiplier families for the repeated ReLU nonlinearity.

A multiplier family is a parametrised set of symmetric ``2m x 2m`` matrices
``Pi`` such that every member satisfies the pointwise quadratic constraint

    [xi; relu(xi)]' Pi [xi; relu(xi)] >= 0   for all xi in R^m.

Each family is described declaratively: named decision blocks with cone
tags, affine membership constraints, and a map from a block assignment to
``Pi``.  The same description drives both semidefinite programming (blocks
become cvxpy variables) and plain numeric evaluation (blocks are ndarrays),
so the map and constraints are written against a small operator dispatch
layer instead of a fixed backend.

Families provided:

* ``zames_falb_family``  -- doubly hyperdominant ``M`` conjugated by the
  sector transformation ``T = [[nu I, -I], [-mu I, I]]``;
* ``polytopic_family``   -- full-block ``[[X, Y], [Y', Z]]`` certified on the
  ``2^m`` vertices of the diagonal repeated-sector box;
* ``diag_sector_family`` -- decoupled sector quadratic with a nonnegative
  diagonal scaling;
* ``copositive_family``  -- ``R' Q R`` where ``R`` maps ``[xi; relu(xi)]`` to
  a nonnegative vector and ``Q`` is PSD plus entrywise nonnegative;
* ``cop0_family``        -- the copositive family with the blocks acting on
  the output copy only (``Pi = blkdiag(0, Q1 + Q2)``);
* ``zero_family``        -- the trivial family ``{0}``;

plus :func:`family_sum` for Minkowski sums of families on the same channel.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import cvxpy as cp
import numpy as np

from .dynamics import relu

__all__ = [
    "FREE",
    "SYM",
    "PSD",
    "NONNEG",
    "POS_DIAG",
    "NONPOS",
    "PSD_GEQ",
    "VarBlock",
    "AffineConstraint",
    "MultiplierFamily",
    "zero_family",
    "zames_falb_family",
    "polytopic_family",
    "diag_sector_family",
    "copositive_family",
    "cop0_family",
    "family_sum",
    "sample_assignment",
    "assignment_violations",
    "pointwise_iqc_value",
]

# Cone tags for decision blocks.
FREE = "free"            # unstructured matrix
SYM = "sym"              # symmetric matrix
PSD = "psd"              # symmetric positive semidefinite matrix
NONNEG = "nonneg"        # symmetric entrywise-nonnegative matrix
POS_DIAG = "pos_diag"    # nonnegative vector holding a diagonal

# Constraint kinds.
NONPOS = "nonpos"        # expression <= 0 entrywise
PSD_GEQ = "psd"          # expression >= 0 in the semidefinite order


def _is_expr(x: Any) -> bool:
    return isinstance(x, cp.Expression)


def _bmat(rows) -> Any:
    if any(_is_expr(e) for row in rows for e in row):
        return cp.bmat(rows)
    return np.block([[np.atleast_2d(e) for e in row] for row in rows])


def _diag(v) -> Any:
    return cp.diag(v) if _is_expr(v) else np.diag(np.asarray(v, dtype=float))


def _emul(a, b) -> Any:
    # cvxpy's ``*`` is matrix multiplication, so elementwise products must
    # dispatch explicitly.
    if _is_expr(a) or _is_expr(b):
        return cp.multiply(a, b)
    return np.multiply(a, b)


@dataclass(frozen=True)
class VarBlock:
    """A named decision block with a cone tag.

    ``shape`` is ``(r, c)`` for matrices or ``(k,)`` for diagonal vectors.
    """

    name: str
    shape: tuple[int, ...]
    cone: str


@dataclass(frozen=True)
class AffineConstraint:
    """An affine membership constraint on a block assignment.

    ``fn`` maps an assignment (block name -> ndarray or cvxpy expression) to
    an affine expression constrained ``<= 0`` entrywise (kind ``nonpos``) or
    ``>= 0`` semidefinitely (kind ``psd``).
    """

    name: str
    kind: str
    fn: Callable[[Mapping[str, Any]], Any]


@dataclass(frozen=True)
class MultiplierFamily:
    """Declarative description of an IQC multiplier family on channel m."""

    name: str
    m: int
    blocks: tuple[VarBlock, ...]
    constraints: tuple[AffineConstraint, ...]
    pi_map: Callable[[Mapping[str, Any]], Any]
    sampler: Callable[[np.random.Generator], dict[str, np.ndarray]] | None = \
        field(default=None, compare=False)

    def pi(self, assignment: Mapping[str, Any]) -> Any:
        """Evaluate the multiplier map on a block assignment."""
        missing = {b.name for b in self.blocks} - set(assignment)
        if missing:
            raise KeyError(f"assignment missing blocks {sorted(missing)}")
        return self.pi_map(assignment)


def zero_family(m: int) -> MultiplierFamily:
    """The trivial family ``{0}`` (no decision blocks)."""
    _check_m(m)
    zero = np.zeros((2 * m, 2 * m))
    return MultiplierFamily(
        name="zero", m=m, blocks=(), constraints=(),
        pi_map=lambda vals: zero,
        sampler=lambda rng: {})


def _check_m(m: int) -> None:
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise ValueError(f"channel dimension m must be a positive int, got {m!r}")


def zames_falb_family(m: int, mu: float = 0.0,
                      nu: float = 1.0) -> MultiplierFamily:
    """Zames-Falb multipliers with a doubly hyperdominant kernel.

    The block ``M`` ranges over doubly hyperdominant matrices (nonpositive
    off the diagonal, nonnegative row and column sums) and

        Pi = T' [[0, M'], [M, 0]] T,   T = [[nu I, -I], [-mu I, I]].

    For the ReLU sector ``(mu, nu) = (0, 1)`` this reduces to
    ``Pi = [[0, M'], [M, -(M + M')]]``.  Slope bounds with ``mu > 0`` or
    ``nu < 0`` are rejected: they do not cover the ReLU.
    """
    _check_m(m)
    if mu > 0.0 or nu < 0.0:
        raise ValueError(f"(mu, nu) = ({mu}, {nu}) does not cover the ReLU "
                         "slope range [0, 1]")
    eye = np.eye(m)
    offdiag_mask = 1.0 - eye
    ones = np.ones(m)
    T = np.block([[nu * eye, -eye], [-mu * eye, eye]])
    zero = np.zeros((m, m))

    def pi_map(vals):
        M = vals["M"]
        return T.T @ _bmat([[zero, M.T], [M, zero]]) @ T

    def sampler(rng: np.random.Generator) -> dict[str, np.ndarray]:
        mag = 10.0 ** rng.uniform(-1.0, 1.0)
        N = rng.uniform(0.0, 1.0, (m, m))
        np.fill_diagonal(N, 0.0)
        slack = rng.uniform(0.0, 1.0, m)
        # Diagonal dominating both row and column sums of the removed
        # off-diagonal mass makes M doubly hyperdominant by construction.
        M = np.diag(np.maximum(N.sum(axis=1), N.sum(axis=0)) + slack) - N
        return {"M": mag * M}

    constraints = (
        AffineConstraint("offdiag_nonpos", NONPOS,
                         lambda vals: _emul(offdiag_mask, vals["M"])),
        AffineConstraint("row_sums_nonneg", NONPOS,
                         lambda vals: -(vals["M"] @ ones)),
        AffineConstraint("col_sums_nonneg", NONPOS,
                         lambda vals: -(vals["M"].T @ ones)),
    )
    return MultiplierFamily(
        name="zames_falb", m=m,
        blocks=(VarBlock("M", (m, m), FREE),),
        constraints=constraints, pi_map=pi_map, sampler=sampler)


def _vertex_diagonals(m: int, alpha: float, beta: float) -> list[np.ndarray]:
    """The ``2^m`` diagonal vectors with entries in ``{alpha, beta}``."""
    return [np.array(bits) for bits in
            itertools.product((alpha, beta), repeat=m)]


def polytopic_family(m: int, alpha: float = 0.0, beta: float = 1.0,
                     margin: float = 0.0,
                     vertex_budget: int = 12) -> MultiplierFamily:
    """Full-block multipliers certified on the sector-box vertices.

    ``Pi = [[X, Y], [Y', Z]]`` with ``diag(Z) <= 0`` and, for every diagonal
    ``Delta`` with entries in ``{alpha, beta}``,

        X + Y Delta + Delta Y' + Delta Z Delta >= margin * I.

    Concavity of the vertex form in each diagonal entry (ensured by
    ``diag(Z) <= 0``) extends the ``2^m`` vertex certificates to the whole
    box, which contains the ReLU's instantaneous gains.  The vertex count is
    exponential in ``m``, hence the ``vertex_budget`` guard.
    """
    _check_m(m)
    if alpha > 0.0 or beta < 0.0:
        raise ValueError(f"sector [{alpha}, {beta}] does not contain the "
                         "ReLU gain range [0, 1]")
    if m > vertex_budget:
        raise ValueError(f"m = {m} exceeds the vertex budget {vertex_budget} "
                         f"(2^m vertex constraints)")
    eye = np.eye(m)
    margin_eye = margin * eye
    deltas = _vertex_diagonals(m, alpha, beta)

    def pi_map(vals):
        return _bmat([[vals["X"], vals["Y"]], [vals["Y"].T, vals["Z"]]])

    def vertex_fn(delta: np.ndarray):
        D = np.diag(delta)

        def fn(vals, D=D):
            X, Y, Z = vals["X"], vals["Y"], vals["Z"]
            return X + Y @ D + D @ Y.T + D @ Z @ D - margin_eye

        return fn

    constraints = [AffineConstraint("z_diag_nonpos", NONPOS,
                                    lambda vals: _emul(eye, vals["Z"]))]
    for k, delta in enumerate(deltas):
        constraints.append(
            AffineConstraint(f"vertex_{k}", PSD_GEQ, vertex_fn(delta)))

    def sampler(rng: np.random.Generator) -> dict[str, np.ndarray]:
        Y = rng.uniform(-1.0, 1.0, (m, m))
        Z = rng.uniform(-1.0, 1.0, (m, m))
        Z = 0.5 * (Z + Z.T)
        np.fill_diagonal(Z, -rng.uniform(0.05, 1.0, m))
        worst = max(
            float(np.linalg.eigvalsh(-(Y @ np.diag(d) + np.diag(d) @ Y.T
                                       + np.diag(d) @ Z @ np.diag(d)))[-1])
            for d in deltas)
        G = rng.standard_normal((m, m))
        X = ((margin + max(worst, 0.0) + rng.uniform(0.05, 1.0)) * eye
             + 0.1 * (G @ G.T))
        return {"X": X, "Y": Y, "Z": Z}

    return MultiplierFamily(
        name="polytopic", m=m,
        blocks=(VarBlock("X", (m, m), SYM),
                VarBlock("Y", (m, m), FREE),
                VarBlock("Z", (m, m), SYM)),
        constraints=tuple(constraints), pi_map=pi_map, sampler=sampler)


def diag_sector_family(m: int, alpha: float = 0.0,
                       beta: float = 1.0) -> MultiplierFamily:
    """Decoupled sector multipliers with nonnegative diagonal scaling.

    ``Pi = [[-alpha beta D, (alpha+beta)/2 D], [(alpha+beta)/2 D, -D]]``
    for diagonal ``D >= 0``; each scalar channel contributes
    ``d_i (zeta_i - alpha xi_i)(beta xi_i - zeta_i) >= 0``.  The closure
    ``d_i = 0`` is admitted since it preserves the pointwise constraint.
    """
    _check_m(m)
    if alpha > 0.0 or beta < 0.0:
        raise ValueError(f"sector [{alpha}, {beta}] does not contain the "
                         "ReLU gain range [0, 1]")
    mid = 0.5 * (alpha + beta)

    def pi_map(vals):
        D = _diag(vals["d"])
        return _bmat([[-alpha * beta * D, mid * D], [mid * D, -D]])

    def sampler(rng: np.random.Generator) -> dict[str, np.ndarray]:
        return {"d": 10.0 ** rng.uniform(-1.0, 1.0, m)}

    return MultiplierFamily(
        name="diag_sector", m=m,
        blocks=(VarBlock("d", (m,), POS_DIAG),),
        constraints=(), pi_map=pi_map, sampler=sampler)


def copositive_family(m: int) -> MultiplierFamily:
    """Copositive-cone multipliers via the PSD + NN inner approximation.

    With ``R = [[-I, I], [0, I]]`` the vector ``R [xi; relu(xi)]`` is
    entrywise nonnegative for every ``xi``, so ``Pi = R' (Q1 + Q2) R`` is a
    valid multiplier whenever ``Q1 + Q2`` is copositive; tractability comes
    from restricting to ``Q1`` PSD and ``Q2`` symmetric nonnegative.
    """
    _check_m(m)
    eye = np.eye(m)
    R = np.block([[-eye, eye], [np.zeros((m, m)), eye]])

    def pi_map(vals):
        return R.T @ (vals["Q1"] + vals["Q2"]) @ R

    def sampler(rng: np.random.Generator) -> dict[str, np.ndarray]:
        B = rng.standard_normal((2 * m, 2 * m))
        G = rng.uniform(0.0, 1.0, (2 * m, 2 * m))
        return {"Q1": 10.0 ** rng.uniform(-1.0, 1.0) * (B @ B.T) / (2 * m),
                "Q2": 10.0 ** rng.uniform(-1.0, 1.0) * 0.5 * (G + G.T)}

    return MultiplierFamily(
        name="copositive", m=m,
        blocks=(VarBlock("Q1", (2 * m, 2 * m), PSD),
                VarBlock("Q2", (2 * m, 2 * m), NONNEG)),
        constraints=(), pi_map=pi_map, sampler=sampler)


def cop0_family(m: int) -> MultiplierFamily:
    """Copositive multipliers restricted to the nonlinearity output.

    ``Pi = blkdiag(0, Q1 + Q2)`` with ``Q1`` PSD and ``Q2`` nonnegative;
    valid because ``relu(xi) >= 0`` entrywise.  This is the copositive
    family with the input-copy rows of ``R`` dropped.
    """
    _check_m(m)
    zero = np.zeros((m, m))

    def pi_map(vals):
        return _bmat([[zero, zero], [zero, vals["Q1"] + vals["Q2"]]])

    def sampler(rng: np.random.Generator) -> dict[str, np.ndarray]:
        B = rng.standard_normal((m, m))
        G = rng.uniform(0.0, 1.0, (m, m))
        return {"Q1": 10.0 ** rng.uniform(-1.0, 1.0) * (B @ B.T) / m,
                "Q2": 10.0 ** rng.uniform(-1.0, 1.0) * 0.5 * (G + G.T)}

    return MultiplierFamily(
        name="cop0", m=m,
        blocks=(VarBlock("Q1", (m, m), PSD),
                VarBlock("Q2", (m, m), NONNEG)),
        constraints=(), pi_map=pi_map, sampler=sampler)


def family_sum(families: list[MultiplierFamily]) -> MultiplierFamily:
    """Minkowski sum of multiplier families on the same channel.

    Blocks are namespaced by position (``f0.M``, ``f1.X``, ...) so members
    keep independent decision variables; the multiplier map is the sum of
    the members' maps.  Summing preserves pointwise validity since the
    defining quadratic constraint is closed under addition.
    """
    if not families:
        raise ValueError("family_sum needs at least one family")
    m = families[0].m
    if any(f.m != m for f in families):
        raise ValueError("families must share the channel dimension m")

    def scoped(prefix: str, vals: Mapping[str, Any]) -> dict[str, Any]:
        plen = len(prefix)
        return {k[plen:]: v for k, v in vals.items() if k.startswith(prefix)}

    blocks: list[VarBlock] = []
    constraints: list[AffineConstraint] = []
    for i, fam in enumerate(families):
        prefix = f"f{i}."
        for blk in fam.blocks:
            blocks.append(VarBlock(prefix + blk.name, blk.shape, blk.cone))
        for con in fam.constraints:
            constraints.append(AffineConstraint(
                prefix + con.name, con.kind,
                lambda vals, fn=con.fn, p=prefix: fn(scoped(p, vals))))

    def pi_map(vals):
        total = families[0].pi_map(scoped("f0.", vals))
        for i, fam in enumerate(families[1:], start=1):
            total = total + fam.pi_map(scoped(f"f{i}.", vals))
        return total

    sampler = None
    if all(f.sampler is not None for f in families):
        def sampler(rng: np.random.Generator) -> dict[str, np.ndarray]:
            out: dict[str, np.ndarray] = {}
            for i, fam in enumerate(families):
                for k, v in fam.sampler(rng).items():
                    out[f"f{i}.{k}"] = v
            return out

    return MultiplierFamily(
        name="+".join(f.name for f in families), m=m,
        blocks=tuple(blocks), constraints=tuple(constraints),
        pi_map=pi_map, sampler=sampler)


def sample_assignment(family: MultiplierFamily,
                      rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Draw a random feasible block assignment for the family."""
    if family.sampler is None:
        raise ValueError(f"family {family.name!r} has no sampler")
    return family.sampler(rng)


def _block_violation(block: VarBlock, value: np.ndarray) -> float:
    value = np.asarray(value, dtype=float)
    if value.shape != block.shape:
        raise ValueError(f"block {block.name!r}: expected shape "
                         f"{block.shape}, got {value.shape}")
    viol = 0.0
    if block.cone in (SYM, PSD, NONNEG):
        viol = max(viol, float(np.abs(value - value.T).max()))
    if block.cone == PSD:
        sym = 0.5 * (value + value.T)
        viol = max(viol, max(0.0, -float(np.linalg.eigvalsh(sym)[0])))
    elif block.cone == NONNEG:
        viol = max(viol, max(0.0, -float(value.min())))
    elif block.cone == POS_DIAG:
        viol = max(viol, max(0.0, -float(value.min())))
    return viol


def assignment_violations(family: MultiplierFamily,
                          assignment: Mapping[str, np.ndarray]
                          ) -> dict[str, float]:
    """Measure cone and constraint violations of a numeric assignment.

    Returns a map from block/constraint name to a nonnegative violation
    magnitude (0 means satisfied): symmetry and cone residuals for blocks,
    the largest positive entry for ``nonpos`` constraints, and the most
    negative eigenvalue for ``psd`` constraints.
    """
    report: dict[str, float] = {}
    for block in family.blocks:
        if block.name not in assignment:
            raise KeyError(f"assignment missing block {block.name!r}")
        report[f"block:{block.name}"] = _block_violation(
            block, assignment[block.name])
    for con in family.constraints:
        expr = np.asarray(con.fn(assignment), dtype=float)
        if con.kind == NONPOS:
            viol = max(0.0, float(expr.max()))
        elif con.kind == PSD_GEQ:
            sym = 0.5 * (expr + expr.T)
            viol = max(0.0, -float(np.linalg.eigvalsh(sym)[0]))
        else:
            raise ValueError(f"unknown constraint kind {con.kind!r}")
        report[f"constraint:{con.name}"] = viol
    return report


def pointwise_iqc_value(pi: np.ndarray, xi: np.ndarray):
    """Evaluate ``[xi; relu(xi)]' Pi [xi; relu(xi)]``.

    ``xi`` may be a single vector ``(m,)`` or a batch ``(N, m)``; the result
    is a float or an ``(N,)`` array accordingly.
    """
    pi = np.asarray(pi, dtype=float)
    if pi.ndim != 2 or pi.shape[0] != pi.shape[1] or pi.shape[0] % 2:
        raise ValueError(f"pi must be square of even size, got {pi.shape}")
    m = pi.shape[0] // 2
    xi = np.asarray(xi, dtype=float)
    single = xi.ndim == 1
    X = np.atleast_2d(xi)
    if X.shape[1] != m:
        raise ValueError(f"xi has dimension {X.shape[1]}, expected m={m}")
    V = np.hstack([X, relu(X)])
    vals = np.einsum("ij,jk,ik->i", V, pi, V)
    return float(vals[0]) if single else vals
