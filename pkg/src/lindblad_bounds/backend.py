"""Conic solver backend.

Scalarizes a :class:`~lindblad_bounds.conic.ConicProblem` into the
standard form

    min q . x    s.t.  A x + s = b,   s in {0}^m x PSD(n),

solves it with Clarabel, and reports the *dual* objective as the
rigorous bound: by weak duality the dual value always bounds the true
optimum from the safe side, regardless of how accurately the primal
converged.  A maximization is negated internally and the sign restored
in the report.

Also provides deterministic export to the SDPA sparse format and an
independent re-solve of the exported file through cvxpy + CVXOPT, used
as a cross-solver consistency check.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

import clarabel

from .conic import ConicProblem, Row, add_to_row
from .errors import IoFailure, ParseError

SQRT2 = math.sqrt(2.0)

#: decimals used when normalizing rows for duplicate detection
_DEDUP_DECIMALS = 12


@dataclass(frozen=True)
class SolverSettings:
    """Interior-point settings.

    ``tol`` is used for feasibility and duality-gap targets.  Degenerate
    boundary optima (rank-deficient primal solutions) can stall slightly
    above a tight target; with ``fallback`` enabled the solve is retried
    at 100x looser tolerance, never looser than 1e-6, and the tolerance
    actually met is recorded in the report.
    """

    tol: float = 1e-9
    tol_gap: float | None = None
    max_iter: int = 100_000
    verbose: bool = False
    fallback: bool = True

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.tol_gap is not None and self.tol_gap <= 0:
            raise ValueError("tol_gap must be > 0")
        if self.max_iter <= 0:
            raise ValueError("max_iter must be > 0")

    def tolerance_schedule(self):
        tols = [self.tol]
        if self.fallback:
            for t in (1e-7, 1e-6):
                if t > self.tol * (1 + 1e-12):
                    tols.append(t)
        return tols


@dataclass
class SolveReport:
    """Outcome of one conic solve, in the caller's direction convention."""

    status: str  # optimal | primal_infeasible | dual_infeasible | numerical_limit
    direction: str
    primal_objective: Optional[float]
    dual_objective: Optional[float]  # the rigorous bound when status == optimal
    iterations: int
    solve_time: float
    r_prim: float
    r_dual: float
    n_rows: int
    psd_matrix: Optional[np.ndarray] = field(default=None, repr=False)
    free_values: Optional[np.ndarray] = field(default=None, repr=False)
    certificate_checked: bool = False
    certificate_residual: float = math.nan
    certificate_min_eig: float = math.nan
    tol_used: float = math.nan

    @property
    def bound(self) -> Optional[float]:
        return self.dual_objective


def hermitian_embedding(prob: ConicProblem) -> ConicProblem:
    """Real symmetric reformulation of a complex Hermitian block.

    X = A + iB is PSD iff Y = [[A, -B], [B, A]] is PSD, so the block is
    doubled and linear rows pin Y to that structure: equal diagonal
    blocks and an antisymmetric off-diagonal block.  Entry X[r, c] reads
    as Y[r, c] + i Y[n + r, c]; coefficients stay complex and are split
    into real and imaginary rows at scalarization.
    """
    if not prob.is_complex:
        return prob
    n = prob.psd_dim
    n2 = 2 * n
    old_base = n * n
    new_base = n2 * n2

    def remap(row: Row) -> Row:
        out: Row = {}
        for key, a in row.items():
            if key >= old_base:
                add_to_row(out, new_base + (key - old_base), a)
            else:
                r, c = divmod(key, n)
                add_to_row(out, r * n2 + c, a)
                # the B block is antisymmetric: canonicalize B[r, c] to
                # the r > c representative so that Hermitian coefficient
                # pairs land on the same cell and their imaginary parts
                # cancel (B[r, r] = 0 drops out entirely)
                if r > c:
                    add_to_row(out, (n + r) * n2 + c, 1j * a)
                elif r < c:
                    add_to_row(out, (n + c) * n2 + r, -1j * a)
        return out

    rows = [(remap(row), rhs) for row, rhs in prob.constraints]
    # structure rows: Y[r, c] = Y[n+r, n+c] and Y[n+r, c] = -Y[n+c, r]
    for r in range(n):
        for c in range(r, n):
            rows.append(({r * n2 + c: 1.0, (n + r) * n2 + (n + c): -1.0}, 0.0))
    for r in range(n):
        for c in range(r, n):
            rows.append(({(n + r) * n2 + c: 1.0, (n + c) * n2 + r: 1.0}, 0.0))
    return ConicProblem(
        psd_dim=n2, n_free=prob.n_free, objective=remap(prob.objective),
        constraints=rows, direction=prob.direction, is_complex=False,
        meta=dict(prob.meta, embedded=True),
    )


@dataclass
class ScalarizedProblem:
    """Real standard-form data: variables are the scaled upper triangle
    of the PSD block (column major, off-diagonals times sqrt(2)) followed
    by the free scalars."""

    psd_dim: int
    n_free: int
    n_tri: int
    q: np.ndarray
    rows: List[Dict[int, float]]  # equality rows over the variable vector
    rhs: List[float]
    sign: float  # +1 if the internal min equals the user objective, -1 for max
    direction: str

    @property
    def n_vars(self) -> int:
        return self.n_tri + self.n_free


def _tri_index(r: int, c: int) -> int:
    # column-major upper triangle, r <= c
    return c * (c + 1) // 2 + r


def _row_to_tri(row: Row, dim: int, n_tri: int) -> Dict[int, complex]:
    """Combine (r, c) and (c, r) coefficients onto scaled-triangle and
    free-scalar coordinates; the result may still be complex."""
    out: Dict[int, complex] = {}
    base = dim * dim
    for key, a in row.items():
        if key >= base:
            k = n_tri + (key - base)
            out[k] = out.get(k, 0.0) + a
        else:
            r, c = divmod(key, dim)
            if r <= c:
                k = _tri_index(r, c)
            else:
                k = _tri_index(c, r)
            scale = 1.0 if r == c else 1.0 / SQRT2
            out[k] = out.get(k, 0.0) + a * scale
    return {k: v for k, v in out.items() if v != 0}


def _split_real(tri_row: Dict[int, complex], rhs: complex):
    re_row = {k: v.real for k, v in tri_row.items() if v.real != 0.0}
    im_row = {k: v.imag for k, v in tri_row.items() if v.imag != 0.0}
    out = []
    if re_row or rhs.real != 0.0:
        out.append((re_row, float(rhs.real)))
    if im_row or rhs.imag != 0.0:
        out.append((im_row, float(rhs.imag)))
    return out


def _dedup_key(row: Dict[int, float], rhs: float):
    pivot_coord = min(row)
    pivot = row[pivot_coord]
    items = tuple(sorted((k, round(v / pivot, _DEDUP_DECIMALS)) for k, v in row.items()))
    return items + ((-1, round(rhs / pivot, _DEDUP_DECIMALS)),)


def _proportional(a: Dict[int, float], ra: float, b: Dict[int, float], rb: float) -> bool:
    if set(a) != set(b):
        return False
    pivot = min(a)
    lam = a[pivot] / b[pivot]
    scale = max(abs(v) for v in a.values())
    if abs(ra - lam * rb) > 1e-9 * max(scale, 1.0):
        return False
    return all(abs(a[k] - lam * b[k]) <= 1e-9 * max(scale, 1.0) for k in a)


def _drop_dependent_rows(rows: List[Dict[int, float]], rhs: List[float],
                         n_vars: int) -> Tuple[List[Dict[int, float]], List[float]]:
    """Keep a maximal linearly independent subset of the equality rows.

    Redundant rows make the interior-point KKT system singular, so they
    are filtered with a pivoted QR on a random projection of the rows.
    The right-hand side is appended as an extra coordinate: a row is only
    dropped when the full augmented vector lies in the span of the kept
    ones, so an inconsistent (infeasible) system stays inconsistent.
    The projection uses a fixed seed and is deterministic.
    """
    from scipy.linalg import qr

    m = len(rows)
    if m <= 1:
        return rows, rhs
    k = min(m, n_vars + 1) + 8
    rng = np.random.default_rng(0)
    B = np.zeros((m, k))
    proj: Dict[int, np.ndarray] = {}

    def coord(j: int) -> np.ndarray:
        v = proj.get(j)
        if v is None:
            v = rng.standard_normal(k)
            proj[j] = v
        return v

    # deterministic coordinate order: draw projections for all used
    # coordinates in sorted order first
    used = sorted({j for row in rows for j in row} | {n_vars})
    for j in used:
        coord(j)
    for i, row in enumerate(rows):
        acc = np.zeros(k)
        for j, v in row.items():
            acc += v * proj[j]
        if rhs[i] != 0.0:
            acc += rhs[i] * proj[n_vars]
        B[i] = acc
    _, r, piv = qr(B.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return [], []
    rank = int((diag > 1e-12 * diag[0]).sum())
    keep = sorted(piv[:rank])
    return [rows[i] for i in keep], [rhs[i] for i in keep]


def scalarize(prob: ConicProblem) -> ScalarizedProblem:
    """Real standard-form data with duplicate and linearly dependent
    equality rows removed.  Complex problems are embedded first."""
    prob = hermitian_embedding(prob)
    dim = prob.psd_dim
    n_tri = dim * (dim + 1) // 2

    obj = _row_to_tri(prob.objective, dim, n_tri)
    q = np.zeros(n_tri + prob.n_free)
    for k, v in obj.items():
        if abs(v.imag) > 1e-10:
            raise ValueError("objective does not scalarize to a real functional")
        q[k] = v.real
    sign = 1.0 if prob.direction == "min" else -1.0

    rows: List[Dict[int, float]] = []
    rhs: List[float] = []
    seen: Dict[tuple, int] = {}
    for row, b in prob.constraints:
        tri = _row_to_tri(row, dim, n_tri)
        for real_row, real_rhs in _split_real(tri, complex(b)):
            if not real_row:
                if abs(real_rhs) > 1e-12:
                    raise ValueError("inconsistent empty constraint row")
                continue
            key = _dedup_key(real_row, real_rhs)
            j = seen.get(key)
            if j is not None and _proportional(real_row, real_rhs, rows[j], rhs[j]):
                continue
            seen[key] = len(rows)
            rows.append(real_row)
            rhs.append(real_rhs)
    # equilibrate rows to unit max coefficient: generator rows scale
    # with the coupling and unscaled they stall the interior-point
    # iteration at large couplings; scaling both sides leaves the
    # feasible set unchanged
    for i, row in enumerate(rows):
        scale = max(abs(v) for v in row.values())
        if scale > 0 and scale != 1.0:
            rows[i] = {k: v / scale for k, v in row.items()}
            rhs[i] = rhs[i] / scale
    rows, rhs = _drop_dependent_rows(rows, rhs, n_tri + prob.n_free)
    return ScalarizedProblem(
        psd_dim=dim, n_free=prob.n_free, n_tri=n_tri,
        q=sign * q, rows=rows, rhs=rhs, sign=sign, direction=prob.direction,
    )


_STATUS_MAP = {
    "Solved": "optimal",
    "PrimalInfeasible": "primal_infeasible",
    "AlmostPrimalInfeasible": "primal_infeasible",
    "DualInfeasible": "dual_infeasible",
    "AlmostDualInfeasible": "dual_infeasible",
}


def _assemble(scal: ScalarizedProblem):
    m_eq = len(scal.rows)
    n = scal.n_vars
    data, ri, ci = [], [], []
    for i, row in enumerate(scal.rows):
        for k, v in row.items():
            ri.append(i)
            ci.append(k)
            data.append(v)
    for k in range(scal.n_tri):
        ri.append(m_eq + k)
        ci.append(k)
        data.append(-1.0)
    A = sp.csc_matrix((data, (ri, ci)), shape=(m_eq + scal.n_tri, n))
    b = np.concatenate([np.asarray(scal.rhs, dtype=float), np.zeros(scal.n_tri)])
    cones = [clarabel.ZeroConeT(m_eq), clarabel.PSDTriangleConeT(scal.psd_dim)]
    return A, b, cones


def solve(prob: ConicProblem, settings: SolverSettings = SolverSettings()) -> SolveReport:
    scal = scalarize(prob)
    A, b, cones = _assemble(scal)
    n = scal.n_vars
    P = sp.csc_matrix((n, n))

    t0 = time.perf_counter()
    sol = None
    tol_used = settings.tol
    done = False
    for tol in settings.tolerance_schedule():
        # a KKT factorization failure in the first iterations is cured
        # by stronger static regularization, not by looser tolerances,
        # so each tolerance gets a bumped-regularization retry
        for static_reg in (None, 1e-6):
            cfg = clarabel.DefaultSettings()
            cfg.verbose = settings.verbose
            cfg.max_iter = settings.max_iter
            gap = tol if settings.tol_gap is None else max(settings.tol_gap, tol)
            cfg.tol_feas = tol
            cfg.tol_gap_abs = gap
            cfg.tol_gap_rel = gap
            if static_reg is not None:
                cfg.static_regularization_constant = static_reg
            try:
                sol = clarabel.DefaultSolver(P, scal.q, A, b, cones,
                                             cfg).solve()
            except BaseException as exc:  # noqa: B036
                # the solver backend is compiled code and can abort with
                # a non-Exception panic on ill-conditioned iterates;
                # stronger static regularization cures the cases seen
                if isinstance(exc, (KeyboardInterrupt, SystemExit)):
                    raise
                sol = None
                continue
            tol_used = tol
            if _STATUS_MAP.get(str(sol.status)) is not None:
                done = True
                break
            if not (str(sol.status) == "NumericalError"
                    and sol.iterations <= 2):
                break
        if done:
            break
    elapsed = time.perf_counter() - t0

    if sol is None:
        raise RuntimeError("conic solver aborted at every tolerance and "
                           "regularization setting")
    status = _STATUS_MAP.get(str(sol.status), "numerical_limit")
    primal = dual = None
    psd = free = None
    cert_res = cert_eig = math.nan
    checked = False
    if status not in ("primal_infeasible", "dual_infeasible"):
        # Extract solution and certificate even on a stalled solve: the
        # dual value is a valid bound whenever the independent dual
        # feasibility check below passes, regardless of solver status.
        x = np.asarray(sol.x)
        z = np.asarray(sol.z)
        primal = scal.sign * float(sol.obj_val)
        dual = scal.sign * float(sol.obj_val_dual)
        psd = _tri_to_matrix(x[:scal.n_tri], scal.psd_dim)
        free = x[scal.n_tri:].copy()
        # independent dual-feasibility check: q + A^T z = 0 with the
        # PSD-cone part of z itself PSD, and dual objective -b.z
        resid = scal.q + A.T @ z
        cert_res = float(np.max(np.abs(resid))) if resid.size else 0.0
        zmat = _tri_to_matrix(z[len(scal.rows):], scal.psd_dim)
        cert_eig = float(np.linalg.eigvalsh(zmat).min()) if scal.psd_dim else 0.0
        recomputed = -float(b @ z)
        checked = (cert_res < 1e-6
                   and cert_eig > -1e-8
                   and abs(recomputed - float(sol.obj_val_dual)) < 1e-6)
    return SolveReport(
        status=status, direction=scal.direction,
        primal_objective=primal, dual_objective=dual,
        iterations=int(sol.iterations), solve_time=elapsed,
        r_prim=float(sol.r_prim), r_dual=float(sol.r_dual),
        n_rows=len(scal.rows),
        psd_matrix=psd, free_values=free,
        certificate_checked=checked,
        certificate_residual=cert_res, certificate_min_eig=cert_eig,
        tol_used=tol_used,
    )


def _tri_to_matrix(tri: np.ndarray, dim: int) -> np.ndarray:
    out = np.zeros((dim, dim))
    for c in range(dim):
        for r in range(c + 1):
            v = tri[_tri_index(r, c)]
            if r == c:
                out[r, r] = v
            else:
                out[r, c] = out[c, r] = v / SQRT2
    return out


# ---------------------------------------------------------------------------
# SDPA sparse format
#
# The internal problem  min q.x  s.t. rows,  X >= 0, f free  is written as
# the SDPA *dual*:  max tr(F0 Y)  s.t. tr(Fi Y) = b_i,  Y >= 0, with
# Y = diag(X, u, v) and every free scalar split as f = u - v.  The optimum
# of the exported file is therefore the negated internal minimum.
# ---------------------------------------------------------------------------


def _sdpa_entries(row_tri: Dict[int, float], scal: ScalarizedProblem, matno: int):
    """(matno, blkno, i, j, value) tuples for one scalarized row."""
    out = []
    for k, v in row_tri.items():
        if k < scal.n_tri:
            # invert column-major triangle index
            c = int((math.isqrt(8 * k + 1) - 1) // 2)
            r = k - c * (c + 1) // 2
            if r == c:
                out.append((matno, 1, r + 1, c + 1, v))
            else:
                # svec coefficient v means symmetric coefficient v/sqrt(2)
                # on each of (r, c) and (c, r)
                out.append((matno, 1, r + 1, c + 1, v / SQRT2))
        else:
            j = k - scal.n_tri
            out.append((matno, 2, j + 1, j + 1, v))
            out.append((matno, 2, scal.n_free + j + 1, scal.n_free + j + 1, -v))
    return out


def export_sdpa(prob: ConicProblem, path: str) -> None:
    """Byte-deterministic SDPA sparse export of the scalarized problem."""
    scal = scalarize(prob)
    entries = []
    qrow = {k: -float(v) for k, v in enumerate(scal.q) if v != 0.0}
    entries.extend(_sdpa_entries(qrow, scal, 0))
    for i, row in enumerate(scal.rows):
        entries.extend(_sdpa_entries(row, scal, i + 1))
    entries.sort()
    lines = [f"{len(scal.rows)}", "2" if scal.n_free else "1"]
    if scal.n_free:
        lines.append(f"{scal.psd_dim} -{2 * scal.n_free}")
    else:
        lines.append(f"{scal.psd_dim}")
    lines.append(" ".join(f"{v:.16e}" for v in scal.rhs))
    for matno, blk, i, j, v in entries:
        if scal.n_free == 0 and blk == 2:
            raise AssertionError("free-block entry without free block")
        lines.append(f"{matno} {blk} {i} {j} {v:.16e}")
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


@dataclass
class SdpaProblem:
    n_constraints: int
    block_sizes: List[int]
    rhs: np.ndarray
    # entries[matno] = list of (blkno, i, j, value), 1-based, upper triangle
    entries: Dict[int, List[Tuple[int, int, int, float]]]


def import_sdpa(path: str) -> SdpaProblem:
    """Parser for the SDPA sparse format, independent of the exporter."""
    try:
        with open(path) as fh:
            raw = fh.readlines()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    lines = [ln.strip() for ln in raw
             if ln.strip() and not ln.lstrip().startswith(("*", '"'))]
    if len(lines) < 4:
        raise ParseError("truncated SDPA file", 0)

    def ints(s: str, ln_no: int) -> List[int]:
        try:
            return [int(tok.strip("(){},"))
                    for tok in s.replace(",", " ").split()
                    if tok.strip("(){},")]
        except ValueError:
            raise ParseError(f"malformed integer list: {s!r}", ln_no)

    m = ints(lines[0], 0)[0]
    nblocks = ints(lines[1], 1)[0]
    sizes = ints(lines[2], 2)
    if len(sizes) != nblocks:
        raise ParseError(f"expected {nblocks} block sizes, got {len(sizes)}", 2)
    try:
        rhs = np.array([float(t) for t in lines[3].replace(",", " ").split()])
    except ValueError:
        raise ParseError(f"malformed rhs line: {lines[3]!r}", 3)
    if rhs.size != m:
        raise ParseError(f"expected {m} rhs values, got {rhs.size}", 3)
    entries: Dict[int, List[Tuple[int, int, int, float]]] = {}
    for ln_no, ln in enumerate(lines[4:], start=4):
        toks = ln.replace(",", " ").split()
        if len(toks) != 5:
            raise ParseError(f"malformed entry line: {ln!r}", ln_no)
        try:
            matno, blk, i, j = (int(toks[0]), int(toks[1]), int(toks[2]),
                                int(toks[3]))
            value = float(toks[4])
        except ValueError:
            raise ParseError(f"malformed entry line: {ln!r}", ln_no)
        if not (0 <= matno <= m and 1 <= blk <= nblocks):
            raise ParseError(f"entry indices out of range: {ln!r}", ln_no)
        entries.setdefault(matno, []).append((blk, i, j, value))
    return SdpaProblem(m, sizes, rhs, entries)


def reference_solve_sdpa(path: str) -> float:
    """Solve the dual of an SDPA sparse file with cvxpy + CVXOPT.

    Returns the optimum of  max tr(F0 Y)  s.t.  tr(Fi Y) = c_i,  Y >= 0.
    """
    import cvxpy as cp

    data = import_sdpa(path)
    blocks = []
    for size in data.block_sizes:
        if size > 0:
            blocks.append(cp.Variable((size, size), PSD=True))
        else:
            blocks.append(cp.Variable(-size, nonneg=True))

    def functional(matno: int):
        expr = 0
        for blk, i, j, v in data.entries.get(matno, []):
            var = blocks[blk - 1]
            if data.block_sizes[blk - 1] > 0:
                expr = expr + (v * var[i - 1, j - 1] if i == j
                               else 2 * v * var[i - 1, j - 1])
            else:
                if i != j:
                    raise ParseError("off-diagonal entry in diagonal block", 0)
                expr = expr + v * var[i - 1]
        return expr

    constraints = [functional(i + 1) == data.rhs[i] for i in range(data.n_constraints)]
    problem = cp.Problem(cp.Maximize(functional(0)), constraints)
    problem.solve(solver=cp.CVXOPT)
    if problem.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"reference solve failed: {problem.status}")
    return float(problem.value)


def cross_check(prob: ConicProblem, path: str,
                settings: SolverSettings = SolverSettings()) -> Tuple[float, float]:
    """Export, re-import, re-solve with the independent stack, and return
    (internal bound, reference bound) in the problem's direction."""
    report = solve(prob, settings)
    if report.status != "optimal":
        raise RuntimeError(f"internal solve not optimal: {report.status}")
    export_sdpa(prob, path)
    sdpa_opt = reference_solve_sdpa(path)
    sign = 1.0 if prob.direction == "min" else -1.0
    # exported optimum = -(internal min); undo both negations
    reference = sign * (-sdpa_opt)
    return report.bound, reference
