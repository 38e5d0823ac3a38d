"""Assembly of the three bootstrap problems as conic programs.

All three problems share the same skeleton: a Hermitian (real symmetric
for real models) matrix variable indexed by length-N ket-bra strings,
the top-level translation constraint, and one equation-of-motion row per
ket-bra string of length N-1.  Equations of motion are imposed for
strings of length N-1, not N: the generator extends a window by one site
on a single end, so every image term of a length-(N-1) string still fits
into the level-N window after an individual shift.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .conic import ConicProblem, Row, add_to_row
from .errors import (
    DegenerateTolerance,
    EmptyObjective,
    NegativeDelta,
    NonHermitianObjective,
    WindowTooLarge,
)
from .ketbra import (
    KetBraString,
    OperatorSum,
    RdmFunctional,
    embed_sum,
    identity_sum,
    is_hermitian,
)
from .model import AbsorbingState, LindbladModel, absorbing_state_rdm, adjoint_lindbladian

#: default kernel threshold and required spectral separation for null_space
NULL_TOL = 1e-10
NULL_GAP_RATIO = 1e3


@dataclass(frozen=True)
class NullSpaceBasis:
    """Orthonormal basis of the numerical kernel of a PSD matrix."""

    level: int
    vectors: np.ndarray  # shape (dim, |Sigma|), columns orthonormal

    @property
    def size(self) -> int:
        return self.vectors.shape[1]

    def coordinate_indices(self) -> Optional[List[int]]:
        """If every basis vector is a standard basis vector, the list of
        their coordinates; otherwise None."""
        idx = []
        for j in range(self.size):
            v = self.vectors[:, j]
            k = int(np.argmax(np.abs(v)))
            e = np.zeros_like(v)
            e[k] = v[k] / abs(v[k])
            if not np.allclose(v, e, atol=1e-12):
                return None
            idx.append(k)
        return idx


def null_space(rho0: AbsorbingState, tol: float = NULL_TOL) -> NullSpaceBasis:
    """Orthonormal basis of the kernel of the level-N absorbing marginal.

    For the exact rank-1 projector onto the all-inactive state a fast
    path returns the standard basis vectors excluding that state.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    dim = 2 ** rho0.level
    vac = dim - 1
    fast = np.zeros((dim, dim))
    fast[vac, vac] = 1.0
    if np.array_equal(rho0.matrix, fast):
        vecs = np.eye(dim)[:, :vac]
        return NullSpaceBasis(rho0.level, vecs)

    evals, evecs = np.linalg.eigh(rho0.matrix)
    absvals = np.abs(evals)
    null_mask = absvals < tol
    if null_mask.any() and (~null_mask).any():
        sep = absvals[~null_mask].min() / max(absvals[null_mask].max(), 1e-300)
        if sep < NULL_GAP_RATIO:
            raise DegenerateTolerance(
                f"no clear rank gap at tol={tol:g} (separation {sep:.2e})")
    elif not null_mask.any():
        # full rank: empty kernel is legitimate only if the smallest
        # eigenvalue clearly exceeds the threshold
        if absvals.min() < tol * NULL_GAP_RATIO:
            raise DegenerateTolerance(
                f"smallest eigenvalue {absvals.min():.2e} too close to tol={tol:g}")
    return NullSpaceBasis(rho0.level, evecs[:, null_mask])


def z1_observable() -> OperatorSum:
    """The magnetization Z on site 1 as a ket-bra sum."""
    return OperatorSum({
        KetBraString(1, (1,), (1,)): 1.0,
        KetBraString(1, (0,), (0,)): -1.0,
    })


def objective_functional(obs: OperatorSum, N: int) -> RdmFunctional:
    """Level-N functional of a Hermitian observable.

    Objectives with windows longer than N are rejected, never truncated:
    a truncated objective would produce a non-rigorous bound.
    """
    if not obs:
        raise EmptyObjective("objective has no terms")
    if not is_hermitian(obs):
        raise NonHermitianObjective(f"objective is not Hermitian: {obs}")
    for term, _ in obs:
        if term.length > N:
            raise WindowTooLarge(
                f"objective term {term} does not fit in a {N}-site window")
    return embed_sum(obs, N)


Carrier = Callable[[int, int], Dict[int, complex]]


def _parity(idx: int) -> int:
    """Particle-number parity of a basis index (count of inactive sites)."""
    return bin(idx).count("1") & 1


def _twist(r: int, c: int) -> complex:
    """Phase relating the density matrix to its real representation.

    For models with the conjugation-parity symmetry (see
    :func:`_check_realness`) every relevant state satisfies
    rho* = U rho U with U = tensor-Z, so S = V rho V^dagger with
    V = diag(i^parity) is real symmetric.  Entry rho[r, c] equals
    conj(v_r) v_c S[r, c]; this returns that factor.
    """
    pr, pc = _parity(r), _parity(c)
    if pr == pc:
        return 1.0
    return 1j if pc > pr else -1j


def _map_functional(f: RdmFunctional, carrier: Carrier) -> Row:
    row: Row = {}
    for (r, c), v in f.entries.items():
        for key, mult in carrier(r, c).items():
            add_to_row(row, key, v * mult)
    return row


def _translation_rows(N: int, carrier: Carrier) -> List[Tuple[Row, complex]]:
    """Entrywise Tr_1 X = Tr_N X on the level-N block.

    Index convention: leftmost site is the most significant digit, so
    tracing site 1 pairs indices (d*h + u) and tracing site N pairs
    (2u + d).
    """
    half = 2 ** (N - 1)
    rows = []
    for u in range(half):
        for v in range(u, half):
            row: Row = {}
            for d in (0, 1):
                for key, mult in carrier(d * half + u, d * half + v).items():
                    add_to_row(row, key, mult)
                for key, mult in carrier(2 * u + d, 2 * v + d).items():
                    add_to_row(row, key, -mult)
            if row:
                rows.append((row, 0.0))
    return rows


def _equation_of_motion_rows(model: LindbladModel, N: int, carrier: Carrier,
                             delta: Optional[float] = None) -> List[Tuple[Row, complex]]:
    """One row per ket-bra string of length N-1.

    ``delta`` is None for the steady-state form <Lhat(s)> = 0 and a decay
    rate for the late-time form delta * B_s + B_{Lhat(s)} = 0.
    """
    rows = []
    if N < 2:
        return rows
    for ket in product((1, 0), repeat=N - 1):
        for bra in product((1, 0), repeat=N - 1):
            s = KetBraString(1, ket, bra)
            image = adjoint_lindbladian(model, s)
            f = embed_sum(image, N)
            if delta is not None:
                g = embed_sum(OperatorSum.from_string(s, delta), N)
                for (r, c), v in g.entries.items():
                    f.add(r, c, v)
            row = _map_functional(f, carrier)
            if row:
                rows.append((row, 0.0))
    return rows


def _check_realness(model: LindbladModel) -> None:
    """Validate the symmetry behind the real-symmetric restriction.

    The restriction is sound when complex conjugation composed with the
    parity rotation U = tensor-Z maps the model's stationarity and decay
    constraints onto themselves.  With real matrices this needs the bond
    Hamiltonian to be parity-odd (U h U = -h on two sites) and the jump
    operator parity-definite (Z L Z = +/- L); both hold for the contact
    process.  Violations must use realness=False.
    """
    h = model.bond_matrix()
    L = model.jump_matrix()
    msg = None
    if not (np.allclose(h.imag, 0, atol=1e-14) and np.allclose(L.imag, 0, atol=1e-14)):
        msg = "bond and jump matrices must be real"
    else:
        u2 = np.diag([1.0, -1.0, -1.0, 1.0])
        z = np.diag([1.0, -1.0])
        if not np.allclose(u2 @ h @ u2, -h, atol=1e-12):
            msg = "bond Hamiltonian must be parity-odd"
        elif not (np.allclose(z @ L @ z, L, atol=1e-12)
                  or np.allclose(z @ L @ z, -L, atol=1e-12)):
            msg = "jump operator must be parity-definite"
    if msg:
        raise ValueError(
            f"realness restriction does not apply: {msg}; rebuild with realness=False")


def build_steady_state_sdp(model: LindbladModel, N: int, objective: OperatorSum,
                           direction: str, realness: bool = True) -> ConicProblem:
    """Bootstrap bound on <objective> over translation-invariant steady
    states: PSD level-N marginal, unit trace, top-level translation and
    the equations of motion for all length-(N-1) strings."""
    if realness:
        _check_realness(model)
    dim = 2 ** N

    def carrier(r: int, c: int) -> Dict[int, complex]:
        return {r * dim + c: _twist(r, c) if realness else 1.0}

    obj = _map_functional(objective_functional(objective, N), carrier)
    rows: List[Tuple[Row, complex]] = []
    rows.append(({i * dim + i: 1.0 for i in range(dim)}, 1.0))
    rows.extend(_translation_rows(N, carrier))
    rows.extend(_equation_of_motion_rows(model, N, carrier))
    return ConicProblem(
        psd_dim=dim, n_free=0, objective=obj, constraints=rows,
        direction=direction, is_complex=not realness,
        meta={"kind": "steady-state", "N": N},
    )


def _projected_carrier(dim: int, n_lead_free: int, g_index: Optional[int]) -> Carrier:
    """Carrier entries for problems whose PSD block is the non-vacuum
    projection: vacuum row/column entries become free scalars, and an
    optional slack g shifts the projected diagonal (block = M_proj + g*1).

    Variable codes follow the projected block dimension dim - 1: the
    kernel coordinates are exactly the non-vacuum indices in order, so
    projected indices coincide with the original ones."""
    vac = dim - 1
    pdim = dim - 1
    base = pdim * pdim  # free-variable code offset

    def carrier(r: int, c: int) -> Dict[int, complex]:
        tw = _twist(r, c)
        if r != vac and c != vac:
            out: Dict[int, complex] = {r * pdim + c: tw}
            if g_index is not None and r == c:
                out[base + g_index] = -1.0
            return out
        if r == vac and c == vac:
            return {base + n_lead_free: 1.0}
        other = c if r == vac else r
        return {base + n_lead_free + 1 + other: tw}

    return carrier


def build_ratio_sdp(model: LindbladModel, N: int, objective: OperatorSum,
                    direction: str, reference: Optional[OperatorSum] = None,
                    realness: bool = True) -> ConicProblem:
    """Bound on the deviation ratio r(objective) in the nontrivial steady
    state: homogeneous steady-state rows plus the normalizations r(1) = 0
    and r(reference) = 1; PSD holds on the absorbing-kernel projection.

    Infeasibility of this problem at a given coupling is itself a signal:
    the feasibility onset reproduces the critical-coupling lower bound.
    """
    if not realness:
        raise NotImplementedError(
            "ratio bootstrap is implemented for real models only")
    _check_realness(model)
    if reference is None:
        reference = z1_observable()
    dim = 2 ** N
    basis = null_space(absorbing_state_rdm(N))
    if basis.coordinate_indices() is None:
        raise NotImplementedError(
            "ratio bootstrap requires a coordinate-aligned kernel basis")

    carrier = _projected_carrier(dim, 0, None)
    obj = _map_functional(objective_functional(objective, N), carrier)
    rows: List[Tuple[Row, complex]] = []
    # r(identity) = 0: trace of the carrier vanishes
    rows.append((_map_functional(embed_sum(identity_sum(1, 1), N), carrier), 0.0))
    # r(reference) = 1 fixes the overall scale
    rows.append((_map_functional(objective_functional(reference, N), carrier), 1.0))
    rows.extend(_translation_rows(N, carrier))
    rows.extend(_equation_of_motion_rows(model, N, carrier))
    return ConicProblem(
        psd_dim=dim - 1, n_free=dim, objective=obj, constraints=rows,
        direction=direction, is_complex=False,
        meta={"kind": "ratio", "N": N},
    )


def build_gap_sdp(model: LindbladModel, N: int, delta: float,
                  reference: Optional[OperatorSum] = None,
                  realness: bool = True) -> ConicProblem:
    """Navigator problem for a trial decay rate: minimize the slack g
    such that the late-time coefficient matrix plus g*identity is PSD on
    the absorbing-kernel projection, subject to the late-time equations
    of motion, translation, B_1 = 0 and B_reference = 1."""
    if delta < 0:
        raise NegativeDelta(f"delta must be >= 0, got {delta}")
    if not realness:
        raise NotImplementedError(
            "gap bootstrap is implemented for real models only")
    _check_realness(model)
    if reference is None:
        reference = z1_observable()
    dim = 2 ** N
    basis = null_space(absorbing_state_rdm(N))
    if basis.coordinate_indices() is None:
        raise NotImplementedError(
            "gap bootstrap requires a coordinate-aligned kernel basis")

    # free layout: [g, M_vac_vac, M_vac_0 .. M_vac_{dim-2}]
    carrier = _projected_carrier(dim, 1, 0)
    rows: List[Tuple[Row, complex]] = []
    # B_identity = 0 (explicit; implied by the EOM rows at delta != 0)
    rows.append((_map_functional(embed_sum(identity_sum(1, 1), N), carrier), 0.0))
    rows.append((_map_functional(objective_functional(reference, N), carrier), 1.0))
    rows.extend(_translation_rows(N, carrier))
    rows.extend(_equation_of_motion_rows(model, N, carrier, delta=delta))
    base = (dim - 1) * (dim - 1)
    return ConicProblem(
        psd_dim=dim - 1, n_free=dim + 1, objective={base + 0: 1.0},
        constraints=rows, direction="min", is_complex=False,
        meta={"kind": "gap", "N": N, "delta": delta},
    )
