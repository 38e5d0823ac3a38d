"""Translation-invariant Lindblad models and the adjoint generator.

A model is a 2-site Hermitian bond template for the Hamiltonian, a
single 1-site jump operator and a uniform rate gamma.  The adjoint
generator acts on observables (Heisenberg picture):

    Lhat(O) = i[H, O] + gamma * sum_k ( L_k^+ O L_k - {L_k^+ L_k, O}/2 )
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from .errors import NonPositiveCoupling
from .ketbra import (
    KetBraString,
    OperatorLike,
    OperatorSum,
    SiteOperator,
    _as_sum,
    act_left,
    act_right,
    site_matrix,
)

BondTerm = Tuple[Tuple[SiteOperator, SiteOperator], float]


@dataclass(frozen=True)
class LindbladModel:
    """2-site bond Hamiltonian template + 1-site jump with uniform rate."""

    ham_template: Tuple[BondTerm, ...]
    jump_template: SiteOperator
    gamma: float

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        h = self.bond_matrix()
        if not np.allclose(h, h.conj().T, atol=1e-12):
            raise ValueError("bond template is not Hermitian")

    def bond_matrix(self) -> np.ndarray:
        """4x4 matrix of the bond operator on two adjacent sites."""
        h = np.zeros((4, 4), dtype=complex)
        for (p, q), c in self.ham_template:
            h += c * np.kron(site_matrix(p), site_matrix(q))
        return h

    def jump_matrix(self) -> np.ndarray:
        return site_matrix(self.jump_template)


def quantum_contact_process(omega: float) -> LindbladModel:
    """The quantum contact process: H = Omega * sum_k (X_k n_{k+1} + n_k X_{k+1}),
    jump sigma_minus on every site, rate 1."""
    if omega <= 0:
        raise NonPositiveCoupling(f"omega must be > 0, got {omega}")
    return LindbladModel(
        ham_template=(
            ((SiteOperator.X, SiteOperator.n), float(omega)),
            ((SiteOperator.n, SiteOperator.X), float(omega)),
        ),
        jump_template=SiteOperator.Sm,
        gamma=1.0,
    )


def _commutator_bond(model: LindbladModel, site_a: int, site_b: int,
                     s: OperatorLike) -> OperatorSum:
    """i [h_bond, s] for the bond acting on (site_a, site_b)."""
    acc = OperatorSum()
    for (p, q), c in model.ham_template:
        left = act_left(p, site_a, act_left(q, site_b, s))
        right = act_right(q, site_b, act_right(p, site_a, s))
        acc = acc + (left - right) * (1j * c)
    return acc


def _dissipator_site(model: LindbladModel, k: int, s: OperatorLike) -> OperatorSum:
    """gamma * ( L^+ s L - {L^+ L, s}/2 ) for the jump at site k."""
    lm = model.jump_matrix()
    ldag = lm.conj().T
    nm = ldag @ lm
    sandwich = act_left(ldag, k, act_right(lm, k, s))
    anti = act_left(nm, k, s) + act_right(nm, k, s)
    return (sandwich - anti * 0.5) * model.gamma


def apply_generator(model: LindbladModel, s: OperatorLike,
                    bonds: Sequence[Tuple[int, int]],
                    jump_sites: Sequence[int]) -> OperatorSum:
    """Adjoint generator restricted to an explicit bond/jump layout.

    Used directly by the finite-chain oracle; the infinite-lattice
    :func:`adjoint_lindbladian` picks the layout from the window.
    """
    acc = OperatorSum()
    for a, b in bonds:
        acc = acc + _commutator_bond(model, a, b, s)
    for k in jump_sites:
        acc = acc + _dissipator_site(model, k, s)
    return acc


def adjoint_lindbladian(model: LindbladModel, s: OperatorLike) -> OperatorSum:
    """Lhat(s) on the infinite lattice.

    Only bonds overlapping the window and jumps inside the window
    contribute; every output term's window extends the input window by at
    most one site on a single end.
    """
    acc = OperatorSum()
    for term, coeff in _as_sum(s):
        a, b = term.offset, term.right
        bonds = [(j, j + 1) for j in range(a - 1, b + 1)]
        jumps = list(range(a, b + 1))
        acc = acc + apply_generator(model, term, bonds, jumps) * coeff
    return acc


@dataclass(frozen=True)
class AbsorbingState:
    """Rank-1 projector onto the all-inactive product state at level N."""

    level: int
    matrix: np.ndarray = field(repr=False, compare=False, default=None)


def absorbing_state_rdm(N: int) -> AbsorbingState:
    """Level-N marginal of the absorbing state: unit entry on the
    all-inactive diagonal position (the largest index)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    dim = 2 ** N
    m = np.zeros((dim, dim))
    m[dim - 1, dim - 1] = 1.0
    return AbsorbingState(N, m)
