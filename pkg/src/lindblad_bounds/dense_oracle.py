"""Brute-force dense checks on small finite chains.

Everything here is built straight from Kronecker products and is used
only to validate the symbolic layer and small derived values; finite-chain
spectra are never used as acceptance values for infinite-lattice bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import List, Tuple

import numpy as np

from .errors import TooLarge
from .ketbra import KetBraString, OperatorSum, bits_to_index, index_to_bits
from .model import LindbladModel, apply_generator

MAX_DENSE_SITES = 6
MAX_MODE_SITES = 5


@dataclass
class DenseSuperoperator:
    """Matrix of the adjoint generator on the vectorized operator space
    of a finite chain (row-major vec; ket index major)."""

    n_sites: int
    boundary: str
    matrix: np.ndarray = field(repr=False)


def _site_embed(mat: np.ndarray, k: int, n: int) -> np.ndarray:
    """Operator ``mat`` on site k (1-based) of an n-site chain."""
    out = np.eye(1, dtype=complex)
    for j in range(1, n + 1):
        out = np.kron(out, mat if j == k else np.eye(2))
    return out


def chain_hamiltonian(model: LindbladModel, n_sites: int, boundary: str) -> np.ndarray:
    from .ketbra import site_matrix

    dim = 2 ** n_sites
    H = np.zeros((dim, dim), dtype=complex)
    bonds = [(j, j + 1) for j in range(1, n_sites)]
    if boundary == "periodic":
        bonds.append((n_sites, 1))
    for a, b in bonds:
        for (p, q), c in model.ham_template:
            H += c * _site_embed(site_matrix(p), a, n_sites) \
                   @ _site_embed(site_matrix(q), b, n_sites)
    return H


def dense_adjoint_lindbladian(model: LindbladModel, n_sites: int,
                              boundary: str = "periodic") -> DenseSuperoperator:
    """Adjoint generator as a 4^n x 4^n matrix, built from Kronecker
    products only (independent of the symbolic layer)."""
    if n_sites > MAX_DENSE_SITES:
        raise TooLarge(f"dense construction limited to {MAX_DENSE_SITES} sites")
    if boundary not in ("periodic", "open"):
        raise ValueError(f"unknown boundary {boundary!r}")
    dim = 2 ** n_sites
    eye = np.eye(dim)
    H = chain_hamiltonian(model, n_sites, boundary)
    # row-major vec: vec(A O B) = kron(A, B.T) vec(O)
    sup = 1j * (np.kron(H, eye) - np.kron(eye, H.T))
    L1 = model.jump_matrix()
    for k in range(1, n_sites + 1):
        L = _site_embed(L1, k, n_sites)
        Ld = L.conj().T
        N = Ld @ L
        sup += model.gamma * (
            np.kron(Ld, L.T)
            - 0.5 * np.kron(N, eye)
            - 0.5 * np.kron(eye, N.T)
        )
    return DenseSuperoperator(n_sites, boundary, sup)


def string_to_dense(s: KetBraString, n_sites: int) -> np.ndarray:
    """Dense matrix of a ket-bra string placed on sites 1..n of a chain."""
    if s.offset < 1 or s.right > n_sites:
        raise ValueError("window does not fit on the chain")
    dim = 2 ** n_sites
    out = np.zeros((dim, dim), dtype=complex)
    pad = n_sites - s.length
    left = s.offset - 1
    right = pad - left
    for le in product((1, 0), repeat=left):
        for re_ in product((1, 0), repeat=right):
            out[bits_to_index(le + s.ket + re_), bits_to_index(le + s.bra + re_)] = 1.0
    return out


def sum_to_dense(op: OperatorSum, n_sites: int) -> np.ndarray:
    dim = 2 ** n_sites
    out = np.zeros((dim, dim), dtype=complex)
    for s, c in op:
        out += c * string_to_dense(s, n_sites)
    return out


def symbolic_superoperator(model: LindbladModel, n_sites: int,
                           boundary: str = "periodic") -> np.ndarray:
    """Same matrix as :func:`dense_adjoint_lindbladian` but assembled from
    symbolic term expansions, bond by bond, with the chain's bond layout."""
    if n_sites > MAX_DENSE_SITES:
        raise TooLarge(f"symbolic reconstruction limited to {MAX_DENSE_SITES} sites")
    bonds = [(j, j + 1) for j in range(1, n_sites)]
    if boundary == "periodic":
        bonds.append((n_sites, 1))
    jumps = list(range(1, n_sites + 1))
    dim = 2 ** n_sites
    sup = np.zeros((dim * dim, dim * dim), dtype=complex)
    for col_ket in range(dim):
        for col_bra in range(dim):
            s = KetBraString(1, index_to_bits(col_ket, n_sites),
                             index_to_bits(col_bra, n_sites))
            image = apply_generator(model, s, bonds, jumps)
            col = col_ket * dim + col_bra
            for t, c in image:
                if t.offset != 1 or t.length != n_sites:
                    raise AssertionError("full-window action must stay in window")
                row = bits_to_index(t.ket) * dim + bits_to_index(t.bra)
                sup[row, col] += c
    return sup


def mode_overlap_check(model: LindbladModel, n_sites: int,
                       observable: OperatorSum) -> List[Tuple[complex, complex]]:
    """Eigen-decomposition of the (Schroedinger-picture) dense generator;
    for each right eigenmode rho_a, the late-time coefficient it induces
    on the observable, Tr(rho_a O)."""
    if n_sites > MAX_MODE_SITES:
        raise TooLarge(f"mode analysis limited to {MAX_MODE_SITES} sites")
    dim = 2 ** n_sites
    eye = np.eye(dim)
    H = chain_hamiltonian(model, n_sites, "open")
    gen = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    L1 = model.jump_matrix()
    for k in range(1, n_sites + 1):
        L = _site_embed(L1, k, n_sites)
        Ld = L.conj().T
        N = Ld @ L
        gen += model.gamma * (
            np.kron(L, Ld.T)
            - 0.5 * np.kron(N, eye)
            - 0.5 * np.kron(eye, N.T)
        )
    evals, evecs = np.linalg.eig(gen)
    O = sum_to_dense(observable, n_sites)
    out = []
    for i in range(len(evals)):
        rho = evecs[:, i].reshape(dim, dim)
        out.append((evals[i], np.trace(rho @ O)))
    return out
