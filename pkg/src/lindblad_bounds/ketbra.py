"""Symbolic algebra of ket-bra strings on windows of a 1D spin-1/2 lattice.

A ket-bra string |nu_1 ... nu_k><mu_1 ... mu_k| lives on k consecutive
sites starting at ``offset``; sites outside the window carry implicit
identity.  Bit value 1 means the active state |1>, bit value 0 the
inactive state |0>.  In all matrix/index conventions the active state
comes first: |1> -> index 0, |0> -> index 1 within a site, and the
leftmost window site is the most significant digit of a row/column
index.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, Iterator, Mapping, Tuple, Union

import numpy as np

from .errors import WindowTooLarge

#: coefficients smaller than this are dropped after every combination
PRUNE_TOL = 1e-14


class SiteOperator(enum.Enum):
    """Named single-site operators with fixed 2x2 matrices."""

    I = "I"
    X = "X"
    Y = "Y"
    Z = "Z"
    Sp = "Sp"
    Sm = "Sm"
    n = "n"


_SITE_MATRICES = {
    SiteOperator.I: np.array([[1, 0], [0, 1]], dtype=complex),
    SiteOperator.X: np.array([[0, 1], [1, 0]], dtype=complex),
    SiteOperator.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    SiteOperator.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    SiteOperator.Sp: np.array([[0, 1], [0, 0]], dtype=complex),
    SiteOperator.Sm: np.array([[0, 0], [1, 0]], dtype=complex),
    SiteOperator.n: np.array([[1, 0], [0, 0]], dtype=complex),
}


def site_matrix(op: SiteOperator) -> np.ndarray:
    """2x2 matrix of ``op`` in the (|1>, |0>) basis ordering."""
    return _SITE_MATRICES[op].copy()


Bits = Tuple[int, ...]


def bits_to_index(bits: Bits) -> int:
    """Row/column index of a bit sequence, leftmost bit most significant.

    Bit 1 (active) maps to digit 0, bit 0 (inactive) to digit 1, so the
    all-inactive sequence gets the largest index 2^k - 1.
    """
    idx = 0
    for b in bits:
        idx = (idx << 1) | (1 - b)
    return idx


def index_to_bits(idx: int, k: int) -> Bits:
    """Inverse of :func:`bits_to_index` for a k-site window."""
    return tuple(1 - ((idx >> (k - 1 - j)) & 1) for j in range(k))


@dataclass(frozen=True)
class KetBraString:
    """Elementary operator |ket><bra| on consecutive sites.

    ``offset`` is the lattice site of the leftmost window site; ``ket``
    and ``bra`` are equal-length bit sequences.
    """

    offset: int
    ket: Bits
    bra: Bits

    def __post_init__(self):
        if len(self.ket) != len(self.bra) or len(self.ket) < 1:
            raise ValueError("ket and bra must have equal length >= 1")
        if not all(b in (0, 1) for b in self.ket + self.bra):
            raise ValueError("bits must be 0 or 1")

    @property
    def length(self) -> int:
        return len(self.ket)

    @property
    def right(self) -> int:
        """Lattice site of the rightmost window site."""
        return self.offset + self.length - 1

    def __repr__(self):
        k = "".join(map(str, self.ket))
        b = "".join(map(str, self.bra))
        return f"|{k}><{b}|@{self.offset}"


def shift(s: KetBraString, d: int) -> KetBraString:
    """Translate the window by ``d`` lattice sites."""
    return KetBraString(s.offset + d, s.ket, s.bra)


class OperatorSum:
    """Finite complex-linear combination of ket-bra strings.

    Terms with coefficient magnitude below :data:`PRUNE_TOL` are dropped,
    so exact cancellations yield a truly empty sum.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[KetBraString, complex] | None = None):
        self.terms: Dict[KetBraString, complex] = {}
        if terms:
            for s, c in terms.items():
                if abs(c) > PRUNE_TOL:
                    self.terms[s] = complex(c)

    @classmethod
    def from_string(cls, s: KetBraString, coeff: complex = 1.0) -> "OperatorSum":
        return cls({s: coeff})

    def __iter__(self) -> Iterator[Tuple[KetBraString, complex]]:
        return iter(self.terms.items())

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other: "OperatorSum") -> "OperatorSum":
        out = dict(self.terms)
        for s, c in other.terms.items():
            out[s] = out.get(s, 0.0) + c
        return OperatorSum(out)

    def __sub__(self, other: "OperatorSum") -> "OperatorSum":
        return self + (other * -1.0)

    def __mul__(self, scalar: complex) -> "OperatorSum":
        return OperatorSum({s: c * scalar for s, c in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, OperatorSum):
            return NotImplemented
        return not (self - other).terms

    def isclose(self, other: "OperatorSum", tol: float = 1e-12) -> bool:
        diff = self - other
        return all(abs(c) <= tol for c in diff.terms.values())

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({c:.6g})*{s}" for s, c in self.terms.items())


OperatorLike = Union[KetBraString, OperatorSum]


def _as_sum(x: OperatorLike) -> OperatorSum:
    if isinstance(x, KetBraString):
        return OperatorSum.from_string(x)
    return x


def _pad_to(s: KetBraString, site: int):
    """Extend the window so that ``site`` lies inside it.

    Identity padding on a site expands into the two diagonal ket-bra
    factors, so the result is a list of strings, all with coefficient 1.
    """
    if s.offset <= site <= s.right:
        return [s]
    if site < s.offset:
        gap = s.offset - site
        return [
            KetBraString(site, e + s.ket, e + s.bra)
            for e in product((1, 0), repeat=gap)
        ]
    gap = site - s.right
    return [
        KetBraString(s.offset, s.ket + e, s.bra + e)
        for e in product((1, 0), repeat=gap)
    ]


def _op_matrix(op: Union[SiteOperator, np.ndarray]) -> np.ndarray:
    return _SITE_MATRICES[op] if isinstance(op, SiteOperator) else np.asarray(op, dtype=complex)


def act_left(op: Union[SiteOperator, np.ndarray], site: int, s: OperatorLike) -> OperatorSum:
    """Expansion of (op at site) * s as a sum of ket-bra strings.

    ``op`` may be a named :class:`SiteOperator` or an explicit 2x2 matrix
    in the (|1>, |0>) ordering.  A site outside the window grows it with
    identity padding before acting.
    """
    if op is SiteOperator.I:
        return _as_sum(s)
    mat = _op_matrix(op)
    out: Dict[KetBraString, complex] = {}
    for term, coeff in _as_sum(s):
        for padded in _pad_to(term, site):
            j = site - padded.offset
            kbit = padded.ket[j]
            for b in (1, 0):
                c = mat[1 - b, 1 - kbit]
                if abs(c) <= PRUNE_TOL:
                    continue
                new = KetBraString(
                    padded.offset,
                    padded.ket[:j] + (b,) + padded.ket[j + 1:],
                    padded.bra,
                )
                out[new] = out.get(new, 0.0) + coeff * c
    return OperatorSum(out)


def act_right(op: Union[SiteOperator, np.ndarray], site: int, s: OperatorLike) -> OperatorSum:
    """Expansion of s * (op at site); mirror of :func:`act_left`."""
    if op is SiteOperator.I:
        return _as_sum(s)
    mat = _op_matrix(op)
    out: Dict[KetBraString, complex] = {}
    for term, coeff in _as_sum(s):
        for padded in _pad_to(term, site):
            j = site - padded.offset
            bbit = padded.bra[j]
            for b in (1, 0):
                # <bbit| op = sum_b mat[1-bbit, 1-b] <b|
                c = mat[1 - bbit, 1 - b]
                if abs(c) <= PRUNE_TOL:
                    continue
                new = KetBraString(
                    padded.offset,
                    padded.ket,
                    padded.bra[:j] + (b,) + padded.bra[j + 1:],
                )
                out[new] = out.get(new, 0.0) + coeff * c
    return OperatorSum(out)


def dagger(s: OperatorLike) -> OperatorSum:
    """Adjoint: |nu><mu| -> |mu><nu| with conjugated coefficients."""
    out: Dict[KetBraString, complex] = {}
    for term, coeff in _as_sum(s):
        adj = KetBraString(term.offset, term.bra, term.ket)
        out[adj] = out.get(adj, 0.0) + np.conj(coeff)
    return OperatorSum(out)


def is_hermitian(s: OperatorSum, tol: float = 1e-10) -> bool:
    return dagger(s).isclose(s, tol)


def identity_sum(offset: int, k: int) -> OperatorSum:
    """The identity on a k-site window, expanded in diagonal ket-bra terms."""
    return OperatorSum({
        KetBraString(offset, bits, bits): 1.0
        for bits in product((1, 0), repeat=k)
    })


@dataclass
class RdmFunctional:
    """Sparse linear functional f(rho) = sum coeff(r, c) * rho[r, c]
    on the level-N reduced density matrix."""

    level: int
    entries: Dict[Tuple[int, int], complex] = field(default_factory=dict)

    def add(self, r: int, c: int, coeff: complex) -> None:
        key = (r, c)
        val = self.entries.get(key, 0.0) + coeff
        if abs(val) <= PRUNE_TOL:
            self.entries.pop(key, None)
        else:
            self.entries[key] = val

    def apply(self, rho: np.ndarray) -> complex:
        return sum(c * rho[r, col] for (r, col), c in self.entries.items())

    def __len__(self) -> int:
        return len(self.entries)


def embed_functional(s: KetBraString, N: int) -> RdmFunctional:
    """Functional expressing <s> through the level-N reduced density matrix.

    The string is left-aligned (shifted to offset 1) and extended over
    sites k+1..N by summing the diagonal entries of all bit extensions:
    <|nu><mu|> = rho[idx(mu), idx(nu)] summed over common right padding.
    """
    k = s.length
    if k > N:
        raise WindowTooLarge(f"window length {k} exceeds level {N}")
    f = RdmFunctional(N)
    for ext in product((1, 0), repeat=N - k):
        f.add(bits_to_index(s.bra + ext), bits_to_index(s.ket + ext), 1.0)
    return f


def embed_sum(op: OperatorLike, N: int) -> RdmFunctional:
    """Embed an operator sum, left-aligning every term individually.

    Individual shifts are legitimate because expectation values are
    translation invariant in every context where this is used.
    """
    f = RdmFunctional(N)
    for term, coeff in _as_sum(op):
        g = embed_functional(term, N)
        for (r, c), v in g.entries.items():
            f.add(r, c, coeff * v)
    return f
