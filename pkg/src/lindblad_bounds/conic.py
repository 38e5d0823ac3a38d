"""Solver-agnostic conic problem container.

A :class:`ConicProblem` is a linear objective plus sparse linear
equalities over one PSD matrix block and optional free scalars:

    min/max  c . x     s.t.  A x = b,   X >= 0 (PSD),  f free,

where x collects the entries of X and the free scalars f.  Variables are
referenced by integer codes: entry (r, c) of the block is ``r * dim + c``
and free scalar k is ``dim * dim + k``.  Coefficients on (r, c) and
(c, r) refer to the same underlying matrix entry (the block is symmetric
or Hermitian) and are combined at scalarization time.

When ``is_complex`` is set the block is complex Hermitian and must pass
through :func:`lindblad_bounds.backend.hermitian_embedding` before
solving or export.  Row coefficients may be complex in either case; each
complex equality splits into real and imaginary rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

Row = Dict[int, complex]


def psd_entry(dim: int, r: int, c: int) -> int:
    return r * dim + c

def free_var(dim: int, k: int) -> int:
    return dim * dim + k


@dataclass
class ConicProblem:
    psd_dim: int
    n_free: int
    objective: Row
    constraints: List[Tuple[Row, complex]]
    direction: str = "min"
    is_complex: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.direction not in ("min", "max"):
            raise ValueError(f"direction must be 'min' or 'max', got {self.direction!r}")

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    def entry(self, r: int, c: int) -> int:
        return psd_entry(self.psd_dim, r, c)

    def free(self, k: int) -> int:
        if not 0 <= k < self.n_free:
            raise IndexError(k)
        return free_var(self.psd_dim, k)


def add_to_row(row: Row, key: int, coeff: complex) -> None:
    val = row.get(key, 0.0) + coeff
    if val == 0:
        row.pop(key, None)
    else:
        row[key] = val


@dataclass(frozen=True)
class HermitianVariableBlock:
    """Descriptor of the matrix variable at a given level."""

    level: int
    realness: bool

    @property
    def dimension(self) -> int:
        return 2 ** self.level
