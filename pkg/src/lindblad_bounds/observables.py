"""Observable mini-language.

Grammar (whitespace insensitive)::

    expr   := term ('+' term)*
    term   := [float '*'] factor ('*' factor)*
    factor := op int          # op in {X, Y, Z, n, Sp, Sm, I}, int >= 1

Examples: ``Z1``, ``Z1*Z2``, ``0.5*n1 + 0.5*n2``.  Parsing yields an
:class:`ObservableExpr`; :meth:`ObservableExpr.to_operator_sum` expands
it into ket-bra form for the problem builders.  Site-range validation
against the relaxation level happens at dispatch time, not at parse
time.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .errors import ParseError, SiteOutOfRange
from .ketbra import KetBraString, OperatorSum, SiteOperator, site_matrix

Factor = Tuple[SiteOperator, int]

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<plus>\+)"
    r"|(?P<star>\*)"
    r"|(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<op>Sp|Sm|[XYZnI])"
)


@dataclass(frozen=True)
class ObservableExpr:
    """Sum of scalar-prefactored products of single-site operators."""

    terms: Tuple[Tuple[float, Tuple[Factor, ...]], ...]
    text: str

    @property
    def max_site(self) -> int:
        return max(site for _, factors in self.terms for _, site in factors)

    def validate_sites(self, level: int) -> None:
        if self.max_site > level:
            raise SiteOutOfRange(
                f"observable {self.text!r} uses site {self.max_site}, "
                f"outside the level-{level} window")

    def to_operator_sum(self) -> OperatorSum:
        total = OperatorSum()
        for prefactor, factors in self.terms:
            total = total + _expand_term(prefactor, factors)
        return total


def _expand_term(prefactor: float, factors: Tuple[Factor, ...]) -> OperatorSum:
    sites = [site for _, site in factors]
    a, b = min(sites), max(sites)
    width = b - a + 1
    mats = [np.eye(2, dtype=complex) for _ in range(width)]
    for op, site in factors:
        mats[site - a] = mats[site - a] @ site_matrix(op)
    terms = {}
    # matrix index 0 is the active state |1>, which the ket-bra encoding
    # writes as bit 1, hence the 1 - i flips below
    for rows in itertools.product((0, 1), repeat=width):
        for cols in itertools.product((0, 1), repeat=width):
            coeff = prefactor
            for j in range(width):
                coeff *= mats[j][rows[j], cols[j]]
            if coeff == 0:
                continue
            ket = tuple(1 - r for r in rows)
            bra = tuple(1 - c for c in cols)
            s = KetBraString(a, ket, bra)
            terms[s] = terms.get(s, 0.0) + coeff
    return OperatorSum(terms)


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens: List[Tuple[str, str, int]] = []  # (kind, value, column)
        while self.pos < len(text):
            m = _TOKEN_RE.match(text, self.pos)
            if m is None:
                raise ParseError(
                    f"unexpected character {text[self.pos]!r}", self.pos + 1)
            kind = m.lastgroup
            if kind != "ws":
                self.tokens.append((kind, m.group(), m.start() + 1))
            self.pos = m.end()
        self.i = 0

    def peek(self) -> Tuple[str, str, int]:
        if self.i < len(self.tokens):
            return self.tokens[self.i]
        return ("eof", "", len(self.text) + 1)

    def next(self) -> Tuple[str, str, int]:
        tok = self.peek()
        self.i += 1
        return tok


def _parse_factor(sc: _Scanner) -> Factor:
    kind, value, col = sc.next()
    if kind != "op":
        raise ParseError(f"expected operator name, got {value or 'end'!r}", col)
    op = SiteOperator(value)
    kind, site_text, col = sc.next()
    if kind != "num" or not site_text.isdigit():
        raise ParseError(f"expected site index after {op.value!r}", col)
    site = int(site_text)
    if site < 1:
        raise ParseError("site indices start at 1", col)
    return op, site


def _parse_term(sc: _Scanner) -> Tuple[float, Tuple[Factor, ...]]:
    prefactor = 1.0
    kind, value, col = sc.peek()
    if kind == "num":
        sc.next()
        prefactor = float(value)
        kind, value, col = sc.next()
        if kind != "star":
            raise ParseError("expected '*' after numeric prefactor", col)
    factors = [_parse_factor(sc)]
    while sc.peek()[0] == "star":
        sc.next()
        factors.append(_parse_factor(sc))
    return prefactor, tuple(factors)


def parse_observable(text: str) -> ObservableExpr:
    """Parse observable text into an :class:`ObservableExpr`.

    Raises :class:`ParseError` carrying the 1-based column of the first
    offending character.
    """
    sc = _Scanner(text)
    if sc.peek()[0] == "eof":
        raise ParseError("empty observable", 1)
    terms = [_parse_term(sc)]
    while sc.peek()[0] == "plus":
        sc.next()
        terms.append(_parse_term(sc))
    kind, value, col = sc.peek()
    if kind != "eof":
        raise ParseError(f"unexpected token {value!r}", col)
    return ObservableExpr(terms=tuple(terms), text=text)
