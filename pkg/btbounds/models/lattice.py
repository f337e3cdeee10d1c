"""
Lattice Model
Square matrices over the valuation ring and their Smith forms
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

from btbounds.models.localfield import TruncatedElement, base_field, rational_valuation
from btbounds.utils.errors import DegenerateInputError
from btbounds.utils.literals import parse_element
from btbounds.utils.matrices import Matrix, as_matrix, determinant, diagonal, mat_mul


EntryInput = Union[int, Fraction, str, TruncatedElement]


@dataclass(frozen=True)
class LatticeMatrix:
    """
    n x n matrix over Z_p with entries known mod p^prec.

    `representative` is the exact integer matrix the entries reduce to.
    """
    p: int
    entries: Tuple[Tuple[TruncatedElement, ...], ...]
    _det_valuation: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def of(cls, p: int, rows: Sequence[Sequence[EntryInput]], prec: int) -> "LatticeMatrix":
        if isinstance(rows, LatticeMatrix):
            return rows
        f = base_field(p)
        entries = tuple(
            tuple(x if isinstance(x, TruncatedElement) else parse_element(x, f, prec) for x in row)
            for row in rows
        )
        n = len(entries)
        if n == 0 or any(len(row) != n for row in entries):
            raise DegenerateInputError("lattice matrices must be square and non-empty")
        for row in entries:
            for x in row:
                if x.order is not None and x.order < 0:
                    raise DegenerateInputError(f"entry {x} is not integral")
        return cls(p, entries)

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def absolute_precision(self) -> int:
        """Every entry is known mod p^absolute_precision"""
        return min(x.absolute_precision for row in self.entries for x in row)

    @property
    def representative(self) -> Matrix:
        return as_matrix([[x.to_fraction() for x in row] for row in self.entries])

    @property
    def det_valuation(self) -> Optional[int]:
        """v(det) of the representative, None when it is singular"""
        if "v" not in self._det_valuation:
            self._det_valuation["v"] = rational_valuation(self.p, determinant(self.representative))
        return self._det_valuation["v"]



@dataclass(frozen=True)
class SmithForm:
    """P M Q = diag(p^d_i * units_i) with P, Q in GL_n(Z_p)"""
    p: int
    P: Matrix
    D: Tuple[int, ...]
    Q: Matrix
    P_inv: Matrix
    Q_inv: Matrix
    units: Tuple[Fraction, ...]

    @property
    def diagonal(self) -> Matrix:
        return diagonal([Fraction(self.p) ** d * u for d, u in zip(self.D, self.units)])

    @property
    def det_valuation(self) -> int:
        return sum(self.D)

    def reconstruct(self, M: Sequence[Sequence]) -> Matrix:
        """P M Q, which equals `diagonal` for the matrix the form was computed from"""
        return mat_mul(mat_mul(self.P, as_matrix(M)), self.Q)
