"""
Exact Matrices
Small dense matrices over Q, stored as hashable tuples of Fractions and
computed with SymPy over QQ
"""

from fractions import Fraction
from typing import List, Sequence, Tuple

from sympy import Matrix as SympyMatrix, QQ, Rational
from sympy.polys.matrices import DomainMatrix

from btbounds.utils.errors import DegenerateInputError


Matrix = Tuple[Tuple[Fraction, ...], ...]


def as_matrix(rows: Sequence[Sequence]) -> Matrix:
    return tuple(tuple(Fraction(v) for v in row) for row in rows)


def identity(n: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def diagonal(entries: Sequence) -> Matrix:
    n = len(entries)
    return tuple(
        tuple(Fraction(entries[i]) if i == j else Fraction(0) for j in range(n))
        for i in range(n)
    )


def _to_domain(a: Matrix) -> DomainMatrix:
    rows = [[QQ(x.numerator, x.denominator) for x in row] for row in a]
    shape = (len(a), len(a[0]) if a else 0)
    return DomainMatrix(rows, shape, QQ)


def _from_domain(dm: DomainMatrix) -> Matrix:
    return tuple(
        tuple(Fraction(int(QQ.numer(x)), int(QQ.denom(x))) for x in row)
        for row in dm.to_list()
    )


def to_sympy(a: Matrix) -> SympyMatrix:
    """Mutable SymPy copy for in-place row and column operations"""
    return SympyMatrix([[Rational(x.numerator, x.denominator) for x in row] for row in a])


def from_sympy(m: SympyMatrix) -> Matrix:
    return tuple(
        tuple(Fraction(int(Rational(m[i, j]).p), int(Rational(m[i, j]).q)) for j in range(m.cols))
        for i in range(m.rows)
    )


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    if len(a[0]) != len(b):
        raise DegenerateInputError(f"cannot multiply {len(a)}x{len(a[0])} by {len(b)}x{len(b[0])}")
    return _from_domain(_to_domain(a).matmul(_to_domain(b)))


def determinant(a: Matrix) -> Fraction:
    d = _to_domain(a).det()
    return Fraction(int(QQ.numer(d)), int(QQ.denom(d)))


def inverse(a: Matrix) -> Matrix:
    dm = _to_domain(a)
    if dm.det() == QQ.zero:
        raise DegenerateInputError("matrix is singular")
    return _from_domain(dm.inv())


def unipotent(n: int, entries: dict) -> Matrix:
    """Upper unitriangular matrix with {(i, j): value} above the diagonal"""
    return tuple(
        tuple(
            Fraction(1) if i == j else Fraction(entries.get((i, j), 0)) if j > i else Fraction(0)
            for j in range(n)
        )
        for i in range(n)
    )


def render(a: Matrix) -> List[List[str]]:
    return [[str(v) for v in row] for row in a]
