"""
Tree Vertex Model
Vertices of the Bruhat-Tits tree of PGL_2(Q_p) as Hermite-normal lattice classes
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from btbounds.models.localfield import rational_valuation
from btbounds.utils.errors import ConfigError, DegenerateInputError
from btbounds.utils.matrices import Matrix, as_matrix, determinant, inverse, mat_mul


def reduce_mod_power(p: int, b: Fraction, a: int) -> Fraction:
    """Representative of b mod p^a Z_p in Z[1/p] ∩ [0, p^a)"""
    v = rational_valuation(p, b)
    if v is None or v >= a:
        return Fraction(0)
    modulus = p ** (a - v)
    unit = b / Fraction(p) ** v
    residue = unit.numerator * pow(unit.denominator, -1, modulus) % modulus
    return Fraction(p) ** v * residue


@dataclass(frozen=True, order=True)
class TreeVertex:
    """
    Class of the lattice spanned by the columns of [[p^a, b], [0, 1]].

    b lies in Z[1/p] and is reduced into [0, p^a).
    """
    a: int
    b: Fraction

    @property
    def key(self) -> str:
        return f"{self.a};{self.b}"

    @property
    def on_apartment(self) -> bool:
        return self.b == 0

    def basis(self, p: int) -> Matrix:
        return as_matrix([[Fraction(p) ** self.a, self.b], [0, 1]])

    @classmethod
    def origin(cls) -> "TreeVertex":
        return cls(0, Fraction(0))

    @classmethod
    def apartment(cls, a: int) -> "TreeVertex":
        return cls(a, Fraction(0))

    @classmethod
    def from_key(cls, key: str, p: int) -> "TreeVertex":
        try:
            a_text, b_text = key.split(";")
            a, b = int(a_text), Fraction(b_text)
        except ValueError:
            raise ConfigError(f"bad vertex literal: {key!r}")
        return cls(a, reduce_mod_power(p, b, a))

    def __str__(self) -> str:
        return self.key


def _val(p: int, x: Fraction) -> Optional[int]:
    return rational_valuation(p, x)


def canonical_vertex(p: int, basis: Sequence[Sequence]) -> TreeVertex:
    """
    Hermite normalization of a nonsingular 2x2 basis up to GL_2(Z_p) and scaling.

    Swap columns so the lower-right entry has the smaller valuation, clear the
    lower-left entry, scale the lower-right to 1, then reduce the upper-right
    entry modulo the upper-left one.
    """
    m = as_matrix(basis)
    if determinant(m) == 0:
        raise DegenerateInputError("lattice basis is singular")
    (alpha, beta), (gamma, delta) = m
    vd, vg = _val(p, delta), _val(p, gamma)
    if vd is None or (vg is not None and vg < vd):
        alpha, beta = beta, alpha
        gamma, delta = delta, gamma
    first = alpha - beta * gamma / delta
    a = _val(p, first / delta)
    b = reduce_mod_power(p, beta / delta, a)
    return TreeVertex(a, b)


def tree_distance(p: int, z1: TreeVertex, z2: TreeVertex) -> int:
    """v(det M) - 2 min v(M_ij) for M = B1^-1 B2"""
    m = mat_mul(inverse(z1.basis(p)), z2.basis(p))
    vals = [_val(p, x) for row in m for x in row if x != 0]
    return _val(p, determinant(m)) - 2 * min(vals)


def project_to_apartment(p: int, z: TreeVertex) -> TreeVertex:
    """Nearest vertex of the standard apartment line"""
    if z.b == 0:
        return z
    return TreeVertex.apartment(_val(p, z.b))
