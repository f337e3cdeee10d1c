"""
Polynomial Model
Multivariate polynomials over Z_p evaluated on residue points
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

from btbounds.models.localfield import base_field, rational_valuation
from btbounds.utils.errors import ConfigError, DegenerateInputError
from btbounds.utils.literals import parse_element, parse_polynomial


Term = Tuple[Tuple[int, ...], Fraction]


@dataclass(frozen=True)
class PadicPolynomial:
    """sum c_e x^e with p-integral rational coefficients"""
    p: int
    n: int
    terms: Tuple[Term, ...]

    @classmethod
    def of(cls, p: int, terms: Sequence[Tuple[Sequence[int], Union[str, int, Fraction]]], prec: int = 16) -> "PadicPolynomial":
        """Build from (exponents, coefficient literal) pairs, merging equal monomials"""
        field = base_field(p)
        acc = {}
        for exps, coeff in terms:
            exps = tuple(int(e) for e in exps)
            if isinstance(coeff, str):
                value = parse_element(coeff, field, prec).to_fraction()
            else:
                value = Fraction(coeff)
            if value and rational_valuation(p, value) < 0:
                raise ConfigError(f"coefficient {coeff} is not integral")
            acc[exps] = acc.get(exps, Fraction(0)) + value
        if len({len(e) for e in acc}) > 1:
            raise ConfigError("all terms need the same number of variables")
        kept = tuple(sorted((e, c) for e, c in acc.items() if c != 0))
        n = len(next(iter(acc))) if acc else 0
        return cls(p, n, kept)

    @classmethod
    def from_json(cls, p: int, data) -> "PadicPolynomial":
        return cls.of(p, parse_polynomial(data))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def m_i(self) -> Tuple[int, ...]:
        """Largest exponent of each variable"""
        return tuple(max((e[i] for e, _ in self.terms), default=0) for i in range(self.n))

    @property
    def m_f(self) -> int:
        return max(self.m_i, default=0)

    @property
    def degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=0)

    def leading(self) -> Tuple[int, Fraction]:
        """(m, a_m) for a polynomial in one variable"""
        if self.n != 1:
            raise DegenerateInputError("leading coefficient needs one variable")
        exps, coeff = max(self.terms)
        return exps[0], coeff

    def residue_terms(self, modulus: int) -> Tuple[Tuple[Tuple[int, ...], int], ...]:
        return tuple(
            (e, c.numerator * pow(c.denominator, -1, modulus) % modulus)
            for e, c in self.terms
        )

    def evaluate_mod(self, x: Sequence[int], modulus: int, residues: Optional[Tuple] = None) -> int:
        residues = residues or self.residue_terms(modulus)
        total = 0
        for exps, c in residues:
            term = c
            for xi, e in zip(x, exps):
                if e:
                    term = term * pow(xi, e, modulus) % modulus
            total += term
        return total % modulus

    def render(self) -> str:
        parts = []
        for exps, c in self.terms:
            mono = "*".join(f"x{i + 1}^{e}" if e > 1 else f"x{i + 1}" for i, e in enumerate(exps) if e)
            parts.append(f"{c}*{mono}" if mono else str(c))
        return " + ".join(parts) or "0"
