"""
Exact Bounds
q-power bounds and power sums compared without floating point
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Tuple, Union

Rational = Union[int, Fraction]


def power_le(c1: Rational, e1: Rational, c2: Rational, e2: Rational, q: int) -> bool:
    """
    Exact test c1 * q^e1 <= c2 * q^e2 for c1, c2 >= 0.

    Clears the denominator b of e2 - e1: c1^b <= c2^b * q^(b(e2 - e1)).
    """
    c1, c2 = Fraction(c1), Fraction(c2)
    if c1 < 0 or c2 < 0:
        raise ValueError("power_le expects non-negative coefficients")
    if c1 == 0:
        return True
    if c2 == 0:
        return False
    d = Fraction(e2) - Fraction(e1)
    a, b = d.numerator, d.denominator
    return c1 ** b <= c2 ** b * Fraction(q) ** a


def power_lt(c1: Rational, e1: Rational, c2: Rational, e2: Rational, q: int) -> bool:
    return power_le(c1, e1, c2, e2, q) and not power_le(c2, e2, c1, e1, q)


@dataclass(frozen=True)
class QPowerBound:
    """coeff * q^exponent with rational coeff and exponent"""
    coeff: Fraction
    q: int
    exponent: Fraction

    def __post_init__(self):
        object.__setattr__(self, "coeff", Fraction(self.coeff))
        object.__setattr__(self, "exponent", Fraction(self.exponent))

    @property
    def value(self) -> float:
        return float(self.coeff) * float(self.q) ** float(self.exponent)

    def bounds(self, x: Rational) -> bool:
        """x <= coeff * q^exponent, decided exactly"""
        x = Fraction(x)
        if x <= 0:
            return True
        return power_le(x, 0, self.coeff, self.exponent, self.q)

    def empirical_constant(self, x: Rational) -> float:
        """x / (coeff * q^exponent) for reporting"""
        return float(Fraction(x)) / self.value

    def scaled(self, factor: Rational) -> "QPowerBound":
        return QPowerBound(self.coeff * Fraction(factor), self.q, self.exponent)

    def to_dict(self) -> Dict:
        return {
            "coeff": str(self.coeff),
            "q": self.q,
            "exponent": str(self.exponent),
            "value": self.value,
        }


@dataclass(frozen=True)
class PowerSum:
    """Exact finite sum of c * q^e with rational c and e"""
    q: int
    terms: Tuple[Tuple[Fraction, Fraction], ...] = field(default=())

    @classmethod
    def of(cls, q: int, items: Iterable[Tuple[Rational, Rational]] = ()) -> "PowerSum":
        acc: Dict[Fraction, Fraction] = {}
        for e, c in items:
            e, c = Fraction(e), Fraction(c)
            acc[e] = acc.get(e, Fraction(0)) + c
        return cls(q, tuple(sorted((e, c) for e, c in acc.items() if c != 0)))

    def add_term(self, coeff: Rational, exponent: Rational) -> "PowerSum":
        return PowerSum.of(self.q, list(self.terms) + [(exponent, coeff)])

    def __add__(self, other: "PowerSum") -> "PowerSum":
        if other.q != self.q:
            raise ValueError("power sums over different q")
        return PowerSum.of(self.q, list(self.terms) + list(other.terms))

    def __sub__(self, other: "PowerSum") -> "PowerSum":
        return self + PowerSum(other.q, tuple((e, -c) for e, c in other.terms))

    @property
    def is_rational(self) -> bool:
        return all(e.denominator == 1 for e, _ in self.terms)

    def exact(self) -> Fraction:
        """Exact value when every exponent is an integer"""
        if not self.is_rational:
            raise ValueError("power sum has irrational terms")
        return sum((c * Fraction(self.q) ** int(e) for e, c in self.terms), Fraction(0))

    @property
    def value(self) -> float:
        return sum(float(c) * float(self.q) ** float(e) for e, c in self.terms)

    def render(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*{self.q}^({e})" for e, c in self.terms)
