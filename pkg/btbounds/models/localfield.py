"""
Local Field Model
Truncated arithmetic in Q_p and its tame quadratic / unramified extensions
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Optional, Sequence, Tuple, Union, List

from sympy import Poly, Symbol, isprime, multiplicity
from sympy.ntheory import legendre_symbol

from btbounds.utils.errors import (
    ConfigError,
    DegenerateInputError,
    PrecisionInsufficientError,
    UnsupportedFieldError,
)


Coords = Tuple[int, ...]
Rational = Union[int, Fraction]

_X = Symbol("X")


class FieldKind(str, Enum):
    BASE = "base"
    UNRAMIFIED = "unramified"
    RAMIFIED = "ramified"


@dataclass(frozen=True)
class AbovePrecision:
    """Marker for v(x) >= bound when x vanishes at the working precision"""
    bound: Fraction

    def __str__(self) -> str:
        return f">={self.bound}"


@dataclass(frozen=True)
class FieldDescriptor:
    """
    A base field Q_p or a tame extension given by a power basis.

    `relation` holds the low-to-high coefficients of the monic polynomial
    of the basis generator without its leading term: theta for unramified
    kinds, pi with pi^2 = p * ramified_unit for the ramified quadratic.
    """
    p: int
    kind: FieldKind
    e: int
    f: int
    relation: Coords = ()
    ramified_unit: int = 1

    @property
    def q(self) -> int:
        return self.p ** self.f

    @property
    def degree(self) -> int:
        return self.e * self.f

    @property
    def is_base(self) -> bool:
        return self.kind == FieldKind.BASE

    @property
    def square_unit(self) -> Optional[int]:
        """The u with theta^2 = u when the generator is a square root"""
        if self.kind == FieldKind.UNRAMIFIED and self.f == 2 and self.relation[1] == 0:
            return -self.relation[0]
        return None

    def coordinate_moduli(self, r: int) -> Coords:
        """Per-coordinate moduli describing pi^r O in the power basis"""
        if self.e == 1:
            return tuple(self.p ** max(r, 0) for _ in range(self.degree))
        return tuple(self.p ** max(0, -((i - r) // 2)) for i in range(2))

    def reduce(self, coords: Sequence[int], r: int) -> Coords:
        return tuple(c % m for c, m in zip(coords, self.coordinate_moduli(r)))

    def coordinate_order(self, coords: Sequence[int], bound: int) -> Optional[int]:
        """pi-adic order of the coordinate vector mod pi^bound, None if it vanishes"""
        reduced = self.reduce(coords, bound)
        if not any(reduced):
            return None
        if self.e == 1:
            return min(multiplicity(self.p, c) for c in reduced if c)
        return min(2 * multiplicity(self.p, c) + i for i, c in enumerate(reduced) if c)

    def multiply_coords(self, a: Sequence[int], b: Sequence[int]) -> Coords:
        d = self.degree
        prod = [0] * (2 * d - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] += ai * bj
        for k in range(2 * d - 2, d - 1, -1):
            c = prod[k]
            if c:
                prod[k] = 0
                for i, m in enumerate(self.relation):
                    prod[k - d + i] -= c * m
        return tuple(prod[:d])

    def shift_up(self, coords: Sequence[int], k: int) -> Coords:
        """Multiply by pi^k, k >= 0"""
        if self.e == 1:
            return tuple(c * self.p ** k for c in coords)
        c0, c1 = coords
        for _ in range(k):
            c0, c1 = self.p * self.ramified_unit * c1, c0
        return (c0, c1)

    def shift_down(self, coords: Sequence[int], k: int, digits: int) -> Coords:
        """Divide by pi^k where pi^k divides the coordinates"""
        if self.e == 1:
            return tuple(c // self.p ** k for c in coords)
        c0, c1 = coords
        w_inv = pow(self.ramified_unit, -1, self.p ** (digits + k + 1))
        for _ in range(k):
            c0, c1 = c1, (c0 // self.p) * w_inv
        return (c0, c1)

    def unit_group_order(self, r: int) -> int:
        """|(O/pi^r)^x|"""
        return (self.q - 1) * self.q ** (r - 1)

    def label(self) -> str:
        if self.is_base:
            return f"Q_{self.p}"
        if self.kind == FieldKind.RAMIFIED:
            return f"Q_{self.p}(sqrt({self.p}*{self.ramified_unit}))"
        return f"Q_{self.p}[X]/{tuple(self.relation) + (1,)}"


@dataclass(frozen=True)
class TruncatedElement:
    """
    pi^order * unit with the unit known mod pi^prec.

    When order is None the element vanishes at the working precision and
    prec is the absolute bound: v(x) >= prec / e.
    """
    field: FieldDescriptor
    order: Optional[int]
    unit: Coords
    prec: int

    # ---------- inspection ----------

    @property
    def is_marker(self) -> bool:
        return self.order is None

    @property
    def valuation(self) -> Union[Fraction, AbovePrecision]:
        if self.order is None:
            return AbovePrecision(Fraction(self.prec, self.field.e))
        return Fraction(self.order, self.field.e)

    @property
    def absolute_precision(self) -> int:
        """Absolute precision in pi-digits"""
        if self.order is None:
            return self.prec
        return self.order + self.prec

    def require_valuation(self) -> Fraction:
        if self.order is None:
            raise PrecisionInsufficientError(
                f"valuation not certified: v >= {Fraction(self.prec, self.field.e)}"
            )
        return Fraction(self.order, self.field.e)

    def valuation_at_least(self, threshold: Rational) -> bool:
        """Certified test v(x) >= threshold"""
        threshold = Fraction(threshold)
        if self.order is None:
            if Fraction(self.prec, self.field.e) >= threshold:
                return True
            raise PrecisionInsufficientError(
                f"cannot decide v >= {threshold}: only v >= {Fraction(self.prec, self.field.e)} known"
            )
        return Fraction(self.order, self.field.e) >= threshold

    def to_fraction(self) -> Fraction:
        """Rational representative of a base-field element"""
        if not self.field.is_base:
            raise DegenerateInputError("to_fraction needs a base-field element")
        if self.order is None:
            return Fraction(0)
        return Fraction(self.field.p) ** self.order * self.unit[0]

    def coordinates(self, digits: int) -> Coords:
        """Power-basis coordinates of an integral element, mod pi^digits"""
        if self.order is None:
            return self.field.reduce((0,) * self.field.degree, digits)
        if self.order < 0:
            raise DegenerateInputError("element is not integral")
        return self.field.reduce(self.field.shift_up(self.unit, self.order), digits)

    # ---------- arithmetic ----------

    def _coerce(self, other) -> "TruncatedElement":
        if isinstance(other, TruncatedElement):
            if other.field != self.field:
                if other.field.is_base and other.field.p == self.field.p:
                    return embed(other, self.field)
                raise DegenerateInputError("elements live in different fields")
            return other
        value = Fraction(other)
        k = _rational_order(self.field, value)
        prec = max(self.prec, self.absolute_precision - (k if k is not None else 0), 1)
        return from_rational(self.field, value, prec)

    def __add__(self, other) -> "TruncatedElement":
        return add(self, self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other) -> "TruncatedElement":
        return add(self, neg(self._coerce(other)))

    def __rsub__(self, other) -> "TruncatedElement":
        return add(self._coerce(other), neg(self))

    def __mul__(self, other) -> "TruncatedElement":
        return mul(self, self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "TruncatedElement":
        return mul(self, inv(self._coerce(other)))

    def __rtruediv__(self, other) -> "TruncatedElement":
        return mul(self._coerce(other), inv(self))

    def __neg__(self) -> "TruncatedElement":
        return neg(self)

    def __pow__(self, k: int) -> "TruncatedElement":
        if k < 0:
            return inv(self) ** (-k)
        result = one(self.field, self.prec)
        base = self
        while k:
            if k & 1:
                result = mul(result, base)
            base = mul(base, base)
            k >>= 1
        return result

    def __str__(self) -> str:
        if self.order is None:
            return f"v>={Fraction(self.prec, self.field.e)}"
        coords = ",".join(str(c) for c in self.unit)
        return f"v={Fraction(self.order, self.field.e)};u={coords}"


# ============ Construction ============

def _normalize(field: FieldDescriptor, coords: Sequence[int], shift: int, absolute: int) -> TruncatedElement:
    """Element pi^shift * coords known mod pi^absolute"""
    bound = absolute - shift
    o = field.coordinate_order(coords, bound)
    if o is None:
        return TruncatedElement(field, None, (0,) * field.degree, absolute)
    rel = bound - o
    unit = field.reduce(field.shift_down(field.reduce(coords, bound), o, rel), rel)
    return TruncatedElement(field, shift + o, unit, rel)


def rational_valuation(p: int, value: Rational) -> Optional[int]:
    """p-adic valuation of a rational, None for zero"""
    value = Fraction(value)
    if value == 0:
        return None
    return multiplicity(p, value.numerator) - multiplicity(p, value.denominator)


def _rational_order(field: FieldDescriptor, value: Fraction) -> Optional[int]:
    k = rational_valuation(field.p, value)
    return None if k is None else field.e * k


def _mod_rational(value: Fraction, modulus: int) -> int:
    return value.numerator * pow(value.denominator, -1, modulus) % modulus


def from_rational(field: FieldDescriptor, value: Rational, prec: int) -> TruncatedElement:
    """Embed a rational; prec is the relative precision in pi-digits"""
    value = Fraction(value)
    if prec < 1:
        raise ConfigError("precision must be at least 1")
    if value == 0:
        return TruncatedElement(field, None, (0,) * field.degree, prec)
    k = multiplicity(field.p, value.numerator) - multiplicity(field.p, value.denominator)
    unit = value / Fraction(field.p) ** k
    if field.e == 2:
        # p^k = pi^(2k) * w^(-k)
        unit = unit / Fraction(field.ramified_unit) ** k
    modulus = field.coordinate_moduli(prec)[0]
    coords = (_mod_rational(unit, modulus),) + (0,) * (field.degree - 1)
    return TruncatedElement(field, field.e * k, coords, prec)


def from_coordinates(
    field: FieldDescriptor,
    coords: Sequence[int],
    prec: int,
    shift: int = 0,
) -> TruncatedElement:
    """pi^shift * sum c_i g^i known mod pi^(shift + prec)"""
    if len(coords) != field.degree:
        raise ConfigError(f"expected {field.degree} coordinates, got {len(coords)}")
    return _normalize(field, tuple(coords), shift, shift + prec)


def zero(field: FieldDescriptor, prec: int) -> TruncatedElement:
    return TruncatedElement(field, None, (0,) * field.degree, prec)


def one(field: FieldDescriptor, prec: int) -> TruncatedElement:
    return from_rational(field, 1, prec)


def generator(field: FieldDescriptor, prec: int) -> TruncatedElement:
    """The power-basis generator: theta, pi, or 1 for the base field"""
    if field.is_base:
        return one(field, prec)
    if field.e == 2:
        return TruncatedElement(field, 1, (1, 0), prec)
    return from_coordinates(field, (0, 1) + (0,) * (field.degree - 2), prec)


def uniformizer(field: FieldDescriptor, prec: int) -> TruncatedElement:
    if field.e == 2:
        return generator(field, prec)
    return from_rational(field, field.p, prec)


def truncate(x: TruncatedElement, prec: int) -> TruncatedElement:
    """Drop relative precision down to prec"""
    if x.order is None or x.prec <= prec:
        return x
    return TruncatedElement(x.field, x.order, x.field.reduce(x.unit, prec), prec)


def embed(x: TruncatedElement, field: FieldDescriptor) -> TruncatedElement:
    """Embed a base-field element into an extension of the same p"""
    if x.field == field:
        return x
    if not x.field.is_base or x.field.p != field.p:
        raise DegenerateInputError("only base-field elements can be embedded")
    if x.order is None:
        return TruncatedElement(field, None, (0,) * field.degree, field.e * x.prec)
    unit = Fraction(x.unit[0])
    if field.e == 2:
        unit = unit / Fraction(field.ramified_unit) ** x.order
    rel = field.e * x.prec
    modulus = field.coordinate_moduli(rel)[0]
    coords = (_mod_rational(unit, modulus),) + (0,) * (field.degree - 1)
    return TruncatedElement(field, field.e * x.order, coords, rel)


# ============ Arithmetic ============

def neg(a: TruncatedElement) -> TruncatedElement:
    if a.order is None:
        return a
    return TruncatedElement(a.field, a.order, a.field.reduce([-c for c in a.unit], a.prec), a.prec)


def add(a: TruncatedElement, b: TruncatedElement) -> TruncatedElement:
    field = a.field
    absolute = min(a.absolute_precision, b.absolute_precision)
    terms = [x for x in (a, b) if x.order is not None]
    if not terms:
        return zero(field, absolute)
    o = min(x.order for x in terms)
    coords = [0] * field.degree
    for x in terms:
        for i, c in enumerate(field.shift_up(x.unit, x.order - o)):
            coords[i] += c
    return _normalize(field, coords, o, absolute)


def mul(a: TruncatedElement, b: TruncatedElement) -> TruncatedElement:
    field = a.field
    if a.order is None or b.order is None:
        bound = 0
        for x in (a, b):
            bound += x.prec if x.order is None else x.order
        return zero(field, bound)
    r = min(a.prec, b.prec)
    unit = field.reduce(field.multiply_coords(a.unit, b.unit), r)
    return TruncatedElement(field, a.order + b.order, unit, r)


def _unit_power(field: FieldDescriptor, unit: Coords, n: int, r: int) -> Coords:
    result: Coords = field.reduce((1,) + (0,) * (field.degree - 1), r)
    base = unit
    while n:
        if n & 1:
            result = field.reduce(field.multiply_coords(result, base), r)
        base = field.reduce(field.multiply_coords(base, base), r)
        n >>= 1
    return result


def inv(a: TruncatedElement) -> TruncatedElement:
    if a.order is None:
        raise PrecisionInsufficientError("division by an element below working precision")
    field = a.field
    r = a.prec
    if field.degree == 1:
        modulus = field.p ** r
        unit = (pow(a.unit[0], -1, modulus),)
    else:
        unit = _unit_power(field, a.unit, field.unit_group_order(r) - 1, r)
    return TruncatedElement(field, -a.order, unit, r)


def arithmetic(a: TruncatedElement, b: Optional[TruncatedElement], op: str) -> TruncatedElement:
    """
    Dispatch one arithmetic operation.

    Args:
        a: left operand
        b: right operand (ignored for inv; the target element for embed)
        op: add | sub | mul | inv | embed
    """
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "inv":
        return inv(a)
    if op == "embed":
        return embed(a, b.field)
    raise ConfigError(f"unknown operation: {op}")


def valuation(x: TruncatedElement) -> Union[Fraction, AbovePrecision]:
    return x.valuation


# ============ Galois action ============

@lru_cache(maxsize=256)
def _frobenius_generator(field: FieldDescriptor, r: int) -> Coords:
    """Coordinates of sigma(theta) mod p^r: the root of the modulus lifting theta^p"""
    d = field.degree
    if d == 2:
        # roots sum to -m1
        return field.reduce((-field.relation[1], -1), r)
    theta = generator(field, r)
    x = theta ** field.p
    coeffs = list(field.relation) + [1]
    steps = max(r, 1).bit_length() + 1
    for _ in range(steps):
        g = zero(field, r)
        dg = zero(field, r)
        for i, c in enumerate(coeffs):
            if c:
                g = g + x ** i * c
            if i and c:
                dg = dg + x ** (i - 1) * (c * i)
        x = x - g / dg
    return x.coordinates(r)


def _apply_frobenius(x: TruncatedElement) -> TruncatedElement:
    field = x.field
    if x.order is None:
        return x
    if field.e == 2:
        sign = -1 if x.order % 2 else 1
        u0, u1 = x.unit
        return TruncatedElement(field, x.order, field.reduce((sign * u0, -sign * u1), x.prec), x.prec)
    r = x.prec
    image = _frobenius_generator(field, r)
    acc = [0] * field.degree
    power: Coords = (1,) + (0,) * (field.degree - 1)
    for c in x.unit:
        if c:
            for i, v in enumerate(power):
                acc[i] += c * v
        power = field.reduce(field.multiply_coords(power, image), r)
    return TruncatedElement(field, x.order, field.reduce(acc, r), r)


def galois_conjugates(x: TruncatedElement) -> List[TruncatedElement]:
    """All [E:F] conjugates of x, starting with x itself"""
    conjugates = [x]
    for _ in range(x.field.degree - 1):
        conjugates.append(_apply_frobenius(conjugates[-1]))
    return conjugates


def descend(x: TruncatedElement) -> TruncatedElement:
    """Certify that x lies in the base field and return it there"""
    field = x.field
    base = base_field(field.p)
    if field.is_base:
        return x
    if x.order is None:
        return TruncatedElement(base, None, (0,), -(-x.prec // field.e))
    moduli = field.coordinate_moduli(x.prec)
    if any(c % m for c, m in zip(x.unit[1:], moduli[1:])):
        raise PrecisionInsufficientError(f"{x} is not certified to lie in the base field")
    if field.e == 1:
        return TruncatedElement(base, x.order, (x.unit[0] % field.p ** x.prec,), x.prec)
    if x.order % 2:
        raise PrecisionInsufficientError(f"{x} has odd pi-order and cannot lie in the base field")
    rel = -(-x.prec // 2)
    modulus = field.p ** rel
    unit = x.unit[0] * pow(field.ramified_unit, x.order // 2, modulus) % modulus
    return TruncatedElement(base, x.order // 2, (unit,), rel)


def norm(x: TruncatedElement) -> TruncatedElement:
    result = x
    for c in galois_conjugates(x)[1:]:
        result = result * c
    return descend(result)


def trace(x: TruncatedElement) -> TruncatedElement:
    result = x
    for c in galois_conjugates(x)[1:]:
        result = result + c
    return descend(result)


# ============ Field construction ============

def _is_irreducible(p: int, coeffs_low_to_high: Sequence[int]) -> bool:
    return Poly(list(reversed(coeffs_low_to_high)), _X, modulus=p).is_irreducible


def _least_non_residue(p: int) -> int:
    if p % 4 == 3:
        return -1
    return next(u for u in range(2, p) if legendre_symbol(u, p) == -1)


def _default_relation(p: int, degree: int) -> Coords:
    if degree == 2 and p != 2:
        # theta^2 = u
        return (-_least_non_residue(p), 0)
    if degree == 2:
        return (1, 1)
    for tail in product(range(p), repeat=degree):
        coeffs = tuple(reversed(tail))
        if coeffs[0] and _is_irreducible(p, coeffs + (1,)):
            return coeffs
    raise UnsupportedFieldError(f"no irreducible polynomial of degree {degree} mod {p}")


@lru_cache(maxsize=64)
def base_field(p: int) -> FieldDescriptor:
    return make_field(p, FieldKind.BASE)


def make_field(
    p: int,
    kind: Union[str, FieldKind] = FieldKind.BASE,
    degree: int = 2,
    polynomial: Optional[Sequence[int]] = None,
    ramified_unit: int = 1,
) -> FieldDescriptor:
    """
    Build a field descriptor.

    Args:
        p: residue characteristic, must be prime
        kind: base | unramified | ramified
        degree: degree of an unramified extension
        polynomial: optional monic residue polynomial, low-to-high with the leading 1
        ramified_unit: w in pi^2 = p * w

    Returns:
        FieldDescriptor with consistent (e, f, q)
    """
    if not isprime(p):
        raise ConfigError(f"{p} is not prime")
    try:
        kind = FieldKind(kind)
    except ValueError:
        raise ConfigError(f"unknown field kind: {kind}")

    if kind == FieldKind.BASE:
        return FieldDescriptor(p=p, kind=kind, e=1, f=1)

    if kind == FieldKind.RAMIFIED:
        if p == 2:
            raise UnsupportedFieldError("p = 2 ramified quadratic is wildly ramified")
        if ramified_unit % p == 0:
            raise UnsupportedFieldError("ramified unit must be prime to p")
        return FieldDescriptor(
            p=p, kind=kind, e=2, f=1,
            relation=(-p * ramified_unit, 0),
            ramified_unit=ramified_unit,
        )

    if polynomial is not None:
        coeffs = tuple(int(c) for c in polynomial)
        if len(coeffs) < 3 or coeffs[-1] != 1:
            raise ConfigError("residue polynomial must be monic of degree >= 2")
        if not _is_irreducible(p, coeffs):
            raise UnsupportedFieldError(f"{coeffs} is reducible mod {p}")
        relation = coeffs[:-1]
    else:
        if degree < 2:
            raise ConfigError("unramified degree must be at least 2")
        relation = _default_relation(p, degree)
    return FieldDescriptor(p=p, kind=kind, e=1, f=len(relation), relation=relation)
