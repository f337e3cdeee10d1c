"""
Common Schemas
Exact rational fields and the q-power bound record shared by every report
"""

from fractions import Fraction
from typing import Annotated, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, PlainSerializer

from btbounds.models.bounds import QPowerBound


def _to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise ValueError("floats are not exact; pass a rational string")
    return Fraction(str(value))


# Exact rational serialized as "num/den"
Rational = Annotated[
    Fraction,
    BeforeValidator(_to_fraction),
    PlainSerializer(lambda x: str(x), return_type=str),
]

# Exact rational, or an above-precision marker rendered as ">=b"
Valuation = Union[Rational, str]


class BaseSchema(BaseModel):
    """Base for report records"""
    model_config = ConfigDict(
        arbitrary_types_allowed=True,
        populate_by_name=True,
    )


class BoundSchema(BaseSchema):
    """coeff * q^exponent with a float rendering"""
    coeff: Rational
    q: int
    exponent: Rational
    value: float

    @classmethod
    def from_bound(cls, bound: QPowerBound) -> "BoundSchema":
        return cls(
            coeff=bound.coeff,
            q=bound.q,
            exponent=bound.exponent,
            value=bound.value,
        )

    def to_bound(self) -> QPowerBound:
        return QPowerBound(self.coeff, self.q, self.exponent)
