"""
Literal Parsing
Element, matrix, vector and polynomial literals used by the CLI and suite configs
"""

import json
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from sympy import Poly, Symbol, fraction, together
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    standard_transformations,
)

from btbounds.models.localfield import (
    FieldDescriptor,
    TruncatedElement,
    base_field,
    from_rational,
    generator,
    inv,
    truncate,
    uniformizer,
    zero,
)
from btbounds.utils.errors import ConfigError


_P = Symbol("p")
_PI = Symbol("pi")
_S = Symbol("s")
_TRANSFORMS = standard_transformations + (convert_xor,)

# extra digits carried while evaluating shorthand, then truncated away
_SLACK = 16


def parse_rational(text: Union[str, int, Fraction]) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"not a rational: {text!r}")


def parse_rational_vector(text: Union[str, Sequence]) -> Tuple[Fraction, ...]:
    """'1/2,0,-1' or a sequence -> tuple of Fractions"""
    if isinstance(text, str):
        parts = [t for t in text.split(",") if t.strip()]
    else:
        parts = list(text)
    return tuple(parse_rational(t) for t in parts)


def split_top_level(text: str, sep: str) -> List[str]:
    """Split on `sep` outside square brackets"""
    parts, depth, current = [], 0, []
    for ch in text:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
            if depth < 0:
                raise ConfigError(f"unbalanced brackets in {text!r}")
        if ch == sep and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    if depth != 0:
        raise ConfigError(f"unbalanced brackets in {text!r}")
    parts.append("".join(current))
    return [part.strip() for part in parts]


def _strip_brackets(text: str) -> str:
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        return text[1:-1].strip()
    return text


def _parse_explicit(text: str, field: FieldDescriptor, prec: int) -> TruncatedElement:
    fields = dict(part.split("=", 1) for part in text.split(";") if "=" in part)
    if "v" not in fields or "u" not in fields:
        raise ConfigError(f"element literal needs v= and u=: {text!r}")
    v = parse_rational(fields["v"])
    order = v * field.e
    if order.denominator != 1:
        raise ConfigError(f"valuation {v} is not in (1/{field.e})Z")
    coords = [int(c) for c in fields["u"].split(",") if c.strip()]
    if len(coords) > field.degree:
        raise ConfigError(f"too many unit coordinates for {field.label()}")
    coords += [0] * (field.degree - len(coords))
    if field.coordinate_order(coords, prec) != 0:
        raise ConfigError(f"unit part of {text!r} is not a unit")
    return TruncatedElement(field, int(order), field.reduce(coords, prec), prec)


def _evaluate_polynomial(expr, field: FieldDescriptor, prec: int) -> TruncatedElement:
    work = prec + _SLACK
    poly = Poly(expr, _S, _PI)
    total = zero(field, work + 2 * poly.total_degree() + 2)
    gen = generator(field, work)
    unif = uniformizer(field, work)
    for (i, j), coeff in poly.terms():
        c = Fraction(int(coeff.p), int(coeff.q))
        term = from_rational(field, c, work) * gen ** i * unif ** j
        total = total + term
    return total


def parse_element(text: Union[str, int, Fraction], field: FieldDescriptor, prec: int) -> TruncatedElement:
    """
    Parse an element literal.

    Accepts "v=<rational>;u=<c0>,...,<ck>" or a shorthand expression in
    integers, p, pi and s (the power-basis generator), e.g. "1+p^2" or "1+3*s".
    """
    if isinstance(text, (int, Fraction)):
        return from_rational(field, text, prec)
    text = _strip_brackets(str(text))
    if text.startswith("v="):
        return _parse_explicit(text, field, prec)

    try:
        expr = parse_expr(
            text,
            local_dict={"p": _P, "pi": _PI, "s": _S},
            transformations=_TRANSFORMS,
        )
        expr = together(expr.subs(_P, field.p))
    except Exception as e:
        raise ConfigError(f"cannot parse element {text!r}: {e}")

    if expr.is_Rational:
        return from_rational(field, Fraction(int(expr.p), int(expr.q)), prec)
    if field.is_base and expr.free_symbols - {_PI}:
        raise ConfigError(f"generator s is not available over {field.label()}")

    numerator, denominator = fraction(expr)
    try:
        num = _evaluate_polynomial(numerator, field, prec)
        den = _evaluate_polynomial(denominator, field, prec)
    except Exception as e:
        raise ConfigError(f"element {text!r} is not a rational function in s and pi: {e}")
    value = num if denominator == 1 else num * inv(den)
    return truncate(value, prec)


def parse_vector(text: Union[str, Sequence], field: FieldDescriptor, prec: int) -> List[TruncatedElement]:
    """Comma-separated element literals, brackets around v= literals"""
    if isinstance(text, str):
        parts = split_top_level(text, ",")
    else:
        parts = list(text)
    return [parse_element(part, field, prec) for part in parts]


def parse_matrix(text: str, field: FieldDescriptor, prec: int) -> List[List[TruncatedElement]]:
    """Row-major "a,b;c,d" matrix literal"""
    rows = [parse_vector(row, field, prec) for row in split_top_level(text, ";")]
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise ConfigError(f"ragged matrix literal: {text!r}")
    return rows


def parse_polynomial(data: Union[str, list]) -> List[Tuple[Tuple[int, ...], str]]:
    """
    Parse a JSON list of {exps, coeff} terms.

    Returns:
        List of (exponent tuple, coefficient literal) pairs
    """
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as e:
            raise ConfigError(f"polynomial is not valid JSON: {e}")
    if not isinstance(data, list) or not data:
        raise ConfigError("polynomial must be a non-empty list of terms")
    terms = []
    for term in data:
        try:
            exps = tuple(int(e) for e in term["exps"])
            coeff = str(term["coeff"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError(f"bad polynomial term: {term!r}")
        if any(e < 0 for e in exps):
            raise ConfigError("polynomial exponents must be non-negative")
        terms.append((exps, coeff))
    if len({len(exps) for exps, _ in terms}) != 1:
        raise ConfigError("all terms need the same number of variables")
    return terms


Entry = Union[Fraction, TruncatedElement]


def parse_entry(value: Union[str, int, Fraction, TruncatedElement], p: int, prec: int) -> Entry:
    """String literals become base-field elements known to prec digits; numbers stay exact"""
    if isinstance(value, TruncatedElement):
        return value
    if isinstance(value, str):
        return parse_element(value, base_field(p), prec)
    return Fraction(value)


def entry_value(x: Entry) -> Fraction:
    return x.to_fraction() if isinstance(x, TruncatedElement) else x


def least_known_digits(entries) -> Optional[int]:
    """Smallest absolute precision among truncated entries; None when all are exact"""
    digits = [x.absolute_precision for row in entries for x in row if isinstance(x, TruncatedElement)]
    return min(digits) if digits else None


def exact_rational(text: Union[str, int, Fraction], p: int) -> Optional[Fraction]:
    """Value of a literal in integers and p alone; None when it involves pi or s"""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    text = _strip_brackets(str(text))
    if text.startswith("v="):
        return None
    try:
        expr = parse_expr(text, local_dict={"p": _P, "pi": _PI, "s": _S}, transformations=_TRANSFORMS)
        expr = together(expr.subs(_P, p))
    except Exception:
        return None
    if expr.is_Rational:
        return Fraction(int(expr.p), int(expr.q))
    return None
