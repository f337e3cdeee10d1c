"""
Measure Service
Valuation-measure fractions of polynomials, the norm map, [K:K_r] indices
and shell tail sums over norm tori
"""

import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import ceil
from typing import Dict, List, Optional, Sequence, Tuple, Union

from btbounds.config import get_settings
from btbounds.models.bounds import PowerSum, QPowerBound
from btbounds.models.localfield import (
    FieldDescriptor,
    TruncatedElement,
    base_field,
    norm,
    rational_valuation,
)
from btbounds.models.polynomial import PadicPolynomial
from btbounds.schemas.common import BoundSchema
from btbounds.schemas.reports import KrIndexReport, PolyFractionReport, TailSumReport
from btbounds.utils.errors import (
    DegenerateInputError,
    PrecisionInsufficientError,
    UnsupportedFieldError,
    check_cap,
)
from btbounds.utils.literals import parse_element


logger = logging.getLogger(__name__)


# ============ Polynomial valuation fractions ============

@lru_cache(maxsize=4096)
def _valuation_histogram(f: PadicPolynomial, level: int) -> Tuple[Tuple[int, int], ...]:
    """#{x in (Z/p^N)^n} per min(v(f(x)), N)"""
    modulus = f.p ** level
    residues = f.residue_terms(modulus)
    hist: Counter = Counter()
    for x in product(range(modulus), repeat=f.n):
        value = f.evaluate_mod(x, modulus, residues)
        v = level
        if value:
            v = 0
            while value % f.p == 0:
                value //= f.p
                v += 1
        hist[v] += 1
    return tuple(sorted(hist.items()))


def poly_val_fraction(f: PadicPolynomial, r, N: int) -> PolyFractionReport:
    """
    Share of x in (Z/p^N)^n with v(f(x)) >= r, by exhaustive evaluation.

    For one variable the report also checks m q^(-(r - v(a_m))/m), a_m the
    leading coefficient. For n >= 2 it reports C = fraction q^(r/m_f) / N^(n-1).
    """
    r = Fraction(r)
    if f.is_zero:
        raise DegenerateInputError("f = 0")
    if N < r:
        raise PrecisionInsufficientError(f"level {N} is below r = {r}")
    q = f.p
    check_cap(q ** (f.n * N), get_settings().cap_for("cosets"), "residue points")

    threshold = ceil(r)
    count = sum(c for v, c in _valuation_histogram(f, N) if v >= threshold)
    fraction = Fraction(count, q ** (f.n * N))
    m_f = f.m_f
    shape = float(fraction) * q ** (float(r) / m_f) if m_f else float(fraction)

    bound_n1 = n1_holds = constant = None
    if f.n == 1:
        m, a_m = f.leading()
        if m > 0:
            bound = QPowerBound(m, q, -(r - rational_valuation(q, a_m)) / m)
            bound_n1 = BoundSchema.from_bound(bound)
            n1_holds = bound.bounds(fraction)
    else:
        constant = shape / N ** (f.n - 1)

    return PolyFractionReport(
        n=f.n,
        q=q,
        r=r,
        level=N,
        count=count,
        fraction=fraction,
        m_f=m_f,
        mf_shape=shape,
        bound_n1=bound_n1,
        n1_holds=n1_holds,
        constant=constant,
    )


def _family_unit(p: int) -> int:
    """A unit that is not a square: -1 for p = 3 mod 4, else the least non-residue"""
    if p == 2:
        return 5
    if p % 4 == 3:
        return -1
    return next(u for u in range(2, p) if pow(u, (p - 1) // 2, p) == p - 1)


def polynomial_family(p: int, max_degree: int = 4) -> List[PadicPolynomial]:
    """One-variable polynomials of degree 1..max_degree, leading coefficient in {1, p, p^2, u}, lower ones in {0, 1, p, p^2, u}"""
    u = _family_unit(p)
    leading = (1, p, p * p, u)
    lower = (0,) + leading
    family = []
    for m in range(1, max_degree + 1):
        for a_m in leading:
            for rest in product(lower, repeat=m):
                terms = [((m,), a_m)] + [((i,), c) for i, c in enumerate(rest) if c]
                family.append(PadicPolynomial.of(p, terms))
    return family


def poly_family_sweep(p: int, N_max: int = 4, max_degree: int = 4) -> List[PolyFractionReport]:
    """The explicit one-variable bound over the whole family, every N <= N_max and integer r <= N"""
    reports = []
    for f in polynomial_family(p, max_degree):
        for N in range(1, N_max + 1):
            for r in range(1, N + 1):
                reports.append(poly_val_fraction(f, r, N))
    logger.info(f"polynomial family p={p}: {len(reports)} cases")
    return reports


# ============ Norm tori ============

@dataclass(frozen=True)
class NormTorusContext:
    """
    T = G_m^m over E with a character chi of the restricted torus.

    chi is an exponent vector against the cocharacter basis, roots are
    characters in the same coordinates.
    """
    field: FieldDescriptor
    chi: Tuple[int, ...] = (1,)
    roots: Tuple[Tuple[int, ...], ...] = ()
    cocharacters: Tuple[Tuple[int, ...], ...] = ()

    def __post_init__(self):
        m = len(self.chi)
        if m == 0:
            raise DegenerateInputError("chi needs at least one coordinate")
        if self.field.degree > 2:
            raise UnsupportedFieldError("norm tori are enumerated over extensions of degree <= 2")
        if not self.cocharacters:
            basis = tuple(tuple(int(i == j) for j in range(m)) for i in range(m))
            object.__setattr__(self, "cocharacters", basis)
        if any(len(a) != m for a in self.roots):
            raise DegenerateInputError("roots and chi have different ranks")

    @property
    def rank(self) -> int:
        return len(self.chi)

    @property
    def q(self) -> int:
        return self.field.p

    @property
    def degree(self) -> int:
        return self.field.degree

    @property
    def M(self) -> int:
        """max over roots and basis cocharacters of <alpha, X_i>, 1 without roots"""
        pairings = [sum(a * x for a, x in zip(alpha, X)) for alpha in self.roots for X in self.cocharacters]
        return max(pairings + [1])


def norm_map(t: Union[TruncatedElement, Sequence[TruncatedElement]], ctx: NormTorusContext) -> List[TruncatedElement]:
    """Componentwise product of Galois conjugates, certified in the base field"""
    if isinstance(t, TruncatedElement):
        t = [t]
    if len(t) != ctx.rank:
        raise DegenerateInputError(f"expected {ctx.rank} components")
    out = []
    for x in t:
        if x.field != ctx.field:
            raise DegenerateInputError("element lives in a different field")
        x.require_valuation()
        out.append(norm(x))
    return out


def _coordinate_norm(field: FieldDescriptor, a: int, b: int, modulus: int) -> int:
    """N(a + b*g) = a^2 - m1 a b + m0 b^2 for g^2 + m1 g + m0 = 0"""
    if field.degree == 1:
        return a % modulus
    m0, m1 = field.relation
    return (a * a - m1 * a * b + m0 * b * b) % modulus


def _unit_points(field: FieldDescriptor, level: int) -> List[Tuple[int, int]]:
    """1 + pi O_E mod p^level in power-basis coordinates"""
    p, mod = field.p, field.p ** level
    ones = range(1, mod, p)
    if field.degree == 1:
        return [(a, 0) for a in ones]
    if field.e == 2:
        return [(a, b) for a in ones for b in range(mod)]
    return [(a, b) for a in ones for b in range(0, mod, p)]


def _chi_value(chi: Sequence[int], values: Sequence[int], modulus: int) -> int:
    result = 1
    for c, v in zip(chi, values):
        result = result * pow(v, c, modulus) % modulus
    return result


def _depth(p: int, value: int, level: int) -> int:
    """min(v(value - 1), level) for value mod p^level"""
    d = (value - 1) % p ** level
    if d == 0:
        return level
    v = 0
    while d % p == 0:
        d //= p
        v += 1
    return v


@lru_cache(maxsize=256)
def _norm_images(ctx: NormTorusContext, level: int) -> Tuple[Counter, Tuple[int, ...]]:
    """Depth histogram of chi(N(k)) over K at level N and the set of values"""
    points = _unit_points(ctx.field, level)
    check_cap(len(points) ** ctx.rank, get_settings().cap_for("group"), "norm-torus points")
    modulus = ctx.q ** level
    norms = [_coordinate_norm(ctx.field, a, b, modulus) for a, b in points]
    depths: Counter = Counter()
    values = set()
    for combo in product(norms, repeat=ctx.rank):
        value = _chi_value(ctx.chi, combo, modulus)
        depths[_depth(ctx.q, value, level)] += 1
        values.add(value)
    return depths, tuple(sorted(values))


def _image_size(values: Sequence[int], modulus: int) -> int:
    return len({v % modulus for v in values})


def _base_index(ctx: NormTorusContext, r_int: int) -> int:
    """[T(F) ∩ K : T(F)_r ∩ K] from chi on (1 + pZ_p)^m mod p^r"""
    modulus = ctx.q ** r_int
    ones = list(range(1, modulus, ctx.q)) if r_int > 0 else [1]
    check_cap(len(ones) ** ctx.rank, get_settings().cap_for("group"), "base-torus points")
    return len({_chi_value(ctx.chi, combo, modulus) for combo in product(ones, repeat=ctx.rank)})


def _index_K(ctx: NormTorusContext, r_int: int, level: int) -> int:
    depths, _ = _norm_images(ctx, level)
    total = sum(depths.values())
    kept = sum(c for d, c in depths.items() if d >= r_int)
    return total // kept


def kr_index(r, ctx: NormTorusContext, N: int) -> KrIndexReport:
    """
    [K : K_r], [Upsilon : Upsilon_r] and [T(F) ∩ K : T(F)_r ∩ K].

    K = 1 + pi O_E, K_r = {k : v(chi(N(k)) - 1) >= r} and Upsilon = N(K).
    The first index is counted through the kernel, the second through the
    image of chi o N, the third on the base torus.
    """
    r = Fraction(r)
    if N < r + 1:
        raise PrecisionInsufficientError(f"level {N} is below r + 1 = {r + 1}")
    if r < 0:
        raise DegenerateInputError("r must be non-negative")
    r_int = ceil(r)

    index_K = _index_K(ctx, r_int, N)
    _, values = _norm_images(ctx, N)
    index_upsilon = _image_size(values, ctx.q ** r_int)
    index_tf = _base_index(ctx, r_int)
    c2 = Fraction(ctx.degree * ctx.M)
    decay = float(ctx.q) ** float(r / c2) / index_K
    return KrIndexReport(
        r=r,
        level=N,
        index_K_Kr=index_K,
        index_Upsilon=index_upsilon,
        index_TF=index_tf,
        afttr_holds=index_K == index_upsilon and index_upsilon <= index_tf,
        c2=c2,
        decay=decay,
    )


def decay_sweep(ctx: NormTorusContext, r_max: int, N: int) -> List[KrIndexReport]:
    return [kr_index(r, ctx, N) for r in range(1, r_max + 1)]


# ============ Tail sums ============

def _index_sequence(ctx: NormTorusContext, R: int, level: int) -> Tuple[List[int], int]:
    """
    [K : K_r] for r = 0..R + 1 and the last r that was counted.

    Counted up to level - 1; beyond that the growth must already be by
    exactly q per step, which continues since chi(N(K)) is then open.
    """
    counted = [_index_K(ctx, r, level) for r in range(min(R + 1, level - 1) + 1)]
    last = len(counted) - 1
    while len(counted) < R + 2:
        if len(counted) < 2 or counted[-1] != counted[-2] * ctx.q:
            raise PrecisionInsufficientError(
                f"[K:K_r] is not yet geometric at level {level}; raise the level"
            )
        counted.append(counted[-1] * ctx.q)
    if last < R + 1:
        logger.info(f"[K:K_r] counted through r={last} at level {level}, extrapolated to r={R + 1}")
    return counted, last


def tail_sum(ctx: NormTorusContext, eps, R: int, level: Optional[int] = None) -> TailSumReport:
    """
    S(R) = sum over shells r = 1..R of q^(eps r) mu(K_r minus K_(r+1)), mu(K) = 1.

    Thresholds follow M and [E:F]; convergence is reported, not asserted.
    Indices past level - 1 are extrapolated geometrically and the report
    says how many.
    """
    eps = Fraction(eps)
    if eps < 0:
        raise DegenerateInputError("eps must be non-negative")
    level = level or get_settings().default_level + 3
    q = ctx.q
    indices, counted_through = _index_sequence(ctx, R, level)

    total = PowerSum.of(q)
    values = []
    for r in range(1, R + 1):
        shell = Fraction(1, indices[r]) - Fraction(1, indices[r + 1])
        total = total.add_term(shell, eps * r)
        values.append(total.value)
    differences = [values[0]] + [b - a for a, b in zip(values, values[1:])] if values else []

    tail = differences[len(differences) // 2:]
    converging = len(tail) > 1 and all(b < a for a, b in zip(tail, tail[1:]))

    base = Fraction(1, ctx.M * ctx.degree)
    n_roots = len(ctx.roots)
    return TailSumReport(
        eps=eps,
        shells=R,
        partial_sum=str(total.exact()) if total.is_rational else total.render(),
        partial_sum_value=total.value,
        differences=differences,
        converging=converging,
        threshold=base,
        threshold_abs_d=base / 2 ** max(n_roots - 1, 0),
        threshold_sd=base / 2 ** n_roots,
        level=level,
        counted_through=counted_through,
        extrapolated=len(indices) - 1 - counted_through,
    )


def gl1_context(p: int, chi: Tuple[int, ...] = (1,)) -> NormTorusContext:
    """Z_p^x with the identity character"""
    return NormTorusContext(field=base_field(p), chi=chi)


def parse_torus_element(text: str, ctx: NormTorusContext, prec: int) -> TruncatedElement:
    return parse_element(text, ctx.field, prec)
