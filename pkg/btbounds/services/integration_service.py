"""
Integration Service
Coset measures, orbital integrals, the Weyl integration formula at finite
level and the sd-weighted summability sums
"""

import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, partial
from math import ceil
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from sympy.ntheory import legendre_symbol

from btbounds.config import get_settings
from btbounds.models.bounds import PowerSum, QPowerBound
from btbounds.models.localfield import (
    FieldDescriptor,
    FieldKind,
    base_field,
    make_field,
    rational_valuation,
)
from btbounds.schemas.common import BoundSchema
from btbounds.schemas.reports import (
    ElementInvariants,
    OrbitalResult,
    SummabilityReport,
    WeylReport,
)
from btbounds.services.character_service import (
    elliptic_invariants,
    elliptic_matrix,
    extension_element,
    split_invariants,
)
from btbounds.services.fixedpoint_service import orbit_fixed_count_limit
from btbounds.utils.errors import (
    ConfigError,
    DegenerateInputError,
    HorizonError,
    PrecisionInsufficientError,
    ThresholdError,
    UnsupportedFieldError,
    check_cap,
)
from btbounds.utils.literals import parse_element
from btbounds.utils.matrices import Matrix, as_matrix, diagonal, inverse, mat_mul, unipotent


logger = logging.getLogger(__name__)

# |W| for GL_2
WEYL_ORDER_GL2 = 2


@dataclass(frozen=True)
class MeasureContext:
    """
    Level-N counting context with mu_G(K) = mu_T(T ∩ K) = mu_{T\\G}(TK) = 1.

    torus is "split" (the diagonal torus) or "elliptic" (E^x for the
    unramified quadratic E acting on the basis (1, theta)).
    """
    p: int
    level: int
    torus: str = "split"
    field: Optional[FieldDescriptor] = None

    @classmethod
    def build(cls, p: int, level: Optional[int] = None, torus: str = "split") -> "MeasureContext":
        level = level or get_settings().default_level
        if level < 1:
            raise ConfigError("level must be at least 1")
        if torus == "split":
            return cls(p, level, torus)
        if torus == "elliptic":
            return cls(p, level, torus, make_field(p, FieldKind.UNRAMIFIED))
        raise ConfigError(f"unknown torus: {torus}")

    @property
    def q(self) -> int:
        return self.p

    def torus_basis(self) -> List[Matrix]:
        """Z_p-basis of the torus Lie algebra: t = sum c_i basis_i"""
        if self.torus == "split":
            return [diagonal([1, 0]), diagonal([0, 1])]
        return [elliptic_matrix(self.field, 1, 0), elliptic_matrix(self.field, 0, 1)]

    def torus_points(self, level: int):
        """Coordinates of T(O / p^level)"""
        mod = self.p ** level
        if self.torus == "split":
            units = [a for a in range(mod) if a % self.p]
            return [(a, d) for a in units for d in units]
        return [(a, b) for a in range(mod) for b in range(mod) if a % self.p or b % self.p]


# ============ Coset measure ============

def _p_part_depth(p: int, x: Fraction) -> int:
    v = rational_valuation(p, x)
    return 0 if v is None or v >= 0 else -v


def _mod_rational(x: Fraction, modulus: int) -> int:
    return x.numerator * pow(x.denominator, -1, modulus) % modulus


def _conjugated_basis(ctx: MeasureContext, g: Matrix) -> Tuple[int, List[List[int]]]:
    """
    Write g^-1 basis_i g = y_i / p^e with y_i integral and return (e, y_i mod p^e).

    t = sum c_i basis_i then lies in g K g^-1 iff sum c_i y_i = 0 mod p^e.
    """
    g_inv = inverse(g)
    conj = [mat_mul(mat_mul(g_inv, b), g) for b in ctx.torus_basis()]
    e = max(_p_part_depth(ctx.p, x) for m in conj for row in m for x in row)
    if e == 0:
        return 0, []
    modulus = ctx.p ** e
    scale = Fraction(modulus)
    rows = [[_mod_rational(x * scale, modulus) for row in m for x in row] for m in conj]
    return e, rows


def _index_at(ctx: MeasureContext, e: int, rows: List[List[int]], level: int) -> Fraction:
    points = ctx.torus_points(level)
    check_cap(len(points), get_settings().cap_for("group"), "torus points")
    modulus = ctx.p ** e
    stable = 0
    for c in points:
        if all(sum(ci * r[k] for ci, r in zip(c, rows)) % modulus == 0 for k in range(4)):
            stable += 1
    return Fraction(len(points), stable)


@lru_cache(maxsize=4096)
def _coset_measure(ctx: MeasureContext, g: Matrix) -> Fraction:
    e, rows = _conjugated_basis(ctx, g)
    if e == 0:
        return Fraction(1)
    level = max(ctx.level, e)
    inner = _index_at(ctx, e, rows, level)
    outer = _index_at(ctx, e, rows, level + 1)
    if inner != outer:
        raise PrecisionInsufficientError(f"coset index does not stabilize at level {level}: {inner} vs {outer}")
    return inner


def coset_measure(ctx: MeasureContext, g: Sequence[Sequence]) -> Fraction:
    """
    mu_{T\\G}(T g K) = [T ∩ K : T ∩ K ∩ g K g^-1].

    Counted in T(O / p^N) with N at least the conductor of g, and checked
    against N + 1. The other index [T ∩ gKg^-1 : T ∩ K ∩ gKg^-1] is 1
    because the compact part of these tori lies in T ∩ K.
    """
    g = as_matrix(g)
    if len(g) != 2:
        raise DegenerateInputError("coset measures are computed for GL_2")
    return _coset_measure(ctx, g)


# ============ Class functions ============

SPLIT = "split"
ELLIPTIC_UNRAMIFIED = "elliptic-unramified"
ELLIPTIC_RAMIFIED = "elliptic-ramified"
UNDECIDED = "undecided"


def split_label(k: int) -> str:
    return f"{SPLIT}:{k}"


def _valuation_int(p: int, x: int) -> int:
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def characteristic_class(trace: int, det: int, p: int, level: int) -> str:
    """
    Certified class of x^2 - trace x + det known mod p^level.

    For p = 2 the discriminant is known mod 2^(level + 1).
    """
    top = level + 1 if p == 2 else level
    modulus = p ** top
    disc = (trace * trace - 4 * det) % modulus
    if disc == 0:
        return UNDECIDED
    w = _valuation_int(p, disc)
    if w % 2:
        return ELLIPTIC_RAMIFIED
    k = w // 2
    bits = top - w
    unit = (disc // p ** w) % p ** bits
    if p != 2:
        return split_label(k) if legendre_symbol(unit % p, p) == 1 else ELLIPTIC_UNRAMIFIED
    if bits >= 3:
        if unit % 8 == 1:
            return split_label(k)
        return ELLIPTIC_UNRAMIFIED if unit % 8 == 5 else ELLIPTIC_RAMIFIED
    if bits == 2 and unit % 4 == 3:
        return ELLIPTIC_RAMIFIED
    return UNDECIDED


def certified_split_depths(p: int, level: int) -> List[int]:
    """Depths k whose class SPLIT(k) can be certified at this level"""
    top = level + 1 if p == 2 else level
    need = 3 if p == 2 else 1
    return [k for k in range(level) if top - 2 * k >= need]


@dataclass(frozen=True)
class ClassFunction:
    """
    Indicator of K intersected with a union of characteristic-polynomial
    classes at level N. support None means every class, i.e. 1_K.
    """
    name: str
    support: Optional[FrozenSet[str]]

    def contains(self, label: str) -> bool:
        return self.support is None or label in self.support

    def admissible(self, p: int, level: int) -> bool:
        """Supported on classes certified at this level"""
        if self.support is None:
            return False
        allowed = {split_label(k) for k in certified_split_depths(p, level)}
        allowed |= {ELLIPTIC_UNRAMIFIED, ELLIPTIC_RAMIFIED}
        return self.support <= allowed

    def at_class(self, trace: int, det: int, p: int, level: int) -> int:
        return int(self.contains(characteristic_class(trace, det, p, level)))

    def __call__(self, g: Matrix, p: int, level: int) -> int:
        if any(rational_valuation(p, x) is not None and rational_valuation(p, x) < 0 for row in g for x in row):
            return 0
        det = g[0][0] * g[1][1] - g[0][1] * g[1][0]
        if rational_valuation(p, det) != 0:
            return 0
        if self.support is None:
            return 1
        modulus = p ** level
        trace = _mod_rational(g[0][0] + g[1][1], modulus)
        return self.at_class(trace, _mod_rational(det, modulus), p, level)


UNIT_BALL = ClassFunction("1_K", None)


def preset_class_functions(p: int, level: int) -> List[ClassFunction]:
    """Admissible indicators at (p, level), the elliptic zero cases included"""
    depths = certified_split_depths(p, level)
    presets = [ClassFunction(split_label(k), frozenset({split_label(k)})) for k in depths]
    if len(depths) > 1:
        presets.append(ClassFunction("split:all", frozenset(split_label(k) for k in depths)))
    presets += [
        ClassFunction(ELLIPTIC_UNRAMIFIED, frozenset({ELLIPTIC_UNRAMIFIED})),
        ClassFunction(ELLIPTIC_RAMIFIED, frozenset({ELLIPTIC_RAMIFIED})),
        ClassFunction("elliptic", frozenset({ELLIPTIC_UNRAMIFIED, ELLIPTIC_RAMIFIED})),
        ClassFunction("split:0+elliptic-unramified", frozenset({split_label(0), ELLIPTIC_UNRAMIFIED})),
    ]
    return presets


def find_class_function(name: str, p: int, level: int) -> ClassFunction:
    if name == UNIT_BALL.name:
        return UNIT_BALL
    for f in preset_class_functions(p, level):
        if f.name == name:
            return f
    raise ConfigError(f"unknown class function {name!r} at p={p}, level={level}")


# ============ Orbital integrals ============

def _rational_entries(gamma: Sequence, p: int, prec: int) -> List[Fraction]:
    f = base_field(p)
    out = []
    for x in gamma:
        if isinstance(x, str):
            out.append(parse_element(x, f, prec).to_fraction())
        else:
            out.append(Fraction(x))
    return out


def _split_representative(p: int, d: int) -> Matrix:
    return unipotent(2, {(0, 1): Fraction(1, p ** d)})


def _elliptic_representative(p: int, d: int) -> Matrix:
    return diagonal([Fraction(p) ** d, 1])


def _orbital_bound(inv: ElementInvariants, height: int, rank: int) -> QPowerBound:
    return QPowerBound((height * inv.sd + 1) ** rank, inv.q, inv.d_valuation / 2)


def _sweep(ctx: MeasureContext, gamma: Matrix, f: ClassFunction, representatives, horizon: int) -> Fraction:
    """sum of mu(T g K) f(g^-1 gamma g) over layers 0..horizon, layer horizon + 1 must vanish"""
    total = Fraction(0)
    for d in range(horizon + 2):
        g = representatives(d)
        value = f(mat_mul(mat_mul(inverse(g), gamma), g), ctx.p, ctx.level)
        if not value:
            continue
        if d == horizon + 1:
            raise HorizonError(f"nonzero contribution beyond horizon {horizon}")
        total += value * coset_measure(ctx, g)
    return total


def orbital_integral(
    gamma,
    f: ClassFunction,
    ctx: MeasureContext,
    prec: Optional[int] = None,
) -> OrbitalResult:
    """
    Integral of f(g^-1 gamma g) over T\\G for compact regular semisimple gamma.

    GL_2 sweeps the double cosets T g K: u(p^-d) for the split torus and
    diag(p^d, 1) for the unramified elliptic torus, d up to ht sd + 1. GL_3
    counts gamma-fixed points in the U-orbit of the origin, which computes
    the integral of 1_K.

    Args:
        gamma: diagonal entries (split) or the pair (a, b) for a + b*theta
        f: class function
        ctx: measure context
        prec: working precision for the invariants
    """
    prec = prec or get_settings().default_prec
    p = ctx.p

    if ctx.torus == "elliptic":
        if ctx.field.kind == FieldKind.RAMIFIED:
            raise UnsupportedFieldError("orbital integrals over ramified elliptic tori are not enumerated")
        a, b = _rational_entries(gamma, p, prec)
        inv = elliptic_invariants(extension_element(ctx.field, a, b, prec), ctx.field, prec)
        matrix = elliptic_matrix(ctx.field, a, b)
        reps = partial(_elliptic_representative, p)
        rank = 1
    else:
        entries = _rational_entries(gamma, p, prec)
        inv = split_invariants(entries, p, prec)
        matrix = diagonal(entries)
        reps = partial(_split_representative, p)
        rank = len(entries) - 1

    if not inv.compact:
        raise DegenerateInputError("orbital integrals are computed for compact gamma")
    height = rank if ctx.torus == "split" else 1
    horizon = ceil(height * inv.sd) + 1

    if len(matrix) == 2:
        value = _sweep(ctx, matrix, f, reps, horizon)
    elif f.support is None:
        value = Fraction(orbit_fixed_count_limit(p, [matrix[i][i] for i in range(len(matrix))], horizon, prec))
    else:
        raise ConfigError("GL_3 orbital integrals support 1_K only")

    bound = _orbital_bound(inv, height, rank)
    logger.debug(f"orbital integral {gamma} {f.name}: {value}")
    return OrbitalResult(
        gamma=",".join(str(x) for x in gamma),
        function=f.name,
        value=value,
        gamma_invariants=inv,
        bound=BoundSchema.from_bound(bound),
        holds=bound.bounds(value),
        horizon=horizon,
        level=ctx.level,
        empirical_constant=bound.empirical_constant(value),
    )


# ============ Weyl integration formula ============

def _trace_det_histogram(p: int, level: int) -> Counter:
    """#{g in GL_2(Z/p^N)} per (trace, det)"""
    mod = p ** level
    check_cap(mod ** 3, get_settings().cap_for("group"), "GL_2 residue enumeration")
    products = Counter(b * c % mod for b in range(mod) for c in range(mod))
    hist: Counter = Counter()
    for a in range(mod):
        for d in range(mod):
            ad = a * d
            tr = (a + d) % mod
            for m, n in products.items():
                det = (ad - m) % mod
                if det % p:
                    hist[(tr, det)] += n
    return hist


def _split_label_depth(label: str) -> Optional[int]:
    if label.startswith(SPLIT + ":"):
        return int(label.split(":")[1])
    return None


def weyl_formula_check(f: ClassFunction, ctx: MeasureContext) -> WeylReport:
    """
    Both sides of the Weyl integration formula for GL_2 at level N.

    lhs integrates f over the split-regular set by enumerating GL_2(Z/p^N);
    rhs is (1/|W|) times the sum over T(Z/p^N) of |D(t)| mu(cell) O_t(f).
    """
    if ctx.torus != "split":
        raise ConfigError("the Weyl check runs on the split torus")
    p, level = ctx.p, ctx.level
    if not f.admissible(p, level):
        raise PrecisionInsufficientError(f"{f.name} is not supported on classes certified at level {level}")

    hist = _trace_det_histogram(p, level)
    group_order = sum(hist.values())
    lhs_count = 0
    for (tr, det), n in hist.items():
        label = characteristic_class(tr, det, p, level)
        if _split_label_depth(label) is not None and f.contains(label):
            lhs_count += n
    lhs = Fraction(lhs_count, group_order)

    points = ctx.torus_points(level)
    orbital: Dict[str, Fraction] = {}
    rhs = Fraction(0)
    for a, d in points:
        label = characteristic_class(a + d, a * d, p, level)
        k = _split_label_depth(label)
        if k is None or not f.contains(label):
            continue
        if label not in orbital:
            orbital[label] = orbital_integral((a, d), f, ctx).value
        rhs += Fraction(1, p ** (2 * k)) * orbital[label]
    rhs = rhs / len(points) / WEYL_ORDER_GL2

    logger.debug(f"weyl {f.name} p={p} N={level}: lhs={lhs} rhs={rhs}")
    return WeylReport(function=f.name, p=p, level=level, lhs=lhs, rhs=rhs, equal=lhs == rhs)


# ============ Summability ============

def shell_measure(q: int, r: int) -> Fraction:
    """mu{t in O^x : v(t - 1) = r} with mu(O^x) = 1"""
    if r == 0:
        return Fraction(q - 2, q - 1)
    return Fraction(1, q ** r)


def summability_threshold(torus: str) -> Fraction:
    if torus == "gl1":
        return Fraction(1)
    if torus == "gl2-split":
        # 1 / (2^|R| M [E:F]) with |R| = 2, M = 1
        return Fraction(1, 4)
    raise ConfigError(f"unknown torus: {torus}")


def _decreasing_from(differences: List[float]) -> Optional[int]:
    """First shell from which the differences strictly decrease to the end"""
    start = len(differences) - 1
    while start > 0 and differences[start - 1] > differences[start]:
        start -= 1
    return start if start < len(differences) - 1 else None


def summability_report(torus: str, eps, m: int, R: int, ctx: MeasureContext) -> SummabilityReport:
    """
    Partial sums over sd-shells of T(O) of (ht sd + 1)^(n + m) q^(eps v(D)) mu(shell)
    with n = dim T.

    gl1 uses the formal exponent v(D) = r on Z_p^x, gl2-split has sd = r and
    v(D) = 2r on shell r.
    """
    eps = Fraction(eps)
    if eps < 0:
        raise ConfigError("eps must be non-negative")
    threshold = summability_threshold(torus)
    if eps >= threshold:
        raise ThresholdError(eps, threshold)
    q = ctx.q
    n, roots = (1, 1) if torus == "gl1" else (2, 2)

    total = PowerSum.of(q)
    sums: List[PowerSum] = []
    for r in range(R + 1):
        term = PowerSum.of(q, [(eps * roots * r, (r + 1) ** (n + m) * shell_measure(q, r))])
        total = total + term
        sums.append(total)

    values = [s.value for s in sums]
    differences = [values[0]] + [b - a for a, b in zip(values, values[1:])]
    start = _decreasing_from(differences)
    exact = [str(s.exact()) if s.is_rational else s.render() for s in sums]
    bounded = start is not None and len(differences) > 1 and differences[-1] < differences[-2]
    return SummabilityReport(
        torus=torus,
        eps=eps,
        m=m,
        threshold=threshold,
        partial_sums=values,
        partial_sums_exact=exact,
        differences=differences,
        monotone=all(b >= a for a, b in zip(values, values[1:])),
        decreasing_from=start,
        bounded_flag=bounded,
    )
