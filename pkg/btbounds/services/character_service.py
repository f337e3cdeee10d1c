"""
Character Service
Root valuations, the D-function, singular depth, displacement and the
character-bound ingredients of a regular semisimple element
"""

import logging
from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple, Union

from sympy import Matrix as SymMatrix

from btbounds.config import get_settings
from btbounds.models.bounds import QPowerBound
from btbounds.models.localfield import (
    FieldDescriptor,
    FieldKind,
    TruncatedElement,
    base_field,
    from_rational,
    galois_conjugates,
    generator,
    make_field,
    rational_valuation,
)
from btbounds.models.rootsys import (
    ApartmentPoint,
    RootSystemData,
    evaluate_root,
    gl_apartment_point,
    is_vertex,
    vertex_denominator,
    weyl_form,
)
from btbounds.schemas.reports import ElementInvariants, SimplexCountReport
from btbounds.utils.errors import (
    DegenerateInputError,
    PrecisionInsufficientError,
    UnsupportedRootSystemError,
)
from btbounds.utils.literals import exact_rational, parse_element
from btbounds.utils.matrices import Matrix, as_matrix


logger = logging.getLogger(__name__)

ElementInput = Union[int, Fraction, str, TruncatedElement]


def _to_element(x: ElementInput, field: FieldDescriptor, prec: int) -> TruncatedElement:
    if isinstance(x, TruncatedElement):
        return x
    return parse_element(x, field, prec)


def _root_valuation(num: TruncatedElement, den: TruncatedElement, exact_equal: bool) -> Fraction:
    """v(num / den - 1) = v(num - den) - v(den)"""
    diff = num - den
    if diff.is_marker:
        if exact_equal:
            raise DegenerateInputError("eigenvalues coincide: element is not regular")
        raise PrecisionInsufficientError(
            f"root value is 1 to working precision (v >= {diff.valuation.bound}); raise --prec"
        )
    return diff.require_valuation() - den.require_valuation()


def _exact_value(x: ElementInput, p: int) -> Optional[Fraction]:
    """Exact rational value of an input, None for truncated elements"""
    if isinstance(x, TruncatedElement):
        return None
    return exact_rational(x, p)


def _assemble(
    group: str,
    q: int,
    root_valuations: Dict[str, Fraction],
    eigenvalue_valuations: List[Fraction],
) -> ElementInvariants:
    d = sum(root_valuations.values(), Fraction(0))
    return ElementInvariants(
        group=group,
        q=q,
        root_valuations=root_valuations,
        eigenvalue_valuations=eigenvalue_valuations,
        d_valuation=d,
        lambda_=-d,
        sd=max(root_valuations.values()),
        compact=all(v == 0 for v in eigenvalue_valuations),
        compact_mod_center=len(set(eigenvalue_valuations)) == 1,
        regular=True,
    )


def split_invariants(gamma: Sequence[ElementInput], p: int, prec: Optional[int] = None) -> ElementInvariants:
    """Invariants of diag(t_1, ..., t_n) over Q_p"""
    prec = prec or get_settings().default_prec
    field = base_field(p)
    if len(gamma) < 2:
        raise DegenerateInputError("need at least two diagonal entries")
    entries = [_to_element(x, field, prec) for x in gamma]
    exact = [_exact_value(x, p) for x in gamma]
    for t in entries:
        t.require_valuation()

    roots: Dict[str, Fraction] = {}
    n = len(entries)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            same = exact[i] is not None and exact[i] == exact[j]
            roots[f"e{i + 1}-e{j + 1}"] = _root_valuation(entries[i], entries[j], same)
    eig = [t.require_valuation() for t in entries]
    return _assemble(f"gl{n}", p, roots, eig)


def elliptic_invariants(gamma: ElementInput, field: FieldDescriptor, prec: Optional[int] = None) -> ElementInvariants:
    """Invariants of an elliptic GL_2 element with eigenvalues gamma, sigma(gamma) in E"""
    prec = prec or get_settings().default_prec
    if field.degree != 2:
        raise DegenerateInputError("elliptic tori of GL_2 need a quadratic extension")
    g = _to_element(gamma, field, prec)
    g.require_valuation()
    conj = galois_conjugates(g)[1]
    v = _root_valuation(g, conj, False)
    tag = "elliptic-ramified" if field.kind == FieldKind.RAMIFIED else "elliptic-unramified"
    roots = {"alpha": v, "-alpha": v}
    eig = [g.require_valuation()] * 2
    return _assemble(f"gl2-{tag}", field.p, roots, eig)


def element_invariants(
    gamma,
    p: int,
    torus: str = "split",
    prec: Optional[int] = None,
    field: Optional[FieldDescriptor] = None,
) -> ElementInvariants:
    """
    Invariants of a regular semisimple element.

    Args:
        gamma: diagonal entries (split) or an element a + b*s of E (elliptic)
        p: residue characteristic
        torus: split | elliptic
        prec: working precision in pi-digits
        field: the quadratic extension for elliptic input
    """
    if torus == "split":
        inv = split_invariants(gamma, p, prec)
    elif torus == "elliptic":
        inv = elliptic_invariants(gamma, field or make_field(p, FieldKind.UNRAMIFIED), prec)
    else:
        raise DegenerateInputError(f"unknown torus kind: {torus}")
    logger.debug(f"invariants of {gamma}: sd={inv.sd} v(D)={inv.d_valuation}")
    return inv


def elliptic_matrix(field: FieldDescriptor, a, b) -> Matrix:
    """Multiplication by a + b*theta on the basis (1, theta)"""
    if field.degree != 2:
        raise DegenerateInputError("elliptic matrices need a quadratic extension")
    m0, m1 = field.relation
    a, b = Fraction(a), Fraction(b)
    return as_matrix([[a, -m0 * b], [b, a - m1 * b]])


def extension_element(field: FieldDescriptor, a, b, prec: int) -> TruncatedElement:
    """a + b*theta as a truncated element"""
    return from_rational(field, a, prec) + from_rational(field, b, prec) * generator(field, prec)


def displacement(t: Sequence, rs: RootSystemData, p: int) -> Fraction:
    """
    Squared displacement <nu, nu> of a split diagonal element.

    nu_i = -v(t_i), projected to the semisimple apartment.
    """
    if len(t) != rs.rank + 1:
        raise DegenerateInputError(f"{rs.name} needs {rs.rank + 1} diagonal entries")
    nu = []
    for x in t:
        v = rational_valuation(p, Fraction(x))
        if v is None:
            raise DegenerateInputError("diagonal entries must be invertible")
        nu.append(-v)
    xi = gl_apartment_point(nu)
    return weyl_form(rs, xi, xi)


def character_bound(inv: ElementInvariants, rs: RootSystemData, C, m: int) -> QPowerBound:
    """C (ht(Phi) sd + 1)^m q^(v(D)/2)"""
    if not inv.regular:
        raise DegenerateInputError("character bound needs a regular element")
    base = rs.max_height * inv.sd + 1
    return QPowerBound(Fraction(C) * base ** m, inv.q, inv.d_valuation / 2)


# ============ Apartment cells ============

def _cell_label(rs: RootSystemData, x: ApartmentPoint) -> Tuple[int, ...]:
    """2k on the wall alpha = k n_alpha, 2k + 1 strictly between k and k + 1"""
    label = []
    for root, period in zip(rs.positive_roots, rs.periods):
        value = evaluate_root(root, x) / period
        k = value.numerator // value.denominator
        label.append(2 * k if value.denominator == 1 else 2 * k + 1)
    return tuple(label)


def _cell_dimension(rs: RootSystemData, label: Tuple[int, ...]) -> int:
    walls = [list(r) for r, l in zip(rs.positive_roots, label) if l % 2 == 0]
    if not walls:
        return rs.rank
    return rs.rank - SymMatrix(walls).rank()


def _in_closure(label: Tuple[int, ...], vertex_label: Tuple[int, ...]) -> bool:
    for l, w in zip(label, vertex_label):
        if l % 2 == 0:
            if w != l:
                return False
        elif not (l - 1 <= w <= l + 1):
            return False
    return True


def _grid(rs: RootSystemData, radius: int, denominator: int) -> List[ApartmentPoint]:
    steps = [Fraction(k, denominator) for k in range(-radius * denominator, radius * denominator + 1)]
    return [ApartmentPoint(c) for c in product(steps, repeat=rs.rank)]


def _count_cells(rs: RootSystemData, r: int) -> List[int]:
    L = vertex_denominator(rs)

    vertex_labels = [
        (_cell_label(rs, x), all(abs(c) <= r for c in x.coords))
        for x in _grid(rs, r + 1, L) if is_vertex(rs, x)
    ]
    cells = {_cell_label(rs, x) for x in _grid(rs, r, 6 * L)}

    by_dimension = [0] * (rs.rank + 1)
    for label in cells:
        closure = [inside for v, inside in vertex_labels if _in_closure(label, v)]
        if closure and all(closure):
            by_dimension[_cell_dimension(rs, label)] += 1
    return by_dimension


def simplex_count_ball(rs: RootSystemData, r: int) -> SimplexCountReport:
    """
    Count closed cells of the apartment complex inside {|alpha_i(x)| <= r}.

    Cells are the distinct wall-position labels on the grid (1/6L)Z^n, which
    meets every cell of rank <= 2. A cell counts when all vertices of its
    closure lie in the box.
    """
    if rs.rank > 2:
        raise UnsupportedRootSystemError(f"cell enumeration supports rank <= 2, got {rs.name}")
    if r < 1:
        raise DegenerateInputError("radius must be at least 1")

    counts = []
    by_dimension: List[int] = []
    for radius in range(1, r + 1):
        by_dimension = _count_cells(rs, radius)
        counts.append(sum(by_dimension))
    c_b = max(Fraction(c, k ** rs.rank) for k, c in enumerate(counts, start=1))
    euler = sum((-1) ** d * c for d, c in enumerate(by_dimension))
    return SimplexCountReport(
        root_system=rs.name,
        radius=r,
        count=counts[-1],
        by_dimension=by_dimension,
        euler_characteristic=euler,
        counts=counts,
        c_b=c_b,
    )
