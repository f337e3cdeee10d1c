"""
Tree Service
Breadth-first enumeration, the group action and fixed-vertex counting on the
Bruhat-Tits tree of PGL_2(Q_p)
"""

import logging
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence

from btbounds.config import get_settings
from btbounds.models.bounds import QPowerBound
from btbounds.models.localfield import TruncatedElement, rational_valuation
from btbounds.models.tree import (
    TreeVertex,
    canonical_vertex,
    project_to_apartment,
    tree_distance,
)
from btbounds.schemas.common import BoundSchema
from btbounds.schemas.reports import ElementInvariants, FixedAboveReport
from btbounds.services.character_service import split_invariants
from btbounds.utils.errors import (
    DegenerateInputError,
    HorizonError,
    PrecisionInsufficientError,
    check_cap,
)
from btbounds.utils.literals import entry_value, least_known_digits, parse_entry
from btbounds.utils.matrices import Matrix, as_matrix, determinant, inverse, mat_mul, unipotent


logger = logging.getLogger(__name__)

# ht(Phi) for PGL_2
TREE_HEIGHT = 1


def ball_size(q: int, radius: int) -> int:
    """1 + (q+1)(q^r - 1)/(q - 1)"""
    if radius == 0:
        return 1
    return 1 + (q + 1) * (q ** radius - 1) // (q - 1)


def neighbors(p: int, z: TreeVertex) -> List[TreeVertex]:
    """The p + 1 vertices adjacent to z"""
    basis = z.basis(p)
    steps = [as_matrix([[p, c], [0, 1]]) for c in range(p)]
    steps.append(as_matrix([[1, 0], [0, p]]))
    return [canonical_vertex(p, mat_mul(basis, s)) for s in steps]


def _least_valuation(p: int, m: Matrix) -> int:
    return min(v for v in (rational_valuation(p, x) for row in m for x in row) if v is not None)


def act(p: int, g: Sequence[Sequence], z: TreeVertex, prec: Optional[int] = None) -> TreeVertex:
    """
    Canonical form of g . L.

    Numeric entries are exact. String literals are known to `prec` digits; the
    image is certified once g + E gives the same lattice for every error E
    below that precision, otherwise PrecisionInsufficientError.
    """
    if any(isinstance(v, (str, TruncatedElement)) for row in g for v in row):
        entries = [[parse_entry(v, p, prec or get_settings().default_prec) for v in row] for row in g]
        g = as_matrix([[entry_value(v) for v in row] for row in entries])
        known = least_known_digits(entries)
    else:
        g, known = as_matrix(g), None
    if determinant(g) == 0:
        raise DegenerateInputError("g is singular")
    basis = z.basis(p)
    image = mat_mul(g, basis)
    if known is not None:
        # (g B)^-1 E B must stay in p M_2(Z_p)
        needed = 1 - _least_valuation(p, basis) - _least_valuation(p, inverse(image))
        if known < needed:
            raise PrecisionInsufficientError(f"g . {z} needs entries known to {needed} digits, have {known}")
    return canonical_vertex(p, image)


def enumerate_ball(p: int, center: TreeVertex, radius: int, cap: Optional[int] = None) -> List[TreeVertex]:
    """All vertices within distance `radius` of center, each once, in BFS order"""
    if radius < 0:
        raise DegenerateInputError("radius must be non-negative")
    cap = cap or get_settings().cap_for("tree")
    check_cap(ball_size(p, radius), cap, "tree ball")

    seen = {center}
    order = [center]
    frontier = [center]
    for _ in range(radius):
        nxt = []
        for z in frontier:
            for w in neighbors(p, z):
                if w not in seen:
                    seen.add(w)
                    order.append(w)
                    nxt.append(w)
        frontier = nxt
    return order


def is_above(p: int, z: TreeVertex, x: TreeVertex) -> bool:
    """x attains the minimal distance from z to the standard apartment"""
    if not x.on_apartment:
        raise DegenerateInputError(f"{x} is not on the standard apartment")
    return tree_distance(p, z, x) == tree_distance(p, z, project_to_apartment(p, z))


def _layers_above(p: int, x: TreeVertex, depth: int) -> Iterator[List[TreeVertex]]:
    """BFS layers of the region above x, layer k at distance k"""
    layer = [x]
    seen = {x}
    yield layer
    for _ in range(depth):
        nxt = []
        for z in layer:
            for w in neighbors(p, z):
                if w in seen or w.on_apartment:
                    continue
                seen.add(w)
                nxt.append(w)
        layer = nxt
        yield layer


def _diagonal_entries(gamma: Matrix) -> List[Fraction]:
    if gamma[0][1] != 0 or gamma[1][0] != 0:
        raise DegenerateInputError("pass invariants for non-diagonal gamma")
    return [gamma[0][0], gamma[1][1]]


def count_fixed_above(
    p: int,
    gamma: Sequence[Sequence],
    x: TreeVertex,
    max_radius: Optional[int] = None,
    invariants: Optional[ElementInvariants] = None,
    prec: Optional[int] = None,
) -> FixedAboveReport:
    """
    Count gamma-fixed vertices above x by breadth-first enumeration.

    The radius must reach ht(Phi) sd(gamma) + 1; one extra layer is scanned
    to confirm that no fixed vertex lies beyond it.
    """
    gamma = as_matrix(gamma)
    if invariants is None:
        invariants = split_invariants(_diagonal_entries(gamma), p, prec)
    if not invariants.compact:
        raise DegenerateInputError("fixed-above counting needs a compact element")
    if not x.on_apartment:
        raise DegenerateInputError(f"{x} is not on the standard apartment")

    horizon = TREE_HEIGHT * invariants.sd + 1
    needed = int(-(-horizon // 1))
    if max_radius is None:
        max_radius = needed
    if max_radius < horizon:
        raise HorizonError(f"max_radius {max_radius} is below ht*sd+1 = {horizon}")
    check_cap(p ** (max_radius + 1), get_settings().cap_for("tree"), "tree region")

    count = 0
    beyond = 0
    for depth, layer in enumerate(_layers_above(p, x, max_radius + 1)):
        fixed = sum(1 for z in layer if act(p, gamma, z) == z)
        if depth <= max_radius:
            count += fixed
        else:
            beyond += fixed

    bound = QPowerBound(TREE_HEIGHT * invariants.sd + 1, p, invariants.d_valuation / 2)
    logger.debug(f"fixed above {x}: {count} (beyond: {beyond})")
    return FixedAboveReport(
        center=x.key,
        count=count,
        max_radius=max_radius,
        beyond_empty=beyond == 0,
        sd=invariants.sd,
        d_valuation=invariants.d_valuation,
        bound=BoundSchema.from_bound(bound),
        empirical_constant=bound.empirical_constant(count),
        holds=bound.bounds(count),
    )


def count_fixed_in_unipotent_orbit(p: int, gamma: Sequence[Sequence], x: TreeVertex, depth: int) -> int:
    """
    gamma-fixed vertices among u . x for u = [[1, c], [0, 1]],
    c in p^(a - depth) Z_p / p^a Z_p where x = (a, 0).
    """
    gamma = as_matrix(gamma)
    if not x.on_apartment:
        raise DegenerateInputError(f"{x} is not on the standard apartment")
    if depth < 0:
        raise DegenerateInputError("depth must be non-negative")
    check_cap(p ** depth, get_settings().cap_for("tree"), "unipotent orbit")
    step = Fraction(p) ** (x.a - depth)
    orbit = {act(p, unipotent(2, {(0, 1): k * step}), x) for k in range(p ** depth)}
    return sum(1 for z in orbit if act(p, gamma, z) == z)


def count_fixed_in_ball(p: int, gamma: Sequence[Sequence], radius: int, center: Optional[TreeVertex] = None) -> int:
    """gamma-fixed vertices within `radius` of center"""
    gamma = as_matrix(gamma)
    center = center or TreeVertex.origin()
    return sum(1 for z in enumerate_ball(p, center, radius) if act(p, gamma, z) == z)
