"""
Root System Model
Reduced root systems, the W-invariant form and the apartment's vertex structure

Points of the apartment are written in simple-root coordinates
xi_i = alpha_i(x); a root sum_j b_j alpha_j evaluates to sum_j b_j xi_j.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from itertools import combinations, product
from math import lcm
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import Matrix

from btbounds.utils.errors import DegenerateInputError, UnsupportedRootSystemError


Root = Tuple[int, ...]
Point = Tuple[Fraction, ...]

# cartan[i][j] = <alpha_j, alpha_i^vee>
CARTAN_MATRICES: Dict[str, Tuple[Tuple[int, ...], ...]] = {
    "A1": ((2,),),
    "A2": ((2, -1), (-1, 2)),
    "A3": ((2, -1, 0), (-1, 2, -1), (0, -1, 2)),
    "B2": ((2, -1), (-2, 2)),
    "C2": ((2, -2), (-1, 2)),
    "G2": ((2, -3), (-1, 2)),
}


@dataclass(frozen=True)
class ApartmentPoint:
    """A point of the apartment in simple-root coordinates"""
    coords: Point

    @classmethod
    def of(cls, values: Sequence) -> "ApartmentPoint":
        return cls(tuple(Fraction(v) for v in values))

    def __add__(self, other: "ApartmentPoint") -> "ApartmentPoint":
        return ApartmentPoint(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "ApartmentPoint") -> "ApartmentPoint":
        return ApartmentPoint(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def scaled(self, t) -> "ApartmentPoint":
        t = Fraction(t)
        return ApartmentPoint(tuple(t * a for a in self.coords))

    def to_strings(self) -> List[str]:
        return [str(c) for c in self.coords]


@dataclass(frozen=True)
class RootSystemData:
    name: str
    rank: int
    cartan: Tuple[Tuple[int, ...], ...]
    positive_roots: Tuple[Root, ...]
    periods: Tuple[int, ...]
    highest_root: Root
    special_vertices: Tuple[ApartmentPoint, ...]
    gram: Tuple[Tuple[int, ...], ...]

    @property
    def simple_roots(self) -> Tuple[Root, ...]:
        return tuple(tuple(int(i == j) for j in range(self.rank)) for i in range(self.rank))

    @property
    def roots(self) -> Tuple[Root, ...]:
        return self.positive_roots + tuple(tuple(-b for b in r) for r in self.positive_roots)

    @property
    def c(self) -> Root:
        """Coefficients of the highest root over the simple roots"""
        return self.highest_root

    @property
    def max_height(self) -> int:
        """ht(Phi)"""
        return sum(self.highest_root)

    def period(self, root: Root) -> int:
        key = root if root in self.positive_roots else tuple(-b for b in root)
        return self.periods[self.positive_roots.index(key)]


def evaluate_root(root: Sequence[int], x: ApartmentPoint) -> Fraction:
    return sum((b * xi for b, xi in zip(root, x.coords)), Fraction(0))


def _reflect_root(cartan, i: int, root: Root) -> Root:
    pairing = sum(b * cartan[i][j] for j, b in enumerate(root))
    return tuple(b - pairing if j == i else b for j, b in enumerate(root))


def _generate_roots(cartan) -> List[Root]:
    n = len(cartan)
    simple = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    found = set(simple)
    frontier = list(simple)
    while frontier:
        nxt = []
        for root in frontier:
            for i in range(n):
                image = _reflect_root(cartan, i, root)
                if image not in found:
                    found.add(image)
                    nxt.append(image)
        frontier = nxt
    return sorted(found)


@lru_cache(maxsize=None)
def build_root_system(name: str, periods: Optional[Tuple[int, ...]] = None) -> RootSystemData:
    """
    Build a supported reduced root system.

    Args:
        name: A1, A2, A3, B2, C2 or G2
        periods: optional affine periods n_alpha aligned with the positive roots
    """
    key = name.upper()
    if key not in CARTAN_MATRICES:
        raise UnsupportedRootSystemError(f"unsupported root system: {name}")
    cartan = CARTAN_MATRICES[key]
    n = len(cartan)

    positive = [r for r in _generate_roots(cartan) if all(b >= 0 for b in r)]
    positive.sort(key=lambda r: (sum(r), tuple(-b for b in r)))
    positive = tuple(positive)

    if periods is None:
        periods = (1,) * len(positive)
    elif len(periods) != len(positive) or any(k < 1 for k in periods):
        raise UnsupportedRootSystemError("periods must be positive, one per positive root")

    highest = max(positive, key=sum)
    special = tuple(
        ApartmentPoint(tuple(Fraction(int(i == j), highest[i]) for j in range(n)))
        for i in range(n)
    )
    gram = tuple(
        tuple(sum(r[i] * r[j] for r in positive) for j in range(n))
        for i in range(n)
    )
    return RootSystemData(
        name=key,
        rank=n,
        cartan=cartan,
        positive_roots=positive,
        periods=tuple(periods),
        highest_root=highest,
        special_vertices=special,
        gram=gram,
    )


def height(rs: RootSystemData, root: Sequence[int]) -> int:
    root = tuple(root)
    if root not in rs.roots:
        raise DegenerateInputError(f"{root} is not a root of {rs.name}")
    if root not in rs.positive_roots:
        raise DegenerateInputError(f"{root} is a negative root")
    return sum(root)


def weyl_form(rs: RootSystemData, v: ApartmentPoint, w: ApartmentPoint) -> Fraction:
    """<v, w> = sum over positive roots of alpha(v) alpha(w)"""
    return sum(
        (evaluate_root(r, v) * evaluate_root(r, w) for r in rs.positive_roots),
        Fraction(0),
    )


def reflect(rs: RootSystemData, i: int, x: ApartmentPoint) -> ApartmentPoint:
    """Simple reflection s_i: alpha_j(s_i x) = alpha_j(x) - alpha_i(x) <alpha_j, alpha_i^vee>"""
    xi = x.coords[i]
    return ApartmentPoint(tuple(c - xi * rs.cartan[i][j] for j, c in enumerate(x.coords)))


def is_vertex(rs: RootSystemData, x: ApartmentPoint) -> bool:
    """The roots taking values in n_alpha Z at x span the dual space"""
    walls = [
        list(r) for r, k in zip(rs.positive_roots, rs.periods)
        if (evaluate_root(r, x) / k).denominator == 1
    ]
    if len(walls) < rs.rank:
        return False
    return Matrix(walls).rank() == rs.rank


@lru_cache(maxsize=None)
def vertex_denominator(rs: RootSystemData) -> int:
    """lcm of |det| over independent rank-sized subsets of positive roots"""
    dets = []
    for subset in combinations(rs.positive_roots, rs.rank):
        d = int(Matrix([list(r) for r in subset]).det())
        if d:
            dets.append(abs(d))
    return reduce(lcm, dets, 1)


@dataclass(frozen=True)
class ConeVertexReport:
    vertices: Tuple[ApartmentPoint, ...]
    count: int
    bound: Fraction
    constant: Optional[Fraction]


def enumerate_cone_vertices(rs: RootSystemData, x: ApartmentPoint, bound) -> ConeVertexReport:
    """
    Vertices y in x + closed positive cone with alpha_i(y - x) < bound.

    The grid (1/L)Z^n with L = vertex_denominator contains every vertex.
    """
    bound = Fraction(bound)
    if not is_vertex(rs, x):
        raise DegenerateInputError(f"{x.to_strings()} is not a vertex")
    if bound <= 0:
        return ConeVertexReport((), 0, bound, None)
    L = vertex_denominator(rs)
    steps = range(int(-(-bound * L // 1)))
    offsets = [Fraction(k, L) for k in steps if Fraction(k, L) < bound]
    vertices = []
    for delta in product(offsets, repeat=rs.rank):
        y = x + ApartmentPoint(delta)
        if is_vertex(rs, y):
            vertices.append(y)
    return ConeVertexReport(
        vertices=tuple(vertices),
        count=len(vertices),
        bound=bound,
        constant=Fraction(len(vertices)) / bound ** rs.rank,
    )


def distance_increases(rs: RootSystemData, x: ApartmentPoint, i: int, t) -> bool:
    """d(O, x + t a_i) > d(O, x), compared on squared distances"""
    moved = x + rs.special_vertices[i].scaled(t)
    return weyl_form(rs, moved, moved) > weyl_form(rs, x, x)


def gl_apartment_point(x: Sequence) -> ApartmentPoint:
    """GL_n point (x_1..x_n) to A_{n-1} simple-root coordinates x_i - x_{i+1}"""
    x = [Fraction(v) for v in x]
    return ApartmentPoint(tuple(x[i] - x[i + 1] for i in range(len(x) - 1)))


def gl_root_system(n: int) -> RootSystemData:
    if n < 2 or n > 4:
        raise UnsupportedRootSystemError(f"GL_{n} is outside the supported range")
    return build_root_system(f"A{n - 1}")
