"""
Fixed-Point Service
Unipotent-orbit fixed-point counting for split GL_n
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import ceil, prod
from typing import Dict, List, Optional, Sequence, Tuple

from btbounds.config import get_settings
from btbounds.models.bounds import QPowerBound
from btbounds.models.localfield import TruncatedElement, rational_valuation
from btbounds.schemas.reports import HeightLayer, OrbitCountReport, Rank1Report
from btbounds.services.character_service import split_invariants
from btbounds.utils.errors import DegenerateInputError, HorizonError, check_cap
from btbounds.utils.literals import Entry, entry_value, parse_entry
from btbounds.utils.matrices import as_matrix


logger = logging.getLogger(__name__)

RootIndex = Tuple[int, int]


def _val(p: int, x: Fraction) -> Optional[int]:
    return rational_valuation(p, x)


def _meets(p: int, x: Fraction, threshold) -> bool:
    """v(x) >= threshold, with v(0) = infinity"""
    v = _val(p, x)
    return v is None or v >= threshold


def _certified_meets(p: int, x: Entry, threshold) -> bool:
    if isinstance(x, TruncatedElement):
        return x.valuation_at_least(threshold)
    return _meets(p, x, threshold)


def stabilizes_point(p: int, w: Sequence[Sequence], x: Sequence, prec: Optional[int] = None) -> bool:
    """
    w lies in U_x: v(w_ij) >= x_j - x_i for every i < j.

    Numeric entries are exact. String literals are known to `prec` digits,
    and a comparison they cannot decide raises PrecisionInsufficientError.

    Args:
        p: residue characteristic
        w: upper unitriangular matrix, entries exact or literals
        x: point of the GL_n apartment
        prec: digits for literal entries
    """
    prec = prec or get_settings().default_prec
    entries = [[parse_entry(v, p, prec) for v in row] for row in w]
    values = as_matrix([[entry_value(v) for v in row] for row in entries])
    x = [Fraction(c) for c in x]
    n = len(values)
    for i in range(n):
        if values[i][i] != 1 or any(values[i][j] != 0 for j in range(i)):
            raise DegenerateInputError("w must be upper unitriangular")
    return all(
        _certified_meets(p, entries[i][j], x[j] - x[i])
        for i in range(n) for j in range(i + 1, n)
    )


# ============ Rank one ============

def _group_law(a: Tuple[Fraction, Fraction], b: Tuple[Fraction, Fraction]) -> Tuple[Fraction, Fraction]:
    """(c, d)(c', d') = (c + c', d + d' + c c')"""
    return (a[0] + b[0], a[1] + b[1] + a[0] * b[0])


def _as_pair(u) -> Tuple[Fraction, Fraction]:
    if isinstance(u, (tuple, list)):
        return (Fraction(u[0]), Fraction(u[1]))
    return (Fraction(u), Fraction(0))


def count_rank1(
    p: int,
    t: Sequence,
    r,
    s,
    w=0,
    w_prime=0,
    second_filtration: bool = False,
) -> Rank1Report:
    """
    Count u in U_{alpha,r}/U_{alpha,s} with w' [u^-1, t] w in U_{alpha,s}.

    Without the second filtration U_alpha is the additive group and
    [u(c)^-1, t] = u(c(a - 1)) with a = alpha(t). With it, elements are
    pairs (c, d) filtered by v(c) >= r, v(d) >= 2r and the commutator is
    (c(a - 1), d(a^2 - 1) + c^2(1 - a)).
    """
    r, s = Fraction(r), Fraction(s)
    if r >= s:
        raise DegenerateInputError("need r < s")
    t = [Fraction(v) for v in t]
    if any(_val(p, v) != 0 for v in t):
        raise DegenerateInputError("t must have unit diagonal entries")
    a = t[0] / t[1]
    if a == 1:
        raise DegenerateInputError("alpha(t) = 1: t is not regular")

    lo, hi = ceil(r), ceil(s)
    c_reps = [k * Fraction(p) ** lo for k in range(p ** (hi - lo))]
    exponent = Fraction(_val(p, a - 1))

    if second_filtration:
        lo2, hi2 = ceil(2 * r), ceil(2 * s)
        d_reps = [k * Fraction(p) ** lo2 for k in range(p ** (hi2 - lo2))]
        check_cap(len(c_reps) * len(d_reps), get_settings().cap_for("cosets"), "rank-1 cosets")
        wp, wr = _as_pair(w_prime), _as_pair(w)
        count = 0
        for c, d in product(c_reps, d_reps):
            commutator = (c * (a - 1), d * (a * a - 1) + c * c * (1 - a))
            total = _group_law(_group_law(wp, commutator), wr)
            if _meets(p, total[0], s) and _meets(p, total[1], 2 * s):
                count += 1
        size = len(c_reps) * len(d_reps)
        if a * a != 1:
            exponent += _val(p, a * a - 1)
    else:
        check_cap(len(c_reps), get_settings().cap_for("cosets"), "rank-1 cosets")
        shift = Fraction(w) + Fraction(w_prime)
        count = sum(1 for c in c_reps if _meets(p, shift + c * (a - 1), s))
        size = len(c_reps)

    bound = QPowerBound(1, p, exponent)
    return Rank1Report(
        count=count,
        representatives=size,
        bound_exponent=exponent,
        q=p,
        holds=bound.bounds(count),
    )


# ============ Orbit boxes ============

@dataclass(frozen=True)
class UnipotentCosetBox:
    """
    Per-root representatives p^lo O / p^hi O of (U+ ∩ P_y) / (U+ ∩ P_x),
    lo = ceil(-alpha(y)), hi = ceil(-alpha(x)).
    """
    p: int
    n: int
    x: Tuple[Fraction, ...]
    y: Tuple[Fraction, ...]

    @classmethod
    def build(cls, p: int, x: Sequence, y: Sequence) -> "UnipotentCosetBox":
        x = tuple(Fraction(c) for c in x)
        y = tuple(Fraction(c) for c in y)
        if len(x) != len(y) or len(x) < 2:
            raise DegenerateInputError("x and y need the same length n >= 2")
        box = cls(p, len(x), x, y)
        for (i, j), (lo, hi) in box.ranges.items():
            if lo > hi:
                raise DegenerateInputError(f"alpha_{i + 1}{j + 1}(y) < alpha_{i + 1}{j + 1}(x)")
        return box

    @property
    def roots(self) -> List[RootIndex]:
        return [(i, j) for i in range(self.n) for j in range(i + 1, self.n)]

    @property
    def ranges(self) -> Dict[RootIndex, Tuple[int, int]]:
        return {
            (i, j): (ceil(self.y[j] - self.y[i]), ceil(self.x[j] - self.x[i]))
            for i, j in self.roots
        }

    @property
    def size(self) -> int:
        return prod(self.p ** (hi - lo) for lo, hi in self.ranges.values())

    def representatives(self, root: RootIndex) -> List[Fraction]:
        lo, hi = self.ranges[root]
        return [k * Fraction(self.p) ** lo for k in range(self.p ** (hi - lo))]

    def roots_of_height(self, h: int) -> List[RootIndex]:
        return [(i, i + h) for i in range(self.n - h)]


def _diagonal(gamma) -> List[Fraction]:
    if isinstance(gamma, (tuple, list)) and gamma and isinstance(gamma[0], (tuple, list)):
        m = as_matrix(gamma)
        if any(m[i][j] != 0 for i in range(len(m)) for j in range(len(m)) if i != j):
            raise DegenerateInputError("gamma must be diagonal")
        return [m[i][i] for i in range(len(m))]
    return [Fraction(v) for v in gamma]


def count_fixed_in_orbit(p: int, gamma, x: Sequence, y: Sequence, prec: Optional[int] = None) -> OrbitCountReport:
    """
    Count gamma-fixed points u.x for u in U+ ∩ P_y.

    Representatives are chosen height by height. At height h the entry
    w_ij of w = u^-1 gamma u gamma^-1 depends only on u_ij and lower
    heights, so each root is filtered on its own and the admissible choices
    per height are recorded against q^(sum of v(beta(gamma) - 1)).
    """
    t = _diagonal(gamma)
    inv = split_invariants(t, p, prec)
    if not inv.compact:
        raise DegenerateInputError("gamma must be compact (unit eigenvalues)")
    box = UnipotentCosetBox.build(p, x, y)
    if box.n != len(t):
        raise DegenerateInputError("gamma and x have different sizes")
    cap = get_settings().cap_for("cosets")
    for lo, hi in box.ranges.values():
        check_cap(p ** (hi - lo), cap, "orbit box root")

    n = box.n
    reps = {root: box.representatives(root) for root in box.roots}
    visited = [0]
    factors = {(i, j): t[i] / t[j] - 1 for i, j in box.roots}
    thresholds = {(i, j): box.x[j] - box.x[i] for i, j in box.roots}
    layer_max = [0] * n

    def admissible(root: RootIndex, u: Dict, w: Dict) -> List[Tuple[Fraction, Fraction]]:
        i, j = root
        lower = sum((u[(i, k)] * w[(k, j)] for k in range(i + 1, j)), Fraction(0))
        out = []
        for c in reps[root]:
            value = factors[root] * c - lower
            if _meets(p, value, thresholds[root]):
                out.append((c, value))
        return out

    def extend(h: int, u: Dict, w: Dict) -> int:
        if h == n:
            return 1
        layer = box.roots_of_height(h)
        options = [admissible(root, u, w) for root in layer]
        choices = prod(len(o) for o in options)
        layer_max[h] = max(layer_max[h], choices)
        visited[0] += choices
        check_cap(visited[0], cap, "orbit enumeration")
        if choices == 0:
            return 0
        total = 0
        for combo in product(*options):
            u2, w2 = dict(u), dict(w)
            for root, (c, value) in zip(layer, combo):
                u2[root] = c
                w2[root] = value
            total += extend(h + 1, u2, w2)
        return total

    count = extend(1, {}, {})

    layers = []
    for h in range(1, n):
        exponent = sum(
            (Fraction(_val(p, factors[(i, j)])) for i, j in box.roots_of_height(h)),
            Fraction(0),
        )
        layers.append(HeightLayer(
            height=h,
            max_choices=layer_max[h],
            bound_exponent=exponent,
            holds=QPowerBound(1, p, exponent).bounds(layer_max[h]),
        ))

    exponent = inv.d_valuation / 2
    holds = QPowerBound(1, p, exponent).bounds(count)
    logger.debug(f"orbit count gamma={t} x={x} y={y}: {count} (box {box.size})")
    return OrbitCountReport(
        count=count,
        box_size=box.size,
        bound_exponent=exponent,
        q=p,
        holds=holds,
        layers=layers,
    )


def orbit_fixed_count_limit(p: int, gamma, horizon: int, prec: Optional[int] = None) -> int:
    """
    Number of gamma-fixed points in the full U+-orbit of the origin.

    Counts in the box alpha_i(y) = horizon and confirms that one more layer
    adds nothing.
    """
    t = _diagonal(gamma)
    n = len(t)
    origin = [0] * n

    def count_at(depth: int) -> int:
        y = [depth * (n - 1 - i) for i in range(n)]
        return count_fixed_in_orbit(p, t, origin, y, prec).count

    inner, outer = count_at(horizon), count_at(horizon + 1)
    if inner != outer:
        raise HorizonError(f"orbit count grows past horizon {horizon}: {inner} -> {outer}")
    return inner
