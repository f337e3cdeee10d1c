"""
Lattice Service
Smith normal form over Z_p and affine solution counting in L / L'
"""

import logging
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterator, List, Optional, Sequence, Tuple

from sympy import eye

from btbounds.config import get_settings
from btbounds.models.bounds import QPowerBound
from btbounds.models.lattice import LatticeMatrix, SmithForm
from btbounds.models.localfield import base_field, rational_valuation
from btbounds.schemas.reports import LatticeBoundReport
from btbounds.utils.errors import (
    DegenerateInputError,
    PrecisionInsufficientError,
    check_cap,
)
from btbounds.utils.literals import parse_element
from btbounds.utils.matrices import Matrix, as_matrix, from_sympy, inverse, mat_mul, to_sympy


logger = logging.getLogger(__name__)


def _val(p: int, x: Fraction) -> Optional[int]:
    return rational_valuation(p, x)


def _is_integral(p: int, x: Fraction) -> bool:
    return x.denominator % p != 0


def _move_least_to_start(p: int, work, left, right, s: int) -> int:
    """Bring an entry of minimal valuation to (s, s); ties go to the first in row-major order"""
    n = work.rows
    best, where = None, None
    for i in range(s, n):
        for j in range(s, n):
            v = _val(p, Fraction(int(work[i, j].p), int(work[i, j].q)))
            if v is not None and (best is None or v < best):
                best, where = v, (i, j)
    if where is None:
        raise DegenerateInputError("matrix is singular over Z_p")
    i, j = where
    if i != s:
        work.row_swap(s, i)
        left.row_swap(s, i)
    if j != s:
        work.col_swap(s, j)
        right.col_swap(s, j)
    return best


def _clear_edging(work, left, right, s: int) -> None:
    """Eliminate row s and column s using the pivot at (s, s)"""
    n = work.rows
    pivot = work[s, s]
    for i in range(s + 1, n):
        if work[i, s] != 0:
            factor = work[i, s] / pivot
            work.row_op(i, lambda val, col: val - factor * work[s, col])
            left.row_op(i, lambda val, col: val - factor * left[s, col])
    for j in range(s + 1, n):
        if work[s, j] != 0:
            factor = work[s, j] / pivot
            work.col_op(j, lambda val, row: val - factor * work[row, s])
            right.col_op(j, lambda val, row: val - factor * right[row, s])


def _smith_exact(p: int, M: Matrix) -> SmithForm:
    n = len(M)
    work = to_sympy(M)
    left = eye(n)
    right = eye(n)
    exponents = []
    for s in range(n):
        exponents.append(_move_least_to_start(p, work, left, right, s))
        _clear_edging(work, left, right, s)

    P, Q = from_sympy(left), from_sympy(right)
    diag = from_sympy(work)
    units = tuple(diag[i][i] / Fraction(p) ** exponents[i] for i in range(n))
    return SmithForm(
        p=p,
        P=P,
        D=tuple(exponents),
        Q=Q,
        P_inv=inverse(P),
        Q_inv=inverse(Q),
        units=units,
    )


def smith_normal_form(M, p: Optional[int] = None, prec: Optional[int] = None) -> SmithForm:
    """
    Smith form of a matrix over Z_p.

    Elimination runs exactly over Z_(p) on the integer representative. The
    elementary divisors are certified when every entry is known mod p^(d_n + 1).

    Args:
        M: LatticeMatrix, or rows of literals together with p and prec
        p: residue characteristic for raw rows
        prec: entry precision for raw rows

    Returns:
        SmithForm with P M Q = diag(p^d_i * unit_i), d_1 <= ... <= d_n
    """
    M = _lattice(M, p, prec)
    form = _smith_exact(M.p, M.representative)
    if M.absolute_precision < form.D[-1] + 1:
        raise PrecisionInsufficientError(
            f"elementary divisor p^{form.D[-1]} needs precision {form.D[-1] + 1}, "
            f"entries are known to {M.absolute_precision}"
        )
    logger.debug(f"SNF D={form.D}")
    return form


def lattice_determinant_valuation(M, p: Optional[int] = None, prec: Optional[int] = None) -> int:
    """v(det M) from the determinant itself, independent of the Smith form"""
    M = _lattice(M, p, prec)
    v = M.det_valuation
    if v is None:
        raise DegenerateInputError("matrix is singular")
    if v >= M.absolute_precision:
        raise PrecisionInsufficientError(
            f"v(det) = {v} is not certified at precision {M.absolute_precision}"
        )
    return v


def _lattice(M, p: Optional[int], prec: Optional[int]) -> LatticeMatrix:
    if isinstance(M, LatticeMatrix):
        return M
    if p is None:
        raise DegenerateInputError("p is required for raw matrix input")
    return LatticeMatrix.of(p, M, prec or get_settings().default_prec)


def _vector(p: int, v: Sequence, prec: int) -> Tuple[Fraction, ...]:
    f = base_field(p)
    return tuple(parse_element(x, f, prec).to_fraction() if isinstance(x, str) else Fraction(x) for x in v)


@lru_cache(maxsize=256)
def _quotient_representatives(p: int, B: Matrix) -> Tuple[Tuple[Tuple[Fraction, ...], ...], Matrix]:
    """
    Representatives of Z_p^n / B Z_p^n and B^-1.

    With P B Q = D the quotient is P^-1 (+ Z_p / p^d_i), so l = P^-1 c with
    0 <= c_i < p^d_i.
    """
    form = _smith_exact(p, B)
    check_cap(p ** sum(form.D), get_settings().cap_for("cosets"), "lattice quotient")
    reps = []
    for c in product(*(range(p ** d) for d in form.D)):
        reps.append(tuple(sum((a * Fraction(x) for a, x in zip(row, c)), Fraction(0)) for row in form.P_inv))
    return tuple(reps), inverse(B)


def _apply(M: Matrix, l: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    return tuple(sum((a * x for a, x in zip(row, l)), Fraction(0)) for row in M)


def count_affine_solutions(M, v: Sequence, sublattice, p: Optional[int] = None, prec: Optional[int] = None) -> int:
    """
    #{l in L / L' : M l + v in L'} with L = Z_p^n and L' spanned by the
    columns of `sublattice`.

    Requires M L' within L' and v in L.
    """
    prec = prec or get_settings().default_prec
    M = _lattice(M, p, prec)
    B = _lattice(sublattice, M.p, prec)
    p = M.p
    if B.n != M.n or len(v) != M.n:
        raise DegenerateInputError("M, v and the sublattice basis need matching sizes")
    if B.det_valuation is None:
        raise DegenerateInputError("sublattice basis is singular")

    Mr, Br = M.representative, B.representative
    vr = _vector(p, v, prec)
    if not all(_is_integral(p, x) for x in vr):
        raise DegenerateInputError("v is not in L")

    reps, B_inv = _quotient_representatives(p, Br)
    stable = mat_mul(B_inv, mat_mul(Mr, Br))
    if not all(_is_integral(p, x) for row in stable for x in row):
        raise DegenerateInputError("M does not preserve the sublattice")

    count = 0
    for l in reps:
        image = tuple(a + b for a, b in zip(_apply(Mr, l), vr))
        if all(_is_integral(p, x) for x in _apply(B_inv, image)):
            count += 1
    return count


def verify_lattice_bound(M, v: Sequence, sublattice, p: Optional[int] = None, prec: Optional[int] = None) -> LatticeBoundReport:
    """Check count <= q^v(det M) as exact integers"""
    prec = prec or get_settings().default_prec
    M = _lattice(M, p, prec)
    count = count_affine_solutions(M, v, sublattice, prec=prec)
    exponent = lattice_determinant_valuation(M)
    return LatticeBoundReport(
        count=count,
        bound_exponent=exponent,
        q=M.p,
        holds=QPowerBound(1, M.p, exponent).bounds(count),
    )


# Translations tried for every matrix in the sweep
SWEEP_TRANSLATIONS = ((0, 0), (1, 0), (0, 1), (1, 2))


def sweep_matrices(p: int, det_valuations: Sequence[int] = (1, 2), depth: int = 2) -> Iterator[Matrix]:
    """2x2 matrices with entries in [0, p^depth) whose determinant has valuation in `det_valuations`"""
    for a, b, c, d in product(range(p ** depth), repeat=4):
        vd = _val(p, Fraction(a * d - b * c))
        if vd is not None and vd in det_valuations:
            yield as_matrix([[a, b], [c, d]])


def lattice_bound_sweep(
    p: int = 3,
    prec: int = 3,
    det_valuations: Sequence[int] = (1, 2),
    depth: int = 2,
    translations: Sequence[Tuple[int, int]] = SWEEP_TRANSLATIONS,
) -> List[Tuple[Matrix, Tuple[int, int], LatticeBoundReport]]:
    """
    Every 2x2 matrix with entries in [0, p^depth) whose determinant has
    valuation in `det_valuations`, against L' = p^depth Z_p^2.
    """
    modulus = p ** depth
    B = LatticeMatrix.of(p, [[modulus, 0], [0, modulus]], prec)
    results = []
    for rows in sweep_matrices(p, det_valuations, depth):
        M = LatticeMatrix.of(p, rows, prec)
        for t in translations:
            report = verify_lattice_bound(M, t, B, prec=prec)
            results.append((rows, tuple(t), report))
    logger.info(f"lattice sweep p={p}: {len(results)} cases")
    return results
