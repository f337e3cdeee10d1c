"""
Report Schemas
Result records returned by the verification services
"""

from typing import Dict, List, Optional

from pydantic import Field

from btbounds.schemas.common import BaseSchema, BoundSchema, Rational, Valuation


# ============ Lattice ============

class LatticeBoundReport(BaseSchema):
    """Affine solution count against q^v(det M)"""
    count: int
    bound_exponent: Rational
    q: int
    holds: bool


# ============ Character ============

class ElementInvariants(BaseSchema):
    """Root valuations and the D-function data of a regular semisimple element"""
    group: str
    q: int
    root_valuations: Dict[str, Valuation]
    eigenvalue_valuations: List[Rational]
    d_valuation: Rational
    lambda_: Rational = Field(alias="lambda")
    sd: Rational
    compact: bool
    compact_mod_center: bool
    regular: bool


class SimplexCountReport(BaseSchema):
    """Closed cells of the apartment complex inside the box |alpha_i| <= r"""
    root_system: str
    radius: int
    count: int
    by_dimension: List[int]
    euler_characteristic: int
    counts: List[int]
    c_b: Rational


# ============ Tree ============

class FixedAboveReport(BaseSchema):
    """gamma-fixed vertices above an apartment vertex"""
    center: str
    count: int
    max_radius: int
    beyond_empty: bool
    sd: Rational
    d_valuation: Rational
    bound: BoundSchema
    empirical_constant: float
    holds: bool


# ============ Fixed points ============

class Rank1Report(BaseSchema):
    """Rank-1 coset count against q^(sum of v(beta(t) - 1))"""
    count: int
    representatives: int
    bound_exponent: Rational
    q: int
    holds: bool


class HeightLayer(BaseSchema):
    height: int
    max_choices: int
    bound_exponent: Rational
    holds: bool


class OrbitCountReport(BaseSchema):
    """Fixed points of gamma in a unipotent orbit box"""
    count: int
    box_size: int
    bound_exponent: Rational
    q: int
    holds: bool
    layers: List[HeightLayer] = []


# ============ Integration ============

class OrbitalResult(BaseSchema):
    """Orbital integral at a finite level with its bound check"""
    gamma: str
    function: str
    value: Rational
    gamma_invariants: ElementInvariants
    bound: BoundSchema
    holds: bool
    horizon: int
    level: int
    empirical_constant: float


class WeylReport(BaseSchema):
    """Both sides of the Weyl integration formula for one class function"""
    function: str
    p: int
    level: int
    lhs: Rational
    rhs: Rational
    equal: bool


class SummabilityReport(BaseSchema):
    """sd-weighted shell sums over a torus"""
    torus: str
    eps: Rational
    m: int
    threshold: Rational
    partial_sums: List[float]
    partial_sums_exact: List[str]
    differences: List[float]
    monotone: bool
    decreasing_from: Optional[int]
    bounded_flag: bool


# ============ Measure ============

class PolyFractionReport(BaseSchema):
    """Share of residue points where v(f) >= r"""
    n: int
    q: int
    r: Rational
    level: int
    count: int
    fraction: Rational
    m_f: int
    mf_shape: float
    bound_n1: Optional[BoundSchema] = None
    n1_holds: Optional[bool] = None
    constant: Optional[float] = None


class KrIndexReport(BaseSchema):
    """[K:K_r] against the norm-image and base-torus indices"""
    r: Rational
    level: int
    index_K_Kr: int
    index_Upsilon: int
    index_TF: int
    afttr_holds: bool
    c2: Rational
    decay: float


class TailSumReport(BaseSchema):
    """Shell partial sums of q^(eps r) mu(shell r)"""
    eps: Rational
    shells: int
    partial_sum: str
    partial_sum_value: float
    differences: List[float]
    converging: bool
    threshold: Rational
    threshold_abs_d: Rational
    threshold_sd: Rational
    level: int
    # [K:K_r] is counted for r <= counted_through, the rest extrapolated
    counted_through: int
    extrapolated: int
