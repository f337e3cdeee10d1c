"""
Suite Schemas
Configuration and report models for verification suite runs
"""

from typing import Any, Dict, List, Optional

from pydantic import Field, field_validator, model_validator

from btbounds.schemas.common import BaseSchema, BoundSchema, Rational


SUITES = ("lattice", "epimv", "fixed-points", "above", "bermaat", "orbital", "weyl", "summability")
SUITE_PATTERN = "^(" + "|".join(SUITES) + "|all)$"


# ============ Config Schemas ============

class SuiteConfig(BaseSchema):
    """One suite run; unset values fall back to per-suite defaults"""
    suite: str = Field(default="all", pattern=SUITE_PATTERN)
    p: Optional[int] = Field(default=None, ge=2)
    prec: Optional[int] = Field(default=None, ge=2)
    group: str = Field(default="gl2", pattern="^(gl2|gl3|sl2)$")
    level: Optional[int] = Field(default=None, ge=1)
    eps: List[Rational] = []
    cap: Optional[int] = Field(default=None, gt=0)

    # Sweep ranges
    sd_levels: List[int] = [1, 2, 3]
    depths: List[int] = [0, 1, 2]
    r_max: int = Field(default=4, ge=0)
    shells: int = Field(default=30, ge=0)

    # Output
    json_path: Optional[str] = None
    csv_path: Optional[str] = None
    seed: Optional[int] = None

    @field_validator("eps")
    @classmethod
    def eps_non_negative(cls, v):
        if any(e < 0 for e in v):
            raise ValueError("eps values must be non-negative")
        return v

    @field_validator("sd_levels")
    @classmethod
    def sd_levels_positive(cls, v):
        if any(m < 1 for m in v):
            raise ValueError("sd levels start at 1")
        return v

    @model_validator(mode="after")
    def prec_covers_sweep(self):
        # valuations up to the deepest sd level are compared, plus two digits
        if self.prec is not None and self.sd_levels and self.prec < max(self.sd_levels) + 2:
            raise ValueError(f"prec {self.prec} is below max sd level + 2")
        return self


# ============ Report Schemas ============

class CaseRecord(BaseSchema):
    """A single verification case"""
    key: str
    inputs: Dict[str, Any]
    value: Optional[str] = None
    bound: Optional[BoundSchema] = None
    holds: Optional[bool] = None
    status: str = Field(pattern="^(ok|violation|precision|cap|degenerate|config|error)$")
    detail: Optional[str] = None
    empirical_constant: Optional[float] = None
    runtime: float = 0.0


class SuiteReport(BaseSchema):
    """Order-normalized suite report"""
    schema_version: int = Field(default=1, alias="schema")
    suite: str
    config: SuiteConfig
    cases: List[CaseRecord] = []
    vacuous: bool = False
    violations: int = 0
    errors: int = 0
    exit_code: int = 0
    # running maximum of the empirical constant per case family
    empirical_constants: Dict[str, float] = {}
    notes: List[str] = []
