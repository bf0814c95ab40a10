"""Rule file and report schemas."""
from math import gcd
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from sympy import isprime, multiplicity

from app.services.correspondence import CorrespondenceReport
from app.services.oracle import StabilizedCount

Grid = List[List[str]]


class RuleSpec(BaseModel):
    """Schema of a rule file."""
    model_config = ConfigDict(extra="forbid")

    p: int = Field(..., description="Characteristic (prime)")
    r: int = Field(..., ge=1, description="Number of bands")
    entries: Optional[Grid] = Field(None, description="r x r entry strings of G(Z)")
    blocks: Optional[List[Grid]] = Field(None, description="G_1..G_s of a higher-order recursion")
    seed: Optional[int] = Field(None, ge=0, description="PRNG seed")
    n_check: Optional[int] = Field(None, ge=1, description="Verify the fixed-point formula up to this n")
    l_max: Optional[int] = Field(None, ge=1, description="Longest orbit length reported")
    n_max_field: Optional[int] = Field(None, ge=1, description="Top field degree for verification")

    @field_validator("p")
    @classmethod
    def p_is_prime(cls, v):
        if not isprime(v):
            raise ValueError(f"p = {v} is not prime")
        return v

    @model_validator(mode="after")
    def check_shape(self):
        if (self.entries is None) == (self.blocks is None):
            raise ValueError("give exactly one of 'entries' and 'blocks'")
        grids = [self.entries] if self.entries is not None else list(self.blocks)
        if not grids:
            raise ValueError("'blocks' must hold at least one matrix")
        for grid in grids:
            if len(grid) != self.r or any(len(row) != self.r for row in grid):
                raise ValueError(f"every matrix must be {self.r} x {self.r}")
        return self


class Metrics(BaseModel):
    """Run metadata; excluded from determinism comparisons."""
    latency_ms: int = 0
    trace_id: str = ""
    command: str = ""
    errors: List[str] = Field(default_factory=list)


class InvariantsOut(BaseModel):
    a: int
    varpi: int
    t: Dict[int, int]
    n_checked: int
    a_at_zero: int
    a_at_infinity: int
    t_at_zero: Dict[int, int]
    t_at_infinity: Dict[int, int]


class FixCountRow(BaseModel):
    n: int
    log_count: int = Field(..., description="log_p #Fix(g^n)")
    count: Optional[str] = Field(None, description="#Fix(g^n) in decimal when small enough")


class ZetaOut(BaseModel):
    kind: str
    a: int
    series: List[str] = Field(..., description="Coefficients of z^0..z^order")


class AsymptoticRowOut(BaseModel):
    length: int
    orbits: str
    main_term: str
    residual_ratio: str


class CountingRowOut(BaseModel):
    bound: int
    total: str
    normalized: str


class OrbitsOut(BaseModel):
    counts: List[str] = Field(..., description="P_1..P_lmax")
    asymptotics: List[AsymptoticRowOut] = Field(default_factory=list)
    asymptotic_bound: Optional[float] = None
    bounded: Optional[bool] = None
    max_ratio: Optional[str] = None
    counting: List[CountingRowOut] = Field(default_factory=list)
    counting_limit: Optional[str] = None


class OracleRow(BaseModel):
    n: int
    k: int
    result: StabilizedCount


class AnalysisReport(BaseModel):
    """Full analysis of a rule; the fixed-point formula is re-checked on construction."""
    spec: RuleSpec
    rule: Grid
    seed: int
    confined: bool
    invariants: Optional[InvariantsOut] = None
    fix_counts: List[FixCountRow] = Field(default_factory=list)
    zeta: Optional[ZetaOut] = None
    orbits: Optional[OrbitsOut] = None
    oracle: List[OracleRow] = Field(default_factory=list)
    metrics: Metrics = Field(default_factory=Metrics)

    @model_validator(mode="after")
    def check_fixed_point_formula(self):
        inv = self.invariants
        if inv is None:
            return self
        p = self.spec.p
        for row in self.fix_counts:
            expected = row.n * inv.a - inv.t[gcd(row.n, inv.varpi)] * p ** multiplicity(p, row.n)
            if row.log_count != expected:
                raise ValueError(f"log count {row.log_count} at n={row.n} contradicts the invariants ({expected})")
        return self


class FixCountReport(BaseModel):
    spec: RuleSpec
    rule: Grid
    row: FixCountRow
    metrics: Metrics = Field(default_factory=Metrics)


class ZetaReport(BaseModel):
    spec: RuleSpec
    rule: Grid
    zeta: ZetaOut
    metrics: Metrics = Field(default_factory=Metrics)


class OrbitsReport(BaseModel):
    spec: RuleSpec
    rule: Grid
    orbits: OrbitsOut
    metrics: Metrics = Field(default_factory=Metrics)


class SimulateReport(BaseModel):
    spec: RuleSpec
    rule: Grid
    steps: int
    trajectory: List[List[List[int]]] = Field(..., description="Configurations, each a list of cells")
    metrics: Metrics = Field(default_factory=Metrics)


class VerifyReport(BaseModel):
    spec: RuleSpec
    rule: Grid
    seed: int
    n_max: int
    passed: bool
    checks: List[CorrespondenceReport]
    metrics: Metrics = Field(default_factory=Metrics)


class CompanionReport(BaseModel):
    spec: RuleSpec
    order: int
    r: int
    rule: Grid
    metrics: Metrics = Field(default_factory=Metrics)


def report_payload(report: BaseModel) -> Dict[str, Any]:
    """JSON-ready dict of a report."""
    return report.model_dump(mode="json")
