"""Command pipeline: rule spec in, traced report out."""
import asyncio
import logging
import time
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

from pydantic import BaseModel

from app.config import settings
from app.schemas import (
    AnalysisReport,
    AsymptoticRowOut,
    CompanionReport,
    CountingRowOut,
    FixCountReport,
    FixCountRow,
    InvariantsOut,
    Metrics,
    OracleRow,
    OrbitsOut,
    OrbitsReport,
    RuleSpec,
    SimulateReport,
    VerifyReport,
    ZetaOut,
    ZetaReport,
    report_payload,
)
from app.services.automaton import (
    PeriodicConfig,
    Rule,
    companion,
    simulate,
    simulate_recursion,
    stack_states,
    unstack_state,
)
from app.services.correspondence import build_chain, verify_correspondence
from app.services.dynamics import (
    Invariants,
    ZetaClassification,
    asymptotic_report,
    fix_count_table,
    invariants,
    is_confined,
    log_fix_count,
    orbit_counting_function,
    orbit_counts,
    zeta,
)
from app.services.errors import ConsistencyError, LCAError, NotConfinedError, RuleSpecError
from app.services.oracle import stabilized_count
from app.services.rule_parser import build_rule, format_rule, spec_blocks
from app.services.trace_logger import new_trace_id, trace_logger

logger = logging.getLogger(__name__)

COMMANDS = ("analyze", "fixcount", "zeta", "orbits", "simulate", "verify", "companion")
ORACLE_N = (1, 2, 3, 4)


def resolve_seed(spec: RuleSpec, seed: Optional[int] = None) -> int:
    """CLI flag, then rule file, then settings."""
    if seed is not None:
        return seed
    return spec.seed if spec.seed is not None else settings.DEFAULT_SEED


def decimal_string(q: Fraction, places: int = 6) -> str:
    with localcontext() as ctx:
        ctx.prec = 40
        value = Decimal(q.numerator) / Decimal(q.denominator)
        return str(value.quantize(Decimal(1).scaleb(-places)))


def fix_row(p: int, n: int, log_count: int) -> FixCountRow:
    count = str(p ** log_count) if log_count <= settings.COUNT_DECIMAL_MAX_LOG else None
    return FixCountRow(n=n, log_count=log_count, count=count)


def invariants_out(inv: Invariants) -> InvariantsOut:
    return InvariantsOut(
        a=inv.a,
        varpi=inv.varpi,
        t=inv.t,
        n_checked=inv.n_checked,
        a_at_zero=inv.a_at_zero,
        a_at_infinity=inv.a_at_infinity,
        t_at_zero=inv.t_at_zero,
        t_at_infinity=inv.t_at_infinity,
    )


def zeta_out(zc: ZetaClassification) -> ZetaOut:
    return ZetaOut(kind=zc.kind.value, a=zc.a, series=[str(c) for c in zc.truncated_series])


def orbits_out(rule: Rule, l_max: int, inv: Invariants) -> OrbitsOut:
    """Orbit counts, residuals against the main term (a >= 1 only) and the counting function."""
    out = OrbitsOut(counts=[str(c) for c in orbit_counts(rule, l_max)])
    if inv.a >= 1:
        report = asymptotic_report(rule, l_max, inv)
        out.asymptotics = [
            AsymptoticRowOut(
                length=row.length,
                orbits=str(row.orbits),
                main_term=str(row.main_term),
                residual_ratio=str(row.residual_ratio),
            )
            for row in report.rows
        ]
        out.asymptotic_bound = report.bound
        out.bounded = report.bounded
        out.max_ratio = str(report.max_ratio)
    counting = orbit_counting_function(rule, l_max, inv)
    out.counting = [
        CountingRowOut(bound=row.bound, total=str(row.total), normalized=decimal_string(row.normalized))
        for row in counting.rows
    ]
    if counting.limit is not None:
        out.counting_limit = decimal_string(counting.limit)
    return out


def oracle_rows(rule: Rule, seed: int, ns: Sequence[int] = ORACLE_N) -> List[OracleRow]:
    return [OracleRow(n=n, k=0, result=stabilized_count(rule, n, 0, seed=seed)) for n in ns]


def parse_config(raw: Any, p: int, r: int) -> PeriodicConfig:
    """A list of cells; each cell is a list of r integers, or an integer when r = 1."""
    if not isinstance(raw, list) or not raw:
        raise RuleSpecError("a configuration must be a non-empty list of cells")
    cells = []
    for cell in raw:
        if isinstance(cell, int) and r == 1:
            cells.append((cell,))
        elif isinstance(cell, list) and len(cell) == r and all(isinstance(v, int) for v in cell):
            cells.append(tuple(cell))
        else:
            raise RuleSpecError(f"cell {cell!r} is not a vector of {r} integers")
    return PeriodicConfig(p, tuple(cells))


async def _analyze(spec: RuleSpec, rule: Rule, seed: int, threads: Optional[int]) -> AnalysisReport:
    confined = await asyncio.to_thread(is_confined, rule, spec.n_check)
    if not confined:
        return AnalysisReport(spec=spec, rule=format_rule(rule), seed=seed, confined=False)
    inv = await asyncio.to_thread(invariants, rule, spec.n_check, threads)
    l_max = spec.l_max or settings.L_MAX
    counts, zc, orbits, oracle = await asyncio.gather(
        asyncio.to_thread(fix_count_table, rule, range(1, inv.n_checked + 1), threads),
        asyncio.to_thread(zeta, rule, None, inv),
        asyncio.to_thread(orbits_out, rule, l_max, inv),
        asyncio.to_thread(oracle_rows, rule, seed),
    )
    return AnalysisReport(
        spec=spec,
        rule=format_rule(rule),
        seed=seed,
        confined=True,
        invariants=invariants_out(inv),
        fix_counts=[fix_row(rule.p, n, v) for n, v in counts.items()],
        zeta=zeta_out(zc),
        orbits=orbits,
        oracle=oracle,
    )


def _require_confined(rule: Rule, n_check: Optional[int] = None) -> None:
    if not is_confined(rule, n_check):
        raise NotConfinedError(f"{rule} is not confined: some eigenvalue is a root of unity")


def _fixcount(spec: RuleSpec, rule: Rule, n: int) -> FixCountReport:
    if n < 1:
        raise RuleSpecError(f"--n must be >= 1, got {n}")
    _require_confined(rule, spec.n_check)
    return FixCountReport(spec=spec, rule=format_rule(rule), row=fix_row(rule.p, n, log_fix_count(rule, n)))


def _zeta(spec: RuleSpec, rule: Rule, order: Optional[int], threads: Optional[int]) -> ZetaReport:
    if order is not None and order < 1:
        raise RuleSpecError(f"--order must be >= 1, got {order}")
    inv = invariants(rule, spec.n_check, threads)
    return ZetaReport(spec=spec, rule=format_rule(rule), zeta=zeta_out(zeta(rule, order, inv)))


def _orbits(spec: RuleSpec, rule: Rule, l_max: Optional[int], threads: Optional[int]) -> OrbitsReport:
    l_max = l_max or spec.l_max or settings.L_MAX
    inv = invariants(rule, spec.n_check, threads)
    return OrbitsReport(spec=spec, rule=format_rule(rule), orbits=orbits_out(rule, l_max, inv))


def _simulate(spec: RuleSpec, rule: Rule, config: Any, steps: int) -> SimulateReport:
    """
    Plain rules run the configuration directly. Rules given by blocks take a list
    of s configurations (most recent first) and report Y^(0)..Y^(steps-1), run
    through the companion rule and cross-checked against the direct recursion.
    """
    if steps < 0:
        raise RuleSpecError(f"--steps must be >= 0, got {steps}")
    if spec.blocks is None:
        trajectory = simulate(rule, parse_config(config, spec.p, spec.r), steps)
        cells = [cfg.to_lists() for cfg in trajectory]
    else:
        blocks = spec_blocks(spec)
        if not isinstance(config, list) or len(config) != len(blocks):
            raise RuleSpecError(f"a recursion of order {len(blocks)} needs {len(blocks)} initial configurations")
        history = [parse_config(c, spec.p, spec.r) for c in config]
        stacked = simulate(rule, stack_states(history), steps)
        via_companion = [unstack_state(state, spec.r)[0] for state in stacked[1:]]
        direct = simulate_recursion(blocks, history, steps)
        if via_companion != direct:
            raise ConsistencyError("companion simulation disagrees with the direct recursion")
        cells = [cfg.to_lists() for cfg in direct]
    return SimulateReport(spec=spec, rule=format_rule(rule), steps=steps, trajectory=cells)


def _verify(spec: RuleSpec, rule: Rule, seed: int, n_max: Optional[int]) -> VerifyReport:
    n_max = n_max or spec.n_max_field or settings.N_MAX_FIELD
    if n_max < 1:
        raise RuleSpecError(f"--nmax must be >= 1, got {n_max}")
    chain = build_chain(rule.p, n_max, seed)
    checks = verify_correspondence(chain, rule)
    return VerifyReport(
        spec=spec,
        rule=format_rule(rule),
        seed=seed,
        n_max=n_max,
        passed=all(c.passed for c in checks),
        checks=checks,
    )


def _companion(spec: RuleSpec) -> CompanionReport:
    blocks = spec_blocks(spec)
    rule = companion(blocks)
    return CompanionReport(spec=spec, order=len(blocks), r=spec.r, rule=format_rule(rule))


async def run_command(
    command: str,
    spec: RuleSpec,
    *,
    n: Optional[int] = None,
    order: Optional[int] = None,
    l_max: Optional[int] = None,
    config: Any = None,
    steps: int = 10,
    seed: Optional[int] = None,
    n_max: Optional[int] = None,
    threads: Optional[int] = None,
) -> BaseModel:
    """
    Run one command and trace it.

    Returns:
        The command's report, with metrics filled in

    Raises:
        RuleSpecError: bad options for the command
        AnalysisError: hard analysis failure
    """
    start_time = time.time()
    trace_id = new_trace_id()
    seed = resolve_seed(spec, seed)
    try:
        if command not in COMMANDS:
            raise RuleSpecError(f"unknown command '{command}'")
        rule = build_rule(spec)
        if command == "analyze":
            report = await _analyze(spec, rule, seed, threads)
        elif command == "fixcount":
            if n is None:
                raise RuleSpecError("fixcount needs --n")
            report = await asyncio.to_thread(_fixcount, spec, rule, n)
        elif command == "zeta":
            report = await asyncio.to_thread(_zeta, spec, rule, order, threads)
        elif command == "orbits":
            report = await asyncio.to_thread(_orbits, spec, rule, l_max, threads)
        elif command == "simulate":
            if config is None:
                raise RuleSpecError("simulate needs --config")
            report = await asyncio.to_thread(_simulate, spec, rule, config, steps)
        elif command == "verify":
            report = await asyncio.to_thread(_verify, spec, rule, seed, n_max)
        else:
            report = await asyncio.to_thread(_companion, spec)
    except LCAError as e:
        latency_ms = int((time.time() - start_time) * 1000)
        logger.error("%s failed: %s", command, e)
        trace_logger.write(trace_id, {
            "command": command,
            "spec": spec.model_dump(mode="json"),
            "errors": [f"{type(e).__name__}: {e}"],
            "latency_ms": latency_ms,
        })
        raise

    latency_ms = int((time.time() - start_time) * 1000)
    errors: List[str] = []
    if getattr(report, "confined", True) is False:
        errors.append("rule is not confined")
    report.metrics = Metrics(latency_ms=latency_ms, trace_id=trace_id, command=command, errors=errors)

    trace_logger.write(trace_id, {
        "command": command,
        "spec": spec.model_dump(mode="json"),
        "report": report_payload(report),
        "errors": errors,
    })
    return report


def report_without_metrics(report: BaseModel) -> Dict[str, Any]:
    """Report payload with the run metadata removed, for determinism comparisons."""
    payload = report_payload(report)
    payload.pop("metrics", None)
    return payload
