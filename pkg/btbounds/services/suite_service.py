"""
Suite Service
Builds verification cases, runs them on the worker pool and assembles
order-normalized reports
"""

import asyncio
import csv
import io
import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from btbounds.config import get_settings, overridden_settings
from btbounds.models.bounds import QPowerBound
from btbounds.models.localfield import FieldKind, make_field
from btbounds.models.lattice import LatticeMatrix
from btbounds.models.polynomial import PadicPolynomial
from btbounds.models.tree import TreeVertex
from btbounds.schemas.common import BoundSchema
from btbounds.schemas.suite import SUITES, CaseRecord, SuiteConfig, SuiteReport
from btbounds.services import (
    fixedpoint_service,
    integration_service,
    lattice_service,
    measure_service,
    tree_service,
)
from btbounds.services.character_service import elliptic_matrix, split_invariants
from btbounds.services.task_queue import run_all
from btbounds.utils.errors import ConfigError, VerificationError
from btbounds.utils.matrices import as_matrix, diagonal, mat_mul, render, unipotent


logger = logging.getLogger(__name__)

ERROR_STATUSES = ("precision", "cap", "degenerate", "error")


@dataclass(frozen=True)
class Outcome:
    """What a case function returns"""
    value: Any
    bound: Optional[QPowerBound] = None
    holds: Optional[bool] = None
    detail: Optional[str] = None
    constant: Optional[float] = None


@dataclass(frozen=True)
class Case:
    key: str
    inputs: Dict[str, Any]
    run: Callable[[], Outcome]


def _json_safe(value):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    return value


def _primes(cfg: SuiteConfig, default: Tuple[int, ...]) -> Tuple[int, ...]:
    return (cfg.p,) if cfg.p else default


# ============ Lattice ============

def _lattice_cases(cfg: SuiteConfig) -> List[Case]:
    p = cfg.p or 3
    prec = cfg.prec or 3
    depth = 2
    B = LatticeMatrix.of(p, [[p ** depth, 0], [0, p ** depth]], prec)
    cases = []
    for M in lattice_service.sweep_matrices(p, (1, 2), depth):
        for t in lattice_service.SWEEP_TRANSLATIONS:
            def run(M=M, t=t) -> Outcome:
                report = lattice_service.verify_lattice_bound(M, t, B, p=p, prec=prec)
                return Outcome(report.count, QPowerBound(1, p, report.bound_exponent), report.holds)
            key = f"lattice/p={p}/M={render(M)}/v={t}"
            cases.append(Case(key, {"p": p, "M": render(M), "v": list(t), "sublattice": f"{p ** depth}*I"}, run))
    return cases


# ============ Valuation measure ============

def _bivariate_family(p: int) -> List[Tuple[str, PadicPolynomial]]:
    return [
        ("x*y^3+x*y+2", PadicPolynomial.of(p, [((1, 3), 1), ((1, 1), 1), ((0, 0), 2)])),
        (f"x^2+{p}*y^2", PadicPolynomial.of(p, [((2, 0), 1), ((0, 2), p)])),
        ("x*y", PadicPolynomial.of(p, [((1, 1), 1)])),
    ]


def _epimv_cases(cfg: SuiteConfig) -> List[Case]:
    N_max = cfg.level or 4
    cases = []
    for p in _primes(cfg, (2, 3)):
        for i, f in enumerate(measure_service.polynomial_family(p)):
            def run(f=f, p=p) -> Outcome:
                worst = None
                for N in range(1, N_max + 1):
                    for r in range(1, N + 1):
                        report = measure_service.poly_val_fraction(f, r, N)
                        if not report.n1_holds:
                            return Outcome(str(report.fraction), report.bound_n1.to_bound(), False, f"N={N} r={r}")
                        ratio = float(report.fraction) / report.bound_n1.value
                        worst = ratio if worst is None else max(worst, ratio)
                return Outcome(worst, None, True, "largest fraction / bound")
            cases.append(Case(f"epimv/p={p}/n=1/{i:05d}", {"p": p, "f": f.render(), "N_max": N_max}, run))

        for name, f in _bivariate_family(p):
            for N in range(1, min(N_max, 3) + 1):
                for r in range(1, N + 1):
                    def run(f=f, r=r, N=N) -> Outcome:
                        report = measure_service.poly_val_fraction(f, r, N)
                        return Outcome(str(report.fraction), None, None, f"C={report.constant:.6g}", report.constant)
                    cases.append(Case(f"epimv/p={p}/n=2/{name}/N={N}/r={r}", {"p": p, "f": name, "N": N, "r": r}, run))
    return cases


# ============ Fixed points ============

def _gl2_family(cfg: SuiteConfig) -> List[Tuple[int, int, Tuple[Fraction, Fraction]]]:
    """(p, m, diagonal) for diag(1, 1+p^m), or diag(u, 1/u) for sl2"""
    family = []
    for p in _primes(cfg, (2, 3)):
        for m in cfg.sd_levels:
            u = 1 + Fraction(p) ** m
            t = (u, 1 / u) if cfg.group == "sl2" else (Fraction(1), u)
            family.append((p, m, t))
    return family


def _gl3_family(cfg: SuiteConfig) -> List[Tuple[int, Tuple[Fraction, ...]]]:
    family = []
    for p in _primes(cfg, (2, 3)):
        family.append((p, (Fraction(1), Fraction(1 + p), Fraction(1 + p + p * p))))
        family.append((p, (Fraction(1), Fraction(1 + p * p), Fraction(1 + p + p * p))))
    return family


def _fixed_point_cases(cfg: SuiteConfig) -> List[Case]:
    cases = []
    if cfg.group == "gl3":
        for p, t in _gl3_family(cfg):
            for d in (o + 1 for o in cfg.depths):
                def run(p=p, t=t, d=d) -> Outcome:
                    y = [d * (2 - i) for i in range(3)]
                    report = fixedpoint_service.count_fixed_in_orbit(p, t, [0, 0, 0], y)
                    holds = report.holds and all(layer.holds for layer in report.layers)
                    return Outcome(report.count, QPowerBound(1, p, report.bound_exponent), holds)
                key = f"fixed-points/gl3/p={p}/t={','.join(map(str, t))}/depth={d}"
                cases.append(Case(key, {"p": p, "gamma": list(t), "y_depth": d}, run))
        return cases

    for p, m, t in _gl2_family(cfg):
        for d in (m + o for o in cfg.depths):
            def run(p=p, t=t, d=d) -> Outcome:
                report = fixedpoint_service.count_fixed_in_orbit(p, t, [0, 0], [d, 0])
                oracle = tree_service.count_fixed_in_unipotent_orbit(p, diagonal(t), TreeVertex.origin(), d)
                sd = split_invariants(t, p).sd
                expected = p ** min(d, int(sd))
                holds = report.holds and report.count == oracle == expected
                return Outcome(report.count, QPowerBound(1, p, report.bound_exponent), holds, f"tree={oracle}")
            key = f"fixed-points/{cfg.group}/p={p}/m={m}/depth={d}"
            cases.append(Case(key, {"p": p, "gamma": list(t), "x": [0, 0], "y": [d, 0]}, run))
    return cases


def _above_cases(cfg: SuiteConfig) -> List[Case]:
    cases = []
    for p, m, t in _gl2_family(cfg):
        for center in (TreeVertex.origin(), TreeVertex.apartment(1)):
            def run(p=p, t=t, center=center) -> Outcome:
                report = tree_service.count_fixed_above(p, diagonal(t), center)
                detail = f"c={report.empirical_constant:.4g} beyond_empty={report.beyond_empty}"
                return Outcome(
                    report.count, report.bound.to_bound(), report.holds and report.beyond_empty, detail,
                    report.empirical_constant,
                )
            key = f"above/{cfg.group}/p={p}/m={m}/x={center.key}"
            cases.append(Case(key, {"p": p, "gamma": list(t), "x": center.key}, run))
    return cases


# ============ Coset measure ============

def _random_g(rng: random.Random, p: int):
    """u(c / p^d) diag(p^a, 1) k with k integral of unit determinant"""
    d = rng.randint(0, 2)
    c = rng.randrange(1, p ** 3)
    a = rng.randint(-1, 1)
    while True:
        k = [[rng.randrange(p * p) for _ in range(2)] for _ in range(2)]
        if (k[0][0] * k[1][1] - k[0][1] * k[1][0]) % p:
            break
    u = unipotent(2, {(0, 1): Fraction(c, p ** d)})
    return mat_mul(mat_mul(u, diagonal([Fraction(p) ** a, 1])), as_matrix(k))


def _bermaat_cases(cfg: SuiteConfig) -> List[Case]:
    seed = cfg.seed if cfg.seed is not None else get_settings().seed
    levels = [cfg.level] if cfg.level else [3, 4]
    cases = []
    for p in _primes(cfg, (2, 3)):
        rng = random.Random(f"{seed}:{p}")
        family = [_random_g(rng, p) for _ in range(20)]
        for i, g in enumerate(family):
            def run(p=p, g=g) -> Outcome:
                values = [
                    integration_service.coset_measure(integration_service.MeasureContext.build(p, N), g)
                    for N in levels
                ]
                return Outcome(str(values[0]), None, len(set(values)) == 1, f"levels={levels}")
            cases.append(Case(f"bermaat/p={p}/g{i:02d}", {"p": p, "g": render(g), "seed": seed}, run))

        def unipotent_case(p=p) -> Outcome:
            ctx = integration_service.MeasureContext.build(p, levels[0])
            value = integration_service.coset_measure(ctx, unipotent(2, {(0, 1): Fraction(1, p)}))
            return Outcome(str(value), None, value == p - 1)
        cases.append(Case(f"bermaat/p={p}/unipotent", {"p": p, "g": "u(1/p)"}, unipotent_case))

        for d in (1, 2):
            def elliptic_case(p=p, d=d) -> Outcome:
                ctx = integration_service.MeasureContext.build(p, levels[0], "elliptic")
                value = integration_service.coset_measure(ctx, diagonal([Fraction(p) ** d, 1]))
                return Outcome(str(value), None, value == (p + 1) * p ** (d - 1))
            cases.append(Case(f"bermaat/p={p}/elliptic/d={d}", {"p": p, "g": f"diag(p^{d},1)", "torus": "elliptic"}, elliptic_case))
    return cases


# ============ Orbital integrals ============

def _orbital_cases(cfg: SuiteConfig) -> List[Case]:
    cases = []
    level = cfg.level or get_settings().default_level
    if cfg.group == "gl3":
        for p, t in _gl3_family(cfg):
            def run(p=p, t=t) -> Outcome:
                ctx = integration_service.MeasureContext.build(p, level)
                result = integration_service.orbital_integral(list(t), integration_service.UNIT_BALL, ctx)
                return Outcome(
                    str(result.value), result.bound.to_bound(), result.holds,
                    f"c={result.empirical_constant:.4g}", result.empirical_constant,
                )
            cases.append(Case(f"orbital/gl3/p={p}/t={','.join(map(str, t))}", {"p": p, "gamma": list(t), "f": "1_K"}, run))
        return cases

    for p, m, t in _gl2_family(cfg):
        def run(p=p, t=t) -> Outcome:
            ctx = integration_service.MeasureContext.build(p, level)
            result = integration_service.orbital_integral(list(t), integration_service.UNIT_BALL, ctx)
            oracle = tree_service.count_fixed_in_unipotent_orbit(p, diagonal(t), TreeVertex.origin(), result.horizon)
            holds = result.holds and result.value == oracle
            return Outcome(
                str(result.value), result.bound.to_bound(), holds,
                f"tree={oracle} c={result.empirical_constant:.4g}", result.empirical_constant,
            )
        cases.append(Case(f"orbital/{cfg.group}/p={p}/m={m}", {"p": p, "gamma": list(t), "f": "1_K"}, run))

    for p in _primes(cfg, (2, 3)):
        field = make_field(p, FieldKind.UNRAMIFIED)
        for k in cfg.sd_levels:
            def run(p=p, k=k, field=field) -> Outcome:
                ctx = integration_service.MeasureContext.build(p, level, "elliptic")
                result = integration_service.orbital_integral((1, p ** k), integration_service.UNIT_BALL, ctx)
                gamma = elliptic_matrix(field, 1, p ** k)
                oracle = tree_service.count_fixed_in_ball(p, gamma, k + 1)
                holds = result.holds and result.value == oracle == tree_service.ball_size(p, k)
                return Outcome(
                    str(result.value), result.bound.to_bound(), holds,
                    f"tree={oracle} c={result.empirical_constant:.4g}", result.empirical_constant,
                )
            cases.append(Case(f"orbital/elliptic/p={p}/k={k}", {"p": p, "gamma": f"1+{p}^{k}*theta", "f": "1_K"}, run))
    return cases


# ============ Weyl integration formula ============

def _weyl_cases(cfg: SuiteConfig) -> List[Case]:
    if cfg.p:
        settings_list = [(cfg.p, cfg.level or (2 if cfg.p == 2 else 3))]
    else:
        settings_list = [(2, 2), (2, 4), (3, 3)]
    cases = []
    for p, level in settings_list:
        for f in integration_service.preset_class_functions(p, level):
            def run(p=p, level=level, f=f) -> Outcome:
                report = integration_service.weyl_formula_check(f, integration_service.MeasureContext.build(p, level))
                return Outcome(str(report.lhs), None, report.equal, f"rhs={report.rhs}")
            cases.append(Case(f"weyl/p={p}/N={level}/{f.name}", {"p": p, "level": level, "f": f.name}, run))
    return cases


# ============ Summability ============

def _summability_cases(cfg: SuiteConfig) -> List[Case]:
    cases = []
    p = cfg.p or 2
    R = cfg.shells

    eps_values = cfg.eps or [Fraction(0), Fraction(1, 2)]
    gl1 = measure_service.gl1_context(p)
    targets = {Fraction(0): 1.0, Fraction(1, 2): 2 ** 0.5 + 1 if p == 2 else None}
    tolerances = {Fraction(0): 1e-5, Fraction(1, 2): 1e-3}
    if R:
        for eps in eps_values:
            def run(eps=eps) -> Outcome:
                report = measure_service.tail_sum(gl1, eps, R)
                target = targets.get(eps)
                holds = None if target is None else abs(report.partial_sum_value - target) < tolerances[eps]
                detail = f"converging={report.converging} counted_through={report.counted_through} extrapolated={report.extrapolated}"
                return Outcome(report.partial_sum, None, holds, detail)
            cases.append(Case(f"summability/gl1-tail/p={p}/eps={eps}", {"p": p, "eps": str(eps), "R": R}, run))

    gl2_eps = cfg.eps or [Fraction(0), Fraction(1, 8)]
    for eps in gl2_eps:
        for m in (0, 1):
            R2 = min(R, 12)
            if not R2:
                continue

            def run(eps=eps, m=m, R2=R2) -> Outcome:
                ctx = integration_service.MeasureContext.build(cfg.p or 3)
                report = integration_service.summability_report("gl2-split", eps, m, R2, ctx)
                return Outcome(report.partial_sums_exact[-1], None, report.bounded_flag, f"decreasing_from={report.decreasing_from}")
            cases.append(Case(f"summability/gl2-split/eps={eps}/m={m}", {"p": cfg.p or 3, "eps": str(eps), "m": m, "R": R2}, run))

    q3 = cfg.p if cfg.p and cfg.p != 2 else 3
    torus = measure_service.NormTorusContext(field=make_field(q3, FieldKind.UNRAMIFIED))
    level = max(cfg.level or 6, cfg.r_max + 1)
    for r in range(1, cfg.r_max + 1):
        def run(r=r) -> Outcome:
            report = measure_service.kr_index(r, torus, level)
            return Outcome(report.index_K_Kr, None, report.afttr_holds, f"Upsilon={report.index_Upsilon} decay={report.decay:.4g}")
        cases.append(Case(f"summability/norm-index/p={q3}/r={r}", {"p": q3, "torus": "unramified quadratic", "r": r, "level": level}, run))
    return cases


SUITE_BUILDERS: Dict[str, Callable[[SuiteConfig], List[Case]]] = {
    "lattice": _lattice_cases,
    "epimv": _epimv_cases,
    "fixed-points": _fixed_point_cases,
    "above": _above_cases,
    "bermaat": _bermaat_cases,
    "orbital": _orbital_cases,
    "weyl": _weyl_cases,
    "summability": _summability_cases,
}


def build_cases(cfg: SuiteConfig) -> List[Case]:
    names = SUITES if cfg.suite == "all" else (cfg.suite,)
    cases = []
    for name in names:
        cases.extend(SUITE_BUILDERS[name](cfg))
    return cases


# ============ Running ============

def _evaluate(case: Case) -> Outcome:
    return case.run()


def _record(case: Case, task: Dict) -> CaseRecord:
    error = task.get("exception")
    runtime = task.get("runtime") or 0.0
    inputs = _json_safe(case.inputs)
    if error is not None:
        if isinstance(error, VerificationError):
            logger.warning(f"{case.key}: {error.status}: {error.detail}")
            return CaseRecord(key=case.key, inputs=inputs, status=error.status, detail=error.detail, runtime=runtime)
        logger.error(f"{case.key}: unexpected {type(error).__name__}: {error}", exc_info=error)
        return CaseRecord(
            key=case.key,
            inputs=inputs,
            status="error",
            detail=f"{type(error).__name__}: {error}",
            runtime=runtime,
        )

    outcome: Outcome = task["result"]
    status = "violation" if outcome.holds is False else "ok"
    if status == "violation":
        logger.warning(f"{case.key}: bound violated ({outcome.detail or outcome.value})")
    else:
        logger.debug(f"{case.key}: {outcome.value}")
    return CaseRecord(
        key=case.key,
        inputs=inputs,
        value=None if outcome.value is None else str(outcome.value),
        bound=BoundSchema.from_bound(outcome.bound) if outcome.bound else None,
        holds=outcome.holds,
        status=status,
        detail=outcome.detail,
        empirical_constant=outcome.constant,
        runtime=runtime,
    )


def exit_code_for(cases: List[CaseRecord]) -> int:
    """1 violation, then 3 config, then 2 precision/cap/degenerate/error, else 0"""
    statuses = {c.status for c in cases}
    if "violation" in statuses:
        return 1
    if "config" in statuses:
        return 3
    if statuses & set(ERROR_STATUSES):
        return 2
    return 0


def running_maxima(cases: List[CaseRecord]) -> Dict[str, float]:
    """Largest empirical constant per case family, the first two key segments"""
    maxima: Dict[str, float] = {}
    for case in cases:
        if case.empirical_constant is None:
            continue
        family = "/".join(case.key.split("/")[:2])
        maxima[family] = max(maxima.get(family, case.empirical_constant), case.empirical_constant)
    return dict(sorted(maxima.items()))


async def execute_suite(cfg: SuiteConfig) -> SuiteReport:
    """Run every case of the configured suite on the worker pool"""
    updates = {}
    if cfg.cap:
        updates.update(enumeration_cap=cfg.cap, tree_cap=cfg.cap, group_cap=cfg.cap)
    if cfg.prec:
        updates["default_prec"] = cfg.prec

    with overridden_settings(**updates):
        logger.info(f"suite {cfg.suite}: building cases")
        cases = build_cases(cfg)
        by_key = {case.key: case for case in cases}
        if len(by_key) != len(cases):
            raise ConfigError("duplicate case keys")
        tasks = await run_all([(case.key, _evaluate, (case,)) for case in cases])

    records = sorted((_record(by_key[key], task) for key, task in tasks.items()), key=lambda r: r.key)
    violations = sum(1 for r in records if r.status == "violation")
    errors = sum(1 for r in records if r.status not in ("ok", "violation"))
    maxima = running_maxima(records)
    report = SuiteReport(
        suite=cfg.suite,
        config=cfg,
        cases=records,
        vacuous=not records,
        violations=violations,
        errors=errors,
        exit_code=exit_code_for(records),
        empirical_constants=maxima,
        notes=[f"{family}: max c = {c:.6g}" for family, c in maxima.items()],
    )
    logger.info(f"suite {cfg.suite}: {len(records)} cases, {violations} violations, {errors} errors")
    return report


def run_suite(cfg: SuiteConfig) -> SuiteReport:
    return asyncio.run(execute_suite(cfg))


# ============ Export ============

def report_json(report: SuiteReport) -> str:
    return report.model_dump_json(by_alias=True, indent=2)


def report_csv(report: SuiteReport) -> str:
    """Case table as CSV"""
    output = io.StringIO()
    writer = csv.writer(output)
    writer.writerow(["Key", "Status", "Value", "Bound", "Holds", "Runtime", "Detail"])
    for case in report.cases:
        writer.writerow([
            case.key,
            case.status,
            case.value or "",
            f"{case.bound.coeff}*{case.bound.q}^({case.bound.exponent})" if case.bound else "",
            "" if case.holds is None else case.holds,
            f"{case.runtime:.4f}",
            case.detail or "",
        ])
    return output.getvalue()


def write_report(report: SuiteReport, json_path: Optional[str] = None, csv_path: Optional[str] = None) -> None:
    if json_path:
        Path(json_path).parent.mkdir(parents=True, exist_ok=True)
        Path(json_path).write_text(report_json(report))
    if csv_path:
        Path(csv_path).parent.mkdir(parents=True, exist_ok=True)
        Path(csv_path).write_text(report_csv(report))
