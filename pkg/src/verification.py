"""
Egenskapskontroller för en given instans
Jämför detekterbarhetstester, planerare, LP-heltalighet och felgränser
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List

from config import LP_INTEGRALITY_TOL
from services.unimodularity import is_totally_unimodular
from src.errors import (
    LPInfeasible,
    MatrixTooLargeForExactTest,
    NonIntegralVertex,
    RequiresCommonCosts,
    ToolkitError,
)
from src.security_planner import (
    SecurityMeasure,
    brute_force_plan,
    check_max_resilience,
    efficient_plan,
    incidence_matrix,
    is_detectable,
    pbh_detectable,
    solve_relaxed_security_lp,
)
from src.simulation import ScenarioConfig, run_scenario
from src.system_model import eigenmode_basis
from utils.numerics import is_integral

LOG = logging.getLogger(__name__)

PASS = "pass"
FAIL = "fail"
SKIP = "skip"
# Avvikelse som rapporteras men inte fäller verifieringen
WARN = "warn"

# Största N där alla delmängder av agenter prövas
SUBSET_SCAN_MAX_AGENTS = 12


@dataclass
class CheckResult:
    """Utfall av en kontroll"""

    name: str
    status: str
    detail: str = ""

    def to_dict(self) -> Dict:
        return {"name": self.name, "status": self.status, "detail": self.detail}


@dataclass
class VerificationReport:
    """Samlade kontroller för en instans"""

    checks: List[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(check.status != FAIL for check in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [check for check in self.checks if check.status == FAIL]

    def to_dict(self) -> Dict:
        return {"ok": self.ok, "checks": [check.to_dict() for check in self.checks]}


def check_max_resilience_equivalence(config: ScenarioConfig) -> CheckResult:
    """Hb ≥ 1 ska gälla precis när modtestet säger att 𝒮 ger detekterbarhet, för varje delmängd"""
    system = config.system
    name = "max_resilience_equivalence"
    if system.N > SUBSET_SCAN_MAX_AGENTS:
        return CheckResult(name, SKIP, f"N = {system.N} är för stort för att pröva alla delmängder")

    basis = eigenmode_basis(system.model, system.N, config.basis_kind)
    H = incidence_matrix(system, basis, config.mode_filter)
    mismatches = []
    for size in range(system.N + 1):
        for secure in itertools.combinations(range(system.N), size):
            b = SecurityMeasure.from_secure_set(system.N, secure).b
            if check_max_resilience(H, b) != is_detectable(system, secure, basis, config.mode_filter):
                mismatches.append([i + 1 for i in secure])
    if mismatches:
        return CheckResult(name, FAIL, f"Hb ≥ 1 och modtestet skiljer sig för säkra mängder {mismatches[:5]}")
    return CheckResult(name, PASS, f"{2 ** system.N} delmängder prövade")


def check_detectability_equivalence(config: ScenarioConfig) -> CheckResult:
    """Jämför egenvektortestet med PBH-testet för varje delmängd säkra agenter

    Vid upprepade egenvärden kan testerna skilja sig, det rapporteras som varning.
    """
    system = config.system
    name = "detectability_equivalence"
    if system.N > SUBSET_SCAN_MAX_AGENTS:
        return CheckResult(name, SKIP, f"N = {system.N} är för stort för att pröva alla delmängder")

    basis = eigenmode_basis(system.model, system.N, "eigen")
    mismatches = []
    for size in range(system.N + 1):
        for secure in itertools.combinations(range(system.N), size):
            by_modes = is_detectable(system, secure, basis, config.mode_filter)
            by_pbh = pbh_detectable(system, secure, config.mode_filter)
            if by_modes != by_pbh:
                mismatches.append([i + 1 for i in secure])
    if mismatches:
        return CheckResult(name, WARN, f"Testerna skiljer sig för säkra mängder {mismatches[:5]}")
    return CheckResult(name, PASS, f"{2 ** system.N} delmängder prövade")


def check_planner_agreement(config: ScenarioConfig) -> CheckResult:
    """Uttömmande och effektiv planering ska ge samma index och kostnad"""
    system = config.system
    name = "planner_agreement"
    basis = eigenmode_basis(system.model, system.N, config.basis_kind)
    try:
        efficient = efficient_plan(system, config.costs, basis, config.mode_filter)
    except (RequiresCommonCosts, NonIntegralVertex) as e:
        return CheckResult(name, SKIP, str(e))
    brute = brute_force_plan(system, config.costs, basis, config.mode_filter)

    same_index = efficient.index == brute.index
    same_cost = math.isclose(efficient.cost, brute.cost, rel_tol=1e-12, abs_tol=1e-12)
    detail = (
        f"effektiv {efficient.measure} (index {efficient.index}, kostnad {efficient.cost:g}), "
        f"uttömmande {brute.measure} (index {brute.index}, kostnad {brute.cost:g})"
    )
    return CheckResult(name, PASS if same_index and same_cost else FAIL, detail)


def check_lp_integrality(config: ScenarioConfig) -> CheckResult:
    """Om H är totalt unimodulär ska LP-hörnet vara heltaligt"""
    system = config.system
    name = "lp_integrality"
    basis = eigenmode_basis(system.model, system.N, config.basis_kind)
    H = incidence_matrix(system, basis, config.mode_filter).H
    try:
        tu = is_totally_unimodular(H)
    except MatrixTooLargeForExactTest as e:
        return CheckResult(name, SKIP, str(e))
    if not tu:
        return CheckResult(name, SKIP, "H är inte totalt unimodulär")

    try:
        b, value = solve_relaxed_security_lp(H, config.costs, tie_break=False)
    except LPInfeasible as e:
        return CheckResult(name, SKIP, str(e))
    except NonIntegralVertex as e:
        return CheckResult(name, FAIL, str(e))
    ok = is_integral(b, LP_INTEGRALITY_TOL)
    return CheckResult(name, PASS if ok else FAIL, f"hörn {b.tolist()} med c̄ = {value:g}")


def check_pbh_cross_check(config: ScenarioConfig) -> CheckResult:
    """Detekterbarhet för hela agentmängden enligt båda testerna"""
    system = config.system
    name = "pbh_cross_check"
    agents = range(system.N)
    basis = eigenmode_basis(system.model, system.N, config.basis_kind)
    by_modes = is_detectable(system, agents, basis, config.mode_filter)
    by_pbh = pbh_detectable(system, agents, config.mode_filter)
    if not by_modes:
        status = FAIL
    else:
        status = PASS if by_pbh else WARN
    return CheckResult(name, status, f"modtest {by_modes}, PBH {by_pbh}")


def check_bound_adherence(config: ScenarioConfig) -> CheckResult:
    """Kör scenariot och jämför svansfelen mot gränserna när antagandena håller"""
    name = "bound_adherence"
    try:
        result = run_scenario(config)
    except ToolkitError as e:
        return CheckResult(name, SKIP, f"{type(e).__name__}: {e}")

    violations = result.summary["violations"]
    checked = {key: flag for key, flag in violations.items() if flag is not None}
    if not checked:
        failed = [key for key, ok in result.design.hypotheses.items() if not ok]
        return CheckResult(name, SKIP, f"Antagandena håller inte: {failed}")
    if any(checked.values()):
        return CheckResult(name, FAIL, f"Gränsöverträdelser: {checked}")
    return CheckResult(name, PASS, f"Kontrollerade gränser: {sorted(checked)}")


def run_verification(config: ScenarioConfig, simulate: bool = True) -> VerificationReport:
    """
    Kör alla kontroller på instansen

    Args:
        config: Scenario
        simulate: Kör även simuleringen för gränskontrollen

    Returns:
        VerificationReport
    """
    checks = [
        check_max_resilience_equivalence,
        check_detectability_equivalence,
        check_planner_agreement,
        check_lp_integrality,
        check_pbh_cross_check,
    ]
    if simulate:
        checks.append(check_bound_adherence)

    report = VerificationReport()
    for check in checks:
        result = check(config)
        LOG.info("%s: %s %s", result.name, result.status, result.detail)
        report.checks.append(result)
    return report
