"""
Säkerhetsplanering för multiagentsystem
Hanterar säkerhetsindex, detekterbarhet, odetekterbara attacker och val av säkerhetsåtgärd
"""
import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import (
    DEFAULT_BASIS,
    DEFAULT_MODE_FILTER,
    LP_INTEGRALITY_TOL,
    NONZERO_TOL,
)
from services.lp_solver import OPTIMAL, SimplexSolver
from services.unimodularity import is_totally_unimodular
from src.errors import (
    DimensionMismatch,
    EmptyFeasibleSet,
    InfeasibleBudget,
    LPInfeasible,
    MatrixTooLargeForExactTest,
    NoUndetectableAttack,
    NonIntegralVertex,
    RequiresCommonCosts,
    ValidationError,
)
from src.system_model import EigenmodeBasis, MultiAgentSystem, eigenmode_basis
from utils.numerics import is_integral, kernel_basis, visible_columns

LOG = logging.getLogger(__name__)

INF = math.inf
ALGORITHMS = ("bruteforce", "efficient")


class AgentType(str, Enum):
    """Valmöjligheter per agent"""

    NORMAL = "N"
    SECURE = "S"


@dataclass(frozen=True)
class SecurityMeasure:
    """Säkerhetsåtgärd φ, en typ per agent"""

    phi: Tuple[AgentType, ...]

    @classmethod
    def from_string(cls, text: str) -> "SecurityMeasure":
        """Tolkar t.ex. "SNSNS" eller ["S","N",...]"""
        try:
            return cls(tuple(AgentType(str(ch).upper()) for ch in text))
        except ValueError:
            raise ValidationError(f"Ogiltig säkerhetsåtgärd: {text!r}, använd bara 'S' och 'N'")

    @classmethod
    def from_secure_set(cls, N: int, secure: Iterable[int]) -> "SecurityMeasure":
        secure = set(secure)
        if any(i < 0 or i >= N for i in secure):
            raise ValidationError(f"Agentindex utanför 0..{N - 1}: {sorted(secure)}")
        return cls(tuple(AgentType.SECURE if i in secure else AgentType.NORMAL for i in range(N)))

    @classmethod
    def from_indicator(cls, b: Sequence[float]) -> "SecurityMeasure":
        return cls(tuple(AgentType.SECURE if round(float(v)) == 1 else AgentType.NORMAL for v in b))

    @property
    def N(self) -> int:
        return len(self.phi)

    @property
    def secure_set(self) -> Tuple[int, ...]:
        return tuple(i for i, t in enumerate(self.phi) if t is AgentType.SECURE)

    @property
    def normal_set(self) -> Tuple[int, ...]:
        return tuple(i for i, t in enumerate(self.phi) if t is AgentType.NORMAL)

    @property
    def b(self) -> np.ndarray:
        return np.array([1 if t is AgentType.SECURE else 0 for t in self.phi], dtype=int)

    def is_secure(self, i: int) -> bool:
        return self.phi[i] is AgentType.SECURE

    def as_list(self) -> List[str]:
        return [t.value for t in self.phi]

    def __str__(self) -> str:
        return "".join(self.as_list())


@dataclass(frozen=True, eq=False)
class CostModel:
    """Kostnader c^𝒩, c^𝒮 per agent och budget β"""

    c_normal: np.ndarray
    c_secure: np.ndarray
    budget: float

    def __post_init__(self):
        c_normal = np.asarray(self.c_normal, dtype=float).ravel()
        c_secure = np.asarray(self.c_secure, dtype=float).ravel()
        if c_normal.shape != c_secure.shape:
            raise DimensionMismatch("c^𝒩 och c^𝒮 måste ha samma längd")
        if np.any(c_normal <= 0.0) or np.any(c_secure <= 0.0):
            raise ValidationError("Alla kostnader måste vara positiva")
        if np.any(c_normal >= c_secure):
            raise ValidationError("c^𝒩 måste vara mindre än c^𝒮 för varje agent")
        if not self.budget > 0.0:
            raise ValidationError("Budgeten β måste vara positiv")
        object.__setattr__(self, "c_normal", c_normal)
        object.__setattr__(self, "c_secure", c_secure)
        object.__setattr__(self, "budget", float(self.budget))

    @classmethod
    def uniform(cls, N: int, c_normal: float, c_secure: float, budget: float) -> "CostModel":
        return cls(np.full(N, float(c_normal)), np.full(N, float(c_secure)), budget)

    @property
    def N(self) -> int:
        return self.c_normal.size

    @property
    def common(self) -> bool:
        return bool(np.all(self.c_normal == self.c_normal[0]) and np.all(self.c_secure == self.c_secure[0]))

    @property
    def base_cost(self) -> float:
        return float(self.c_normal.sum())

    def with_budget(self, budget: float) -> "CostModel":
        return CostModel(self.c_normal, self.c_secure, budget)

    def validate_budget(self):
        if self.budget < self.base_cost:
            raise InfeasibleBudget(
                f"Budgeten {self.budget:g} räcker inte till grundkostnaden {self.base_cost:g}"
            )


@dataclass(frozen=True, eq=False)
class IncidenceMatrix:
    """0/1-matris H som kopplar lyfta egenmoder till agenter"""

    H: np.ndarray
    basis: EigenmodeBasis
    mode_indices: np.ndarray

    def mode_for_row(self, row: int):
        return self.basis.modes[int(self.mode_indices[row])]


@dataclass(frozen=True)
class IndexResult:
    """Säkerhetsindex med certifikat (modindex i basen)"""

    index: float
    certificate: Optional[int] = None

    @property
    def detectable(self) -> bool:
        return math.isinf(self.index)


@dataclass(frozen=True, eq=False)
class SecurityPlan:
    """Vald säkerhetsåtgärd med index, kostnad och använd algoritm"""

    measure: SecurityMeasure
    index: float
    cost: float
    algorithm: str
    certificate: Optional[Dict] = None

    def to_dict(self) -> Dict:
        return {
            "phi": self.measure.as_list(),
            "index": "inf" if math.isinf(self.index) else int(self.index),
            "cost": self.cost,
            "algorithm": self.algorithm,
            "certificate_mode": self.certificate,
        }


@dataclass(frozen=True, eq=False)
class AttackWitness:
    """Odetekterbar attack med parade initialtillstånd"""

    x1_0: np.ndarray
    x2_0: np.ndarray
    attacks: np.ndarray
    measure: SecurityMeasure


def _resolve(system: MultiAgentSystem, basis: Optional[EigenmodeBasis], mode_filter: Optional[str]):
    if basis is None:
        basis = eigenmode_basis(system.model, system.N, DEFAULT_BASIS)
    if mode_filter is None:
        mode_filter = DEFAULT_MODE_FILTER
    if basis.N != system.N or basis.n != system.n:
        raise DimensionMismatch("Egenmodsbasen passar inte systemet")
    return basis, mode_filter


def _check_measure(system: MultiAgentSystem, measure: SecurityMeasure):
    if measure.N != system.N:
        raise DimensionMismatch(f"Åtgärden har {measure.N} agenter, systemet {system.N}")


def _visibility(system: MultiAgentSystem, agents: Iterable[int], V: np.ndarray) -> np.ndarray:
    """Boolesk matris (agent × mod): ser agentens mätning moden?"""
    agents = list(agents)
    if not agents:
        return np.zeros((0, V.shape[1]), dtype=bool)
    return np.vstack([visible_columns(system.C[i], V, NONZERO_TOL) for i in agents])


def total_cost(measure: SecurityMeasure, costs: CostModel) -> float:
    """
    Total kostnad Σ_{i∈𝒩} c_i^𝒩 + Σ_{i∈𝒮} c_i^𝒮

    Args:
        measure: Säkerhetsåtgärd
        costs: Kostnadsmodell

    Returns:
        Total kostnad c(φ), kontrollerad mot c̄(b)
    """
    if measure.N != costs.N:
        raise DimensionMismatch(f"Åtgärden har {measure.N} agenter, kostnaderna {costs.N}")
    secure = list(measure.secure_set)
    normal = list(measure.normal_set)
    cost = float(costs.c_normal[normal].sum() + costs.c_secure[secure].sum())
    assert math.isclose(cost, indicator_cost(measure.b, costs), rel_tol=1e-12, abs_tol=1e-12)
    return cost


def indicator_cost(b: np.ndarray, costs: CostModel) -> float:
    """c̄(b) = Σ ((c_i^𝒮 − c_i^𝒩) b_i + c_i^𝒩)"""
    b = np.asarray(b, dtype=float)
    return float(((costs.c_secure - costs.c_normal) * b + costs.c_normal).sum())


def is_detectable(
    system: MultiAgentSystem,
    secure_set: Iterable[int],
    basis: Optional[EigenmodeBasis] = None,
    mode_filter: Optional[str] = None,
) -> bool:
    """
    Sant om ingen filtrerad mod ligger i ker C̄_𝒮

    Args:
        system: Lyft system
        secure_set: Säkra agenter (kan vara tom)
        basis: Egenmodsbas (standard enligt konfigurationen)
        mode_filter: "all" eller "unstable"

    Returns:
        True om (Ā, C̄_𝒮) klarar detekterbarhetstestet
    """
    secure_set = list(secure_set)
    if any(not 0 <= i < system.N for i in secure_set):
        raise DimensionMismatch(f"Säkra agenter {secure_set} ligger utanför 0..{system.N - 1}")
    basis, mode_filter = _resolve(system, basis, mode_filter)
    modes = basis.indices(mode_filter)
    if modes.size == 0:
        return True
    seen = _visibility(system, secure_set, basis.lifted[:, modes])
    return bool(seen.any(axis=0).all()) if seen.shape[0] else False


def pbh_detectable(
    system: MultiAgentSystem,
    secure_set: Iterable[int],
    mode_filter: Optional[str] = None,
) -> bool:
    """Klassiskt PBH-test: rank [λI − Ā; C̄_𝒮] = nN för varje (filtrerat) egenvärde"""
    mode_filter = mode_filter or DEFAULT_MODE_FILTER
    nN = system.N * system.n
    C_S = system.stacked_C(secure_set)
    for lam in np.unique(np.round(np.linalg.eigvals(system.model.A), 9)):
        if mode_filter == "unstable" and abs(lam) < 1.0 - NONZERO_TOL:
            continue
        pencil = np.vstack([lam * np.eye(nN) - system.A_bar, C_S])
        if kernel_basis(pencil, scale=max(np.linalg.norm(system.A_bar, 2), 1.0)).shape[1] > 0:
            return False
    return True


def security_index(
    system: MultiAgentSystem,
    measure: SecurityMeasure,
    basis: Optional[EigenmodeBasis] = None,
    mode_filter: Optional[str] = None,
) -> IndexResult:
    """
    Säkerhetsindex: minsta antal normala agenter en odetekterbar attack måste kompromettera

    Args:
        system: Lyft system
        measure: Säkerhetsåtgärd
        basis: Egenmodsbas
        mode_filter: Modfilter

    Returns:
        IndexResult med +∞ om 𝒮 gör paret detekterbart, annars index och certifikatmod
    """
    _check_measure(system, measure)
    basis, mode_filter = _resolve(system, basis, mode_filter)
    modes = basis.indices(mode_filter)
    V = basis.lifted[:, modes]

    secure_seen = _visibility(system, measure.secure_set, V).any(axis=0)
    hidden = np.flatnonzero(~secure_seen)
    if hidden.size == 0:
        return IndexResult(INF)

    # Moder som de säkra agenterna inte ser: räkna normala agenter som ser dem
    normal_seen = _visibility(system, measure.normal_set, V[:, hidden])
    counts = normal_seen.sum(axis=0)
    best = int(np.argmin(counts))
    return IndexResult(float(counts[best]), int(modes[hidden[best]]))


def synthesize_undetectable_attack(
    system: MultiAgentSystem,
    measure: SecurityMeasure,
    horizon: int,
    x1_0: Optional[np.ndarray] = None,
    basis: Optional[EigenmodeBasis] = None,
    mode_filter: Optional[str] = None,
) -> AttackWitness:
    """
    Konstruerar a(k) = −C̄Ā^k x¹(0) med x¹(0) ∈ ker Ō_𝒮 och x²(0) = 0

    Args:
        system: Lyft system
        measure: Säkerhetsåtgärd
        horizon: Antal steg K
        x1_0: Valfritt initialtillstånd i ker Ō_𝒮
        basis: Egenmodsbas för detekterbarhetstestet
        mode_filter: Modfilter för detekterbarhetstestet

    Returns:
        AttackWitness med attacker av form (K, p)
    """
    if horizon < 1:
        raise ValidationError("Horisonten måste vara minst 1")
    _check_measure(system, measure)
    basis, mode_filter = _resolve(system, basis, mode_filter)
    if is_detectable(system, measure.secure_set, basis, mode_filter):
        raise NoUndetectableAttack(f"Åtgärden {measure} gör paret detekterbart")

    nN = system.N * system.n
    C_S = system.stacked_C(measure.secure_set)
    blocks = []
    power = np.eye(nN)
    for _ in range(nN):
        blocks.append(C_S @ power)
        power = system.A_bar @ power
    O_S = np.vstack(blocks)
    kernel = kernel_basis(O_S)

    if x1_0 is None:
        if kernel.shape[1] == 0:
            raise NoUndetectableAttack("ker Ō_𝒮 är trivial, ingen odetekterbar attack finns")
        x1_0 = _preferred_kernel_vector(system, measure, kernel, basis, mode_filter)
    else:
        x1_0 = np.asarray(x1_0, dtype=float).ravel()
        if x1_0.size != nN:
            raise DimensionMismatch(f"x¹(0) måste ha längd {nN}")
        residual = np.linalg.norm(O_S @ x1_0) if O_S.size else 0.0
        if residual > 1e-9 * max(np.linalg.norm(O_S), 1.0) * np.linalg.norm(x1_0) or not np.any(x1_0):
            raise ValidationError("x¹(0) ligger inte i ker Ō_𝒮 \\ {0}")

    attacks = np.zeros((horizon, system.p))
    secure_rows = np.zeros(system.p, dtype=bool)
    for i in measure.secure_set:
        secure_rows[system.row_slices[i]] = True
    x = x1_0.copy()
    for k in range(horizon):
        a = -(system.C_bar @ x)
        a[secure_rows] = 0.0
        attacks[k] = a
        x = system.A_bar @ x

    LOG.info("Odetekterbar attack syntetiserad för %s över %d steg", measure, horizon)
    return AttackWitness(x1_0=x1_0, x2_0=np.zeros(nN), attacks=attacks, measure=measure)


def _preferred_kernel_vector(system, measure, kernel, basis, mode_filter) -> np.ndarray:
    """Certifikatmodens reella del om den ligger i kärnan, annars kärnans första vektor"""
    result = security_index(system, measure, basis, mode_filter)
    if result.certificate is not None:
        v = basis.lifted[:, result.certificate]
        for part in (v.real, v.imag):
            if np.linalg.norm(part) <= NONZERO_TOL:
                continue
            projected = kernel @ (kernel.T @ part)
            if np.linalg.norm(projected - part) <= 1e-9 * np.linalg.norm(part):
                return part / np.linalg.norm(part)
    return kernel[:, 0].real.copy()


def incidence_matrix(
    system: MultiAgentSystem,
    basis: Optional[EigenmodeBasis] = None,
    mode_filter: Optional[str] = None,
) -> IncidenceMatrix:
    """
    Bygger H med H[l, r] = 1 om agent r:s mätning ser mod l

    Args:
        system: Lyft system
        basis: Egenmodsbas
        mode_filter: Modfilter, raderna begränsas till filtrerade moder

    Returns:
        IncidenceMatrix med en rad per filtrerad mod
    """
    basis, mode_filter = _resolve(system, basis, mode_filter)
    modes = basis.indices(mode_filter)
    seen = _visibility(system, range(system.N), basis.lifted[:, modes])
    H = seen.T.astype(int)
    H.setflags(write=False)
    return IncidenceMatrix(H=H, basis=basis, mode_indices=modes)


def _as_array(H) -> np.ndarray:
    return H.H if isinstance(H, IncidenceMatrix) else np.asarray(H)


def check_max_resilience(H, b: Sequence[float]) -> bool:
    """Sant om Hb ≥ 1 radvis"""
    H = _as_array(H)
    b = np.asarray(b, dtype=float)
    if H.shape[1] != b.size:
        raise DimensionMismatch(f"H har {H.shape[1]} kolumner, b har {b.size} poster")
    return bool(np.all(H @ b >= 1.0 - 1e-12))


def _covering_lp(H: np.ndarray, weights: np.ndarray, lower: np.ndarray, upper: np.ndarray):
    solver = SimplexSolver()
    result = solver.solve(
        weights,
        A_ub=-H.astype(float),
        b_ub=-np.ones(H.shape[0]),
        lower=lower,
        upper=upper,
    )
    return result


def solve_relaxed_security_lp(H, costs: CostModel, tie_break: bool = True) -> Tuple[np.ndarray, float]:
    """
    Löser min c̄(b) under Hb ≥ 1, 0 ≤ b ≤ 1 och returnerar ett hörn

    Args:
        H: Incidensmatris
        costs: Kostnadsmodell
        tie_break: Välj det lexikografiskt första optimala hörnet genom variabelfixering

    Returns:
        Tuple med (b⋆, c̄(b⋆))
    """
    H = _as_array(H)
    N = H.shape[1]
    if N != costs.N:
        raise DimensionMismatch(f"H har {N} kolumner, kostnaderna {costs.N}")
    if H.shape[0] and np.any(~H.any(axis=1)):
        raise LPInfeasible("H har en nollrad, ingen agent ser den moden")

    # Dubblettrader ger redundanta bivillkor
    rows = np.unique(H, axis=0) if H.shape[0] else H.reshape(0, N)
    weights = costs.c_secure - costs.c_normal
    lower, upper = np.zeros(N), np.ones(N)

    result = _covering_lp(rows, weights, lower, upper)
    if result.status != OPTIMAL:
        raise LPInfeasible(f"LP-relaxationen är {result.status}")
    b, best = result.x, result.value

    if tie_break and is_integral(b, LP_INTEGRALITY_TOL):
        b = np.round(b)
        for i in range(N):
            if b[i] == 1.0:
                lower[i] = 1.0
                continue
            trial_lower = lower.copy()
            trial_lower[i] = 1.0
            trial = _covering_lp(rows, weights, trial_lower, upper)
            if (
                trial.status == OPTIMAL
                and trial.value <= best + 1e-9 * max(1.0, abs(best))
                and is_integral(trial.x, LP_INTEGRALITY_TOL)
            ):
                lower = trial_lower
                b = np.round(trial.x)
            else:
                upper[i] = 0.0

    if not is_integral(b, LP_INTEGRALITY_TOL):
        value = indicator_cost(b, costs)
        raise NonIntegralVertex(f"LP-hörnet {np.round(b, 6).tolist()} är inte heltaligt (c̄ = {value:g})")

    b = np.round(b)
    if not check_max_resilience(H, b):
        raise NonIntegralVertex("Avrundat hörn uppfyller inte Hb ≥ 1")
    return b.astype(int), indicator_cost(b, costs)


def enumerate_budget_feasible(costs: CostModel) -> Iterator[np.ndarray]:
    """
    Räknar upp alla indikatorer med 1ᵀb ≤ (β − Nc^𝒩)/(c^𝒮 − c^𝒩)

    Ordning: ökande kardinalitet, sedan lexikografiskt.

    Args:
        costs: Kostnadsmodell med gemensamma kostnader

    Returns:
        Iterator över 0/1-vektorer
    """
    if not costs.common:
        raise RequiresCommonCosts("Uppräkningen kräver samma c^𝒩 och c^𝒮 för alla agenter")
    N = costs.N
    c_n, c_s = float(costs.c_normal[0]), float(costs.c_secure[0])
    bound = (costs.budget - N * c_n) / (c_s - c_n)
    if bound < 0.0:
        return
    max_size = min(N, int(math.floor(bound + 1e-9)))
    for size in range(max_size + 1):
        for secure in itertools.combinations(range(N), size):
            b = np.zeros(N, dtype=int)
            b[list(secure)] = 1
            yield b


def maxmin_phi(H, indicators: Sequence[np.ndarray], costs: Optional[CostModel] = None) -> Tuple[np.ndarray, float]:
    """
    Väljer den indikator som maximerar min_l Φ(l, j) över rader där Ψ(l, j) = 0

    Args:
        H: Incidensmatris
        indicators: Tillåtna indikatorer 𝔅 i uppräkningsordning
        costs: Valfri kostnadsmodell för att bryta lika index på kostnad

    Returns:
        Tuple med (b⋆, α⋆)
    """
    H = _as_array(H)
    B = np.array([np.asarray(b, dtype=int) for b in indicators]).reshape(-1, H.shape[1]).T
    if B.shape[1] == 0:
        raise EmptyFeasibleSet("Inga tillåtna indikatorer")

    Psi = H @ B
    Phi = H @ (1 - B)
    zero = Psi == 0
    # Kolumner utan nollrad täcker alla moder och räknas som +∞
    scores = np.full(B.shape[1], INF)
    for j in range(B.shape[1]):
        if zero[:, j].any():
            scores[j] = float(Phi[zero[:, j], j].min())

    best_j = 0
    for j in range(1, B.shape[1]):
        if scores[j] > scores[best_j]:
            best_j = j
        elif costs is not None and scores[j] == scores[best_j]:
            if indicator_cost(B[:, j], costs) < indicator_cost(B[:, best_j], costs) - 1e-12:
                best_j = j
    return B[:, best_j].copy(), float(scores[best_j])


def _certificate(basis: EigenmodeBasis, result: IndexResult) -> Optional[Dict]:
    if result.certificate is None:
        return None
    return basis.modes[result.certificate].describe()


def brute_force_plan(
    system: MultiAgentSystem,
    costs: CostModel,
    basis: Optional[EigenmodeBasis] = None,
    mode_filter: Optional[str] = None,
) -> SecurityPlan:
    """
    Uttömmande sökning efter optimal säkerhetsåtgärd

    Steg 1 letar efter den billigaste detekterbara åtgärden inom budget. Finns
    ingen maximeras indexet, sedan minimeras kostnaden, sedan lexikografiskt 𝒮.

    Args:
        system: Lyft system
        costs: Kostnadsmodell
        basis: Egenmodsbas
        mode_filter: Modfilter

    Returns:
        SecurityPlan
    """
    basis, mode_filter = _resolve(system, basis, mode_filter)
    costs.validate_budget()
    N = system.N

    best_cost = INF
    best: Optional[SecurityMeasure] = None
    for size in range(N + 1):
        for secure in itertools.combinations(range(N), size):
            measure = SecurityMeasure.from_secure_set(N, secure)
            cost = total_cost(measure, costs)
            if cost > costs.budget or cost >= best_cost:
                continue
            if is_detectable(system, secure, basis, mode_filter):
                best, best_cost = measure, cost
    if best is not None:
        LOG.info("Steg 1 (uttömmande): %s med kostnad %g", best, best_cost)
        return SecurityPlan(best, INF, best_cost, "bruteforce")

    best_index = -1.0
    best_result = None
    for size in range(N + 1):
        for secure in itertools.combinations(range(N), size):
            measure = SecurityMeasure.from_secure_set(N, secure)
            cost = total_cost(measure, costs)
            if cost > costs.budget:
                continue
            result = security_index(system, measure, basis, mode_filter)
            if result.index > best_index or (result.index == best_index and cost < best_cost):
                best, best_cost, best_index, best_result = measure, cost, result.index, result

    LOG.info("Steg 2 (uttömmande): %s med index %g", best, best_index)
    return SecurityPlan(best, best_index, best_cost, "bruteforce", _certificate(basis, best_result))


def efficient_plan(
    system: MultiAgentSystem,
    costs: CostModel,
    basis: Optional[EigenmodeBasis] = None,
    mode_filter: Optional[str] = None,
) -> SecurityPlan:
    """
    Effektiv planering via LP-relaxation och uppräkning med polynomisk fördröjning

    Args:
        system: Lyft system
        costs: Kostnadsmodell
        basis: Egenmodsbas
        mode_filter: Modfilter

    Returns:
        SecurityPlan
    """
    basis, mode_filter = _resolve(system, basis, mode_filter)
    costs.validate_budget()
    incidence = incidence_matrix(system, basis, mode_filter)
    H = incidence.H
    N = system.N

    try:
        b_star, value = solve_relaxed_security_lp(H, costs)
    except LPInfeasible as e:
        LOG.info("Steg 1 hoppas över: %s", e)
        b_star, value = None, INF
    except NonIntegralVertex as e:
        # Ett fraktionellt hörn över budget betyder att inget heltaligt täcker heller
        lp_value = _relaxed_value(H, costs)
        if lp_value <= costs.budget + 1e-9:
            raise
        LOG.info("Fraktionellt hörn över budget, går till steg 2: %s", e)
        b_star, value = None, INF

    if b_star is not None and value <= costs.budget + 1e-9:
        measure = SecurityMeasure.from_indicator(b_star)
        LOG.info("Steg 1 (LP): %s med kostnad %g", measure, value)
        return SecurityPlan(measure, INF, total_cost(measure, costs), "efficient")

    b_bar, alpha = maxmin_phi(H, list(enumerate_budget_feasible(costs)), costs)
    measure = SecurityMeasure.from_indicator(b_bar)
    certificate = None
    if not math.isinf(alpha):
        Psi = H @ b_bar
        Phi = H @ (1 - b_bar)
        rows = np.flatnonzero(Psi == 0)
        row = int(rows[np.argmin(Phi[rows])])
        certificate = incidence.mode_for_row(row).describe()
    LOG.info("Steg 2 (uppräkning): %s med index %g", measure, alpha)
    return SecurityPlan(measure, alpha, total_cost(measure, costs), "efficient", certificate)


def _relaxed_value(H: np.ndarray, costs: CostModel) -> float:
    rows = np.unique(H, axis=0)
    N = H.shape[1]
    result = _covering_lp(rows, costs.c_secure - costs.c_normal, np.zeros(N), np.ones(N))
    if result.status != OPTIMAL:
        return INF
    return indicator_cost(result.x, costs)


def plan_security(
    system: MultiAgentSystem,
    costs: CostModel,
    algorithm: str = "efficient",
    basis: Optional[EigenmodeBasis] = None,
    mode_filter: Optional[str] = None,
) -> SecurityPlan:
    """
    Kör vald planerare och faller tillbaka till uttömmande sökning vid behov

    Args:
        system: Lyft system
        costs: Kostnadsmodell
        algorithm: "bruteforce" eller "efficient"
        basis: Egenmodsbas
        mode_filter: Modfilter

    Returns:
        SecurityPlan
    """
    if algorithm not in ALGORITHMS:
        raise ValidationError(f"Okänd algoritm: {algorithm}")
    basis, mode_filter = _resolve(system, basis, mode_filter)
    if algorithm == "bruteforce":
        return brute_force_plan(system, costs, basis, mode_filter)

    H = incidence_matrix(system, basis, mode_filter).H
    try:
        tu = is_totally_unimodular(H)
    except MatrixTooLargeForExactTest as e:
        LOG.warning("TU-testet gav inget svar (%s), kör uttömmande sökning", e)
        return brute_force_plan(system, costs, basis, mode_filter)
    if not tu:
        LOG.warning("H är inte totalt unimodulär, LP-hörnet kan bli fraktionellt")

    try:
        return efficient_plan(system, costs, basis, mode_filter)
    except NonIntegralVertex as e:
        LOG.warning("%s, kör uttömmande sökning", e)
        return brute_force_plan(system, costs, basis, mode_filter)
    except RequiresCommonCosts as e:
        LOG.warning("%s, kör uttömmande sökning", e)
        return brute_force_plan(system, costs, basis, mode_filter)


def budget_staircase(
    system: MultiAgentSystem,
    costs: CostModel,
    budgets: Sequence[float],
    algorithm: str = "efficient",
    basis: Optional[EigenmodeBasis] = None,
    mode_filter: Optional[str] = None,
) -> pd.DataFrame:
    """
    Säkerhetsindex och kostnad för den optimala åtgärden per budget

    Args:
        system: Lyft system
        costs: Kostnadsmodell (budgeten ersätts)
        budgets: Budgetar att utvärdera
        algorithm: Planerare
        basis: Egenmodsbas
        mode_filter: Modfilter

    Returns:
        DataFrame med kolumnerna budget, phi, index, cost
    """
    basis, mode_filter = _resolve(system, basis, mode_filter)
    rows = []
    for budget in budgets:
        plan = plan_security(system, costs.with_budget(budget), algorithm, basis, mode_filter)
        rows.append({
            "budget": float(budget),
            "phi": str(plan.measure),
            "index": plan.index,
            "cost": plan.cost,
        })
    return pd.DataFrame(rows, columns=["budget", "phi", "index", "cost"])
