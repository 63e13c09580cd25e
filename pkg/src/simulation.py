"""
Simulering av multiagentsystemet under attack
Bygger scenarier, injicerar brus och attacker, kör estimatorn och beräknar mått
"""
import dataclasses
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from config import (
    DEFAULT_ALGORITHM,
    DEFAULT_BASIS,
    DEFAULT_MODE_FILTER,
    TAIL_FRACTION,
    TAIL_MIN_STEPS,
)
from services.graph_utils import banded_adjacency
from src.errors import (
    DimensionMismatch,
    EmptyTrace,
    InfeasibleBudget,
    PlanInfeasible,
    ValidationError,
)
from src.estimator import (
    AUTO,
    DesignReport,
    ErrorBounds,
    control_input,
    design_parameters,
    initial_states,
    input_fusion,
    step_estimator,
)
from src.security_planner import (
    ALGORITHMS,
    AttackWitness,
    CostModel,
    SecurityMeasure,
    SecurityPlan,
    brute_force_plan,
    efficient_plan,
    plan_security,
    security_index,
    total_cost,
)
from src.system_model import CommGraph, LtiModel, MultiAgentSystem, as_matrix, eigenmode_basis, lift_system

LOG = logging.getLogger(__name__)

# Värden från fordonskolonnexemplet
PLATOON_KP = ((29.1604, 15.2590),)
PLATOON_L = 5
PLATOON_SPEED = 15.0
PLATOON_SPACING = 20.0
PLATOON_INITIAL_STATES = ((200.0, 10.0), (100.0, 8.0), (50.0, 6.0), (20.0, 4.0), (0.0, 2.0))

# Marginal så att brusnormen aldrig avrundas över gränsen
NOISE_SHRINK = 1.0 - 1e-12

PROCESS_STREAM = 0
MEASUREMENT_STREAM = 1


class AttackKind(str, Enum):
    """Attacktyper mot en agents mätning"""

    ZEROING = "zeroing"
    BIAS = "bias"
    CUSTOM = "custom"


class DesiredMode(str, Enum):
    """Hur önskade tillstånd x*_i(k) genereras"""

    PLATOON = "platoon"
    AUTONOMOUS = "autonomous"


@dataclass(frozen=True, eq=False)
class AttackSpec:
    """Attack mot agent `target` (0-baserat) under fönstret [start, end]"""

    target: int
    kind: AttackKind = AttackKind.ZEROING
    start: int = 0
    end: Optional[int] = None
    bias: Optional[np.ndarray] = None
    sequence: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", AttackKind(self.kind))
        if self.start < 0 or (self.end is not None and self.end < self.start):
            raise ValidationError(f"Ogiltigt attackfönster [{self.start}, {self.end}]")
        if self.kind is AttackKind.BIAS:
            if self.bias is None:
                raise ValidationError("En biasattack kräver ett biasvärde")
            object.__setattr__(self, "bias", np.atleast_1d(np.asarray(self.bias, dtype=float)).ravel())
        if self.kind is AttackKind.CUSTOM:
            if self.sequence is None:
                raise ValidationError("En egen attack kräver en sekvens")
            object.__setattr__(self, "sequence", np.atleast_2d(np.asarray(self.sequence, dtype=float)))

    def active_at(self, k: int, horizon: int) -> bool:
        end = horizon if self.end is None else self.end
        return self.start <= k <= end


@dataclass(frozen=True, eq=False)
class DesiredSpec:
    """Önskat tillstånd: kolonnläge med ledarramp eller autonomt x*(k+1) = A x*(k)"""

    mode: DesiredMode = DesiredMode.AUTONOMOUS
    T: float = 0.01
    speed: float = PLATOON_SPEED
    spacing: float = PLATOON_SPACING
    leader_start: Optional[float] = None
    x_star0: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "mode", DesiredMode(self.mode))


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    """Allt som behövs för en deterministisk körning"""

    system: MultiAgentSystem
    costs: CostModel
    Kp: np.ndarray
    x0: np.ndarray
    horizon: int = 5000
    seed: int = 0
    omega: Union[str, float] = AUTO
    L: Union[str, int] = AUTO
    delta_w: float = 0.0
    delta_v: float = 0.0
    attacks: Tuple[AttackSpec, ...] = ()
    desired: DesiredSpec = field(default_factory=DesiredSpec)
    measure: Optional[SecurityMeasure] = None
    algorithm: str = DEFAULT_ALGORITHM
    mode_filter: str = DEFAULT_MODE_FILTER
    basis_kind: str = DEFAULT_BASIS
    xi0: Optional[np.ndarray] = None

    def __post_init__(self):
        N, n = self.system.N, self.system.n
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ValidationError(f"Horisonten måste vara ett heltal ≥ 1, fick {self.horizon}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValidationError(f"Fröet måste vara ett icke-negativt heltal, fick {self.seed}")
        if not (self.delta_w >= 0.0 and self.delta_v >= 0.0):
            raise ValidationError("Brusgränserna δ_w och δ_v måste vara icke-negativa")
        if self.algorithm not in ALGORITHMS:
            raise ValidationError(f"Okänd algoritm: {self.algorithm}")
        if self.costs.N != N:
            raise DimensionMismatch(f"Kostnaderna gäller {self.costs.N} agenter, systemet har {N}")
        if self.measure is not None and self.measure.N != N:
            raise DimensionMismatch(f"Åtgärden gäller {self.measure.N} agenter, systemet har {N}")

        x0 = np.asarray(self.x0, dtype=float)
        if x0.size != N * n:
            raise DimensionMismatch(f"x(0) måste ha {N * n} element, fick {x0.size}")
        object.__setattr__(self, "x0", x0.reshape(N, n))
        object.__setattr__(self, "Kp", as_matrix(self.Kp, "Kp"))
        object.__setattr__(self, "horizon", int(self.horizon))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "attacks", tuple(self.attacks))

        for spec in self.attacks:
            if not 0 <= spec.target < N:
                raise ValidationError(f"Attackmålet {spec.target + 1} ligger utanför 1..{N}")
            if spec.start > self.horizon or (spec.end is not None and spec.end > self.horizon):
                raise ValidationError(f"Attackfönstret mot agent {spec.target + 1} går utanför horisonten")
            p_i = self.system.p_sizes[spec.target]
            if spec.kind is AttackKind.BIAS and spec.bias.size not in (1, p_i):
                raise DimensionMismatch(f"Biasen mot agent {spec.target + 1} måste ha längd {p_i}")
            if spec.kind is AttackKind.CUSTOM and spec.sequence.shape[1] != p_i:
                raise DimensionMismatch(f"Attacksekvensen mot agent {spec.target + 1} måste ha {p_i} kolumner")

        if self.desired.mode is DesiredMode.PLATOON and n != 2:
            raise ValidationError("Kolonnläget kräver tillstånden (position, hastighet)")
        if self.desired.x_star0 is not None and np.asarray(self.desired.x_star0).size != N * n:
            raise DimensionMismatch(f"x*(0) måste ha {N * n} element")

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True, eq=False)
class InjectedAttack:
    """Beräknad attack och det som faktiskt når mätningen"""

    raw: np.ndarray
    applied: np.ndarray
    active: bool
    blocked: bool


@dataclass(frozen=True, eq=False)
class ScenarioResult:
    """Spår, sammanfattning och designbeslut för en körning"""

    trace: pd.DataFrame
    summary: Dict
    plan: SecurityPlan
    design: DesignReport
    blocked_attacks: Dict[int, int]


def platoon_measurements(N: int) -> List[np.ndarray]:
    """C₁ ser eget tillstånd, C_i ser eget tillstånd och avståndet till fordon i−1"""
    identity = np.eye(2)
    C = []
    for i in range(N):
        own = np.zeros((1, N))
        own[0, i] = 1.0
        rows = [np.kron(own, identity)]
        if i > 0:
            relative = np.zeros((1, N))
            relative[0, i] = 1.0
            relative[0, i - 1] = -1.0
            rows.append(np.kron(relative, identity))
        C.append(np.vstack(rows))
    return C


def platoon_initial_states(N: int) -> np.ndarray:
    if N == len(PLATOON_INITIAL_STATES):
        return np.array(PLATOON_INITIAL_STATES)
    return np.array([[50.0 * (N - 1 - i), 2.0 * (N - i)] for i in range(N)])


def build_platoon(
    N: int,
    T: float = 0.01,
    delta_w: float = 0.1,
    delta_v: float = 0.1,
    costs: Optional[CostModel] = None,
    horizon: int = 5000,
    seed: int = 0,
    attacked: Optional[Sequence[int]] = None,
) -> ScenarioConfig:
    """
    Fordonskolonn med andra ordningens fordonsmodell

    Args:
        N: Antal fordon (≥ 2)
        T: Samplingstid
        delta_w: Brusgräns för processbrus
        delta_v: Brusgräns för mätbrus
        costs: Kostnadsmodell (standard c^𝒩 = 1, c^𝒮 = 30, β = 30N)
        horizon: Antal steg
        seed: Slumpfrö
        attacked: Nollställningsattackerade fordon, 0-baserat (standard fordon 2 och 4)

    Returns:
        ScenarioConfig
    """
    if N < 2:
        raise ValidationError("En kolonn kräver minst två fordon")
    if not T > 0.0:
        raise ValidationError("Samplingstiden måste vara positiv")

    model = LtiModel(A=[[1.0, T], [0.0, 1.0]], B=[[0.0], [T]])
    graph = CommGraph.from_adjacency(banded_adjacency(N, 2))
    system = lift_system(model, graph, platoon_measurements(N))

    if costs is None:
        costs = CostModel.uniform(N, 1.0, 30.0, 30.0 * N)
    if attacked is None:
        attacked = [i for i in (1, 3) if i < N]
    x0 = platoon_initial_states(N)

    return ScenarioConfig(
        system=system,
        costs=costs,
        Kp=np.array(PLATOON_KP),
        x0=x0,
        horizon=horizon,
        seed=seed,
        L=PLATOON_L,
        delta_w=delta_w,
        delta_v=delta_v,
        attacks=tuple(AttackSpec(target=i, kind=AttackKind.ZEROING) for i in attacked),
        desired=DesiredSpec(mode=DesiredMode.PLATOON, T=T, leader_start=float(x0[0, 0])),
    )


def gen_noise(seed: int, bound: float, dim: int, k: int, agent: int = 0, stream: int = 0) -> np.ndarray:
    """
    Likformig riktning skalad med en likformig radie i [0, δ]

    Args:
        seed: Slumpfrö
        bound: Brusgräns δ
        dim: Vektorns längd
        k: Tidssteg
        agent: Agentindex
        stream: Bruskälla (process eller mätning)

    Returns:
        Vektor med norm ≤ δ, deterministisk i (seed, stream, agent, k)
    """
    if bound < 0.0:
        raise ValidationError("Brusgränsen måste vara icke-negativ")
    if bound == 0.0 or dim == 0:
        return np.zeros(dim)
    rng = np.random.default_rng([seed, stream, agent, k])
    direction = rng.standard_normal(dim)
    length = np.linalg.norm(direction)
    if length == 0.0:
        return np.zeros(dim)
    radius = bound * rng.uniform() * NOISE_SHRINK
    return direction * (radius / length)


def inject_attack(
    spec: AttackSpec,
    x: np.ndarray,
    system: MultiAgentSystem,
    k: int,
    horizon: int,
    measure: Optional[SecurityMeasure] = None,
) -> InjectedAttack:
    """
    Attackvektorn a_i(k) mot agent spec.target

    Args:
        spec: Attackspecifikation
        x: Sant staplat tillstånd x(k)
        system: Lyft system
        k: Tidssteg
        horizon: Horisont, öppet fönsterslut betyder horisonten
        measure: Säkerhetsåtgärd, säkra agenter blockerar attacken

    Returns:
        InjectedAttack med rå och applicerad attack
    """
    i = spec.target
    p_i = system.p_sizes[i]
    raw = np.zeros(p_i)
    active = spec.active_at(k, horizon)
    if active:
        if spec.kind is AttackKind.ZEROING:
            raw = -(system.C[i] @ x)
        elif spec.kind is AttackKind.BIAS:
            raw = np.broadcast_to(spec.bias, (p_i,)).copy()
        elif k < spec.sequence.shape[0]:
            raw = spec.sequence[k].copy()

    blocked = bool(active and measure is not None and measure.is_secure(i))
    applied = np.zeros(p_i) if blocked or not active else raw
    return InjectedAttack(raw=raw, applied=applied, active=active and not blocked, blocked=blocked)


def measure_outputs(
    system: MultiAgentSystem,
    x: np.ndarray,
    v: Optional[Sequence[np.ndarray]] = None,
    attacks: Optional[Sequence[np.ndarray]] = None,
) -> List[np.ndarray]:
    """y_i = C_i x + a_i + v_i per agent"""
    outputs = []
    for i, C_i in enumerate(system.C):
        y_i = C_i @ x
        if attacks is not None:
            y_i = y_i + attacks[i]
        if v is not None:
            y_i = y_i + v[i]
        outputs.append(y_i)
    return outputs


class _DesiredStates:
    """Genererar x*_i(k) per agent"""

    def __init__(self, spec: DesiredSpec, model: LtiModel, x0: np.ndarray):
        self.spec = spec
        self.A = model.A
        self.N, self.n = x0.shape
        if spec.x_star0 is not None:
            self.current = np.asarray(spec.x_star0, dtype=float).reshape(self.N, self.n).copy()
        else:
            self.current = np.zeros((self.N, self.n))
        self.leader_start = x0[0, 0] if spec.leader_start is None else spec.leader_start

    def at(self, k: int, x_hat: np.ndarray) -> np.ndarray:
        if self.spec.mode is DesiredMode.AUTONOMOUS:
            if k > 0:
                self.current = self.current @ self.A.T
            return self.current

        s = self.spec
        x_star = np.empty((self.N, self.n))
        x_star[0] = (self.leader_start + s.speed * s.T * k, s.speed)
        for i in range(1, self.N):
            x_star[i] = (x_hat[i - 1, 0] - s.spacing, x_hat[i - 1, 1])
        return x_star


def resolve_plan(config: ScenarioConfig) -> SecurityPlan:
    """Åtgärden från scenariot om den finns, annars vald planerare"""
    system = config.system
    basis = eigenmode_basis(system.model, system.N, config.basis_kind)
    if config.measure is not None:
        result = security_index(system, config.measure, basis, config.mode_filter)
        return SecurityPlan(
            measure=config.measure,
            index=result.index,
            cost=total_cost(config.measure, config.costs),
            algorithm="supplied",
        )
    try:
        return plan_security(system, config.costs, config.algorithm, basis, config.mode_filter)
    except PlanInfeasible:
        raise
    except InfeasibleBudget as e:
        raise PlanInfeasible(str(e)) from e


def run_scenario(config: ScenarioConfig) -> ScenarioResult:
    """
    Kör estimering och reglering över horisonten

    Args:
        config: Validerad scenariokonfiguration

    Returns:
        ScenarioResult med ett spår per (k, agent) för k = 0..horisonten
    """
    system = config.system
    N, n, m = system.N, system.n, system.m
    K = config.horizon

    plan = resolve_plan(config)
    measure = plan.measure
    design = design_parameters(
        system, measure, config.Kp, config.omega, config.L, config.delta_w, config.delta_v
    )
    params = design.params
    LOG.info("Kör %d steg med %s, ω=%.4g, L=%d", K, measure, params.omega, params.L)

    X = np.zeros((K + 1, N, n))
    X_hat = np.zeros((K + 1, N, n))
    X_star = np.zeros((K + 1, N, n))
    U = np.zeros((K + 1, N, m))
    active = np.zeros((K + 1, N), dtype=int)
    blocked: Dict[int, int] = {}

    x = config.x0.ravel().copy()
    states = initial_states(system, config.xi0)
    desired = _DesiredStates(config.desired, system.model, config.x0)

    x_hat = np.vstack([s.x_hat for s in states])
    x_star = desired.at(0, x_hat)
    u_local = [control_input(x_hat[i], x_star[i], params.Kp) for i in range(N)]
    X[0], X_hat[0], X_star[0], U[0] = config.x0, x_hat, x_star, np.vstack(u_local)

    for k in range(1, K + 1):
        u_prev, _ = input_fusion(u_local, system.graph)
        w = np.concatenate([gen_noise(config.seed, config.delta_w, n, k - 1, i, PROCESS_STREAM) for i in range(N)])
        x = system.A_bar @ x + system.B_bar @ u_prev + w

        attacks = [np.zeros(p_i) for p_i in system.p_sizes]
        for spec in config.attacks:
            outcome = inject_attack(spec, x, system, k, K, measure)
            if outcome.blocked:
                if spec.target + 1 not in blocked:
                    LOG.info("Attack mot säker agent %d blockeras", spec.target + 1)
                blocked[spec.target + 1] = blocked.get(spec.target + 1, 0) + 1
            elif outcome.active:
                attacks[spec.target] = attacks[spec.target] + outcome.applied
                active[k, spec.target] = 1
        v = [gen_noise(config.seed, config.delta_v, p_i, k, i, MEASUREMENT_STREAM) for i, p_i in enumerate(system.p_sizes)]
        y = measure_outputs(system, x, v, attacks)

        states = step_estimator(states, system, measure, params, u_prev, y)
        x_hat = np.vstack([s.x_hat for s in states])
        x_star = desired.at(k, x_hat)
        u_local = [control_input(x_hat[i], x_star[i], params.Kp) for i in range(N)]

        X[k], X_hat[k], X_star[k], U[k] = x.reshape(N, n), x_hat, x_star, np.vstack(u_local)

    trace = _build_trace(X, X_hat, X_star, U, active)
    hypotheses = dict(design.hypotheses)
    hypotheses["desired_autonomous"] = config.desired.mode is DesiredMode.AUTONOMOUS
    summary = compute_metrics(trace, design.bounds, hypotheses)
    summary.update({
        "seed": config.seed,
        "horizon": K,
        "plan": plan.to_dict(),
        "design": design.to_dict(),
        "blocked_attacks": {str(agent): count for agent, count in sorted(blocked.items())},
    })
    return ScenarioResult(trace=trace, summary=summary, plan=plan, design=design, blocked_attacks=blocked)


def _build_trace(X, X_hat, X_star, U, active) -> pd.DataFrame:
    steps, N, n = X.shape
    m = U.shape[2]
    err_est = np.linalg.norm(X_hat - X, axis=2)
    err_ctrl = np.linalg.norm(X - X_star, axis=2)
    metric = (err_est + err_ctrl).mean(axis=1)

    columns = {
        "k": np.repeat(np.arange(steps), N),
        "agent": np.tile(np.arange(1, N + 1), steps),
    }
    for prefix, values, width in (("x", X, n), ("xhat", X_hat, n), ("xstar", X_star, n), ("u", U, m)):
        for j in range(width):
            columns[f"{prefix}_{j + 1}"] = values[:, :, j].ravel()
    columns["err_est"] = err_est.ravel()
    columns["err_ctrl"] = err_ctrl.ravel()
    columns["attack_active"] = active.ravel()
    columns["metric"] = np.repeat(metric, N)
    return pd.DataFrame(columns)


def tail_length(steps: int) -> int:
    """Svansfönstrets längd: sista 20 % men minst 200 steg"""
    return min(steps, max(math.ceil(TAIL_FRACTION * steps), TAIL_MIN_STEPS))


def compute_metrics(
    trace: pd.DataFrame,
    bounds: Optional[ErrorBounds] = None,
    hypotheses: Optional[Dict[str, bool]] = None,
) -> Dict:
    """
    Prestandamått över svansfönstret och jämförelse mot felgränserna

    Args:
        trace: Spår med kolumnerna k, agent, err_est, err_ctrl
        bounds: Felgränser från designen
        hypotheses: Antagandenas status

    Returns:
        Sammanfattning som dict
    """
    if trace is None or trace.empty:
        raise EmptyTrace("Spåret är tomt")
    hypotheses = dict(hypotheses or {})

    steps = np.sort(trace["k"].unique())
    length = tail_length(steps.size)
    tail = trace[trace["k"] >= steps[steps.size - length]]

    per_step = (tail["err_est"] + tail["err_ctrl"]).groupby(tail["k"]).mean()
    per_agent = tail.groupby("agent")[["err_est", "err_ctrl"]].max()
    max_est = float(tail["err_est"].max())
    max_ctrl = float(tail["err_ctrl"].max())

    est_bound = bounds.est_bound if bounds is not None else None
    ctrl_bound = bounds.ctrl_bound if bounds is not None else None
    violations = {"estimation": None, "control": None}
    if est_bound is not None and hypotheses.get("theta_norm_below_one", True) and hypotheses.get("rounds_sufficient", True):
        violations["estimation"] = bool(max_est > est_bound + 1e-6)
        if ctrl_bound is not None and hypotheses.get("desired_autonomous", False):
            violations["control"] = bool(max_ctrl > ctrl_bound + 1e-6)
    for name, flag in violations.items():
        if flag:
            LOG.warning("Svansfelet överskrider %s-gränsen", name)

    return {
        "eq7_tail": float(per_step.max()),
        "eq7_tail_mean": float(per_step.mean()),
        "max_est_err_tail": max_est,
        "max_ctrl_err_tail": max_ctrl,
        "tail_steps": int(length),
        "per_agent": {
            str(int(agent)): {"max_est_err_tail": float(row.err_est), "max_ctrl_err_tail": float(row.err_ctrl)}
            for agent, row in per_agent.iterrows()
        },
        "bounds": {"estimation": est_bound, "control": ctrl_bound},
        "hypotheses": hypotheses,
        "violations": violations,
    }


def run_seed_sweep(config: ScenarioConfig, seeds: Sequence[int], workers: int = 4) -> List[Dict]:
    """
    Kör samma scenario för flera frön parallellt

    Args:
        config: Grundkonfiguration
        seeds: Frön att köra
        workers: Antal trådar

    Returns:
        Sammanfattningar i samma ordning som seeds
    """
    configs = [config.replace(seed=int(seed)) for seed in seeds]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(run_scenario, configs))
    return [result.summary for result in results]


def replay_undetectable_attack(system: MultiAgentSystem, witness: AttackWitness) -> Tuple[np.ndarray, np.ndarray]:
    """
    Kör det attackerade systemet från x¹(0) och tvillingen från x²(0) utan brus och insignal

    Returns:
        Tuple med utsignalerna (K, p) för attackerat system och tvilling
    """
    K = witness.attacks.shape[0]
    x1 = witness.x1_0.astype(float).copy()
    x2 = witness.x2_0.astype(float).copy()
    Y1 = np.zeros((K, system.p))
    Y2 = np.zeros((K, system.p))
    for k in range(K):
        a = [witness.attacks[k, rows] for rows in system.row_slices]
        Y1[k] = np.concatenate(measure_outputs(system, x1, attacks=a))
        Y2[k] = np.concatenate(measure_outputs(system, x2))
        x1 = system.A_bar @ x1
        x2 = system.A_bar @ x2
    return Y1, Y2


def _best_time(fn: Callable, repeats: int) -> Tuple[float, SecurityPlan]:
    best, plan = math.inf, None
    for _ in range(max(1, repeats)):
        start = time.perf_counter()
        plan = fn()
        best = min(best, time.perf_counter() - start)
    return best, plan


def planner_timing(Ns: Sequence[int], budget_factor: float = 30.0, repeats: int = 3) -> pd.DataFrame:
    """
    Jämför väggklocktid för uttömmande och effektiv planering på kolonner

    Args:
        Ns: Kolonnstorlekar
        budget_factor: Budgeten sätts till budget_factor · N
        repeats: Bästa av så många körningar

    Returns:
        DataFrame med N, budget, tider, kvot och om planerna ger samma index och kostnad
    """
    rows = []
    for N in Ns:
        config = build_platoon(N, attacked=())
        costs = config.costs.with_budget(budget_factor * N)
        basis = eigenmode_basis(config.system.model, N, config.basis_kind)
        brute_s, brute = _best_time(lambda: brute_force_plan(config.system, costs, basis), repeats)
        efficient_s, efficient = _best_time(lambda: efficient_plan(config.system, costs, basis), repeats)
        LOG.info("N=%d: uttömmande %.4fs, effektiv %.4fs", N, brute_s, efficient_s)
        rows.append({
            "N": N,
            "budget": budget_factor * N,
            "bruteforce_s": brute_s,
            "efficient_s": efficient_s,
            "speedup": brute_s / efficient_s if efficient_s > 0 else math.inf,
            "same_plan": brute.index == efficient.index and math.isclose(brute.cost, efficient.cost),
        })
    return pd.DataFrame(rows)
