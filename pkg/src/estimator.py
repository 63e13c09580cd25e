"""
Distribuerad resilient skattning och reglering
Hanterar estimatorns uppdateringsfaser, parameterdesign och felgränser
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from config import DEFAULT_CONSENSUS_ROUNDS, NORM_TOL
from src.errors import (
    DimensionMismatch,
    EmptySecureSet,
    GainHypothesisViolated,
    HypothesisViolated,
    ValidationError,
)
from src.security_planner import SecurityMeasure, is_detectable
from src.system_model import CommGraph, LtiModel, MultiAgentSystem, as_matrix, laplacian_spectrum
from utils.numerics import op_norm

LOG = logging.getLogger(__name__)

AUTO = "auto"


class RoundsVerdict(str, Enum):
    """Utfall av konsensusrundedesignen"""

    VALUE = "value"
    ANY = "any"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class ConsensusRounds:
    """Minsta antal konsensusrundor, eller att inget L kan garanteras"""

    verdict: RoundsVerdict
    L: Optional[int] = None

    def admits(self, L: int) -> bool:
        if self.verdict is RoundsVerdict.INFEASIBLE:
            return False
        return L >= (self.L or 1)


@dataclass(frozen=True, eq=False)
class EstimatorParams:
    """Parametrar ω, L, K_p och normerna θ₀, ν₀, γ⊥"""

    omega: float
    L: int
    Kp: np.ndarray
    theta0: float
    nu0: float
    gamma_perp: float

    def __post_init__(self):
        if not self.omega > 0.0:
            raise ValidationError("ω måste vara positiv")
        if int(self.L) != self.L or self.L < 1:
            raise ValidationError("L måste vara ett heltal ≥ 1")
        if not 0.0 <= self.gamma_perp < 1.0:
            raise ValidationError("γ⊥ måste ligga i [0, 1)")
        if self.theta0 < 0.0:
            raise ValidationError("θ₀ får inte vara negativ")
        object.__setattr__(self, "L", int(self.L))
        object.__setattr__(self, "Kp", as_matrix(self.Kp, "Kp"))


@dataclass(frozen=True, eq=False)
class AgentEstimatorState:
    """En agents skattning ξ̂_i av hela tillståndet och utdragen x̂_i"""

    xi_hat: np.ndarray
    x_hat: np.ndarray
    provisional: Optional[np.ndarray] = None


@dataclass(frozen=True)
class ErrorBounds:
    """Högerled för skattnings- och reglerfelsgränserna"""

    est_bound: Optional[float]
    ctrl_bound: Optional[float]
    stable: bool


@dataclass(frozen=True)
class GainCheck:
    """‖A − BK_p‖ och jämförelsen mot 1"""

    norm: float
    ok: bool


@dataclass(frozen=True, eq=False)
class ExtendedErrorSystem:
    """E(k) = M E(k−1) + D_w (1 ⊗ w(k−1)) + D_v v(k) med projicerade normer"""

    M: np.ndarray
    D_w: np.ndarray
    D_v: np.ndarray
    norm_sharp: float
    norm_perp: float

    @property
    def stable(self) -> bool:
        return self.norm_sharp < 1.0 and self.norm_perp < 1.0


@dataclass(frozen=True, eq=False)
class DesignReport:
    """Samlad parameterdesign för en säkerhetsåtgärd"""

    params: EstimatorParams
    rounds: ConsensusRounds
    gain: GainCheck
    bounds: ErrorBounds
    extended: ExtendedErrorSystem
    norm_A: float
    hypotheses: Dict[str, bool] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "omega": self.params.omega,
            "L": self.params.L,
            "L_min": self.rounds.L,
            "rounds_verdict": self.rounds.verdict.value,
            "theta0": self.params.theta0,
            "nu0": self.params.nu0,
            "gamma_perp": self.params.gamma_perp,
            "norm_A": self.norm_A,
            "gain_norm": self.gain.norm,
            "bounds": {
                "estimation": self.bounds.est_bound,
                "control": self.bounds.ctrl_bound,
            },
            "extended": {
                "norm_sharp": self.extended.norm_sharp,
                "norm_perp": self.extended.norm_perp,
                "stable": self.extended.stable,
            },
            "hypotheses": dict(self.hypotheses),
        }


def design_omega(graph: CommGraph) -> float:
    """
    Konsensusförstärkning ω = 2/(λ₂ + λ_max)

    Args:
        graph: Sammanhängande kommunikationsgraf

    Returns:
        ω
    """
    if graph.N == 1:
        # ℒ = 0, förstärkningen påverkar ingenting
        return 1.0
    lambda2, lambda_max = laplacian_spectrum(graph)
    return 2.0 / (lambda2 + lambda_max)


def gamma_perp(graph: CommGraph) -> float:
    """Kontraktionsfaktor (λ_max − λ₂)/(λ_max + λ₂) på oenighetsrummet"""
    if graph.N == 1:
        return 0.0
    lambda2, lambda_max = laplacian_spectrum(graph)
    value = (lambda_max - lambda2) / (lambda_max + lambda2)
    return 0.0 if value <= NORM_TOL else value


def secure_norms(system: MultiAgentSystem, secure_set: Sequence[int]) -> Tuple[float, float]:
    """
    θ₀ = max ‖I − C_iᵀC_i‖ och ν₀ = max ‖C_i‖ över säkra agenter

    Args:
        system: Lyft system
        secure_set: Säkra agenter

    Returns:
        Tuple med (θ₀, ν₀)
    """
    secure_set = list(secure_set)
    if not secure_set:
        raise EmptySecureSet("θ₀ och ν₀ kräver minst en säker agent")
    identity = np.eye(system.N * system.n)
    theta0 = max(op_norm(identity - system.C[i].T @ system.C[i]) for i in secure_set)
    nu0 = max(op_norm(system.C[i]) for i in secure_set)
    return theta0, nu0


def consensus_rounds_for(theta_norm: float, gamma: float) -> ConsensusRounds:
    """
    Minsta L med L > ln((θ₀‖A‖)⁻¹)/ln(γ⊥⁻¹)

    Args:
        theta_norm: Produkten θ₀‖A‖
        gamma: γ⊥

    Returns:
        ConsensusRounds
    """
    if theta_norm >= 1.0:
        return ConsensusRounds(RoundsVerdict.INFEASIBLE)
    if gamma == 0.0 or theta_norm == 0.0:
        return ConsensusRounds(RoundsVerdict.ANY, 1)

    ratio = math.log(1.0 / theta_norm) / math.log(1.0 / gamma)
    nearest = round(ratio)
    if abs(ratio - nearest) <= 1e-9:
        L = int(nearest) + 1
    else:
        L = int(math.floor(ratio)) + 1
    return ConsensusRounds(RoundsVerdict.VALUE, max(L, 1))


def min_consensus_rounds(
    system: MultiAgentSystem, secure_set: Sequence[int], graph: Optional[CommGraph] = None
) -> ConsensusRounds:
    """Minsta antal konsensusrundor som uppfyller villkoret för skattningsgränsen"""
    graph = graph or system.graph
    theta0, _ = secure_norms(system, secure_set)
    return consensus_rounds_for(theta0 * op_norm(system.model.A), gamma_perp(graph))


def check_gain(model: LtiModel, Kp) -> GainCheck:
    """Beräknar ‖A − BK_p‖ och om den är mindre än 1"""
    Kp = as_matrix(Kp, "Kp")
    if Kp.shape != (model.m, model.n):
        raise DimensionMismatch(f"K_p måste ha form {(model.m, model.n)}, fick {Kp.shape}")
    norm = op_norm(model.A - model.B @ Kp)
    return GainCheck(norm=norm, ok=norm < 1.0)


def input_fusion(local_inputs: Sequence[np.ndarray], graph: CommGraph) -> Tuple[np.ndarray, int]:
    """
    Sprider lokala insignaler u_i(k−1) så att alla agenter känner hela u(k−1)

    Args:
        local_inputs: En insignal per agent
        graph: Kommunikationsgraf

    Returns:
        Tuple med (staplad insignal, antal flödningsrundor)
    """
    fused, rounds = graph.utils.flood(local_inputs)
    if rounds > graph.diameter():
        raise RuntimeError(f"Flödningen tog {rounds} rundor, grafens diameter är {graph.diameter()}")
    for copy in fused[1:]:
        if not np.array_equal(copy, fused[0]):
            raise RuntimeError("Agenterna har olika bild av insignalen efter flödning")
    return fused[0], rounds


def initial_states(system: MultiAgentSystem, xi0: Optional[Sequence] = None) -> List[AgentEstimatorState]:
    """Startskattningar, nollvektorn om inget annat anges"""
    nN = system.N * system.n
    states = []
    for i in range(system.N):
        xi = np.zeros(nN) if xi0 is None else np.asarray(xi0[i], dtype=float).ravel()
        if xi.size != nN:
            raise DimensionMismatch(f"ξ̂_{i + 1}(0) måste ha längd {nN}")
        states.append(AgentEstimatorState(xi_hat=xi, x_hat=xi[system.state_block(i)].copy()))
    return states


def step_estimator(
    states: Sequence[AgentEstimatorState],
    system: MultiAgentSystem,
    measure: SecurityMeasure,
    params: EstimatorParams,
    u_prev: np.ndarray,
    y: Sequence[np.ndarray],
) -> List[AgentEstimatorState]:
    """
    Ett steg av estimatorn: tidsuppdatering, mätuppdatering, konsensus och utdrag

    Args:
        states: Föregående tillstånd per agent
        system: Lyft system
        measure: Säkerhetsåtgärd, bara säkra agenter använder sina mätningar
        params: Estimatorparametrar
        u_prev: Sammanslagen insignal u(k−1), längd Nm
        y: Mätning per agent

    Returns:
        Nya tillstånd per agent
    """
    N, n = system.N, system.n
    u_prev = np.asarray(u_prev, dtype=float).ravel()
    if len(states) != N or len(y) != N:
        raise DimensionMismatch("Ett tillstånd och en mätning per agent krävs")
    if u_prev.size != N * system.m:
        raise DimensionMismatch(f"u(k−1) måste ha längd {N * system.m}")

    # Tidsuppdatering
    drive = system.B_bar @ u_prev
    Xi = np.vstack([system.A_bar @ s.xi_hat + drive for s in states])

    # Mätuppdatering, bara säkra agenter
    for i in measure.secure_set:
        C_i = system.C[i]
        y_i = np.asarray(y[i], dtype=float).ravel()
        if y_i.size != C_i.shape[0]:
            raise DimensionMismatch(f"y_{i + 1} måste ha längd {C_i.shape[0]}")
        Xi[i] = Xi[i] + C_i.T @ (y_i - C_i @ Xi[i])
    provisional = Xi.copy()

    # Konsensus: L synkrona rundor
    neighbors = [system.graph.neighbors(i) for i in range(N)]
    for _ in range(params.L):
        prev = Xi.copy()
        for i in range(N):
            if neighbors[i]:
                Xi[i] = prev[i] - params.omega * (prev[i] - prev[neighbors[i]]).sum(axis=0)

    return [
        AgentEstimatorState(
            xi_hat=Xi[i].copy(),
            x_hat=Xi[i, i * n:(i + 1) * n].copy(),
            provisional=provisional[i],
        )
        for i in range(N)
    ]


def control_input(x_hat: np.ndarray, x_star: np.ndarray, Kp) -> np.ndarray:
    """u_i = K_p (x*_i − x̂_i)"""
    Kp = np.atleast_2d(np.asarray(Kp, dtype=float))
    diff = np.asarray(x_star, dtype=float).ravel() - np.asarray(x_hat, dtype=float).ravel()
    if Kp.shape[1] != diff.size:
        raise DimensionMismatch(f"K_p har {Kp.shape[1]} kolumner, felet har längd {diff.size}")
    return Kp @ diff


def estimation_error_bound(
    system: MultiAgentSystem,
    secure_set: Sequence[int],
    params: EstimatorParams,
    delta_w: float,
    delta_v: float,
) -> float:
    """
    Övre gräns för limsup ‖e_i(k)‖

    Args:
        system: Lyft system
        secure_set: Säkra agenter
        params: Estimatorparametrar
        delta_w: Brusgräns för processbrus
        delta_v: Brusgräns för mätbrus

    Returns:
        Gränsens högerled
    """
    norm_A = op_norm(system.model.A)
    theta_norm = params.theta0 * norm_A
    if theta_norm >= 1.0:
        raise HypothesisViolated(f"θ₀‖A‖ = {theta_norm:.4g} ≥ 1")
    rounds = min_consensus_rounds(system, secure_set)
    if not rounds.admits(params.L):
        raise HypothesisViolated(f"L = {params.L} är mindre än L_min = {rounds.L}")

    N = system.N
    drive = params.theta0 * math.sqrt(N) * N * delta_w + params.nu0 * N * delta_v
    decay = params.gamma_perp ** params.L
    return drive / (1.0 - theta_norm) + decay * drive / (1.0 - decay * theta_norm)


def control_error_bound(model: LtiModel, Kp, est_bound: float, delta_w: float) -> float:
    """Övre gräns för limsup ‖ẽ_i(k)‖ givet skattningsgränsen"""
    gain = check_gain(model, Kp)
    if not gain.ok:
        raise GainHypothesisViolated(f"‖A − BK_p‖ = {gain.norm:.4g} ≥ 1")
    BK = op_norm(model.B @ as_matrix(Kp, "Kp"))
    return (BK * est_bound + delta_w) / (1.0 - gain.norm)


def build_extended_error_system(
    system: MultiAgentSystem,
    measure: SecurityMeasure,
    params: EstimatorParams,
    omega: Optional[float] = None,
) -> ExtendedErrorSystem:
    """
    Sluten form för de staplade skattningsfelen ε_i = ξ̂_i − x

    Args:
        system: Lyft system
        measure: Säkerhetsåtgärd
        params: Estimatorparametrar
        omega: Valfri ω som ersätter params.omega (även 0)

    Returns:
        ExtendedErrorSystem med M, D_w, D_v och projicerade normer
    """
    N, nN = system.N, system.N * system.n
    omega = params.omega if omega is None else omega

    W = np.linalg.matrix_power(
        np.eye(N * nN) - omega * np.kron(system.graph.laplacian, np.eye(nN)), params.L
    )

    # C̃ = blockdiag(C_1, ..., C_N), S(φ) maskerar normala agenters rader
    C_tilde = np.zeros((system.p, N * nN))
    S = np.zeros(system.p)
    for i in range(N):
        rows = system.row_slices[i]
        C_tilde[rows, i * nN:(i + 1) * nN] = system.C[i]
        S[rows] = 1.0 if measure.is_secure(i) else 0.0
    CtSC = C_tilde.T @ (S[:, None] * C_tilde)

    identity = np.eye(N * nN)
    M = W @ (identity - CtSC) @ np.kron(np.eye(N), system.A_bar)
    D_w = W @ (CtSC - identity)
    D_v = W @ (C_tilde.T * S[None, :])

    P_sharp = np.kron(np.ones((N, N)) / N, np.eye(nN))
    P_perp = identity - P_sharp
    return ExtendedErrorSystem(
        M=M,
        D_w=D_w,
        D_v=D_v,
        norm_sharp=op_norm(P_sharp @ M),
        norm_perp=op_norm(P_perp @ M),
    )


def design_parameters(
    system: MultiAgentSystem,
    measure: SecurityMeasure,
    Kp,
    omega: Union[str, float] = AUTO,
    L: Union[str, int] = AUTO,
    delta_w: float = 0.0,
    delta_v: float = 0.0,
) -> DesignReport:
    """
    Bestämmer ω och L, beräknar normer, gränser och antagandenas status

    Args:
        system: Lyft system
        measure: Säkerhetsåtgärd
        Kp: Återkopplingsförstärkning
        omega: "auto" eller ett tal
        L: "auto" eller ett heltal
        delta_w: Brusgräns för processbrus
        delta_v: Brusgräns för mätbrus

    Returns:
        DesignReport
    """
    secure = measure.secure_set
    norm_A = op_norm(system.model.A)
    gamma = gamma_perp(system.graph)

    if secure:
        theta0, nu0 = secure_norms(system, secure)
        rounds = consensus_rounds_for(theta0 * norm_A, gamma)
    else:
        # Utan säkra agenter propageras felet öppet: I − 0 har norm 1
        LOG.warning("Åtgärden %s saknar säkra agenter", measure)
        theta0, nu0 = 1.0, 0.0
        rounds = ConsensusRounds(RoundsVerdict.INFEASIBLE)

    omega_value = design_omega(system.graph) if omega == AUTO else float(omega)
    if L == AUTO:
        L_value = rounds.L if rounds.verdict is not RoundsVerdict.INFEASIBLE else DEFAULT_CONSENSUS_ROUNDS
    else:
        L_value = int(L)

    params = EstimatorParams(
        omega=omega_value, L=L_value, Kp=Kp, theta0=theta0, nu0=nu0, gamma_perp=gamma
    )
    gain = check_gain(system.model, params.Kp)
    extended = build_extended_error_system(system, measure, params)

    est_bound = ctrl_bound = None
    if secure:
        try:
            est_bound = estimation_error_bound(system, secure, params, delta_w, delta_v)
        except HypothesisViolated as e:
            LOG.warning("Skattningsgränsen gäller inte: %s", e)
    if est_bound is not None:
        try:
            ctrl_bound = control_error_bound(system.model, params.Kp, est_bound, delta_w)
        except GainHypothesisViolated as e:
            LOG.warning("Reglerfelsgränsen gäller inte: %s", e)

    hypotheses = {
        "detectable": bool(is_detectable(system, secure)),
        "theta_norm_below_one": bool(theta0 * norm_A < 1.0),
        "rounds_sufficient": bool(rounds.admits(L_value)),
        "gain_below_one": bool(gain.ok),
        "extended_stable": bool(extended.stable),
    }
    bounds = ErrorBounds(est_bound=est_bound, ctrl_bound=ctrl_bound, stable=extended.stable)
    return DesignReport(
        params=params,
        rounds=rounds,
        gain=gain,
        bounds=bounds,
        extended=extended,
        norm_A=norm_A,
        hypotheses=hypotheses,
    )
