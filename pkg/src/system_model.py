"""
Systemmodell för multiagentsystem
Hanterar agentdynamik, kommunikationsgraf, lyft system och egenmodsbaser
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

import networkx as nx
import numpy as np

from config import DEFAULT_BASIS, EIGEN_CLUSTER_TOL, KERNEL_TOL, NONZERO_TOL
from services.graph_utils import GraphUtils, graph_from_adjacency
from src.errors import (
    DimensionMismatch,
    DisconnectedGraph,
    EigenFailure,
    UndetectablePair,
    ValidationError,
)
from utils.numerics import complement_basis, kernel_basis, normalize_phase

LOG = logging.getLogger(__name__)

BASIS_KINDS = ("jordan", "eigen")
MODE_FILTERS = ("all", "unstable")


def as_matrix(value, name: str, column: bool = False) -> np.ndarray:
    """
    Tolkar värdet som en ändlig reell matris och gör den skrivskyddad

    Args:
        value: Skalär, vektor eller nästlad lista
        name: Namn för felmeddelanden
        column: Tolka vektorer som kolumner i stället för rader

    Returns:
        Skrivskyddad 2D-array
    """
    try:
        M = np.array(value, dtype=float)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"{name} är inte en numerisk matris: {e}")
    if M.ndim == 0:
        M = M.reshape(1, 1)
    elif M.ndim == 1:
        M = M.reshape(-1, 1) if column else M.reshape(1, -1)
    elif M.ndim != 2:
        raise DimensionMismatch(f"{name} måste vara en matris, fick {M.ndim} dimensioner")
    if not np.all(np.isfinite(M)):
        raise ValidationError(f"{name} innehåller icke-ändliga värden")
    M.setflags(write=False)
    return M


@dataclass(frozen=True, eq=False)
class LtiModel:
    """Gemensam agentdynamik x_i(k+1) = A x_i(k) + B u_i(k)"""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        B = as_matrix(self.B, "B", column=True)
        if A.shape[0] != A.shape[1]:
            raise DimensionMismatch(f"A måste vara kvadratisk, fick form {A.shape}")
        if B.shape[0] != A.shape[0]:
            raise DimensionMismatch(f"B måste ha {A.shape[0]} rader, fick {B.shape[0]}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]


@dataclass(frozen=True, eq=False)
class CommGraph:
    """Oriktad sammanhängande kommunikationsgraf med Laplacespektrum"""

    adjacency: np.ndarray
    graph: nx.Graph = field(init=False, repr=False)
    laplacian: np.ndarray = field(init=False, repr=False)
    eigenvalues: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        try:
            graph = graph_from_adjacency(self.adjacency)
        except ValueError as e:
            raise ValidationError(str(e))

        utils = GraphUtils(graph)
        laplacian = utils.laplacian()
        eigenvalues = utils.spectrum()
        if utils.N > 1:
            scale = max(np.linalg.norm(laplacian, 2), 1.0)
            if not utils.is_connected() or eigenvalues[1] <= NONZERO_TOL * scale:
                raise DisconnectedGraph("Kommunikationsgrafen är inte sammanhängande")

        adjacency = np.array(self.adjacency, dtype=float)
        for arr in (adjacency, laplacian, eigenvalues):
            arr.setflags(write=False)
        object.__setattr__(self, "adjacency", adjacency)
        object.__setattr__(self, "graph", graph)
        object.__setattr__(self, "laplacian", laplacian)
        object.__setattr__(self, "eigenvalues", eigenvalues)

    @classmethod
    def from_adjacency(cls, adjacency) -> "CommGraph":
        return cls(adjacency=adjacency)

    @property
    def N(self) -> int:
        return self.adjacency.shape[0]

    @property
    def lambda2(self) -> float:
        # En ensam agent har ℒ = 0 och ingen konsensus att göra
        return float(self.eigenvalues[1]) if self.N > 1 else 0.0

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def utils(self) -> GraphUtils:
        return GraphUtils(self.graph)

    def neighbors(self, i: int) -> List[int]:
        return self.utils.neighbors(i)

    def diameter(self) -> int:
        return self.utils.diameter()


@dataclass(frozen=True, eq=False)
class Mode:
    """En lyft egenmod e_i ⊗ v_j"""

    agent: int
    component: int
    eigenvalue: complex
    vector: np.ndarray

    def describe(self) -> Dict:
        """Människoläsbar beskrivning med 1-baserade index"""
        lam = complex(self.eigenvalue)
        return {
            "agent": self.agent + 1,
            "component": self.component + 1,
            "eigenvalue": [lam.real, lam.imag],
        }


@dataclass(frozen=True, eq=False)
class EigenmodeBasis:
    """Ordnad lista av lyfta egenmoder, agent för agent"""

    modes: Tuple[Mode, ...]
    kind: str
    N: int
    n: int
    lifted: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        lifted = np.zeros((self.N * self.n, len(self.modes)), dtype=complex)
        for col, mode in enumerate(self.modes):
            start = mode.agent * self.n
            lifted[start:start + self.n, col] = mode.vector
        lifted.setflags(write=False)
        object.__setattr__(self, "lifted", lifted)

    def __len__(self) -> int:
        return len(self.modes)

    def indices(self, mode_filter: str = "all") -> np.ndarray:
        """
        Index för moder som passerar filtret

        Args:
            mode_filter: "all" eller "unstable" (|λ| ≥ 1 − tol)

        Returns:
            Heltalsvektor med modindex
        """
        if mode_filter not in MODE_FILTERS:
            raise ValidationError(f"Okänt modfilter: {mode_filter}")
        if mode_filter == "all":
            return np.arange(len(self.modes))
        return np.array(
            [idx for idx, mode in enumerate(self.modes) if abs(mode.eigenvalue) >= 1.0 - NONZERO_TOL],
            dtype=int,
        )


def _cluster_eigenvalues(eigenvalues: np.ndarray) -> List[Tuple[complex, int]]:
    """Grupperar numeriskt lika egenvärden och returnerar (värde, multiplicitet)"""
    ordered = sorted(eigenvalues, key=lambda lam: (round(lam.real, 9), round(lam.imag, 9)))
    clusters: List[List[complex]] = []
    for lam in ordered:
        for cluster in clusters:
            if abs(lam - cluster[0]) <= EIGEN_CLUSTER_TOL * max(1.0, abs(cluster[0])):
                cluster.append(lam)
                break
        else:
            clusters.append([lam])

    result = []
    for cluster in clusters:
        lam = complex(np.mean(cluster))
        if abs(lam.imag) <= EIGEN_CLUSTER_TOL * max(1.0, abs(lam)):
            lam = complex(lam.real, 0.0)
        result.append((lam, len(cluster)))
    return result


def _agent_vectors(A: np.ndarray, kind: str) -> List[Tuple[complex, np.ndarray]]:
    """Egenvektorer eller hela Jordankedjor för en agents A"""
    n = A.shape[0]
    try:
        eigenvalues = np.linalg.eigvals(A).astype(complex)
    except np.linalg.LinAlgError as e:
        raise EigenFailure(f"Egenvärdesberäkningen konvergerade inte: {e}")

    vectors = []
    for lam, multiplicity in _cluster_eigenvalues(eigenvalues):
        if lam.imag == 0.0:
            shifted = A - lam.real * np.eye(n)
        else:
            shifted = A.astype(complex) - lam * np.eye(n)

        # Kärnorna till (A − λI)^p växer tills hela det generaliserade rummet täcks
        depth = multiplicity if kind == "jordan" else 1
        Q = np.zeros((n, 0), dtype=shifted.dtype)
        power = np.eye(n, dtype=shifted.dtype)
        scale = max(np.linalg.norm(A, 2) + abs(lam), 1.0)
        for p in range(1, depth + 1):
            power = power @ shifted
            kernel = kernel_basis(power, KERNEL_TOL, scale=scale ** p)
            Q = np.hstack([Q, complement_basis(Q, kernel)])
            if Q.shape[1] >= multiplicity:
                break

        if Q.shape[1] == 0 or (kind == "jordan" and Q.shape[1] != multiplicity):
            raise EigenFailure(
                f"Kunde inte bestämma det generaliserade egenrummet för λ = {lam:.6g}"
            )
        for col in range(Q.shape[1]):
            vectors.append((lam, normalize_phase(Q[:, col].astype(complex))))
    return vectors


def eigenmode_basis(model: LtiModel, N: int, kind: str = DEFAULT_BASIS) -> EigenmodeBasis:
    """
    Bygger de lyfta moderna e_i ⊗ v_j för Ā = I_N ⊗ A

    Args:
        model: Agentdynamiken
        N: Antal agenter
        kind: "jordan" (n vektorer per agent) eller "eigen" (bara egenvektorer)

    Returns:
        EigenmodeBasis med agentvis ordnade moder
    """
    if kind not in BASIS_KINDS:
        raise ValidationError(f"Okänd bastyp: {kind}")
    vectors = _agent_vectors(model.A, kind)
    modes = tuple(
        Mode(agent=i, component=j, eigenvalue=lam, vector=v)
        for i in range(N)
        for j, (lam, v) in enumerate(vectors)
    )
    return EigenmodeBasis(modes=modes, kind=kind, N=N, n=model.n)


def laplacian_spectrum(graph: CommGraph) -> Tuple[float, float]:
    """Returnerar (λ₂, λ_max) för kommunikationsgrafens Laplace"""
    if graph.N > 1 and graph.lambda2 <= NONZERO_TOL * max(graph.lambda_max, 1.0):
        raise DisconnectedGraph("λ₂ ligger under toleransen")
    return graph.lambda2, graph.lambda_max


@dataclass(frozen=True, eq=False)
class MultiAgentSystem:
    """Lyft system (Ā, B̄, C̄) för N agenter med gemensam dynamik"""

    model: LtiModel
    graph: CommGraph
    C: Tuple[np.ndarray, ...]
    A_bar: np.ndarray = field(repr=False)
    B_bar: np.ndarray = field(repr=False)
    C_bar: np.ndarray = field(repr=False)
    row_slices: Tuple[slice, ...] = field(repr=False)

    @property
    def N(self) -> int:
        return self.graph.N

    @property
    def n(self) -> int:
        return self.model.n

    @property
    def m(self) -> int:
        return self.model.m

    @property
    def p_sizes(self) -> List[int]:
        return [C_i.shape[0] for C_i in self.C]

    @property
    def p(self) -> int:
        return int(sum(self.p_sizes))

    def state_block(self, i: int) -> slice:
        return slice(i * self.n, (i + 1) * self.n)

    def stacked_C(self, agents: Iterable[int]) -> np.ndarray:
        """C̄ för en delmängd agenter (0 rader för tom mängd)"""
        agents = sorted(agents)
        if not agents:
            return np.zeros((0, self.N * self.n))
        return np.vstack([self.C[i] for i in agents])


def lift_system(
    model: LtiModel,
    graph: CommGraph,
    C: Sequence,
    mode_filter: str = "all",
    basis_kind: str = DEFAULT_BASIS,
) -> MultiAgentSystem:
    """
    Sätter ihop det lyfta systemet och kontrollerar detekterbarhet

    Args:
        model: Gemensam agentdynamik
        graph: Kommunikationsgraf
        C: En mätmatris per agent, var och en med nN kolumner
        mode_filter: Modfilter för detekterbarhetstestet
        basis_kind: Bastyp för detekterbarhetstestet

    Returns:
        MultiAgentSystem
    """
    N, n = graph.N, model.n
    if len(C) != N:
        raise DimensionMismatch(f"Förväntade {N} mätmatriser, fick {len(C)}")

    C_list = []
    for i, C_i in enumerate(C):
        C_i = as_matrix(C_i, f"C_{i + 1}")
        if C_i.shape[1] != N * n:
            raise DimensionMismatch(f"C_{i + 1} måste ha {N * n} kolumner, fick {C_i.shape[1]}")
        C_list.append(C_i)

    A_bar = np.kron(np.eye(N), model.A)
    B_bar = np.kron(np.eye(N), model.B)
    C_bar = np.vstack(C_list)
    offsets = np.cumsum([0] + [C_i.shape[0] for C_i in C_list])
    row_slices = tuple(slice(int(offsets[i]), int(offsets[i + 1])) for i in range(N))
    for arr in (A_bar, B_bar, C_bar):
        arr.setflags(write=False)

    system = MultiAgentSystem(
        model=model,
        graph=graph,
        C=tuple(C_list),
        A_bar=A_bar,
        B_bar=B_bar,
        C_bar=C_bar,
        row_slices=row_slices,
    )

    # Lokal import, säkerhetsmodulen bygger på den här modulen
    from src.security_planner import is_detectable

    basis = eigenmode_basis(model, N, basis_kind)
    if not is_detectable(system, range(N), basis=basis, mode_filter=mode_filter):
        raise UndetectablePair("Paret (Ā, C̄) är inte detekterbart")

    LOG.debug("Lyft system: N=%d, n=%d, p=%d", N, n, system.p)
    return system


def relative_state_measurements(graph: CommGraph, n: int) -> List[np.ndarray]:
    """
    Relativa tillståndsmätningar C_r = Σ_{s∈𝒩_r} (e_r − e_s)ᵀ ⊗ I_n

    Args:
        graph: Kommunikationsgraf
        n: Agentens tillståndsdimension

    Returns:
        En n×nN-matris per agent
    """
    N = graph.N
    result = []
    for r in range(N):
        weights = np.zeros(N)
        for s in graph.neighbors(r):
            weights[r] += 1.0
            weights[s] -= 1.0
        result.append(np.kron(weights.reshape(1, -1), np.eye(n)))
    return result
