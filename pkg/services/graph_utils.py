"""
Grafverktyg för Secure Platoon Toolkit
Hanterar kommunikationsgrafen, Laplacespektrum och meddelandespridning
"""
import logging
from typing import Dict, List, Sequence, Tuple

import networkx as nx
import numpy as np

LOG = logging.getLogger(__name__)


def graph_from_adjacency(adjacency: Sequence[Sequence[float]]) -> nx.Graph:
    """
    Bygger en oriktad graf från en 0/1-grannmatris

    Args:
        adjacency: Symmetrisk N×N-matris med nolldiagonal

    Returns:
        networkx-graf med noderna 0..N-1
    """
    W = np.asarray(adjacency, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValueError(f"Grannmatrisen måste vara kvadratisk, fick form {W.shape}")
    if not np.all(np.isin(W, (0.0, 1.0))):
        raise ValueError("Grannmatrisen får bara innehålla 0 och 1")
    if not np.array_equal(W, W.T):
        raise ValueError("Grannmatrisen måste vara symmetrisk")
    if np.any(np.diag(W) != 0.0):
        raise ValueError("Grannmatrisen måste ha nolldiagonal")

    graph = nx.from_numpy_array(W)
    graph.add_nodes_from(range(W.shape[0]))
    return graph


def banded_adjacency(N: int, reach: int = 2) -> np.ndarray:
    """Grannmatris där varje agent pratar med de `reach` närmaste på varje sida"""
    W = np.zeros((N, N))
    for i in range(N):
        for j in range(max(0, i - reach), min(N, i + reach + 1)):
            if i != j:
                W[i, j] = 1.0
    return W


class GraphUtils:
    """Verktyg för att analysera kommunikationsgrafen"""

    def __init__(self, graph: nx.Graph):
        """
        Initialiserar GraphUtils

        Args:
            graph: Oriktad kommunikationsgraf med noderna 0..N-1
        """
        self.graph = graph
        self.N = graph.number_of_nodes()

    def laplacian(self) -> np.ndarray:
        """Tät Laplacematris ℒ = D − W i nodordning 0..N-1"""
        return nx.laplacian_matrix(self.graph, nodelist=range(self.N)).toarray().astype(float)

    def spectrum(self) -> np.ndarray:
        """Laplacens egenvärden i stigande ordning"""
        return np.linalg.eigvalsh(self.laplacian())

    def is_connected(self) -> bool:
        return self.N > 0 and nx.is_connected(self.graph)

    def neighbors(self, i: int) -> List[int]:
        return sorted(self.graph.neighbors(i))

    def diameter(self) -> int:
        if self.N == 1:
            return 0
        return nx.diameter(self.graph)

    def flood(self, values: Sequence[np.ndarray]) -> Tuple[List[np.ndarray], int]:
        """
        Sprider varje agents lokala vektor till alla agenter genom synkron flödning

        Args:
            values: En vektor per agent

        Returns:
            Tuple med (sammanslagen vektor per agent, antal rundor)
        """
        known: List[Dict[int, np.ndarray]] = [{i: np.asarray(v)} for i, v in enumerate(values)]
        rounds = 0
        while any(len(k) < self.N for k in known):
            # Alla läser föregående ögonblicksbild innan någon uppdaterar
            snapshot = [dict(k) for k in known]
            for i in range(self.N):
                for j in self.graph.neighbors(i):
                    known[i].update(snapshot[j])
            rounds += 1
            if rounds > self.N:
                raise RuntimeError("Flödningen konvergerade inte, är grafen sammanhängande?")

        fused = [np.concatenate([k[j] for j in range(self.N)]) for k in known]
        return fused, rounds
