"""
Test av total unimodularitet
Strukturella tillräckliga villkor först, sedan ett uttömmande test för små matriser
"""
import itertools
import logging
from typing import Dict

import networkx as nx
import numpy as np

from config import TU_EXHAUSTIVE_MAX_COLS
from src.errors import MatrixTooLargeForExactTest

LOG = logging.getLogger(__name__)


def reduce_matrix(H: np.ndarray) -> np.ndarray:
    """
    Stryker rader och kolumner som inte påverkar TU-egenskapen

    Nollrader, dubbletter (även med omvänt tecken) och rader eller kolumner
    med en enda nollskild post kan tas bort utan att ändra svaret.

    Args:
        H: Matris med poster i {0, ±1}

    Returns:
        Reducerad matris
    """
    M = np.asarray(H, dtype=int)
    changed = True
    while changed and M.size:
        changed = False
        for axis in (0, 1):
            lines = M if axis == 0 else M.T
            seen = set()
            keep = []
            for idx, line in enumerate(lines):
                if np.count_nonzero(line) <= 1:
                    continue
                key = tuple(line)
                if key in seen or tuple(-line) in seen:
                    continue
                seen.add(key)
                keep.append(idx)
            if len(keep) < lines.shape[0]:
                M = M[keep, :] if axis == 0 else M[:, keep]
                changed = True
    return M


def has_consecutive_ones(M: np.ndarray, axis: int = 1) -> bool:
    """Sant om matrisen är 0/1 och varje rad (axis=1) har sina ettor i följd"""
    if not np.all(np.isin(M, (0, 1))):
        return False
    lines = M if axis == 1 else M.T
    for line in lines:
        ones = np.flatnonzero(line)
        if ones.size and ones[-1] - ones[0] + 1 != ones.size:
            return False
    return True


def is_signed_graph_incidence(M: np.ndarray) -> bool:
    """
    Sant om varje kolumn har högst två nollskilda poster och raderna kan delas i två
    grupper så att lika tecken hamnar i olika grupper och olika tecken i samma grupp
    """
    if np.any(np.count_nonzero(M, axis=0) > 2):
        return False

    graph = nx.Graph()
    graph.add_nodes_from(range(M.shape[0]))
    for col in M.T:
        rows = np.flatnonzero(col)
        if rows.size == 2:
            r, s = int(rows[0]), int(rows[1])
            same_sign = col[r] == col[s]
            if graph.has_edge(r, s) and graph[r][s]["same"] != same_sign:
                return False
            graph.add_edge(r, s, same=same_sign)

    # Tvåfärgning med paritet: lika tecken kräver olika färg
    color: Dict[int, int] = {}
    for start in graph.nodes:
        if start in color:
            continue
        color[start] = 0
        for u, v in nx.bfs_edges(graph, start):
            color[v] = color[u] ^ int(graph[u][v]["same"])
    return all(color[u] ^ color[v] == int(same) for u, v, same in graph.edges(data="same"))


def ghouila_houri(M: np.ndarray) -> bool:
    """
    Uttömmande test: varje delmängd kolumner kan tecknas så att radsummorna ligger i {0, ±1}

    Karaktäriseringen är ekvivalent med att alla kvadratiska underdeterminanter
    ligger i {0, ±1}.
    """
    n = M.shape[1]
    for k in range(2, n + 1):
        # Första kolumnen får alltid tecknet +1
        signs = np.array(list(itertools.product((1, -1), repeat=k - 1)), dtype=int).reshape(-1, k - 1)
        signs = np.hstack([np.ones((signs.shape[0], 1), dtype=int), signs]).T
        for cols in itertools.combinations(range(n), k):
            sums = M[:, cols] @ signs
            if not np.any(np.all(np.abs(sums) <= 1, axis=0)):
                return False
    return True


def is_totally_unimodular(H: np.ndarray, max_cols: int = TU_EXHAUSTIVE_MAX_COLS) -> bool:
    """
    Avgör om H är totalt unimodulär

    Args:
        H: Matris med poster i {0, ±1}
        max_cols: Största tillåtna dimension för det uttömmande testet

    Returns:
        True om H är TU, annars False
    """
    H = np.asarray(H)
    if not np.all(np.isin(H, (-1, 0, 1))):
        return False

    M = reduce_matrix(H)
    if M.size == 0:
        return True

    if has_consecutive_ones(M, axis=0) or has_consecutive_ones(M, axis=1):
        LOG.debug("TU via intervallstruktur")
        return True
    if is_signed_graph_incidence(M) or is_signed_graph_incidence(M.T):
        LOG.debug("TU via bipartit incidensstruktur")
        return True

    # Arbeta längs den mindre dimensionen
    if M.shape[1] > M.shape[0]:
        M = M.T
    if M.shape[1] > max_cols:
        raise MatrixTooLargeForExactTest(
            f"Matrisen har {M.shape[1]} kolumner efter reduktion, gränsen är {max_cols}"
        )
    return ghouila_houri(M)
