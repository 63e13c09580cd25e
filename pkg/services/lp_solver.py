"""
Primal simplex med Blands regel
Löser små LP-problem exakt till ett hörn, utan inre punkt-metoder
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from config import LP_MAX_ITERATIONS, LP_PIVOT_TOL

LOG = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LinearProgramResult:
    """Resultat från simplexlösaren"""

    status: str
    x: Optional[np.ndarray]
    value: Optional[float]
    iterations: int


class SimplexSolver:
    """Tvåfas-simplex på tablåform med Blands regel för ingående och utgående variabel"""

    def __init__(self, tol: float = LP_PIVOT_TOL, max_iterations: int = LP_MAX_ITERATIONS):
        """
        Initialiserar lösaren

        Args:
            tol: Pivottolerans
            max_iterations: Övre gräns för antalet pivoteringar per fas
        """
        self.tol = tol
        self.max_iterations = max_iterations
        self.iterations = 0

    def solve(
        self,
        c: np.ndarray,
        A_ub: Optional[np.ndarray] = None,
        b_ub: Optional[np.ndarray] = None,
        A_eq: Optional[np.ndarray] = None,
        b_eq: Optional[np.ndarray] = None,
        lower: Optional[np.ndarray] = None,
        upper: Optional[np.ndarray] = None,
    ) -> LinearProgramResult:
        """
        Minimerar cᵀx under A_ub x ≤ b_ub, A_eq x = b_eq, lower ≤ x ≤ upper

        Args:
            c: Kostnadsvektor
            A_ub, b_ub: Olikhetsbivillkor
            A_eq, b_eq: Likhetsbivillkor
            lower: Undre gränser (standard 0)
            upper: Övre gränser (standard obegränsat)

        Returns:
            LinearProgramResult med ett optimalt hörn om det finns
        """
        c = np.asarray(c, dtype=float)
        n = c.size
        lower = np.zeros(n) if lower is None else np.asarray(lower, dtype=float)
        upper = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
        if np.any(upper < lower - self.tol):
            return LinearProgramResult(INFEASIBLE, None, None, 0)

        # Skifta x = lower + z så att z ≥ 0
        rows: List[np.ndarray] = []
        rhs: List[float] = []
        kinds: List[str] = []
        if A_ub is not None:
            A_ub = np.asarray(A_ub, dtype=float).reshape(-1, n)
            for a, b in zip(A_ub, np.asarray(b_ub, dtype=float).ravel()):
                rows.append(a)
                rhs.append(b - a @ lower)
                kinds.append("ub")
        if A_eq is not None:
            A_eq = np.asarray(A_eq, dtype=float).reshape(-1, n)
            for a, b in zip(A_eq, np.asarray(b_eq, dtype=float).ravel()):
                rows.append(a)
                rhs.append(b - a @ lower)
                kinds.append("eq")
        for j in np.flatnonzero(np.isfinite(upper)):
            a = np.zeros(n)
            a[j] = 1.0
            rows.append(a)
            rhs.append(upper[j] - lower[j])
            kinds.append("ub")

        z, status = self._solve_standard(c, rows, rhs, kinds)
        if status != OPTIMAL:
            return LinearProgramResult(status, None, None, self.iterations)
        x = lower + z
        return LinearProgramResult(OPTIMAL, x, float(c @ x), self.iterations)

    def _solve_standard(
        self, c: np.ndarray, rows: List[np.ndarray], rhs: List[float], kinds: List[str]
    ) -> Tuple[Optional[np.ndarray], str]:
        n = c.size
        m = len(rows)
        self.iterations = 0
        if m == 0:
            if np.any(c < -self.tol):
                return None, UNBOUNDED
            return np.zeros(n), OPTIMAL

        n_slack = sum(1 for k in kinds if k == "ub")
        n_struct = n + n_slack
        T = np.zeros((m + 1, n_struct + m + 1))
        slack = n
        for r, (a, b, kind) in enumerate(zip(rows, rhs, kinds)):
            T[r, :n] = a
            if kind == "ub":
                T[r, slack] = 1.0
                slack += 1
            T[r, -1] = b
            if b < 0.0:
                T[r, :] *= -1.0
            T[r, n_struct + r] = 1.0

        # Fas I: minimera summan av artificiella variabler
        basis = list(range(n_struct, n_struct + m))
        T[-1, :] = 0.0
        T[-1, :n_struct] = -T[:m, :n_struct].sum(axis=0)
        T[-1, -1] = -T[:m, -1].sum()
        status = self._run(T, basis, n_struct)
        if status != OPTIMAL or -T[-1, -1] > self.tol * max(1.0, float(np.abs(rhs).max())):
            return None, INFEASIBLE

        T, basis = self._drive_out_artificials(T, basis, n_struct)

        # Fas II: ursprungliga kostnader, artificiella kolumner stängda
        T[-1, :] = 0.0
        T[-1, :n] = c
        for r, var in enumerate(basis):
            if var < n_struct and T[-1, var] != 0.0:
                T[-1, :] -= T[-1, var] * T[r, :]
        status = self._run(T, basis, n_struct)
        if status != OPTIMAL:
            return None, status

        z = np.zeros(n_struct)
        for r, var in enumerate(basis):
            if var < n_struct:
                z[var] = T[r, -1]
        return np.maximum(z[:n], 0.0), OPTIMAL

    def _run(self, T: np.ndarray, basis: List[int], n_allowed: int) -> str:
        """Pivoterar med Blands regel tills optimum eller obegränsat"""
        m = T.shape[0] - 1
        for _ in range(self.max_iterations):
            reduced = T[-1, :n_allowed]
            candidates = np.flatnonzero(reduced < -self.tol)
            if candidates.size == 0:
                return OPTIMAL
            col = int(candidates[0])

            column = T[:m, col]
            positive = column > self.tol
            if not positive.any():
                return UNBOUNDED
            ratios = np.full(m, np.inf)
            ratios[positive] = T[:m, -1][positive] / column[positive]
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + self.tol)
            row = int(min(ties, key=lambda r: basis[r]))

            self._pivot(T, row, col)
            basis[row] = col
            self.iterations += 1
        raise RuntimeError(f"Simplex avbröts efter {self.max_iterations} iterationer")

    @staticmethod
    def _pivot(T: np.ndarray, row: int, col: int):
        T[row, :] /= T[row, col]
        factors = T[:, col].copy()
        factors[row] = 0.0
        T -= np.outer(factors, T[row, :])

    def _drive_out_artificials(
        self, T: np.ndarray, basis: List[int], n_struct: int
    ) -> Tuple[np.ndarray, List[int]]:
        """Byter ut artificiella basvariabler eller stryker redundanta rader"""
        keep = []
        for r, var in enumerate(basis):
            if var < n_struct:
                keep.append(r)
                continue
            candidates = np.flatnonzero(np.abs(T[r, :n_struct]) > self.tol)
            if candidates.size == 0:
                LOG.debug("Stryker redundant rad %d", r)
                continue
            self._pivot(T, r, int(candidates[0]))
            basis[r] = int(candidates[0])
            keep.append(r)

        T = np.vstack([T[keep, :], T[-1:, :]])
        basis = [basis[r] for r in keep]
        return T, basis
