"""
Numeriska hjälpfunktioner: normer, kärnor och nollskillda-test
"""
from typing import Optional

import numpy as np
from scipy import linalg

from config import KERNEL_TOL, NONZERO_TOL


def op_norm(M: np.ndarray) -> float:
    """Inducerad 2-norm (största singulärvärdet), 0 för tomma matriser"""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def visible_columns(M: np.ndarray, V: np.ndarray, tol: float = NONZERO_TOL) -> np.ndarray:
    """
    Avgör för varje kolumn v i V om M v skiljer sig från noll

    Args:
        M: Matris med nN kolumner (kan sakna rader)
        V: Kolumnvektorer att testa
        tol: Relativ tolerans mot operandernas normer

    Returns:
        Boolesk vektor, en post per kolumn i V
    """
    M = np.asarray(M)
    V = np.asarray(V)
    if M.shape[0] == 0 or V.shape[1] == 0:
        return np.zeros(V.shape[1], dtype=bool)
    image = np.linalg.norm(M @ V, axis=0)
    scale = np.linalg.norm(M) * np.linalg.norm(V, axis=0)
    return (image > tol * scale) & (image > 0.0)


def kernel_basis(M: np.ndarray, tol: float = KERNEL_TOL, scale: Optional[float] = None) -> np.ndarray:
    """
    Ortonormal bas för ker M med singulärvärdeströskel tol·σ_max

    Args:
        M: Matris (kan sakna rader)
        tol: Relativ tröskel
        scale: Valfri referensnorm som ersätter σ_max när den är större

    Returns:
        Matris vars kolumner spänner kärnan
    """
    M = np.asarray(M)
    n = M.shape[1]
    dtype = complex if np.iscomplexobj(M) else float
    if M.shape[0] == 0:
        return np.eye(n, dtype=dtype)
    _, s, vh = linalg.svd(M, full_matrices=True)
    reference = float(s.max()) if s.size else 0.0
    if scale is not None:
        reference = max(reference, scale)
    rank = int(np.sum(s > tol * reference)) if reference > 0.0 else 0
    return vh[rank:].conj().T


def complement_basis(Q: np.ndarray, K: np.ndarray, tol: float = KERNEL_TOL) -> np.ndarray:
    """Ortonormala vektorer i span(K) som är ortogonala mot span(Q)"""
    if Q.shape[1] == 0:
        R = K
    else:
        R = K - Q @ (Q.conj().T @ K)
    if R.shape[1] == 0 or not np.any(np.abs(R) > tol):
        return np.zeros((K.shape[0], 0), dtype=K.dtype)
    return linalg.orth(R, rcond=np.sqrt(tol))


def normalize_phase(v: np.ndarray) -> np.ndarray:
    """Enhetsnorm och reell positiv största komponent, för deterministisk ordning"""
    v = v / np.linalg.norm(v)
    pivot = v[int(np.argmax(np.abs(v)))]
    return v * (np.conj(pivot) / abs(pivot))


def is_integral(b: np.ndarray, tol: float) -> bool:
    """Sant om alla poster ligger inom tol från {0, 1}"""
    b = np.asarray(b, dtype=float)
    return bool(np.all(np.minimum(np.abs(b), np.abs(1.0 - b)) <= tol))
