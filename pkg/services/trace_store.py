"""
Lagring av spår och rapporter
Skriver CSV-spår och JSON-sammanfattningar, läser och skriver attackfiler
"""
import json
import logging
import math
import os
from typing import Dict, Optional

import numpy as np
import pandas as pd

from config import TRACE_FLOAT_FORMAT
from src.errors import ValidationError

LOG = logging.getLogger(__name__)

ATTACK_COLUMNS = ["k", "agent", "component", "value"]


def _ensure_parent(path: str):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def _jsonable(value):
    """Gör numpy-värden och oändligheter JSON-vänliga"""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return None
        return value
    return value


def to_json(document: Dict) -> str:
    return json.dumps(_jsonable(document), ensure_ascii=False, indent=2)


def write_json(document: Dict, path: str):
    """Skriver ett dokument som JSON med oändligheter som strängar"""
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8") as f:
        f.write(to_json(document))
        f.write("\n")
    LOG.info("Skrev %s", path)


def write_trace(trace: pd.DataFrame, path: str):
    """Skriver spåret med full dubbel precision"""
    _ensure_parent(path)
    trace.to_csv(path, index=False, float_format=TRACE_FLOAT_FORMAT)
    LOG.info("Skrev spår med %d rader till %s", len(trace), path)


def read_trace(path: str) -> pd.DataFrame:
    return pd.read_csv(path)


def attacks_to_frame(attacks: np.ndarray, row_slices) -> pd.DataFrame:
    """
    Långt format (k, agent, component, value) för en attackmatris av form (K, p)

    Agent och komponent räknas från 1.
    """
    attacks = np.asarray(attacks, dtype=float)
    K = attacks.shape[0]
    frames = []
    for i, rows in enumerate(row_slices):
        block = attacks[:, rows]
        width = block.shape[1]
        frames.append(pd.DataFrame({
            "k": np.repeat(np.arange(K), width),
            "agent": i + 1,
            "component": np.tile(np.arange(1, width + 1), K),
            "value": block.ravel(),
        }))
    frame = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=ATTACK_COLUMNS)
    return frame.sort_values(["k", "agent", "component"], kind="mergesort").reset_index(drop=True)


def write_attack_file(attacks: np.ndarray, row_slices, path: str):
    _ensure_parent(path)
    attacks_to_frame(attacks, row_slices).to_csv(path, index=False, float_format=TRACE_FLOAT_FORMAT)
    LOG.info("Skrev attackfil %s", path)


def read_attack_sequences(path: str, p_sizes, horizon: Optional[int] = None) -> Dict[int, np.ndarray]:
    """
    Läser en attackfil till en sekvens per agent

    Args:
        path: CSV i långt format
        p_sizes: Mätdimension per agent
        horizon: Minsta antal steg i sekvenserna

    Returns:
        Dict från 0-baserat agentindex till matris (steg, p_i)
    """
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError) as e:
        raise ValidationError(f"Kunde inte läsa attackfilen {path}: {e}") from e
    missing = set(ATTACK_COLUMNS) - set(frame.columns)
    if missing:
        raise ValidationError(f"Attackfilen saknar kolumnerna {sorted(missing)}")

    N = len(p_sizes)
    if frame.empty:
        return {}
    if frame["agent"].min() < 1 or frame["agent"].max() > N:
        raise ValidationError(f"Attackfilen innehåller agenter utanför 1..{N}")
    if frame["k"].min() < 0:
        raise ValidationError("Attackfilen innehåller negativa tidssteg")

    steps = int(frame["k"].max()) + 1
    if horizon is not None:
        steps = max(steps, horizon + 1)
    sequences = {}
    for agent, group in frame.groupby("agent"):
        i = int(agent) - 1
        components = group["component"].astype(int) - 1
        if components.min() < 0 or components.max() >= p_sizes[i]:
            raise ValidationError(f"Komponent utanför 1..{p_sizes[i]} för agent {i + 1}")
        seq = np.zeros((steps, p_sizes[i]))
        seq[group["k"].astype(int).to_numpy(), components.to_numpy()] = group["value"].to_numpy(dtype=float)
        sequences[i] = seq
    return sequences
