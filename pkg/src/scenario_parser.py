"""
Parser för scenariodokument
Läser JSON-beskrivningar av system, kostnader, estimator, attacker och önskade tillstånd
"""
import json
import logging
import os
from typing import Dict, List, Optional

import numpy as np

from config import DEFAULT_ALGORITHM, DEFAULT_BASIS, DEFAULT_MODE_FILTER
from services.trace_store import read_attack_sequences
from src.errors import ToolkitError, ValidationError
from src.estimator import AUTO
from src.security_planner import CostModel, SecurityMeasure
from src.simulation import (
    AttackKind,
    AttackSpec,
    DesiredMode,
    DesiredSpec,
    ScenarioConfig,
    build_platoon,
)
from src.system_model import BASIS_KINDS, MODE_FILTERS, CommGraph, LtiModel, lift_system

LOG = logging.getLogger(__name__)

SYSTEM_KEYS = ("A", "B", "adjacency", "C")
OVERRIDE_KEYS = ("budget", "algorithm", "seed", "horizon", "mode_filter", "basis", "phi")


class ScenarioParser:
    """Hanterar inläsning och validering av ett scenariodokument"""

    def __init__(self, path: str):
        """
        Initialiserar parsern

        Args:
            path: Sökväg till scenariots JSON-fil
        """
        self.path = path
        self.base_dir = os.path.dirname(os.path.abspath(path))
        self.document = self._load_document()

    def _load_document(self) -> Dict:
        """Laddar dokumentet från JSON-fil"""
        try:
            with open(self.path, "r", encoding="utf-8") as f:
                document = json.load(f)
        except FileNotFoundError:
            raise ValidationError(f"Kunde inte hitta {self.path}")
        except json.JSONDecodeError as e:
            raise ValidationError(f"Fel vid parsing av {self.path}: {e}")
        if not isinstance(document, dict):
            raise ValidationError("Scenariot måste vara ett JSON-objekt")
        return document

    def build(self, overrides: Optional[Dict] = None) -> ScenarioConfig:
        return parse_scenario(self.document, self.base_dir, overrides)


def load_scenario(path: str, overrides: Optional[Dict] = None) -> ScenarioConfig:
    """Läser och validerar ett scenario från fil"""
    return ScenarioParser(path).build(overrides)


def apply_overrides(document: Dict, overrides: Optional[Dict]) -> Dict:
    """
    Lägger kommandoradens värden ovanpå dokumentet

    Args:
        document: Scenariodokument
        overrides: Värden för budget, algorithm, seed, horizon, mode_filter, basis, phi

    Returns:
        Nytt dokument, originalet lämnas orört
    """
    document = json.loads(json.dumps(document))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in OVERRIDE_KEYS:
            raise ValidationError(f"Okänd överstyrning: {key}")
        if key == "budget":
            document.setdefault("costs", {})["budget"] = value
        else:
            document[key] = value
    return document


def _require(document: Dict, key: str):
    if key not in document:
        raise ValidationError(f"Scenariot saknar nyckeln '{key}'")
    return document[key]


def _costs(spec: Optional[Dict], N: int, default: Optional[CostModel] = None) -> CostModel:
    if spec is None:
        if default is None:
            raise ValidationError("Scenariot saknar nyckeln 'costs'")
        return default
    if not isinstance(spec, dict):
        raise ValidationError("'costs' måste vara ett objekt")

    def per_agent(key: str, fallback):
        value = spec.get(key, fallback)
        if value is None:
            raise ValidationError(f"'costs' saknar '{key}'")
        values = np.atleast_1d(np.asarray(value, dtype=float))
        return np.full(N, values[0]) if values.size == 1 else values

    c_normal = per_agent("normal", default.c_normal if default is not None else None)
    c_secure = per_agent("secure", default.c_secure if default is not None else None)
    budget = spec.get("budget", default.budget if default is not None else None)
    if budget is None:
        raise ValidationError("'costs' saknar 'budget'")
    return CostModel(c_normal, c_secure, float(budget))


def _attacks(specs, N: int, p_sizes: List[int], horizon: int, base_dir: str) -> List[AttackSpec]:
    if not isinstance(specs, list):
        raise ValidationError("'attacks' måste vara en lista")
    result = []
    for spec in specs:
        agent = int(_require(spec, "agent"))
        if not 1 <= agent <= N:
            raise ValidationError(f"Attackmålet {agent} ligger utanför 1..{N}")
        try:
            kind = AttackKind(spec.get("kind", AttackKind.ZEROING.value))
        except ValueError:
            raise ValidationError(f"Okänd attacktyp: {spec.get('kind')}")
        window = spec.get("window", [0, None])
        if not isinstance(window, list) or len(window) != 2:
            raise ValidationError("'window' måste vara [start, slut]")

        sequence = None
        if kind is AttackKind.CUSTOM:
            path = _require(spec, "file")
            if not os.path.isabs(path):
                path = os.path.join(base_dir, path)
            sequences = read_attack_sequences(path, p_sizes, horizon)
            sequence = sequences.get(agent - 1, np.zeros((horizon + 1, p_sizes[agent - 1])))

        result.append(AttackSpec(
            target=agent - 1,
            kind=kind,
            start=int(window[0]),
            end=None if window[1] is None else int(window[1]),
            bias=spec.get("value") if kind is AttackKind.BIAS else None,
            sequence=sequence,
        ))
    return result


def _desired(spec: Optional[Dict], default: DesiredSpec) -> DesiredSpec:
    if spec is None:
        return default
    try:
        mode = DesiredMode(spec.get("mode", default.mode.value))
    except ValueError:
        raise ValidationError(f"Okänt läge för önskat tillstånd: {spec.get('mode')}")
    x_star0 = spec.get("x_star0", default.x_star0)
    return DesiredSpec(
        mode=mode,
        T=float(spec.get("T", default.T)),
        speed=float(spec.get("speed", default.speed)),
        spacing=float(spec.get("spacing", default.spacing)),
        leader_start=spec.get("leader_start", default.leader_start),
        x_star0=None if x_star0 is None else np.asarray(x_star0, dtype=float),
    )


def _choice(value: str, allowed, name: str) -> str:
    if value not in allowed:
        raise ValidationError(f"Ogiltigt värde för {name}: {value} (tillåtna: {', '.join(allowed)})")
    return value


def parse_scenario(document: Dict, base_dir: str = ".", overrides: Optional[Dict] = None) -> ScenarioConfig:
    """
    Bygger en ScenarioConfig från ett dokument

    Dokumentet kan beskriva systemet direkt (A, B, N, adjacency, C) eller använda
    genvägen {"platoon": {"N": .., "T": ..}}, där explicita nycklar ersätter de
    genererade värdena. Agenter i dokumentet räknas från 1.

    Args:
        document: Scenariodokument
        base_dir: Katalog som relativa filsökvägar utgår från
        overrides: Kommandoradens överstyrningar

    Returns:
        Validerad ScenarioConfig
    """
    try:
        return _parse_document(apply_overrides(document, overrides), base_dir)
    except (ToolkitError, np.linalg.LinAlgError):
        raise
    except KeyError as e:
        raise ValidationError(f"Scenariot saknar nyckeln {e}")
    except (TypeError, ValueError, AttributeError) as e:
        raise ValidationError(f"Ogiltigt scenario: {e}") from e


def _parse_document(document: Dict, base_dir: str) -> ScenarioConfig:
    mode_filter = _choice(document.get("mode_filter", DEFAULT_MODE_FILTER), MODE_FILTERS, "mode_filter")
    basis_kind = _choice(document.get("basis", DEFAULT_BASIS), BASIS_KINDS, "basis")
    noise = document.get("noise", {})

    if "platoon" in document:
        shorthand = document["platoon"]
        base = build_platoon(
            int(_require(shorthand, "N")),
            T=float(shorthand.get("T", 0.01)),
            delta_w=float(noise.get("delta_w", 0.1)),
            delta_v=float(noise.get("delta_v", 0.1)),
        )
    else:
        base = None

    if base is None or any(key in document for key in SYSTEM_KEYS):
        model = LtiModel(
            A=document["A"] if "A" in document or base is None else base.system.model.A,
            B=document["B"] if "B" in document or base is None else base.system.model.B,
        )
        adjacency = document.get("adjacency", None if base is None else base.system.graph.adjacency)
        if adjacency is None:
            raise ValidationError("Scenariot saknar nyckeln 'adjacency'")
        graph = CommGraph.from_adjacency(adjacency)
        if "N" in document and int(document["N"]) != graph.N:
            raise ValidationError(f"N = {document['N']} stämmer inte med grannmatrisen ({graph.N})")
        C = document.get("C", None if base is None else list(base.system.C))
        if C is None:
            raise ValidationError("Scenariot saknar nyckeln 'C'")
        system = lift_system(model, graph, C, mode_filter, basis_kind)
    else:
        system = base.system

    N, n = system.N, system.n
    estimator = document.get("estimator", {})
    Kp = estimator.get("Kp", None if base is None else base.Kp)
    if Kp is None:
        raise ValidationError("'estimator' saknar 'Kp'")
    omega = estimator.get("omega", AUTO if base is None else base.omega)
    L = estimator.get("L", AUTO if base is None else base.L)
    if omega != AUTO and not isinstance(omega, (int, float)):
        raise ValidationError("'omega' måste vara \"auto\" eller ett tal")
    if L != AUTO and not isinstance(L, int):
        raise ValidationError("'L' måste vara \"auto\" eller ett heltal")

    horizon = int(document.get("horizon", 5000 if base is None else base.horizon))
    x0 = document.get("x0", None if base is None else base.x0)
    x0 = np.zeros((N, n)) if x0 is None else np.asarray(x0, dtype=float)
    xi0 = document.get("xi0")

    default_costs = base.costs if base is not None and base.system.N == N else None
    costs = _costs(document.get("costs"), N, default_costs)

    if "attacks" in document:
        attacks = _attacks(document["attacks"], N, system.p_sizes, horizon, base_dir)
    else:
        attacks = list(base.attacks) if base is not None else []

    measure = None
    if document.get("phi") is not None:
        measure = SecurityMeasure.from_string(document["phi"])

    desired = _desired(document.get("desired"), base.desired if base is not None else DesiredSpec())

    config = ScenarioConfig(
        system=system,
        costs=costs,
        Kp=Kp,
        x0=x0,
        horizon=horizon,
        seed=int(document.get("seed", 0)),
        omega=omega,
        L=L,
        delta_w=float(noise.get("delta_w", 0.0 if base is None else base.delta_w)),
        delta_v=float(noise.get("delta_v", 0.0 if base is None else base.delta_v)),
        attacks=tuple(attacks),
        desired=desired,
        measure=measure,
        algorithm=document.get("algorithm", DEFAULT_ALGORITHM),
        mode_filter=mode_filter,
        basis_kind=basis_kind,
        xi0=None if xi0 is None else np.asarray(xi0, dtype=float),
    )
    LOG.debug("Scenario inläst: N=%d, horisont %d, %d attacker", N, horizon, len(config.attacks))
    return config
