"""
Kommandoradsgränssnitt för Secure Platoon Toolkit
Underkommandon: plan, index, design, simulate, attack-synth och verify
"""
import argparse
import logging
import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from typing import Dict, List, Optional

import numpy as np

from config import LOG_LEVEL
from services.trace_store import to_json, write_attack_file, write_json, write_trace
from src.errors import EXIT_NUMERICAL, EXIT_OK, ToolkitError, ValidationError, VerificationFailed
from src.estimator import design_parameters
from src.scenario_parser import load_scenario
from src.security_planner import security_index, synthesize_undetectable_attack
from src.simulation import ScenarioConfig, replay_undetectable_attack, resolve_plan, run_scenario
from src.system_model import BASIS_KINDS, MODE_FILTERS, eigenmode_basis
from src.verification import run_verification

LOG = logging.getLogger(__name__)


def _overrides(args) -> Dict:
    return {
        "budget": getattr(args, "budget", None),
        "algorithm": getattr(args, "algorithm", None),
        "seed": getattr(args, "seed", None),
        "horizon": getattr(args, "horizon", None),
        "mode_filter": getattr(args, "mode_filter", None),
        "basis": getattr(args, "basis", None),
        "phi": getattr(args, "phi", None),
    }


def _load(args) -> ScenarioConfig:
    return load_scenario(args.config, _overrides(args))


def _emit(document: Dict, out: Optional[str]):
    if out:
        write_json(document, out)
    else:
        print(to_json(document))


def cmd_plan(args) -> int:
    # plan kör alltid planeraren, även om scenariot anger en åtgärd
    config = _load(args).replace(measure=None)
    plan = resolve_plan(config)
    _emit(plan.to_dict(), args.out)
    return EXIT_OK


def cmd_index(args) -> int:
    config = _load(args)
    if config.measure is None:
        raise ValidationError("index kräver --phi eller 'phi' i scenariot")
    system = config.system
    basis = eigenmode_basis(system.model, system.N, config.basis_kind)
    result = security_index(system, config.measure, basis, config.mode_filter)
    certificate = None if result.certificate is None else basis.modes[result.certificate].describe()
    _emit({
        "phi": config.measure.as_list(),
        "index": "inf" if result.detectable else int(result.index),
        "detectable": result.detectable,
        "certificate_mode": certificate,
    }, args.out)
    return EXIT_OK


def cmd_design(args) -> int:
    config = _load(args)
    plan = resolve_plan(config)
    report = design_parameters(
        config.system, plan.measure, config.Kp, config.omega, config.L, config.delta_w, config.delta_v
    )
    document = report.to_dict()
    document["phi"] = plan.measure.as_list()
    _emit(document, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = _load(args)
    result = run_scenario(config)
    write_trace(result.trace, args.out)
    _emit(result.summary, args.summary)
    return EXIT_OK


def cmd_attack_synth(args) -> int:
    config = _load(args)
    if config.measure is None:
        raise ValidationError("attack-synth kräver --phi eller 'phi' i scenariot")
    system = config.system
    basis = eigenmode_basis(system.model, system.N, config.basis_kind)
    witness = synthesize_undetectable_attack(system, config.measure, args.steps, basis=basis, mode_filter=config.mode_filter)
    write_attack_file(witness.attacks, system.row_slices, args.out)

    Y1, Y2 = replay_undetectable_attack(system, witness)
    print(to_json({
        "phi": config.measure.as_list(),
        "steps": int(args.steps),
        "x1_0": witness.x1_0,
        "x2_0": witness.x2_0,
        "attacked_agents": sorted({i + 1 for i in config.measure.normal_set
                                   if np.any(witness.attacks[:, system.row_slices[i]])}),
        "max_output_gap": float(np.max(np.abs(Y1 - Y2))) if Y1.size else 0.0,
    }))
    return EXIT_OK


def cmd_verify(args) -> int:
    config = _load(args)
    report = run_verification(config, simulate=not args.no_simulate)
    _emit(report.to_dict(), args.out)
    if not report.ok:
        names = [check.name for check in report.failures]
        raise VerificationFailed(f"Kontroller som fallerade: {', '.join(names)}")
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser, out_required: bool = False):
    parser.add_argument("--config", required=True, help="Scenariots JSON-fil")
    parser.add_argument("--out", required=out_required, help="Utfil")
    parser.add_argument("--mode-filter", choices=MODE_FILTERS, help="Moder som måste vara detekterbara")
    parser.add_argument("--basis", choices=BASIS_KINDS, help="Egenmodsbas")
    parser.add_argument("--budget", type=float, help="Budget β")
    parser.add_argument("--algorithm", choices=("bruteforce", "efficient"), help="Planerare")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="secure-platoon",
        description="Säkerhetsplanering, resilient skattning och kolonnsimulering",
    )
    parser.add_argument("--log-level", default=LOG_LEVEL, help="Loggnivå (standard %(default)s)")
    sub = parser.add_subparsers(dest="command", required=True)

    plan = sub.add_parser("plan", help="Optimal säkerhetsåtgärd inom budget")
    _add_common(plan)
    plan.set_defaults(func=cmd_plan)

    index = sub.add_parser("index", help="Säkerhetsindex för en åtgärd")
    _add_common(index)
    index.add_argument("--phi", help="Åtgärd, t.ex. SNSNS")
    index.set_defaults(func=cmd_index)

    design = sub.add_parser("design", help="Estimatorparametrar och felgränser")
    _add_common(design)
    design.add_argument("--phi", help="Åtgärd, annars körs planeraren")
    design.set_defaults(func=cmd_design)

    simulate = sub.add_parser("simulate", help="Kör scenariot och skriv CSV-spår")
    _add_common(simulate, out_required=True)
    simulate.add_argument("--phi", help="Åtgärd, annars körs planeraren")
    simulate.add_argument("--seed", type=int, help="Slumpfrö")
    simulate.add_argument("--horizon", type=int, help="Antal steg")
    simulate.add_argument("--summary", help="Fil för sammanfattningen (standard: stdout)")
    simulate.set_defaults(func=cmd_simulate)

    attack = sub.add_parser("attack-synth", help="Syntetisera en odetekterbar attack")
    _add_common(attack, out_required=True)
    attack.add_argument("--phi", help="Åtgärd, t.ex. NNNNN")
    attack.add_argument("--steps", "-K", type=int, default=100, help="Antal steg K")
    attack.set_defaults(func=cmd_attack_synth)

    verify = sub.add_parser("verify", help="Kör egenskapskontrollerna på instansen")
    _add_common(verify)
    verify.add_argument("--seed", type=int, help="Slumpfrö")
    verify.add_argument("--horizon", type=int, help="Antal steg för gränskontrollen")
    verify.add_argument("--no-simulate", action="store_true", help="Hoppa över simuleringen")
    verify.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
        format="%(levelname)s [%(name)s]: %(message)s",
        stream=sys.stderr,
    )

    try:
        return args.func(args)
    except ToolkitError as e:
        LOG.debug("Avbryter med %s", type(e).__name__, exc_info=True)
        print(to_json(e.to_dict()), file=sys.stderr)
        return e.exit_code
    except (np.linalg.LinAlgError, RuntimeError) as e:
        print(to_json({"error": type(e).__name__, "message": str(e), "exit_code": EXIT_NUMERICAL}), file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
