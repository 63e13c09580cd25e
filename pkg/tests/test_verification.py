import json

import pytest

from src.cli import main
from src.errors import EXIT_OK
from src.scenario_parser import parse_scenario
from src.verification import (
    PASS,
    WARN,
    check_detectability_equivalence,
    check_max_resilience_equivalence,
    check_pbh_cross_check,
    run_verification,
)

# Relativa mätningar på en väg med tre agenter, A = 1
RELATIVE_PATH3 = {
    "A": [[1.0]],
    "B": [[1.0]],
    "adjacency": [[0, 1, 0], [1, 0, 1], [0, 1, 0]],
    "C": [[[1, -1, 0]], [[-1, 2, -1]], [[0, -1, 1]]],
    "costs": {"normal": 1, "secure": 3, "budget": 10},
    "estimator": {"Kp": [[0.5]]},
}


@pytest.fixture
def relative_config():
    return parse_scenario(RELATIVE_PATH3)


def test_max_resilience_equivalence_on_platoon(platoon_config):
    result = check_max_resilience_equivalence(platoon_config)
    assert result.status == PASS
    assert "32" in result.detail


def test_pbh_disagreement_is_a_warning(relative_config):
    assert check_detectability_equivalence(relative_config).status == WARN
    assert check_pbh_cross_check(relative_config).status == WARN
    assert check_max_resilience_equivalence(relative_config).status == PASS


def test_report_stays_ok_with_pbh_warnings(relative_config):
    report = run_verification(relative_config, simulate=False)
    names = [check.name for check in report.checks]
    assert names[0] == "max_resilience_equivalence"
    assert report.ok
    assert report.failures == []


def test_verify_cli_accepts_relative_sensing(capsys, tmp_path):
    path = tmp_path / "relative.json"
    path.write_text(json.dumps(RELATIVE_PATH3), encoding="utf-8")
    code = main(["verify", "--config", str(path), "--no-simulate"])
    report = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK
    assert report["ok"] is True
    statuses = {check["name"]: check["status"] for check in report["checks"]}
    assert statuses["pbh_cross_check"] == WARN
