"""
Felhierarki för Secure Platoon Toolkit
Varje fel bär en exit-kod som CLI:t returnerar
"""
from typing import Dict

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INFEASIBLE = 2
EXIT_NUMERICAL = 3


class ToolkitError(Exception):
    """Basklass för alla fel i verktyget"""

    exit_code = EXIT_NUMERICAL

    def to_dict(self) -> Dict:
        """Maskinläsbar representation för stderr"""
        return {
            "error": type(self).__name__,
            "message": str(self),
            "exit_code": self.exit_code,
        }


class ValidationError(ToolkitError, ValueError):
    """Ogiltig indata eller ogiltigt scenario"""

    exit_code = EXIT_VALIDATION


class DimensionMismatch(ValidationError):
    """Matrisdimensioner passar inte ihop"""


class DisconnectedGraph(ValidationError):
    """Kommunikationsgrafen är inte sammanhängande"""


class UndetectablePair(ValidationError):
    """Det lyfta paret (Ā, C̄) är inte detekterbart"""


class RequiresCommonCosts(ValidationError):
    """Uppräkningen kräver samma kostnader för alla agenter"""


class EmptySecureSet(ValidationError):
    """Mängden säkra agenter är tom"""


class EmptyFeasibleSet(ValidationError):
    """Ingen indikator att välja mellan"""


class EmptyTrace(ValidationError):
    """Spåret innehåller inga poster"""


class InfeasibleBudget(ToolkitError):
    """Budgeten räcker inte ens till grundkostnaderna"""

    exit_code = EXIT_INFEASIBLE


class PlanInfeasible(InfeasibleBudget):
    """Ingen säkerhetsplan kunde tas fram för scenariot"""


class NoUndetectableAttack(ToolkitError):
    """Den säkra mängden gör paret detekterbart"""

    exit_code = EXIT_INFEASIBLE


class MatrixTooLargeForExactTest(ToolkitError):
    """Matrisen är för stor för det uttömmande TU-testet"""

    exit_code = EXIT_INFEASIBLE


class LPInfeasible(ToolkitError):
    """LP-relaxationen saknar tillåten lösning"""

    exit_code = EXIT_INFEASIBLE


class NonIntegralVertex(ToolkitError):
    """LP-hörnet är inte heltaligt"""

    exit_code = EXIT_INFEASIBLE


class HypothesisViolated(ToolkitError):
    """Antagandet bakom felgränsen håller inte"""

    exit_code = EXIT_INFEASIBLE


class GainHypothesisViolated(HypothesisViolated):
    """‖A − BK_p‖ < 1 håller inte"""


class EigenFailure(ToolkitError):
    """Egenvärdesuppdelningen misslyckades"""


class VerificationFailed(ToolkitError):
    """Minst en egenskapskontroll misslyckades"""
