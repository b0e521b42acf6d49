"""
Metriche specifiche per la verifica sulle istanze oracolo.
"""
import math
from typing import Any, Dict, Optional

from src.metrics import EXACT_TOL


class OracleMetricsCalculator:
    """Confronta le costanti calcolate con i valori attesi del dataset."""

    def __init__(self, tol: float = EXACT_TOL):
        self.tol = tol
        self.reset()

    def reset(self):
        """Reset delle metriche accumulate."""
        self.matched = []
        self.passed = []
        self.mismatches = []

    def _close(self, expected: float, computed: Optional[float]) -> bool:
        if computed is None:
            return False
        return math.isclose(computed, expected, rel_tol=self.tol, abs_tol=self.tol)

    def add_case(self, case_id: Any, expected: Dict[str, float], constants: Dict[str, Any], passed: bool):
        """
        Aggiunge un caso oracolo.

        Args:
            case_id: ID del caso nel dataset
            expected: costanti attese (sottoinsieme di C, Cstar_lower, Cstar_upper, Ctilde_lower, Ctilde_exact)
            constants: costanti calcolate (ConstantsBundle.to_dict())
            passed: esito delle verifiche del report
        """
        wrong = {
            name: {"expected": value, "computed": constants.get(name)}
            for name, value in expected.items()
            if not self._close(value, constants.get(name))
        }
        self.matched.append(not wrong)
        self.passed.append(passed)
        if wrong:
            self.mismatches.append({"id": case_id, "constants": wrong})

    def get_metrics(self) -> Dict[str, Any]:
        """
        Returns:
            - total_cases: casi valutati
            - matched_cases: casi con tutte le costanti attese
            - passed_reports: casi con tutte le verifiche soddisfatte
            - mismatches: dettaglio delle costanti sbagliate
        """
        return {
            "total_cases": len(self.matched),
            "matched_cases": sum(self.matched),
            "passed_reports": sum(self.passed),
            "mismatches": list(self.mismatches),
        }
