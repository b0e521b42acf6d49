"""
Metriche specifiche per la ricerca del rapporto C̃/(C + C*).
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List


@dataclass(order=True)
class SearchEntry:
    sort_key: tuple
    ratio: float = field(compare=False)
    iteration: int = field(compare=False)
    instance: Any = field(compare=False, repr=False)
    report: Dict[str, Any] = field(compare=False, repr=False)


class SearchMetricsCalculator:
    """Tiene le top-k istanze per rapporto (a parità vince l'iterazione più bassa)."""

    def __init__(self, top_k: int = 5):
        self.top_k = top_k
        self.reset()

    def reset(self):
        """Reset delle metriche accumulate."""
        self.entries: List[SearchEntry] = []
        self.evaluations = 0
        self.improvements = 0
        self.best_ratio = 0.0

    def add_candidate(self, ratio: float, iteration: int, instance: Any, report: Dict[str, Any]) -> bool:
        """
        Registra un candidato valutato.

        Returns:
            True se il candidato migliora il miglior rapporto visto finora
        """
        self.evaluations += 1
        improved = ratio > self.best_ratio or not self.entries
        if improved:
            self.improvements += 1
            self.best_ratio = max(self.best_ratio, ratio)
        self.entries.append(SearchEntry((-ratio, iteration), ratio, iteration, instance, report))
        self.entries.sort()
        del self.entries[self.top_k:]
        return improved

    def top(self) -> List[SearchEntry]:
        return list(self.entries)

    def get_metrics(self) -> Dict[str, Any]:
        """
        Returns:
            - best_ratio: miglior C̃/(C + C*_upper)
            - evaluations: candidati valutati
            - improvements: miglioramenti del massimo
            - all_passed: nessuna delle top-k viola il teorema
        """
        return {
            "best_ratio": self.best_ratio,
            "evaluations": self.evaluations,
            "improvements": self.improvements,
            "all_passed": all(e.report.get("passed", False) for e in self.entries),
        }
