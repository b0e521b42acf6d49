"""
Metriche specifiche per la modalità batch.
"""
import math
from typing import Any, Dict


class BatchMetricsCalculator:
    """Calcola le metriche aggregate sulle righe della sweep."""

    def __init__(self):
        self.reset()

    def reset(self):
        """Reset delle metriche accumulate."""
        self.passed = []
        self.ratios = []
        self.wall_clock = []
        self.failed_seeds = []
        self.errors = []

    def add_row(self, row: Dict[str, Any]):
        """
        Aggiunge una riga del CSV.

        Args:
            row: dict prodotto da result_aggregator.batch_row
        """
        self.passed.append(bool(row["pass"]))
        self.ratios.append(float(row["ratio"]))
        self.wall_clock.append(float(row["wall_clock_s"]))
        if not row["pass"]:
            self.failed_seeds.append(row["seed"])

    def add_error(self, seed: int):
        self.errors.append(seed)

    def get_metrics(self) -> Dict[str, Any]:
        """
        Returns:
            - total_instances: istanze verificate
            - pass_rate: frazione di istanze con tutte le verifiche soddisfatte
            - max_ratio: massimo osservato di C̃/(C + C*_upper)
            - total_wall_clock: tempo totale in secondi
            - failed_seeds, error_seeds
        """
        if not self.passed:
            return {
                "total_instances": 0,
                "pass_rate": 0.0,
                "max_ratio": 0.0,
                "total_wall_clock": 0.0,
                "failed_seeds": [],
                "error_seeds": list(self.errors),
            }

        return {
            "total_instances": len(self.passed),
            "pass_rate": sum(self.passed) / len(self.passed),
            "max_ratio": max((r for r in self.ratios if not math.isnan(r)), default=0.0),
            "total_wall_clock": sum(self.wall_clock),
            "failed_seeds": list(self.failed_seeds),
            "error_seeds": list(self.errors),
        }
