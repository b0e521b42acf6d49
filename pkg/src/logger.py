"""
Sistema di logging per salvare report e istanze localmente e, a richiesta, su Weights & Biases.

Tutti i messaggi vanno su stderr: stdout è riservato al report JSON.
"""
import json
import os
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

import wandb

from src.run_config import results_dir


def log(message: str = ""):
    print(message, file=sys.stderr)


class ResultLogger:
    """Gestisce il salvataggio dei report in results/<comando>/<timestamp>/."""

    def __init__(self, command: str, run_timestamp: Optional[str] = None, base_dir: Optional[str] = None):
        if run_timestamp is None:
            run_timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")

        self.run_timestamp = run_timestamp
        self.results_dir = Path(base_dir or results_dir()) / command / run_timestamp
        self.results_dir.mkdir(parents=True, exist_ok=True)

        log(f"Risultati verranno salvati in: {self.results_dir}")

    def save_report(self, report: Dict[str, Any], name: str) -> Path:
        """Salva un report in un file JSON locale."""
        # Sostituisce / con _ per evitare sottodirectory
        safe_name = name.replace('/', '_')
        filename = self.results_dir / f"{safe_name}_report.json"

        with open(filename, 'w', encoding='utf-8') as f:
            json.dump(report, f, indent=2, ensure_ascii=False)

        log(f"Report salvato in: {filename}")
        return filename


class WandBLogger:
    """Gestisce il logging su Weights & Biases; senza `enabled` non fa nulla."""

    def __init__(self, project_name: Optional[str] = None, enabled: bool = False):
        self.project_name = project_name or os.getenv("WANDB_PROJECT", "dyadicbench")
        self.enabled = enabled
        self.current_run = None

    def start_run(self, run_name: str, config: Dict[str, Any]):
        """Inizia un nuovo run su W&B."""
        if not self.enabled:
            return
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        full_name = f"{run_name}_{timestamp}"

        self.current_run = wandb.init(
            project=self.project_name,
            name=full_name,
            config=config,
            reinit=True,
        )

        log(f"W&B run iniziato: {full_name}")

    def log_metrics(self, metrics: Dict[str, Any]):
        """Logga le metriche su W&B."""
        if self.current_run:
            wandb.log(metrics)

    def finish_run(self):
        """Chiude il run corrente su W&B."""
        if self.current_run:
            wandb.finish()
            self.current_run = None
