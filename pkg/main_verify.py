"""
Verifica del teorema a due pesi su un file d'istanza o sul dataset di istanze oracolo.

Il report JSON va su stdout, l'avanzamento su stderr. Codice di uscita:
0 se tutte le verifiche sono soddisfatte, 1 altrimenti, 2 per input non valido.
"""
import json
import sys
from pathlib import Path
from typing import Any, Dict

from dotenv import load_dotenv

from src.instance_io import InstanceFormatError, instance_from_dict, load_dataset, load_instance
from src.logger import ResultLogger, WandBLogger, log
from src.run_config import (
    EXIT_BAD_INPUT,
    EXIT_CHECK_FAILED,
    EXIT_OK,
    Budget,
    add_budget_arguments,
    budget_from_args,
    tol_from_args,
)
from src.testing_conditions import Instance
from src.theorem import theorem_verify
from tasks.verify.metrics import OracleMetricsCalculator

DATASET_FILE = str(Path(__file__).parent / "tasks" / "verify" / "dataset.json")


class VerifyRunner:
    """Esegue theorem_verify e salva i report."""

    def __init__(self, budget: Budget, tol: float, use_wandb: bool = False):
        self.budget = budget
        self.tol = tol
        self.result_logger = ResultLogger("verify")
        self.wandb_logger = WandBLogger(enabled=use_wandb)

    def run_instance(self, inst: Instance, name: str) -> Dict[str, Any]:
        """Verifica una singola istanza."""
        log(f"\n{'='*60}")
        log(f"Istanza: {name} (d={inst.system.dimension}, L={inst.system.depth}, p={inst.p}, r={inst.r})")
        log(f"{'='*60}\n")

        report = theorem_verify(inst, self.budget, self.tol)
        for item in report.checks:
            status = "✓" if item.holds else "✗"
            log(f"  {status} {item.name}: {item.lhs:.6g} ≤ {item.rhs:.6g}")
        for item in report.informational:
            log(f"  · {item.name} (informativa): {item.lhs:.6g} ≤ {item.rhs:.6g}")

        result = report.to_dict()
        self.result_logger.save_report(result, name)
        return result

    def run_dataset(self, dataset_file: str = DATASET_FILE) -> Dict[str, Any]:
        """Verifica le istanze oracolo e confronta le costanti attese."""
        test_cases = load_dataset(dataset_file)
        metrics = OracleMetricsCalculator()
        self.wandb_logger.start_run("verify_dataset", {"seed": self.budget.seed, "total_cases": len(test_cases)})

        for i, test_case in enumerate(test_cases, 1):
            try:
                inst = instance_from_dict(test_case["instance"])
                result = self.run_instance(inst, test_case["name"])
                metrics.add_case(test_case["id"], test_case["expected"], result["constants"], result["passed"])
                status = "✓" if result["passed"] else "✗"
                log(f"[{i}/{len(test_cases)}] {status} {test_case['name']}")
            except Exception as e:
                log(f"ERRORE caso {test_case['id']}: {str(e)}")
                continue

        final_metrics = metrics.get_metrics()
        self.wandb_logger.log_metrics({k: v for k, v in final_metrics.items() if k != "mismatches"})
        self.wandb_logger.finish_run()
        return final_metrics


def main(argv=None) -> int:
    """Funzione principale."""
    import argparse

    load_dotenv()
    parser = argparse.ArgumentParser(description="Verifica del teorema a due pesi")
    parser.add_argument("instance", nargs="?", default=None, help="File d'istanza JSON")
    parser.add_argument("--dataset", action="store_true", help="Verifica le istanze oracolo di tasks/verify/dataset.json")
    parser.add_argument("--seed", type=int, default=0, help="Seed dell'ottimizzatore")
    parser.add_argument("--out", default=None, help="Copia del report in questo file")
    add_budget_arguments(parser)
    args = parser.parse_args(argv)

    if not args.dataset and args.instance is None:
        parser.error("serve un file d'istanza oppure --dataset")

    runner = VerifyRunner(budget_from_args(args, seed=args.seed), tol_from_args(args), use_wandb=args.wandb)

    if args.dataset:
        metrics = runner.run_dataset()
        json.dump(metrics, sys.stdout, indent=2, ensure_ascii=False)
        sys.stdout.write("\n")
        ok = metrics["total_cases"] > 0 and metrics["matched_cases"] == metrics["passed_reports"] == metrics["total_cases"]
        return EXIT_OK if ok else EXIT_CHECK_FAILED

    try:
        inst = load_instance(args.instance)
    except (InstanceFormatError, OSError) as e:
        log(f"ERRORE: {e}")
        return EXIT_BAD_INPUT

    result = runner.run_instance(inst, Path(args.instance).stem)
    json.dump(result, sys.stdout, indent=2, ensure_ascii=False)
    sys.stdout.write("\n")
    if args.out:
        with open(args.out, 'w', encoding='utf-8') as f:
            json.dump(result, f, indent=2, ensure_ascii=False)

    log(f"\n{'='*60}")
    log(f"ESITO: {'PASS' if result['passed'] else 'FAIL'}")
    log(f"Risultati: {runner.result_logger.results_dir}/")
    log(f"{'='*60}")
    return EXIT_OK if result["passed"] else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
