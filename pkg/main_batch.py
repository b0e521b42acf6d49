"""
Verifica in blocco su un intervallo di seed, con una riga CSV per istanza.

Con --sweep i parametri (d, L, p, r, pesi) sono derivati dal seed come nella
sweep di accettazione; altrimenti valgono i flag dell'istanza per tutti i seed.
L'ordine delle righe segue i seed, indipendentemente da --workers.
"""
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from dotenv import load_dotenv

from src.instance_generator import generate_instance, sweep_parameters
from src.logger import ResultLogger, WandBLogger, log
from src.result_aggregator import batch_row, save_batch_csv, save_batch_summary
from src.run_config import (
    EXIT_BAD_INPUT,
    EXIT_CHECK_FAILED,
    EXIT_OK,
    Budget,
    add_budget_arguments,
    add_instance_arguments,
    budget_from_args,
    tol_from_args,
)
from src.theorem import theorem_verify
from tasks.batch.metrics import BatchMetricsCalculator


def run_seed(job: Tuple[int, Dict[str, Any], Budget, float]) -> Tuple[int, Optional[Dict[str, Any]], Optional[str]]:
    """Verifica un seed; restituisce (seed, riga CSV, errore)."""
    seed, params, budget, tol = job
    try:
        inst = generate_instance(
            seed,
            params["dimension"],
            params["depth"],
            params["p"],
            params["r"],
            params["lambda_preset"],
            params["weights"],
        )
        report = theorem_verify(inst, Budget(budget.restarts, budget.iterations, seed, budget.dual_refine), tol)
        return seed, batch_row(seed, params, report.to_dict()), None
    except Exception as e:
        return seed, None, str(e)


class BatchRunner:
    """Esegue theorem_verify su un intervallo di seed."""

    def __init__(self, budget: Budget, tol: float, workers: int = 1, use_wandb: bool = False):
        self.budget = budget
        self.tol = tol
        self.workers = max(1, workers)
        self.wandb_logger = WandBLogger(enabled=use_wandb)

    def jobs(self, seeds: range, fixed: Optional[Dict[str, Any]]) -> List[Tuple[int, Dict[str, Any], Budget, float]]:
        return [(seed, fixed if fixed is not None else sweep_parameters(seed), self.budget, self.tol) for seed in seeds]

    def run(self, seeds: range, fixed: Optional[Dict[str, Any]] = None):
        """
        Returns:
            Tupla (righe CSV in ordine di seed, metriche)
        """
        metrics = BatchMetricsCalculator()
        rows = []
        jobs = self.jobs(seeds, fixed)
        self.wandb_logger.start_run("batch", {"seeds": [seeds.start, seeds.stop], "sweep": fixed is None, "workers": self.workers})

        if self.workers == 1:
            results = map(run_seed, jobs)
            self._collect(results, len(jobs), rows, metrics)
        else:
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                # map conserva l'ordine dei job
                self._collect(pool.map(run_seed, jobs), len(jobs), rows, metrics)

        final_metrics = metrics.get_metrics()
        self.wandb_logger.log_metrics({k: v for k, v in final_metrics.items() if not isinstance(v, list)})
        self.wandb_logger.finish_run()
        return rows, final_metrics

    def _collect(self, results, total: int, rows: List[Dict[str, Any]], metrics: BatchMetricsCalculator):
        for i, (seed, row, error) in enumerate(results, 1):
            if error is not None:
                log(f"ERRORE seed {seed}: {error}")
                metrics.add_error(seed)
                continue
            rows.append(row)
            metrics.add_row(row)
            status = "✓" if row["pass"] else "✗"
            log(f"[{i}/{total}] {status} seed {seed}: d={row['d']} L={row['L']} p={row['p']} r={row['r']} ratio={row['ratio']:.4g}")
            if i % 10 == 0:
                log(f"  → Pass rate: {metrics.get_metrics()['pass_rate']:.3f}\n")


def check_fixed_parameters(params: Dict[str, Any]):
    """Genera l'istanza del seed 0: solleva ValueError su p, r o preset non validi."""
    generate_instance(
        0,
        params["dimension"],
        params["depth"],
        params["p"],
        params["r"],
        params["lambda_preset"],
        params["weights"],
    )


def parse_seed_range(text: str) -> range:
    """"a:b" → range(a, b); "n" → range(n, n + 1)."""
    start, sep, stop = text.partition(":")
    if not sep:
        return range(int(start), int(start) + 1)
    return range(int(start), int(stop))


def main(argv=None) -> int:
    """Funzione principale."""
    import argparse

    load_dotenv()
    parser = argparse.ArgumentParser(description="Verifica in blocco del teorema a due pesi")
    parser.add_argument("--seeds", default="0:10", help="Intervallo di seed a:b (b escluso)")
    parser.add_argument("--sweep", action="store_true", help="Parametri derivati dal seed (sweep di accettazione)")
    parser.add_argument("--workers", type=int, default=1, help="Processi paralleli")
    parser.add_argument("--out", default=None, help="File CSV (default: results/batch/<timestamp>/batch.csv)")
    add_instance_arguments(parser)
    add_budget_arguments(parser)
    args = parser.parse_args(argv)

    try:
        seeds = parse_seed_range(args.seeds)
    except ValueError:
        log(f"ERRORE: intervallo di seed non valido '{args.seeds}'")
        return EXIT_BAD_INPUT

    fixed = None
    if not args.sweep:
        fixed = {
            "dimension": args.dim,
            "depth": args.depth,
            "p": args.p,
            "r": args.r,
            "lambda_preset": args.lambda_preset,
            "weights": args.weights,
        }
        try:
            check_fixed_parameters(fixed)
        except ValueError as e:
            log(f"ERRORE: {e}")
            return EXIT_BAD_INPUT

    print("=" * 60, file=sys.stderr)
    print(f"BATCH {'SWEEP' if args.sweep else 'PARAMETRI FISSI'}", file=sys.stderr)
    print(f"Seed: {seeds.start}..{seeds.stop - 1} ({len(seeds)} istanze)", file=sys.stderr)
    print("=" * 60 + "\n", file=sys.stderr)

    runner = BatchRunner(budget_from_args(args), tol_from_args(args), args.workers, args.wandb)
    rows, metrics = runner.run(seeds, fixed)

    if args.out:
        output = Path(args.out)
    else:
        output = ResultLogger("batch").results_dir / "batch.csv"
    frame = save_batch_csv(rows, output)
    summary_path = output.with_name(f"{output.stem}_summary.csv")
    summary = save_batch_summary(frame, summary_path)

    log(f"\n{'='*60}")
    log("BATCH COMPLETATO")
    log(f"Istanze: {metrics['total_instances']}, pass rate: {metrics['pass_rate']:.2%}")
    log(f"Rapporto massimo C̃/(C + C*): {metrics['max_ratio']:.6g}")
    for _, group in summary.iterrows():
        log(f"  p={group['p']} r={group['r']}: {int(group['passed'])}/{int(group['instances'])} ✓, rapporto massimo {group['max_ratio']:.6g}")
    log(f"CSV: {output}")
    log(f"Riassunto: {summary_path}")
    log(f"{'='*60}")

    if metrics["error_seeds"] or metrics["failed_seeds"]:
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
