"""
Ricerca di istanze con rapporto C̃/(C + C*_upper) elevato.

Hill climbing con restart casuali su perturbazioni moltiplicative di λ, σ e ω:
una mossa viene accettata solo se aumenta il rapporto. Le top-k istanze e i
loro report vengono salvati. Il rapporto non supera mai C_{p',r'}·20pp'.
"""
import json
import sys
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
from dotenv import load_dotenv

from src.instance_generator import generate_instance
from src.instance_io import instance_to_dict, save_instance
from src.logger import ResultLogger, WandBLogger, log
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
from src.testing_conditions import Instance
from src.theorem import theorem_verify
from tasks.search.metrics import SearchMetricsCalculator


def perturb(inst: Instance, rng: np.random.Generator, step: float) -> Instance:
    """Moltiplica λ, σ, ω per exp(step·N(0,1)) su un sottoinsieme casuale delle componenti."""

    def move(values: np.ndarray) -> np.ndarray:
        mask = rng.random(values.size) < 0.5
        factors = np.exp(step * rng.standard_normal(values.size))
        return np.where(mask, values * factors, values)

    return Instance(inst.system, move(inst.lam), move(inst.sigma), move(inst.omega), inst.exponents)


class SearchRunner:
    """Esegue la ricerca per un insieme fissato di parametri."""

    def __init__(
        self,
        params: Dict[str, Any],
        budget: Budget,
        tol: float,
        step: float = 0.5,
        patience: int = 20,
        top_k: int = 5,
        use_wandb: bool = False,
    ):
        self.params = params
        self.budget = budget
        self.tol = tol
        self.step = step
        self.patience = patience
        self.metrics = SearchMetricsCalculator(top_k)
        self.wandb_logger = WandBLogger(enabled=use_wandb)

    def _start(self, seed: int) -> Instance:
        p = self.params
        return generate_instance(seed, p["dimension"], p["depth"], p["p"], p["r"], p["lambda_preset"], p["weights"])

    def _evaluate(self, inst: Instance, iteration: int) -> Dict[str, Any]:
        report = theorem_verify(inst, self.budget, self.tol).to_dict()
        self.metrics.add_candidate(report["ratio"], iteration, inst, report)
        return report

    def run(self, seed: int, iterations: int) -> SearchMetricsCalculator:
        """Con 0 iterazioni valuta soltanto l'istanza iniziale."""
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0xC11B]))
        self.wandb_logger.start_run("search", {**self.params, "seed": seed, "iterations": iterations})

        current = self._start(seed)
        current_ratio = self._evaluate(current, 0)["ratio"]
        stale = 0
        restarts = 0
        for iteration in range(1, iterations + 1):
            if stale >= self.patience:
                restarts += 1
                current = self._start(seed + restarts * 1_000_003)
                current_ratio = self._evaluate(current, iteration)["ratio"]
                stale = 0
                log(f"[{iteration}/{iterations}] restart → {current_ratio:.6g}")
                continue
            try:
                candidate = perturb(current, rng, self.step)
                report = self._evaluate(candidate, iteration)
            except Exception as e:
                log(f"ERRORE iterazione {iteration}: {str(e)}")
                stale += 1
                continue
            if report["ratio"] > current_ratio:
                current, current_ratio, stale = candidate, report["ratio"], 0
                status = "✓" if report["passed"] else "✗"
                log(f"[{iteration}/{iterations}] {status} rapporto {current_ratio:.6g}")
            else:
                stale += 1
            if iteration % 10 == 0:
                self.wandb_logger.log_metrics({"best_ratio": self.metrics.best_ratio, "iteration": iteration})

        self.wandb_logger.log_metrics(self.metrics.get_metrics())
        self.wandb_logger.finish_run()
        return self.metrics

    def save_top(self, output_dir: Path):
        """Salva rank_<i>_instance.json e rank_<i>_report.json per le top-k."""
        output_dir.mkdir(parents=True, exist_ok=True)
        for rank, entry in enumerate(self.metrics.top(), 1):
            save_instance(entry.instance, output_dir / f"rank_{rank}_instance.json")
            with open(output_dir / f"rank_{rank}_report.json", 'w', encoding='utf-8') as f:
                json.dump({**entry.report, "iteration": entry.iteration}, f, indent=2, ensure_ascii=False)


def main(argv=None) -> int:
    """Funzione principale."""
    import argparse

    load_dotenv()
    parser = argparse.ArgumentParser(description="Ricerca del rapporto C̃/(C + C*)")
    add_instance_arguments(parser)
    add_budget_arguments(parser)
    parser.add_argument("--iterations", type=int, default=100, help="Mosse di hill climbing")
    parser.add_argument("--step", type=float, default=0.5, help="Ampiezza delle perturbazioni log-normali")
    parser.add_argument("--patience", type=int, default=20, help="Mosse senza miglioramenti prima di un restart")
    parser.add_argument("--top-k", type=int, default=5, help="Istanze da salvare")
    parser.add_argument("--out", default=None, help="Directory di output (default: results/search/<timestamp>)")
    args = parser.parse_args(argv)

    params = {
        "dimension": args.dim,
        "depth": args.depth,
        "p": args.p,
        "r": args.r,
        "lambda_preset": args.lambda_preset,
        "weights": args.weights,
    }
    runner = SearchRunner(
        params,
        budget_from_args(args, seed=args.seed),
        tol_from_args(args),
        step=args.step,
        patience=args.patience,
        top_k=args.top_k,
        use_wandb=args.wandb,
    )

    print("=" * 60, file=sys.stderr)
    print(f"RICERCA: d={args.dim} L={args.depth} p={args.p} r={args.r}", file=sys.stderr)
    print(f"Iterazioni: {args.iterations}, seed: {args.seed}", file=sys.stderr)
    print("=" * 60 + "\n", file=sys.stderr)

    try:
        metrics = runner.run(args.seed, args.iterations)
    except ValueError as e:
        log(f"ERRORE: {e}")
        return EXIT_BAD_INPUT

    output_dir = Path(args.out) if args.out else ResultLogger("search").results_dir
    runner.save_top(output_dir)
    summary = metrics.get_metrics()
    best: Optional[Dict[str, Any]] = None
    if metrics.top():
        best = instance_to_dict(metrics.top()[0].instance)
    json.dump({**summary, "best_instance": best}, sys.stdout, indent=2, ensure_ascii=False)
    sys.stdout.write("\n")

    log(f"\n{'='*60}")
    log("RICERCA COMPLETATA")
    log(f"Miglior rapporto: {summary['best_ratio']:.6g} ({summary['evaluations']} valutazioni)")
    log(f"Top-{len(metrics.top())} salvate in: {output_dir}/")
    log(f"{'='*60}")
    return EXIT_OK if summary["all_passed"] else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
