"""
Configurazione: preset per i coefficienti λ e per i pesi, budget di
ottimizzazione e valori di default sovrascrivibili da variabili d'ambiente (.env).

Preset λ:
- unit: λ_Q = 1
- random: λ_Q uniforme in [0,1)
- sawyer:a: λ_Q = |Q|^{a/d} con 0 ≤ a < d (coefficienti frazionari)

Preset pesi (σ e ω estratti indipendentemente):
- unit: densità costante 1
- lognormal: densità log-normali
- sparse: log-normali con zeri casuali (medie pesate nulle dove la massa è nulla)
"""
import os
from dataclasses import dataclass

LAMBDA_PRESETS = {
    "unit": {
        "description": "λ_Q = 1 per ogni cubo",
    },
    "random": {
        "description": "λ_Q ~ U[0,1)",
        "low": 0.0,
        "high": 1.0,
    },
    "sawyer": {
        "description": "λ_Q = |Q|^{a/d}, 0 ≤ a < d",
    },
}

WEIGHT_PRESETS = {
    "unit": {
        "description": "densità costante 1",
    },
    "lognormal": {
        "description": "densità log-normale per foglia",
        "mean": 0.0,
        "sigma": 1.0,
    },
    "sparse": {
        "description": "log-normale con zeri casuali",
        "mean": 0.0,
        "sigma": 1.0,
        "zero_probability": 0.3,
    },
}

# Parametri della sweep di accettazione, scelti in modo deterministico dal seed.
SWEEP = {
    "dimensions": {1: 4, 2: 2},  # dimensione -> profondità massima
    "p_values": [1.5, 2.0, 3.0],
    "r_values": [1.0, 2.0, 4.0, float("inf")],
    "weights": ["unit", "lognormal", "sparse"],
    "lambda": "random",
}


def _env_float(name: str, default: float) -> float:
    value = os.getenv(name)
    return float(value) if value else default


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    return int(value) if value else default


def default_tol() -> float:
    return _env_float("DYADICBENCH_TOL", 1e-9)


def results_dir() -> str:
    return os.getenv("DYADICBENCH_RESULTS_DIR", "results")


@dataclass(frozen=True)
class Budget:
    """Budget dell'ottimizzazione: restart, iterazioni e seed."""

    restarts: int = 16
    iterations: int = 200
    seed: int = 0
    # quanti cubi R migliori raffinare col gradiente nel test duale
    dual_refine: int = 3

    @classmethod
    def from_env(cls, **overrides) -> "Budget":
        values = {
            "restarts": _env_int("DYADICBENCH_RESTARTS", cls.restarts),
            "iterations": _env_int("DYADICBENCH_ITERS", cls.iterations),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def parse_lambda_preset(preset: str):
    """
    Interpreta un preset λ ("unit", "random", "sawyer:a").

    Returns:
        Tupla (nome, parametro a oppure None)
    """
    name, _, arg = preset.partition(":")
    if name not in LAMBDA_PRESETS:
        raise ValueError(f"Preset λ '{preset}' non trovato. Usa {', '.join(LAMBDA_PRESETS)}.")
    if name == "sawyer":
        if not arg:
            raise ValueError("Il preset sawyer richiede l'esponente, es. sawyer:0.5")
        return name, float(arg)
    if arg:
        raise ValueError(f"Il preset '{name}' non accetta parametri")
    return name, None


def get_weight_preset(name: str) -> dict:
    """Restituisce la configurazione per un preset di pesi."""
    if name not in WEIGHT_PRESETS:
        raise ValueError(f"Preset pesi '{name}' non trovato. Usa {', '.join(WEIGHT_PRESETS)}.")
    return WEIGHT_PRESETS[name]


def get_all_weight_presets() -> list:
    return list(WEIGHT_PRESETS.keys())


# Codici di uscita dei comandi.
EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_INPUT = 2


def add_instance_arguments(parser):
    """Flag comuni per generare un'istanza (gen, batch, search)."""
    parser.add_argument("--seed", type=int, default=0, help="Seed del generatore")
    parser.add_argument("--dim", type=int, default=1, help="Dimensione d")
    parser.add_argument("--depth", type=int, default=2, help="Profondità L")
    parser.add_argument("--p", type=float, default=2.0, help="Esponente p in (1,∞)")
    parser.add_argument("--r", type=float, default=2.0, help="Esponente r in [1,∞] (accetta 'inf')")
    parser.add_argument("--lambda-preset", default="unit", help="unit, random oppure sawyer:a")
    parser.add_argument("--weights", default="unit", choices=get_all_weight_presets(), help="Preset dei pesi σ, ω")


def add_budget_arguments(parser):
    """Flag comuni per il budget e la tolleranza (verify, batch, search)."""
    parser.add_argument("--budget-restarts", type=int, default=None, help="Restart dell'ottimizzatore per C̃")
    parser.add_argument("--budget-iters", type=int, default=None, help="Iterazioni per restart")
    parser.add_argument("--tol", type=float, default=None, help="Tolleranza relativa (default 1e-9)")
    parser.add_argument("--wandb", action="store_true", help="Invia le metriche a Weights & Biases")


def budget_from_args(args, seed: int = 0) -> Budget:
    return Budget.from_env(restarts=args.budget_restarts, iterations=args.budget_iters, seed=seed)


def tol_from_args(args) -> float:
    return args.tol if args.tol is not None else default_tol()
