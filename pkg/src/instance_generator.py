"""
Generatore deterministico di istanze a partire da un seed e dai preset.
"""
from typing import Any, Dict, Optional

import numpy as np

from src.dyadic import DyadicSystem, Exponents
from src.run_config import SWEEP, LAMBDA_PRESETS, get_weight_preset, parse_lambda_preset
from src.testing_conditions import Instance


def make_lambda(system: DyadicSystem, preset: str, rng: np.random.Generator) -> np.ndarray:
    name, a = parse_lambda_preset(preset)
    if name == "unit":
        return np.ones(system.n_cubes)
    if name == "random":
        config = LAMBDA_PRESETS["random"]
        return rng.uniform(config["low"], config["high"], system.n_cubes)
    if not 0 <= a < system.dimension:
        raise ValueError(f"sawyer:a richiede 0 ≤ a < d = {system.dimension}, ricevuto a = {a}")
    return system.volumes ** (a / system.dimension)


def make_weight(system: DyadicSystem, preset: str, rng: np.random.Generator) -> np.ndarray:
    config = get_weight_preset(preset)
    if preset == "unit":
        return np.ones(system.n_leaves)
    values = rng.lognormal(config["mean"], config["sigma"], system.n_leaves)
    if preset == "sparse":
        values[rng.random(system.n_leaves) < config["zero_probability"]] = 0.0
    return values


def generate_instance(
    seed: int,
    dimension: int,
    depth: int,
    p: float,
    r: float,
    lambda_preset: str = "unit",
    weights: str = "unit",
) -> Instance:
    """
    Istanza deterministica per seed: λ, σ e ω vengono da flussi separati dello
    stesso SeedSequence, così cambiare un preset non sposta gli altri.
    """
    system = DyadicSystem(dimension, depth)
    exponents = Exponents(p, r)
    lam_stream, sigma_stream, omega_stream = np.random.SeedSequence(seed).spawn(3)
    lam = make_lambda(system, lambda_preset, np.random.default_rng(lam_stream))
    sigma = make_weight(system, weights, np.random.default_rng(sigma_stream))
    omega = make_weight(system, weights, np.random.default_rng(omega_stream))
    return Instance(system, lam, sigma, omega, exponents)


def sweep_parameters(seed: int, sweep: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Parametri (d, L, p, r, pesi) della sweep di accettazione, derivati dal seed."""
    sweep = sweep or SWEEP
    rng = np.random.default_rng([seed, 0x5EED])
    dims = sorted(sweep["dimensions"])
    dimension = int(dims[rng.integers(len(dims))])
    depth = int(rng.integers(sweep["dimensions"][dimension] + 1))
    return {
        "dimension": dimension,
        "depth": depth,
        "p": float(sweep["p_values"][rng.integers(len(sweep["p_values"]))]),
        "r": float(sweep["r_values"][rng.integers(len(sweep["r_values"]))]),
        "weights": sweep["weights"][rng.integers(len(sweep["weights"]))],
        "lambda_preset": sweep["lambda"],
    }


def generate_sweep_instance(seed: int) -> Instance:
    params = sweep_parameters(seed)
    return generate_instance(
        seed,
        params["dimension"],
        params["depth"],
        params["p"],
        params["r"],
        params["lambda_preset"],
        params["weights"],
    )


def random_test_pair(inst: Instance, seed: int):
    """Coppia (f, a) casuale e non negativa per la traccia della dimostrazione."""
    f_stream, a_stream = np.random.SeedSequence([seed, 1]).spawn(2)
    f = np.random.default_rng(f_stream).lognormal(0.0, 1.0, inst.system.n_leaves)
    a = np.random.default_rng(a_stream).uniform(0.0, 1.0, inst.system.n_cubes)
    return f, a
