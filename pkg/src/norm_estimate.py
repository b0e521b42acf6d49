"""
Stima della norma C̃ dell'operatore T(· σ): L^p(σ) → L^p_{ℓ^r}(ω).

Il limite inferiore viene da candidati (indicatrici 1_R, funzioni casuali) e
da un'ascesa del gradiente proiettata; per p = r = 2 il valore esatto è la
radice del massimo autovalore generalizzato, calcolato con le potenze.
"""
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.dyadic import masses
from src.operators import apply_T, chain_norms, norm_Lp, norm_Lp_lr
from src.run_config import Budget
from src.testing_conditions import Instance

# Residuo relativo per l'iterazione delle potenze.
POWER_TOL = 1e-10
POWER_MAX_ITER = 200_000


@dataclass
class NormEstimate:
    """Limite inferiore per C̃, valore esatto (solo p = r = 2) e testimone."""

    lower: float
    exact: Optional[float]
    witness: Optional[np.ndarray] = field(default=None, repr=False)
    evaluations: int = 0


def norm_ratio(inst: Instance, f: np.ndarray) -> float:
    """‖T(fσ)‖_{L^p_{ℓ^r}(ω)} / ‖f‖_{L^p(σ)}; 0 se ‖f‖ = 0."""
    system = inst.system
    denominator = norm_Lp(system, f, inst.sigma, inst.p)
    if denominator <= 0:
        return 0.0
    out = apply_T(system, np.asarray(f) * inst.sigma, inst.lam)
    return norm_Lp_lr(system, out, inst.omega, inst.p, inst.r) / denominator


class RatioEvaluator:
    """Valuta il rapporto su un blocco di funzioni (una per riga)."""

    def __init__(self, inst: Instance):
        self.inst = inst
        system = inst.system
        self.weighted_averaging = system.averaging_matrix * inst.sigma[None, :]
        self.omega_vol = inst.omega * system.leaf_volume
        self.sigma_vol = inst.sigma * system.leaf_volume
        self.evaluations = 0

    def __call__(self, block: np.ndarray) -> np.ndarray:
        inst = self.inst
        block = np.atleast_2d(block)
        self.evaluations += block.shape[0]
        coeffs = inst.lam[:, None] * (self.weighted_averaging @ block.T)
        pointwise = chain_norms(inst.system, coeffs, inst.r)[inst.system.leaf_positions]
        numerator = ((pointwise ** inst.p) * self.omega_vol[:, None]).sum(axis=0) ** (1.0 / inst.p)
        denominator = ((block ** inst.p) * self.sigma_vol[None, :]).sum(axis=1) ** (1.0 / inst.p)
        result = np.zeros(block.shape[0])
        positive = denominator > 0
        result[positive] = numerator[positive] / denominator[positive]
        return result

    def normalize(self, f: np.ndarray) -> Optional[np.ndarray]:
        norm = float(((f ** self.inst.p) * self.sigma_vol).sum()) ** (1.0 / self.inst.p)
        return f / norm if norm > 0 else None


def finite_difference_gradient(evaluate: RatioEvaluator, f: np.ndarray) -> np.ndarray:
    """Gradiente per differenze centrali con passo h = 1e-6·max(1,|f|), unilaterale sul bordo f = 0."""
    n = f.size
    h = 1e-6 * np.maximum(1.0, np.abs(f))
    upper = f[None, :] + np.diag(h)
    lower_values = np.maximum(f - h, 0.0)
    lower = np.tile(f, (n, 1))
    lower[np.arange(n), np.arange(n)] = lower_values
    values = evaluate(np.vstack([upper, lower]))
    spacing = f + h - lower_values
    return (values[:n] - values[n:]) / spacing


def projected_gradient_ascent(evaluate: RatioEvaluator, start: np.ndarray, iterations: int):
    """
    Ascesa proiettata (proiezione = troncamento a 0) con backtracking,
    normalizzando ‖f‖_{L^p(σ)} = 1 ad ogni iterazione.

    Returns:
        Tupla (miglior rapporto, funzione testimone)
    """
    f = evaluate.normalize(np.clip(start, 0.0, None))
    if f is None:
        return 0.0, start
    best = float(evaluate(f)[0])
    step = 1.0
    for _ in range(iterations):
        grad = finite_difference_gradient(evaluate, f)
        improved = False
        while step > 1e-12:
            candidate = evaluate.normalize(np.clip(f + step * grad, 0.0, None))
            if candidate is not None:
                value = float(evaluate(candidate)[0])
                if value > best:
                    f, best, improved = candidate, value, True
                    step *= 2
                    break
            step /= 2
        if not improved:
            break
    return best, f


def exact_norm_p2(inst: Instance) -> float:
    """
    C̃ per p = r = 2: radice del massimo autovalore di K v = μ D v con
    K = forma Σ_Q λ_Q² ⟨fσ⟩_Q² ω(Q) e D = diag(σ |foglia|).
    """
    system = inst.system
    support = inst.sigma > 0
    if not np.any(support):
        return 0.0
    B = system.averaging_matrix * inst.sigma[None, :]
    weights = inst.lam ** 2 * masses(system, inst.omega)
    K = B.T @ (weights[:, None] * B)
    d = np.sqrt(inst.sigma[support] * system.leaf_volume)
    M = K[np.ix_(support, support)] / np.outer(d, d)
    mu = dominant_eigenvalue(M)
    return math.sqrt(max(mu, 0.0))


def dominant_eigenvalue(M: np.ndarray, tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER) -> float:
    """Autovalore dominante di una matrice simmetrica semidefinita positiva e non negativa."""
    x = np.ones(M.shape[0]) / math.sqrt(M.shape[0])
    mu = 0.0
    for _ in range(max_iter):
        y = M @ x
        y_norm = np.linalg.norm(y)
        if y_norm == 0:
            return 0.0
        mu = float(x @ y)
        x = y / y_norm
        residual = np.linalg.norm(M @ x - float(x @ (M @ x)) * x)
        if residual <= tol * max(abs(mu), 1e-300):
            return float(x @ (M @ x))
    warnings.warn("Iterazione delle potenze non convergente, uso eigvalsh", RuntimeWarning)
    return float(np.linalg.eigvalsh(M)[-1])


def operator_norm_estimate(inst: Instance, budget: Optional[Budget] = None) -> NormEstimate:
    """
    Limite inferiore per C̃ e, se p = r = 2, valore esatto.

    Il budget esaurito non è un errore: il limite inferiore resta valido.
    """
    budget = budget or Budget()
    system = inst.system
    evaluate = RatioEvaluator(inst)
    sigma_mass = masses(system, inst.sigma)

    exact = exact_norm_p2(inst) if inst.p == 2 and inst.r == 2 else None

    indicators = system.membership[sigma_mass > 0].astype(float)
    if indicators.shape[0] == 0:
        return NormEstimate(0.0, exact, None, evaluate.evaluations)

    values = evaluate(indicators)
    best_index = int(np.argmax(values))
    best, witness = float(values[best_index]), indicators[best_index]

    # un generatore indipendente per restart: il risultato non dipende dall'ordine
    streams = np.random.SeedSequence(budget.seed).spawn(max(budget.restarts, 0))
    for index, stream in enumerate(streams):
        if index == 0:
            start = witness
        else:
            start = np.random.default_rng(stream).uniform(0.0, 1.0, system.n_leaves)
        value, f = projected_gradient_ascent(evaluate, start, budget.iterations)
        if value > best:
            best, witness = value, f
    return NormEstimate(best, exact, witness, evaluate.evaluations)
