"""
Costanti di test: diretta C e duale C* (limite inferiore e surrogato superiore).
"""
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from src.dyadic import DyadicSystem, Exponents, masses
from src.operators import (
    apply_S_localized,
    apply_T,
    apply_T_localized,
    apply_T_star_localized,
    chain_norms,
    norm_Linf_lr,
    norm_Lp,
    norm_Lp_lr,
)
from src.run_config import Budget


@dataclass(frozen=True, eq=False)
class Instance:
    """I dati del teorema: sistema, λ, σ, ω ed esponenti."""

    system: DyadicSystem
    lam: np.ndarray
    sigma: np.ndarray
    omega: np.ndarray
    exponents: Exponents

    def __post_init__(self):
        object.__setattr__(self, "lam", self.system.coefficients(self.lam))
        object.__setattr__(self, "sigma", self.system.leaf_function(self.sigma))
        object.__setattr__(self, "omega", self.system.leaf_function(self.omega))

    @property
    def p(self) -> float:
        return self.exponents.p

    @property
    def r(self) -> float:
        return self.exponents.r

    def with_lambda(self, lam: np.ndarray) -> "Instance":
        return Instance(self.system, lam, self.sigma, self.omega, self.exponents)


def _localized_mask(system: DyadicSystem, pos: int) -> np.ndarray:
    return system.chains[int(system.levels[pos])] == pos


def direct_testing_constant(inst: Instance) -> Tuple[float, Optional[int]]:
    """
    C = max_R ‖T_R(σ)‖_{L^p_{ℓ^r}(ω)} / σ(R)^{1/p} sui cubi con σ(R) > 0.

    Returns:
        Tupla (costante, posizione del cubo testimone oppure None)
    """
    system = inst.system
    sigma_mass = masses(system, inst.sigma)
    best, witness = 0.0, None
    for pos in range(system.n_cubes):
        if sigma_mass[pos] <= 0:
            continue
        out = apply_T_localized(system, inst.sigma, inst.lam, pos)
        ratio = norm_Lp_lr(system, out, inst.omega, inst.p, inst.r) / sigma_mass[pos] ** (1.0 / inst.p)
        if witness is None or ratio > best:
            best, witness = ratio, pos
    return best, witness


@dataclass
class DualTestingResult:
    """Intervallo [lower, upper] per C* con i rispettivi testimoni."""

    lower: float
    upper: float
    lower_cube: Optional[int] = None
    lower_coefficients: Optional[np.ndarray] = field(default=None, repr=False)
    upper_cube: Optional[int] = None


def dual_ratio(inst: Instance, pos: int, a: np.ndarray) -> float:
    """‖T*_R(gω)‖_{L^{p'}(σ)} / (‖g‖_{L^∞_{ℓ^{r'}}(ω)} ω(R)^{1/p'}); 0 se il denominatore è nullo."""
    system = inst.system
    p_prime, r_prime = inst.exponents.p_prime, inst.exponents.r_prime
    a = np.where(_localized_mask(system, pos), a, 0.0)
    denominator = norm_Linf_lr(system, a, inst.omega, r_prime) * masses(system, inst.omega)[pos] ** (1.0 / p_prime)
    if denominator <= 0:
        return 0.0
    numerator = norm_Lp(system, apply_T_star_localized(system, a, inst.lam, inst.omega, pos), inst.sigma, p_prime)
    return numerator / denominator


def dual_testing_upper(inst: Instance) -> Tuple[float, Optional[int]]:
    """Surrogato max_R ‖T_R(ω)‖_{L^{p'}_{ℓ^r}(σ)} / ω(R)^{1/p'}."""
    system = inst.system
    p_prime = inst.exponents.p_prime
    omega_mass = masses(system, inst.omega)
    best, witness = 0.0, None
    for pos in range(system.n_cubes):
        if omega_mass[pos] <= 0:
            continue
        out = apply_T_localized(system, inst.omega, inst.lam, pos)
        ratio = norm_Lp_lr(system, out, inst.sigma, p_prime, inst.r) / omega_mass[pos] ** (1.0 / p_prime)
        if witness is None or ratio > best:
            best, witness = ratio, pos
    return best, witness


def dual_testing_constant_via_S(inst: Instance) -> Tuple[float, Optional[int]]:
    """Per r = 1: max_R ‖S_R(ω)‖_{L^{p'}(σ)} / ω(R)^{1/p'}."""
    system = inst.system
    p_prime = inst.exponents.p_prime
    omega_mass = masses(system, inst.omega)
    best, witness = 0.0, None
    for pos in range(system.n_cubes):
        if omega_mass[pos] <= 0:
            continue
        value = norm_Lp(system, apply_S_localized(system, inst.omega, inst.lam, pos), inst.sigma, p_prime)
        ratio = value / omega_mass[pos] ** (1.0 / p_prime)
        if witness is None or ratio > best:
            best, witness = ratio, pos
    return best, witness


def _dual_candidates(inst: Instance, pos: int):
    system = inst.system
    mask = _localized_mask(system, pos)
    yield np.where(mask, 1.0, 0.0)
    for q in np.flatnonzero(mask):
        indicator = np.zeros(system.n_cubes)
        indicator[q] = 1.0
        yield indicator
    if 1 < inst.r < math.inf:
        profile = apply_T(system, inst.omega, inst.lam) ** (inst.r - 1)
        yield np.where(mask, profile, 0.0)


def project_chainwise(system: DyadicSystem, a: np.ndarray, omega: np.ndarray, r_prime: float) -> np.ndarray:
    """
    Riporta a nel vincolo |g(x)|_{ℓ^{r'}} ≤ 1 sulle foglie con ω > 0,
    riscalando ogni cubo col fattore peggiore tra le sue foglie.
    """
    a = np.clip(a, 0.0, None)
    norms = chain_norms(system, a, r_prime)[system.leaf_positions]
    leaf_scale = 1.0 / np.maximum(1.0, norms)
    active = system.membership & (np.asarray(omega) > 0)[None, :]
    cube_scale = np.where(active, leaf_scale[None, :], np.inf).min(axis=1)
    cube_scale[np.isinf(cube_scale)] = 0.0
    return a * cube_scale


def _refine_dual(inst: Instance, pos: int, start: np.ndarray, iterations: int) -> Tuple[float, np.ndarray]:
    # Ascesa del gradiente proiettata su Φ(a) = ‖T*_R(aω)‖_{L^{p'}(σ)};
    # Φ è la norma di una mappa lineare in a: il gradiente è analitico.
    system = inst.system
    p_prime, r_prime = inst.exponents.p_prime, inst.exponents.r_prime
    mask = _localized_mask(system, pos)
    weights = np.where(mask, apply_T(system, inst.omega, inst.lam), 0.0)
    B = (system.membership * weights[:, None]).T
    sigma_vol = inst.sigma * system.leaf_volume

    a = project_chainwise(system, np.where(mask, start, 0.0), inst.omega, r_prime)
    best = dual_ratio(inst, pos, a)
    step = 1.0
    for _ in range(iterations):
        h = B @ a
        phi = float((h ** p_prime * sigma_vol).sum()) ** (1.0 / p_prime)
        if phi <= 0:
            break
        grad = phi ** (1 - p_prime) * (B.T @ (h ** (p_prime - 1) * sigma_vol))
        improved = False
        while step > 1e-12:
            candidate = project_chainwise(system, np.where(mask, a + step * grad, 0.0), inst.omega, r_prime)
            value = dual_ratio(inst, pos, candidate)
            if value > best:
                a, best, improved = candidate, value, True
                step *= 2
                break
            step /= 2
        if not improved:
            break
    return best, a


def dual_testing_constant(inst: Instance, budget: Optional[Budget] = None) -> DualTestingResult:
    """
    Intervallo per C*: limite inferiore da candidati g ≥ 0 costanti a tratti
    (tutti uno, indicatrici, profilo di Hölder, ascesa proiettata) e limite
    superiore dal surrogato ‖T_R(ω)‖.
    """
    budget = budget or Budget()
    system = inst.system
    upper, upper_cube = dual_testing_upper(inst)
    omega_mass = masses(system, inst.omega)

    per_cube = []
    for pos in range(system.n_cubes):
        if omega_mass[pos] <= 0:
            continue
        best, best_a = -1.0, None
        for candidate in _dual_candidates(inst, pos):
            value = dual_ratio(inst, pos, candidate)
            if value > best:
                best, best_a = value, candidate
        per_cube.append((best, pos, best_a))

    if not per_cube:
        return DualTestingResult(0.0, upper, None, None, upper_cube)

    # raffina solo i cubi migliori; ordinamento stabile per posizione a parità
    per_cube.sort(key=lambda item: (-item[0], item[1]))
    if not math.isinf(inst.exponents.r_prime):
        refined = []
        for best, pos, best_a in per_cube[: budget.dual_refine]:
            value, a = _refine_dual(inst, pos, best_a, budget.iterations)
            refined.append((value, pos, a) if value > best else (best, pos, best_a))
        per_cube = sorted(refined + per_cube[budget.dual_refine:], key=lambda item: (-item[0], item[1]))

    # nessun taglio a upper: l'ordine lower ≤ upper lo giudica il controllo dual_bracket
    lower, lower_cube, lower_a = per_cube[0]
    return DualTestingResult(lower, upper, lower_cube, lower_a, upper_cube)
