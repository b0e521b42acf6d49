"""
Disuguaglianze ausiliarie con costanti esplicite: Stein, Doob e l'immersione
di Carleson. Ogni verifica restituisce un InequalityCheck con entrambi i lati.
"""
import math
from typing import Iterable

import numpy as np

from src.dyadic import DyadicSystem, LeafFunction, conjugate, masses, weighted_averages
from src.metrics import DEFAULT_TOL, InequalityCheck, check
from src.operators import SequenceFunction, lr_norm, maximal_function, norm_Lp, norm_Lp_lr, norm_Lp_lr_sequence


class CarlesonPreconditionError(ValueError):
    """Le ipotesi del lemma di Carleson non sono soddisfatte dalla famiglia."""


DOOB_MODES = ("scalar", "linf", "l1")


def stein_constant(p_prime: float, r_prime: float) -> float:
    """
    C_{p',r'} = (p'/r')^{1/r'} se p' ≥ r', altrimenti (p/r)^{1/r}.

    Con r' = ∞ si è sempre nel secondo ramo (r = 1, costante p).
    """
    if not math.isinf(r_prime) and p_prime >= r_prime:
        return (p_prime / r_prime) ** (1.0 / r_prime)
    p, r = conjugate(p_prime), conjugate(r_prime)
    return (p / r) ** (1.0 / r)


def carleson_constant(p: float) -> float:
    return 2 ** (1.0 / p) * conjugate(p)


def theorem_constant(p: float, r: float) -> float:
    """C_{p',r'} · 20 p p', il fattore davanti a (C + C*)."""
    p_prime, r_prime = conjugate(p), conjugate(r)
    return stein_constant(p_prime, r_prime) * 20 * p * p_prime


def level_aggregate(system: DyadicSystem, g: SequenceFunction) -> np.ndarray:
    """G_k = Σ_{Q di livello k} g_Q: un vettore per livello (supporti disgiunti)."""
    g = np.asarray(g, dtype=float)
    result = np.zeros((system.depth + 1, system.n_leaves))
    for k in range(system.depth + 1):
        start, stop = system.level_offsets[k], system.level_offsets[k + 1]
        result[k] = g[start:stop].sum(axis=0)
    return result


def conditional_expectations(system: DyadicSystem, levels: np.ndarray, w: LeafFunction) -> np.ndarray:
    """E_w(G_k | F_k) per ogni livello k, valutata sulle foglie."""
    result = np.zeros_like(levels, dtype=float)
    for k in range(system.depth + 1):
        averaged = weighted_averages(system, levels[k], w)
        result[k] = averaged[system.chains[k, system.leaf_positions]]
    return result


def stein_cube_lhs(system: DyadicSystem, g: SequenceFunction, omega: LeafFunction, p_prime: float, r_prime: float) -> float:
    """‖(⟨g_Q⟩^ω_Q 1_Q)_Q‖ indicizzato per cubi."""
    g = np.asarray(g, dtype=float)
    totals = masses(system, omega)
    integrals = (g * np.asarray(omega)[None, :]).sum(axis=1) * system.leaf_volume
    coeffs = np.zeros(system.n_cubes)
    positive = totals > 0
    coeffs[positive] = integrals[positive] / totals[positive]
    return norm_Lp_lr(system, coeffs, omega, p_prime, r_prime)


def verify_stein(
    system: DyadicSystem,
    g: SequenceFunction,
    omega: LeafFunction,
    p_prime: float,
    r_prime: float,
    tol: float = DEFAULT_TOL,
) -> InequalityCheck:
    """‖(⟨g_Q⟩^ω_Q 1_Q)‖_{L^{p'}_{ℓ^{r'}}(ω)} ≤ C_{p',r'} ‖(g_Q 1_Q)‖_{L^{p'}_{ℓ^{r'}}(ω)}."""
    # Il lato sinistro passa per i livelli: un solo cubo per livello contiene ogni foglia.
    expectations = conditional_expectations(system, level_aggregate(system, g), omega)
    lhs = norm_Lp(system, lr_norm(expectations, r_prime, axis=0), omega, p_prime)
    constant = stein_constant(p_prime, r_prime)
    rhs = constant * norm_Lp_lr_sequence(system, g, omega, p_prime, r_prime)
    return check("stein", lhs, rhs, constant, tol)


def verify_doob(
    system: DyadicSystem,
    values: np.ndarray,
    w: LeafFunction,
    p: float,
    mode: str = "scalar",
    tol: float = DEFAULT_TOL,
) -> InequalityCheck:
    """
    Disuguaglianza di Doob sulla filtrazione dei livelli diadici.

    Args:
        values: funzione sulle foglie (mode "scalar") o matrice (livelli × foglie)
        mode: "scalar" (‖sup_k E(f|F_k)‖ ≤ p'‖f‖), "linf" (stessa costante p'
            per successioni in ℓ^∞) oppure "l1" (costante p)
    """
    if mode not in DOOB_MODES:
        raise ValueError(f"Modalità '{mode}' non supportata. Usa {', '.join(DOOB_MODES)}.")
    if mode == "scalar":
        f = np.asarray(values, dtype=float)
        lhs = norm_Lp(system, maximal_function(system, f, w), w, p)
        constant = conjugate(p)
        return check("doob_scalar", lhs, constant * norm_Lp(system, np.abs(f), w, p), constant, tol)
    levels = np.asarray(values, dtype=float)
    expectations = conditional_expectations(system, levels, w)
    r = math.inf if mode == "linf" else 1
    constant = conjugate(p) if mode == "linf" else p
    lhs = norm_Lp(system, lr_norm(expectations, r, axis=0), w, p)
    rhs = constant * norm_Lp(system, lr_norm(levels, r, axis=0), w, p)
    return check(f"doob_{mode}", lhs, rhs, constant, tol)


def verify_carleson(
    system: DyadicSystem,
    members: Iterable[int],
    residual: dict,
    f: LeafFunction,
    sigma: LeafFunction,
    p: float,
    tol: float = DEFAULT_TOL,
    name: str = "carleson",
) -> InequalityCheck:
    """
    (Σ_F (⟨|f|⟩^σ_F)^p σ(F))^{1/p} ≤ 2^{1/p} p' ‖f‖_{L^p(σ)}.

    Raises:
        CarlesonPreconditionError: se i residui non sono disgiunti, non stanno
            nei rispettivi cubi o non portano metà della massa.
    """
    members = list(members)
    total = masses(system, sigma)
    leaf_mass = np.asarray(sigma) * system.leaf_volume
    seen = set()
    for member in members:
        leaves = set(residual[member])
        if leaves & seen:
            raise CarlesonPreconditionError(f"Residui non disgiunti in {system.cubes[member]}")
        seen |= leaves
        if not leaves <= set(system.leaves_of(member).tolist()):
            raise CarlesonPreconditionError(f"E({system.cubes[member]}) non è contenuto nel cubo")
        residual_mass = float(sum(leaf_mass[leaf] for leaf in sorted(leaves)))
        if total[member] > 2 * residual_mass * (1 + tol):
            raise CarlesonPreconditionError(
                f"σ({system.cubes[member]}) > 2σ(E): {total[member]} > {2 * residual_mass}"
            )
    avg = weighted_averages(system, np.abs(f), sigma)
    lhs = sum(avg[m] ** p * total[m] for m in members) ** (1.0 / p)
    constant = carleson_constant(p)
    return check(name, lhs, constant * norm_Lp(system, np.abs(f), sigma, p), constant, tol)
