"""
Operatori diadici positivi T, T*, S e loro localizzazioni, norme L^p_{ℓ^r},
accoppiamento duale, funzione massimale diadica e partizione di linearizzazione.

Un'uscita di T è una CubeCoefficients c, da leggere come la famiglia (c_Q 1_Q)_Q.
Una SequenceFunction è un np.ndarray (|D| × foglie) con g[Q, x] = 0 fuori da Q.
"""
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from src.dyadic import (
    CubeCoefficients,
    CubeId,
    DyadicSystem,
    InvalidFunctionError,
    LeafFunction,
    averages,
    masses,
    weighted_averages,
)

SequenceFunction = np.ndarray


def lr_norm(values: np.ndarray, r: float, axis: int = 0) -> np.ndarray:
    """Norma ℓ^r lungo un asse, con r = ∞ come massimo."""
    if math.isinf(r):
        return values.max(axis=axis)
    if r == 1:
        return values.sum(axis=axis)
    return (values ** r).sum(axis=axis) ** (1.0 / r)


def chain_norms(system: DyadicSystem, coeffs: np.ndarray, r: float) -> np.ndarray:
    """
    Norma ℓ^r di (c_Q)_{Q ⊇ R} per ogni cubo R.

    Accetta anche coefficienti con assi aggiuntivi (|D| × m) per valutazioni in blocco.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    padded = np.concatenate([coeffs, np.zeros((1,) + coeffs.shape[1:])], axis=0)
    return lr_norm(padded[system.chains], r, axis=0)


def pointwise_lr_all(system: DyadicSystem, out: CubeCoefficients, r: float) -> np.ndarray:
    """|T f(x)|_{ℓ^r} su tutte le foglie, nell'ordine canonico."""
    return chain_norms(system, out, r)[system.leaf_positions]


def pointwise_lr(system: DyadicSystem, out: CubeCoefficients, leaf: Union[CubeId, int], r: float) -> float:
    pos = system.position(leaf)
    if system.levels[pos] != system.depth:
        raise InvalidFunctionError(f"{system.cubes[pos]} non è una foglia")
    return float(chain_norms(system, out, r)[pos])


def _localization_mask(system: DyadicSystem, cube: Optional[Union[CubeId, int]]) -> np.ndarray:
    if cube is None:
        return np.ones(system.n_cubes, dtype=bool)
    pos = system.position(cube)
    level = int(system.levels[pos])
    return system.chains[level] == pos


def apply_T(system: DyadicSystem, f: LeafFunction, lam: CubeCoefficients) -> CubeCoefficients:
    """T(f) = (λ_Q ⟨f⟩_Q 1_Q)_Q, restituito come coefficienti λ_Q ⟨f⟩_Q."""
    return np.asarray(lam) * averages(system, f)


def apply_T_localized(
    system: DyadicSystem, f: LeafFunction, lam: CubeCoefficients, cube: Union[CubeId, int]
) -> CubeCoefficients:
    """T_R(f): come apply_T ma nullo sui cubi non contenuti in R."""
    return np.where(_localization_mask(system, cube), apply_T(system, f, lam), 0.0)


def _adjoint_coefficients(
    system: DyadicSystem,
    g: Union[CubeCoefficients, SequenceFunction],
    lam: CubeCoefficients,
    w: LeafFunction,
) -> np.ndarray:
    # λ_Q ⟨g_Q w⟩_Q per ogni cubo
    g = np.asarray(g, dtype=float)
    w = np.asarray(w, dtype=float)
    if g.ndim == 1:
        return np.asarray(lam) * g * averages(system, w)
    integrals = (g * w[None, :]).sum(axis=1) * system.leaf_volume
    return np.asarray(lam) * integrals / system.volumes


def apply_T_star(
    system: DyadicSystem,
    g: Union[CubeCoefficients, SequenceFunction],
    lam: CubeCoefficients,
    w: LeafFunction,
) -> LeafFunction:
    """T*(g w) = Σ_Q λ_Q ⟨g_Q w⟩_Q 1_Q, valutato sulle foglie."""
    return chain_norms(system, _adjoint_coefficients(system, g, lam, w), 1)[system.leaf_positions]


def apply_T_star_localized(
    system: DyadicSystem,
    g: Union[CubeCoefficients, SequenceFunction],
    lam: CubeCoefficients,
    w: LeafFunction,
    cube: Union[CubeId, int],
) -> LeafFunction:
    coeffs = np.where(
        _localization_mask(system, cube), _adjoint_coefficients(system, g, lam, w), 0.0
    )
    return chain_norms(system, coeffs, 1)[system.leaf_positions]


def apply_S(system: DyadicSystem, f: LeafFunction, lam: CubeCoefficients) -> LeafFunction:
    """S f = |T f|_1 = Σ_Q λ_Q ⟨f⟩_Q 1_Q."""
    return pointwise_lr_all(system, apply_T(system, f, lam), 1)


def apply_S_localized(
    system: DyadicSystem, f: LeafFunction, lam: CubeCoefficients, cube: Union[CubeId, int]
) -> LeafFunction:
    return pointwise_lr_all(system, apply_T_localized(system, f, lam, cube), 1)


def norm_Lp(system: DyadicSystem, h: LeafFunction, w: LeafFunction, p: float) -> float:
    """‖h‖_{L^p(w)} per h costante sulle foglie."""
    h = np.asarray(h, dtype=float)
    integral = float((h ** p * np.asarray(w) * system.leaf_volume).sum())
    return integral ** (1.0 / p)


def norm_Lp_lr(
    system: DyadicSystem, out: CubeCoefficients, w: LeafFunction, p: float, r: float
) -> float:
    """‖(c_Q 1_Q)_Q‖_{L^p_{ℓ^r}(w)}."""
    return norm_Lp(system, pointwise_lr_all(system, out, r), w, p)


def norm_Linf_lr(system: DyadicSystem, out: CubeCoefficients, w: LeafFunction, r: float) -> float:
    """‖(c_Q 1_Q)_Q‖_{L^∞_{ℓ^r}(w)}: estremo superiore essenziale rispetto a w."""
    values = pointwise_lr_all(system, out, r)[np.asarray(w) > 0]
    return float(values.max()) if values.size else 0.0


def sequence_from_coefficients(system: DyadicSystem, a: CubeCoefficients) -> SequenceFunction:
    """(a_Q 1_Q)_Q come SequenceFunction."""
    return np.asarray(a, dtype=float)[:, None] * system.membership


def sequence_function(system: DyadicSystem, values: np.ndarray) -> SequenceFunction:
    """Valida una SequenceFunction forzando il supporto g_Q = g_Q 1_Q."""
    array = np.array(values, dtype=float)
    if array.shape != (system.n_cubes, system.n_leaves):
        raise InvalidFunctionError(
            f"Attesa forma {(system.n_cubes, system.n_leaves)}, ricevuta {array.shape}"
        )
    if np.any(array < 0):
        raise InvalidFunctionError("Le componenti devono essere ≥ 0")
    array = array * system.membership
    array.setflags(write=False)
    return array


def norm_Lp_lr_sequence(
    system: DyadicSystem, g: SequenceFunction, w: LeafFunction, p: float, r: float
) -> float:
    """‖(g_Q)_Q‖_{L^p_{ℓ^r}(w)} per una famiglia generica."""
    return norm_Lp(system, lr_norm(np.asarray(g), r, axis=0), w, p)


def dual_pairing(
    system: DyadicSystem,
    f: LeafFunction,
    a: CubeCoefficients,
    sigma: LeafFunction,
    omega: LeafFunction,
    lam: CubeCoefficients,
) -> float:
    """⟨T(fσ), g⟩_ω = Σ_Q λ_Q ⟨fσ⟩_Q a_Q ω(Q) per g = (a_Q 1_Q)."""
    terms = pairing_terms(system, f, a, sigma, omega, lam)
    return float(terms.sum())


def pairing_terms(
    system: DyadicSystem,
    f: LeafFunction,
    a: CubeCoefficients,
    sigma: LeafFunction,
    omega: LeafFunction,
    lam: CubeCoefficients,
) -> np.ndarray:
    """I singoli addendi λ_Q ⟨fσ⟩_Q a_Q ω(Q) dell'accoppiamento duale."""
    fs = np.asarray(f) * np.asarray(sigma)
    return np.asarray(lam) * averages(system, fs) * np.asarray(a) * masses(system, omega)


def dual_pairing_leafwise(
    system: DyadicSystem,
    f: LeafFunction,
    a: CubeCoefficients,
    sigma: LeafFunction,
    omega: LeafFunction,
    lam: CubeCoefficients,
) -> float:
    """∫ Σ_Q (T(fσ))_Q g_Q ω, calcolato foglia per foglia."""
    out = apply_T(system, np.asarray(f) * np.asarray(sigma), lam)
    products = (out * np.asarray(a))[:, None] * system.membership
    integrand = products.sum(axis=0) * np.asarray(omega)
    return float((integrand * system.leaf_volume).sum())


def maximal_function(system: DyadicSystem, f: LeafFunction, w: LeafFunction) -> LeafFunction:
    """M^w f(x) = max_{Q ∋ x} ⟨|f|⟩^w_Q."""
    return pointwise_lr_all(system, weighted_averages(system, np.abs(f), w), math.inf)


@dataclass(frozen=True)
class LinearizationPartition:
    """Insiemi E(Q) di foglie (posizioni 0..2^{Ld}-1), uno per cubo."""

    sets: Tuple[frozenset, ...]

    def covered(self) -> frozenset:
        return frozenset().union(*self.sets)

    def is_disjoint(self) -> bool:
        return sum(len(s) for s in self.sets) == len(self.covered())


def linearization_partition(
    system: DyadicSystem, f: LeafFunction, lam: CubeCoefficients
) -> LinearizationPartition:
    """
    Assegna ogni foglia con |Tf|_∞ > 0 al cubo più grande della sua catena che
    realizza il massimo.
    """
    out = apply_T(system, f, lam)
    chain_values = out[system.chains[:, system.leaf_positions]]
    sup = chain_values.max(axis=0)
    # argmax restituisce il primo indice, cioè il livello più grossolano
    winners = np.argmax(chain_values == sup[None, :], axis=0)
    sets = [set() for _ in range(system.n_cubes)]
    for leaf in range(system.n_leaves):
        if sup[leaf] > 0:
            sets[system.chains[winners[leaf], system.leaf_positions[leaf]]].add(leaf)
    return LinearizationPartition(tuple(frozenset(s) for s in sets))


def linearized_sup(
    system: DyadicSystem, f: LeafFunction, lam: CubeCoefficients, partition: LinearizationPartition
) -> LeafFunction:
    """Σ_Q λ_Q ⟨f⟩_Q 1_{E(Q)} sulle foglie."""
    out = apply_T(system, f, lam)
    result = np.zeros(system.n_leaves)
    for pos, leaves in enumerate(partition.sets):
        for leaf in leaves:
            result[leaf] += out[pos]
    return result


def normalize_pointwise(
    system: DyadicSystem, g: SequenceFunction, r_prime: float, w: Optional[LeafFunction] = None
) -> SequenceFunction:
    """
    Divide g(x) per |g(x)|_{ℓ^{r'}} dove la norma è positiva.

    Se w è dato, le foglie con w = 0 (insieme w-trascurabile) vengono azzerate.
    """
    g = np.asarray(g, dtype=float)
    norms = lr_norm(g, r_prime, axis=0)
    scale = np.zeros(system.n_leaves)
    positive = norms > 0
    scale[positive] = 1.0 / norms[positive]
    if w is not None:
        scale[np.asarray(w) == 0] = 0.0
    return g * scale[None, :]
