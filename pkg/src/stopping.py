"""
Cubi d'arresto paralleli per le coppie (f, σ) e (g, ω), insiemi residui,
mappe dei padri e verifica delle proprietà (a1)–(a4), (b1)–(b5).
"""
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from src.dyadic import CubeCoefficients, DyadicSystem, LeafFunction, masses, weighted_averages
from src.metrics import DEFAULT_TOL, InequalityCheck, check, worst_check
from src.operators import chain_norms, norm_Linf_lr


class NotAMemberError(ValueError):
    """Il cubo richiesto non appartiene alla famiglia d'arresto."""


@dataclass(frozen=True)
class StoppingFamily:
    """
    Famiglia di cubi principali.

    members è ordinata per generazione e poi per posizione canonica;
    residual[F] contiene gli indici delle foglie di E(F);
    parent_map[Q] è il membro minimale che contiene Q.
    """

    system: DyadicSystem
    members: Tuple[int, ...]
    generation: Dict[int, int]
    children: Dict[int, Tuple[int, ...]]
    residual: Dict[int, frozenset]
    parent_map: np.ndarray

    def require_member(self, pos: int):
        if pos not in self.generation:
            raise NotAMemberError(f"{self.system.cubes[pos]} non è un cubo d'arresto")

    def to_dict(self) -> Dict[str, Any]:
        cubes = self.system.cubes
        return {
            "members": [
                {
                    "cube": str(cubes[pos]),
                    "generation": self.generation[pos],
                    "children": [str(cubes[c]) for c in self.children[pos]],
                    "residual_mask": [
                        1 if leaf in self.residual[pos] else 0 for leaf in range(self.system.n_leaves)
                    ],
                }
                for pos in self.members
            ]
        }


def _build_family(system: DyadicSystem, stops: Callable[[int, int], bool]) -> StoppingFamily:
    # Ricorsione per generazioni: i figli d'arresto sono i sottocubi massimali
    # che soddisfano la condizione rispetto al membro corrente.
    members = [0]
    generation = {0: 0}
    children: Dict[int, Tuple[int, ...]] = {}
    residual: Dict[int, frozenset] = {}
    frontier = [0]
    while frontier:
        next_frontier = []
        for parent in frontier:
            stopped = []
            queue = list(system.children(parent))
            while queue:
                candidate = queue.pop(0)
                if stops(parent, candidate):
                    stopped.append(candidate)
                else:
                    queue.extend(system.children(candidate))
            stopped.sort()
            children[parent] = tuple(stopped)
            covered = set()
            for child in stopped:
                covered.update(system.leaves_of(child).tolist())
            residual[parent] = frozenset(set(system.leaves_of(parent).tolist()) - covered)
            for child in stopped:
                generation[child] = generation[parent] + 1
            next_frontier.extend(stopped)
        next_frontier.sort()
        members.extend(next_frontier)
        frontier = next_frontier

    parent_map = np.empty(system.n_cubes, dtype=np.int64)
    for pos in range(system.n_cubes):
        parent_map[pos] = pos if pos in generation else parent_map[system.parents[pos]]
    parent_map.setflags(write=False)
    return StoppingFamily(system, tuple(members), generation, children, residual, parent_map)


def build_f_stopping(system: DyadicSystem, f: LeafFunction, sigma: LeafFunction) -> StoppingFamily:
    """Arresto su ⟨f⟩^σ_{F'} > 2⟨f⟩^σ_F (disuguaglianza stretta, senza tolleranza)."""
    avg = weighted_averages(system, f, sigma)
    return _build_family(system, lambda parent, cube: avg[cube] > 2 * avg[parent])


def g_leaf_norms(system: DyadicSystem, a: CubeCoefficients, r_prime: float) -> np.ndarray:
    """|g(x)|_{ℓ^{r'}} sulle foglie per g = (a_Q 1_Q)."""
    return chain_norms(system, a, r_prime)[system.leaf_positions]


def build_g_stopping(
    system: DyadicSystem, a: CubeCoefficients, omega: LeafFunction, r_prime: float
) -> StoppingFamily:
    """Arresto su |(a_Q)_{Q ⊇ G'}|_{ℓ^{r'}} > 2⟨|g|_{ℓ^{r'}}⟩^ω_G."""
    chain = chain_norms(system, a, r_prime)
    avg = weighted_averages(system, chain[system.leaf_positions], omega)
    return _build_family(system, lambda parent, cube: chain[cube] > 2 * avg[parent])


@dataclass
class PropertyReport:
    """Esito delle proprietà di una famiglia d'arresto."""

    checks: List[InequalityCheck] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return all(c.holds for c in self.checks)

    def by_name(self) -> Dict[str, InequalityCheck]:
        return {c.name: c for c in self.checks}


def _partition_check(fam: StoppingFamily, name: str) -> InequalityCheck:
    system = fam.system
    violations = 0
    for member in fam.members:
        pieces = [set(system.leaves_of(c).tolist()) for c in fam.children[member]]
        pieces.append(set(fam.residual[member]))
        union = set().union(*pieces)
        if union != set(system.leaves_of(member).tolist()) or sum(len(p) for p in pieces) != len(union):
            violations += 1
        if any(not system.contains(member, c) or c == member for c in fam.children[member]):
            violations += 1
    return check(name, violations, 0)


def _disjoint_check(fam: StoppingFamily, name: str) -> InequalityCheck:
    total = sum(len(fam.residual[m]) for m in fam.members)
    union = set().union(*(fam.residual[m] for m in fam.members))
    return check(name, total - len(union), 0)


def residual_masses(fam: StoppingFamily, w: LeafFunction) -> Dict[int, float]:
    values = np.asarray(w) * fam.system.leaf_volume
    return {m: float(sum(values[leaf] for leaf in sorted(fam.residual[m]))) for m in fam.members}


def _half_mass_check(fam: StoppingFamily, w: LeafFunction, name: str, tol: float) -> InequalityCheck:
    total = masses(fam.system, w)
    res = residual_masses(fam, w)
    return worst_check(
        name,
        [0.5 * total[m] for m in fam.members],
        [res[m] for m in fam.members],
        tol,
        constant_used=0.5,
    )


def verify_properties_a(
    fam: StoppingFamily, f: LeafFunction, sigma: LeafFunction, tol: float = DEFAULT_TOL
) -> PropertyReport:
    system = fam.system
    avg = weighted_averages(system, f, sigma)
    return PropertyReport(
        [
            _partition_check(fam, "a1_partition"),
            _disjoint_check(fam, "a2_disjoint_residuals"),
            _half_mass_check(fam, sigma, "a3_residual_mass", tol),
            worst_check(
                "a4_average_control",
                list(avg),
                [2 * avg[fam.parent_map[q]] for q in range(system.n_cubes)],
                tol,
                constant_used=2.0,
            ),
        ]
    )


def verify_properties_b(
    fam: StoppingFamily,
    a: CubeCoefficients,
    omega: LeafFunction,
    r_prime: float,
    tol: float = DEFAULT_TOL,
) -> PropertyReport:
    system = fam.system
    a = np.asarray(a, dtype=float)
    chain = chain_norms(system, a, r_prime)
    avg = weighted_averages(system, chain[system.leaf_positions], omega)
    # (b4) vale ω-quasi ovunque: i cubi con ω(Q) = 0 non hanno media e restano esclusi
    charged = np.flatnonzero(masses(system, omega) > 0)
    b5_lhs, b5_rhs = [], []
    for member in fam.members:
        restricted = np.where(fam.parent_map == member, a, 0.0)
        b5_lhs.append(norm_Linf_lr(system, restricted, omega, r_prime))
        b5_rhs.append(2 * avg[member])
    return PropertyReport(
        [
            _partition_check(fam, "b1_partition"),
            _disjoint_check(fam, "b2_disjoint_residuals"),
            _half_mass_check(fam, omega, "b3_residual_mass", tol),
            worst_check(
                "b4_chain_control",
                [chain[q] for q in charged],
                [2 * avg[fam.parent_map[q]] for q in charged],
                tol,
                constant_used=2.0,
            ),
            worst_check("b5_local_sup", b5_lhs, b5_rhs, tol, constant_used=2.0),
        ]
    )


@dataclass(frozen=True)
class DerivedIndexSets:
    """ch*_G, ch*_F, I(F) e I(F, F') come posizioni canoniche."""

    ch_star_G: Dict[int, Tuple[int, ...]]
    ch_star_F: Dict[int, Tuple[int, ...]]
    I: Dict[int, Tuple[int, ...]]
    I_pair: Dict[Tuple[int, int], Tuple[int, ...]]


def _member_between(system: DyadicSystem, fam: StoppingFamily, inner: int, outer: int) -> bool:
    # esiste un membro M di fam con inner ⊆ M ⊆ outer
    for k in range(int(system.levels[outer]), int(system.levels[inner]) + 1):
        if system.chains[k, inner] in fam.generation:
            return True
    return False


def derive_index_sets(fam_f: StoppingFamily, fam_g: StoppingFamily) -> DerivedIndexSets:
    system = fam_f.system
    ch_star_G = {
        g: tuple(c for c in fam_g.children[g] if _member_between(system, fam_f, c, g))
        for g in fam_g.members
    }
    ch_star_F = {
        f: tuple(c for c in fam_f.children[f] if _member_between(system, fam_g, c, f))
        for f in fam_f.members
    }
    index = {
        f: tuple(
            q
            for q in range(system.n_cubes)
            if fam_f.parent_map[q] == f and system.contains(f, int(fam_g.parent_map[q]))
        )
        for f in fam_f.members
    }
    pairs = {
        (f, child): tuple(q for q in index[f] if q != child and system.contains(q, child))
        for f in fam_f.members
        for child in fam_f.children[f]
    }
    return DerivedIndexSets(ch_star_G, ch_star_F, index, pairs)


def build_fG(
    system: DyadicSystem,
    f: LeafFunction,
    sigma: LeafFunction,
    fam_f: StoppingFamily,
    fam_g: StoppingFamily,
    member: int,
    index_sets: Optional[DerivedIndexSets] = None,
) -> LeafFunction:
    """f_G = f 1_{E_G(G)} + Σ_{G' ∈ ch*_G(G)} ⟨f⟩^σ_{G'} 1_{G'}."""
    fam_g.require_member(member)
    if index_sets is None:
        index_sets = derive_index_sets(fam_f, fam_g)
    f = np.asarray(f, dtype=float)
    avg = weighted_averages(system, f, sigma)
    result = np.zeros(system.n_leaves)
    residual = sorted(fam_g.residual[member])
    result[residual] = f[residual]
    for child in index_sets.ch_star_G[member]:
        result[system.leaves_of(child)] = avg[child]
    return result


def build_gF(
    system: DyadicSystem,
    a: CubeCoefficients,
    fam_f: StoppingFamily,
    fam_g: StoppingFamily,
    member: int,
    index_sets: Optional[DerivedIndexSets] = None,
) -> CubeCoefficients:
    """g_F: i coefficienti a_Q per Q ∈ I(F), zero altrove."""
    fam_f.require_member(member)
    if index_sets is None:
        index_sets = derive_index_sets(fam_f, fam_g)
    result = np.zeros(system.n_cubes)
    keep = list(index_sets.I[member])
    result[keep] = np.asarray(a, dtype=float)[keep]
    return result


def verify_replacement(
    system: DyadicSystem,
    f: LeafFunction,
    sigma: LeafFunction,
    fam_f: StoppingFamily,
    fam_g: StoppingFamily,
    f_by_member: Dict[int, np.ndarray],
    tol: float = DEFAULT_TOL,
) -> InequalityCheck:
    """∫_Q fσ ≤ ∫_Q f_G σ per ogni Q con π_G(Q) = G e π_F(Q) ⊆ G."""
    base = masses(system, np.asarray(f) * np.asarray(sigma))
    lhs, rhs = [], []
    for member, f_member in f_by_member.items():
        replaced = masses(system, f_member * np.asarray(sigma))
        for q in range(system.n_cubes):
            if fam_g.parent_map[q] == member and system.contains(member, int(fam_f.parent_map[q])):
                lhs.append(base[q])
                rhs.append(replaced[q])
    return worst_check("fG_replacement", lhs, rhs, tol)
