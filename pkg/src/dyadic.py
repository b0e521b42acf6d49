"""
Geometria diadica finita: cubi, sistema D, funzioni costanti sulle foglie,
misure di Lebesgue e pesate, medie.

Convenzioni:
- Q0 è il cubo unitario [0,1)^d (livello 0).
- I cubi sono numerati per livello e, dentro ogni livello, in ordine
  lessicografico dell'indice; le foglie (livello L) seguono lo stesso ordine.
- Una LeafFunction è un np.ndarray float64 di lunghezza 2^{Ld}, in sola lettura.
- Una CubeCoefficients è un np.ndarray float64 di lunghezza |D|, in sola lettura.
"""
import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import List, Sequence, Tuple, Union

import numpy as np

LeafFunction = np.ndarray
CubeCoefficients = np.ndarray


class UnknownCubeError(ValueError):
    """Cubo non appartenente al sistema diadico."""


class InvalidFunctionError(ValueError):
    """Funzione o coefficienti con forma sbagliata o valori negativi."""


class InvalidExponentError(ValueError):
    """Esponenti fuori dal dominio ammesso."""


@dataclass(frozen=True, order=True)
class CubeId:
    """Cubo diadico 2^{-level}([0,1)^d + index)."""

    level: int
    index: Tuple[int, ...]

    def parent(self) -> "CubeId":
        if self.level == 0:
            raise UnknownCubeError("Q0 non ha un padre.")
        return CubeId(self.level - 1, tuple(i // 2 for i in self.index))

    def __str__(self) -> str:
        return f"{self.level}:" + ".".join(str(i) for i in self.index)


def conjugate(x: float) -> float:
    """Esponente coniugato, con 1 ↔ ∞."""
    if x == 1:
        return math.inf
    if math.isinf(x):
        return 1.0
    return x / (x - 1)


@dataclass(frozen=True)
class Exponents:
    """Esponenti p ∈ (1,∞) e r ∈ [1,∞] con i coniugati derivati."""

    p: float
    r: float

    def __post_init__(self):
        if not (1 < self.p < math.inf):
            raise InvalidExponentError(f"p deve stare in (1,∞), ricevuto {self.p}")
        if not (self.r >= 1):
            raise InvalidExponentError(f"r deve stare in [1,∞], ricevuto {self.r}")

    @property
    def p_prime(self) -> float:
        return conjugate(self.p)

    @property
    def r_prime(self) -> float:
        return conjugate(self.r)


class DyadicSystem:
    """
    Collezione finita D dei cubi diadici di [0,1)^d fino alla profondità L.

    Tutte le tabelle sono precalcolate alla costruzione e non vengono più
    modificate, quindi un sistema può essere condiviso tra thread.
    """

    def __init__(self, dimension: int, depth: int):
        if dimension < 1:
            raise ValueError(f"La dimensione deve essere ≥ 1, ricevuta {dimension}")
        if depth < 0:
            raise ValueError(f"La profondità deve essere ≥ 0, ricevuta {depth}")
        self.dimension = dimension
        self.depth = depth

        self.level_offsets = [0]
        for k in range(depth + 1):
            self.level_offsets.append(self.level_offsets[-1] + 2 ** (k * dimension))
        self.n_cubes = self.level_offsets[-1]
        self.n_leaves = 2 ** (depth * dimension)

        self.cubes: List[CubeId] = []
        for k in range(depth + 1):
            for index in itertools.product(range(2 ** k), repeat=dimension):
                self.cubes.append(CubeId(k, tuple(index)))
        self._positions = {cube: pos for pos, cube in enumerate(self.cubes)}

        self.levels = np.repeat(
            np.arange(depth + 1), [2 ** (k * dimension) for k in range(depth + 1)]
        )
        self.volumes = 2.0 ** (-self.levels * dimension)
        self.leaf_volume = 2.0 ** (-depth * dimension)

        parents = np.full(self.n_cubes, -1, dtype=np.int64)
        for pos, cube in enumerate(self.cubes[1:], start=1):
            parents[pos] = self._positions[cube.parent()]
        self.parents = parents
        self.parents.setflags(write=False)

        # chains[k, Q] = antenato di Q al livello k, oppure n_cubes (padding) se k > livello(Q)
        chains = np.full((depth + 1, self.n_cubes), self.n_cubes, dtype=np.int64)
        for pos in range(self.n_cubes):
            current = pos
            for k in range(int(self.levels[pos]), -1, -1):
                chains[k, pos] = current
                current = parents[current]
        self.chains = chains
        self.chains.setflags(write=False)

        self.leaf_positions = np.arange(self.level_offsets[depth], self.n_cubes)
        self.leaf_positions.setflags(write=False)

        for table in (self.levels, self.volumes):
            table.setflags(write=False)

    def __repr__(self) -> str:
        return f"DyadicSystem(dimension={self.dimension}, depth={self.depth})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DyadicSystem)
            and other.dimension == self.dimension
            and other.depth == self.depth
        )

    def __hash__(self) -> int:
        return hash((self.dimension, self.depth))

    @property
    def root(self) -> CubeId:
        return self.cubes[0]

    def position(self, cube: Union[CubeId, int]) -> int:
        """Posizione canonica di un cubo; accetta anche una posizione già calcolata."""
        if isinstance(cube, (int, np.integer)):
            if not 0 <= cube < self.n_cubes:
                raise UnknownCubeError(f"Posizione {cube} fuori dal sistema {self}")
            return int(cube)
        try:
            return self._positions[cube]
        except KeyError:
            raise UnknownCubeError(f"Cubo {cube} non appartiene a {self}") from None

    def children(self, pos: int) -> np.ndarray:
        """Posizioni dei 2^d figli di un cubo (vuoto per le foglie)."""
        level = int(self.levels[pos])
        if level == self.depth:
            return np.empty(0, dtype=np.int64)
        cube = self.cubes[pos]
        return np.array(
            [
                self._positions[CubeId(level + 1, tuple(2 * i + b for i, b in zip(cube.index, bits)))]
                for bits in itertools.product((0, 1), repeat=self.dimension)
            ],
            dtype=np.int64,
        )

    def contains(self, outer: int, inner: int) -> bool:
        """True se il cubo outer contiene (non strettamente) il cubo inner."""
        level = int(self.levels[outer])
        return level <= self.levels[inner] and self.chains[level, inner] == outer

    def leaves_of(self, pos: int) -> np.ndarray:
        """Posizioni (nell'ordine delle foglie, 0..2^{Ld}-1) delle foglie contenute nel cubo."""
        level = int(self.levels[pos])
        return np.flatnonzero(self.chains[level, self.leaf_positions] == pos)

    @cached_property
    def membership(self) -> np.ndarray:
        """Matrice booleana (|D| × foglie): membership[Q, x] = (x ⊆ Q)."""
        table = np.zeros((self.n_cubes, self.n_leaves), dtype=bool)
        leaves = np.arange(self.n_leaves)
        for k in range(self.depth + 1):
            table[self.chains[k, self.leaf_positions], leaves] = True
        table.setflags(write=False)
        return table

    @cached_property
    def averaging_matrix(self) -> np.ndarray:
        """Matrice A con (A @ f)_Q = ⟨f⟩_Q per f costante sulle foglie."""
        table = self.membership * (self.leaf_volume / self.volumes[:, None])
        table.setflags(write=False)
        return table

    def leaf_function(self, values: Sequence[float]) -> LeafFunction:
        """Valida e congela una funzione costante sulle foglie."""
        array = np.array(values, dtype=float)
        if array.shape != (self.n_leaves,):
            raise InvalidFunctionError(
                f"Attese {self.n_leaves} foglie, ricevuta forma {array.shape}"
            )
        if not np.all(np.isfinite(array)) or np.any(array < 0):
            raise InvalidFunctionError("I valori sulle foglie devono essere finiti e ≥ 0")
        array.setflags(write=False)
        return array

    def coefficients(self, values: Sequence[float]) -> CubeCoefficients:
        """Valida e congela un vettore di coefficienti per cubo."""
        array = np.array(values, dtype=float)
        if array.shape != (self.n_cubes,):
            raise InvalidFunctionError(
                f"Attesi {self.n_cubes} coefficienti, ricevuta forma {array.shape}"
            )
        if not np.all(np.isfinite(array)) or np.any(array < 0):
            raise InvalidFunctionError("I coefficienti devono essere finiti e ≥ 0")
        array.setflags(write=False)
        return array

    def constant(self, value: float) -> LeafFunction:
        return self.leaf_function(np.full(self.n_leaves, float(value)))


def leaf_cells(system: DyadicSystem) -> List[CubeId]:
    """Le 2^{Ld} foglie in ordine lessicografico (ordine canonico di riduzione)."""
    return [system.cubes[pos] for pos in system.leaf_positions]


def lebesgue_measure(system: DyadicSystem, cube: Union[CubeId, int]) -> float:
    return float(system.volumes[system.position(cube)])


def masses(system: DyadicSystem, w: LeafFunction) -> np.ndarray:
    """w(Q) per ogni cubo, accumulando per livello nell'ordine delle foglie."""
    leaf_mass = np.asarray(w, dtype=float) * system.leaf_volume
    result = np.zeros(system.n_cubes)
    for k in range(system.depth + 1):
        result += np.bincount(
            system.chains[k, system.leaf_positions], weights=leaf_mass, minlength=system.n_cubes
        )
    return result


def averages(system: DyadicSystem, f: LeafFunction) -> np.ndarray:
    """⟨f⟩_Q per ogni cubo."""
    return masses(system, f) / system.volumes


def weighted_averages(system: DyadicSystem, f: LeafFunction, w: LeafFunction) -> np.ndarray:
    """⟨f⟩^w_Q per ogni cubo; 0 dove w(Q) = 0."""
    total = masses(system, w)
    integral = masses(system, np.asarray(f) * np.asarray(w))
    result = np.zeros(system.n_cubes)
    positive = total > 0
    result[positive] = integral[positive] / total[positive]
    return result


def weight_mass(system: DyadicSystem, w: LeafFunction, cube: Union[CubeId, int]) -> float:
    pos = system.position(cube)
    return float(masses(system, w)[pos])


def average(system: DyadicSystem, f: LeafFunction, cube: Union[CubeId, int]) -> float:
    pos = system.position(cube)
    return float(averages(system, f)[pos])


def weighted_average(
    system: DyadicSystem, f: LeafFunction, w: LeafFunction, cube: Union[CubeId, int]
) -> float:
    pos = system.position(cube)
    return float(weighted_averages(system, f, w)[pos])


def change_of_weight(system: DyadicSystem, u: LeafFunction, p: float) -> LeafFunction:
    """σ = u^{-1/(p-1)} foglia per foglia."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0):
        raise InvalidFunctionError("Il cambio di peso richiede u > 0 su ogni foglia")
    return system.leaf_function(u ** (-1.0 / (p - 1.0)))
