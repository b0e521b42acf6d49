"""
Registrazione delle disuguaglianze verificate: entrambi i lati, margine e costante.
"""
import math
from dataclasses import dataclass
from typing import Any, Dict, List

# Tolleranza relativa globale per le disuguaglianze vere per teorema.
DEFAULT_TOL = 1e-9
# Tolleranza per le uguaglianze esatte.
EXACT_TOL = 1e-12


@dataclass(frozen=True)
class InequalityCheck:
    """Una disuguaglianza lhs ≤ rhs con entrambi i lati e il margine."""

    name: str
    lhs: float
    rhs: float
    constant_used: float = math.nan
    tol: float = DEFAULT_TOL

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1 + self.tol)

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "constant_used": None if math.isnan(self.constant_used) else self.constant_used,
            "holds": self.holds,
            "slack": self.slack,
        }


def check(name: str, lhs: float, rhs: float, constant_used: float = math.nan, tol: float = DEFAULT_TOL) -> InequalityCheck:
    return InequalityCheck(name, float(lhs), float(rhs), float(constant_used), tol)


def worst_check(name: str, lhs: List[float], rhs: List[float], tol: float = DEFAULT_TOL, constant_used: float = math.nan) -> InequalityCheck:
    """
    Riduce molte disuguaglianze alla peggiore (margine relativo minimo).

    Senza termini restituisce la disuguaglianza banale 0 ≤ 0.
    """
    worst = None
    worst_margin = math.inf
    for left, right in zip(lhs, rhs):
        margin = right * (1 + tol) - left
        scale = max(abs(left), abs(right), 1e-300)
        if margin / scale < worst_margin:
            worst_margin = margin / scale
            worst = (left, right)
    if worst is None:
        worst = (0.0, 0.0)
    return check(name, worst[0], worst[1], constant_used, tol)

