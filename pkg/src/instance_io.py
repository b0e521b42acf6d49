"""
Modulo per caricare e salvare istanze, funzioni di prova e dataset.

Formato di un'istanza (JSON):
    {"dimension": 1, "depth": 2, "p": 2.0, "r": "inf",
     "lambda": {"0:0": 1.0, "1:1": 0.5}, "sigma": [...], "omega": [...]}

Le chiavi di "lambda" sono cubi "k:i0.i1..."; le chiavi assenti valgono 0.
I float vengono scritti con repr, che ricostruisce esattamente il double.
"""
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

from src.dyadic import (
    CubeId,
    DyadicSystem,
    Exponents,
    InvalidExponentError,
    InvalidFunctionError,
    UnknownCubeError,
)
from src.testing_conditions import Instance

INF_TOKEN = "inf"
REQUIRED_KEYS = ("dimension", "depth", "p", "r", "lambda", "sigma", "omega")


class InstanceFormatError(ValueError):
    """File d'istanza (o di funzione) non interpretabile o incoerente col sistema."""


def parse_cube_id(text: str, dimension: int) -> CubeId:
    """Interpreta "k:i0.i1...i{d-1}"."""
    try:
        level_text, _, index_text = text.partition(":")
        level = int(level_text)
        index = tuple(int(i) for i in index_text.split("."))
    except ValueError:
        raise InstanceFormatError(f"Identificativo di cubo non valido: '{text}'") from None
    if len(index) != dimension:
        raise InstanceFormatError(f"'{text}' ha {len(index)} indici, attesi {dimension}")
    return CubeId(level, index)


def format_cube_id(cube: CubeId) -> str:
    return str(cube)


def _parse_exponent(value: Any, name: str) -> float:
    if isinstance(value, str):
        if value.strip().lower() == INF_TOKEN:
            return math.inf
        raise InstanceFormatError(f"'{name}' deve essere un numero o \"{INF_TOKEN}\", ricevuto '{value}'")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceFormatError(f"'{name}' deve essere un numero, ricevuto {value!r}")
    return float(value)


def _format_exponent(value: float) -> Union[float, str]:
    return INF_TOKEN if math.isinf(value) else float(value)


def lambda_from_map(system: DyadicSystem, mapping: Dict[str, Any]) -> np.ndarray:
    lam = np.zeros(system.n_cubes)
    for key, value in mapping.items():
        cube = parse_cube_id(key, system.dimension)
        try:
            lam[system.position(cube)] = float(value)
        except UnknownCubeError as e:
            raise InstanceFormatError(str(e)) from None
    return lam


def lambda_to_map(system: DyadicSystem, lam: np.ndarray) -> Dict[str, float]:
    """Solo i coefficienti non nulli, nell'ordine canonico."""
    return {format_cube_id(system.cubes[pos]): float(v) for pos, v in enumerate(lam) if v != 0}


def instance_from_dict(data: Dict[str, Any]) -> Instance:
    missing = [key for key in REQUIRED_KEYS if key not in data]
    if missing:
        raise InstanceFormatError(f"Chiavi mancanti: {', '.join(missing)}")
    try:
        system = DyadicSystem(int(data["dimension"]), int(data["depth"]))
        exponents = Exponents(_parse_exponent(data["p"], "p"), _parse_exponent(data["r"], "r"))
        if not isinstance(data["lambda"], dict):
            raise InstanceFormatError("'lambda' deve essere una mappa cubo → valore")
        lam = lambda_from_map(system, data["lambda"])
        return Instance(system, lam, data["sigma"], data["omega"], exponents)
    except (InvalidFunctionError, InvalidExponentError, TypeError) as e:
        raise InstanceFormatError(str(e)) from None
    except InstanceFormatError:
        raise
    except ValueError as e:
        raise InstanceFormatError(str(e)) from None


def instance_to_dict(inst: Instance) -> Dict[str, Any]:
    return {
        "dimension": inst.system.dimension,
        "depth": inst.system.depth,
        "p": _format_exponent(inst.p),
        "r": _format_exponent(inst.r),
        "lambda": lambda_to_map(inst.system, inst.lam),
        "sigma": [float(v) for v in inst.sigma],
        "omega": [float(v) for v in inst.omega],
    }


def _read_json(path: Union[str, Path]) -> Any:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise InstanceFormatError(f"{path}: JSON non valido ({e})") from None


def load_instance(path: Union[str, Path]) -> Instance:
    data = _read_json(path)
    if not isinstance(data, dict):
        raise InstanceFormatError(f"{path}: atteso un oggetto JSON")
    return instance_from_dict(data)


def save_instance(inst: Instance, path: Union[str, Path]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(instance_to_dict(inst), f, indent=2, ensure_ascii=False)


def load_leaf_array(path: Union[str, Path], system: DyadicSystem) -> np.ndarray:
    """Funzione sulle foglie: lista JSON oppure {"values": [...]}."""
    data = _read_json(path)
    if isinstance(data, dict):
        data = data.get("values")
    if not isinstance(data, list):
        raise InstanceFormatError(f"{path}: attesa una lista di {system.n_leaves} valori")
    try:
        return system.leaf_function(data)
    except (InvalidFunctionError, TypeError, ValueError) as e:
        raise InstanceFormatError(f"{path}: {e}") from None


def load_coefficients(path: Union[str, Path], system: DyadicSystem) -> np.ndarray:
    """Coefficienti a_Q: lista nell'ordine canonico oppure mappa cubo → valore."""
    data = _read_json(path)
    try:
        if isinstance(data, dict):
            return system.coefficients(lambda_from_map(system, data))
        if isinstance(data, list):
            return system.coefficients(data)
    except (InvalidFunctionError, TypeError, ValueError) as e:
        if isinstance(e, InstanceFormatError):
            raise
        raise InstanceFormatError(f"{path}: {e}") from None
    raise InstanceFormatError(f"{path}: attesa una lista o una mappa di coefficienti")


def load_dataset(dataset_path: Union[str, Path]) -> List[Dict[str, Any]]:
    """Carica i casi oracolo dal dataset JSON in ordine deterministico."""
    with open(dataset_path, 'r', encoding='utf-8') as f:
        data = json.load(f)
    # Ordina per ID per garantire ordine deterministico
    return sorted(data['test_cases'], key=lambda x: x['id'])
