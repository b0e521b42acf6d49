"""
Aggregatore dei risultati: righe CSV della modalità batch e riassunto per (p, r).
"""
from pathlib import Path
from typing import Any, Dict, List, Union

import pandas as pd

BATCH_COLUMNS = [
    "seed",
    "d",
    "L",
    "p",
    "r",
    "weights",
    "C",
    "Cstar_lower",
    "Cstar_upper",
    "Ctilde_lower",
    "Ctilde_exact",
    "bound",
    "ratio",
    "pass",
    "wall_clock_s",
]

SUMMARY_COLUMNS = ["p", "r", "instances", "passed", "pass_rate", "max_ratio", "mean_wall_clock_s"]

# 17 cifre significative ricostruiscono esattamente un double
FLOAT_FORMAT = "%.17g"


def batch_row(seed: int, params: Dict[str, Any], report: Dict[str, Any]) -> Dict[str, Any]:
    """Una riga CSV a partire dal report di theorem_verify (già in forma di dict)."""
    constants = report["constants"]
    return {
        "seed": seed,
        "d": params["dimension"],
        "L": params["depth"],
        "p": params["p"],
        "r": params["r"],
        "weights": params.get("weights", ""),
        "C": constants["C"],
        "Cstar_lower": constants["Cstar_lower"],
        "Cstar_upper": constants["Cstar_upper"],
        "Ctilde_lower": constants["Ctilde_lower"],
        "Ctilde_exact": constants["Ctilde_exact"],
        "bound": report["bound"],
        "ratio": report["ratio"],
        "pass": report["passed"],
        "wall_clock_s": report["wall_clock_s"],
    }


def batch_frame(rows: List[Dict[str, Any]]) -> pd.DataFrame:
    return pd.DataFrame(rows, columns=BATCH_COLUMNS)


def save_batch_csv(rows: List[Dict[str, Any]], output_path: Union[str, Path]) -> pd.DataFrame:
    """Scrive il CSV (solo intestazione se non ci sono righe)."""
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    frame = batch_frame(rows)
    frame.to_csv(output_path, index=False, float_format=FLOAT_FORMAT)
    return frame


def summarize_batch(frame: pd.DataFrame) -> pd.DataFrame:
    """
    Riassunto per coppia di esponenti (p, r): istanze, pass rate, rapporto
    massimo e tempo medio. Un frame vuoto dà un riassunto vuoto.
    """
    if frame.empty:
        return pd.DataFrame(columns=SUMMARY_COLUMNS)
    grouped = frame.groupby(["p", "r"], sort=True)
    summary = grouped.agg(
        instances=("seed", "size"),
        passed=("pass", "sum"),
        max_ratio=("ratio", "max"),
        mean_wall_clock_s=("wall_clock_s", "mean"),
    ).reset_index()
    summary["passed"] = summary["passed"].astype(int)
    summary["pass_rate"] = summary["passed"] / summary["instances"]
    return summary[SUMMARY_COLUMNS]


def save_batch_summary(frame: pd.DataFrame, output_path: Union[str, Path]) -> pd.DataFrame:
    """Scrive accanto al CSV del batch il riassunto per (p, r)."""
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    summary = summarize_batch(frame)
    summary.to_csv(output_path, index=False, float_format=FLOAT_FORMAT)
    return summary
