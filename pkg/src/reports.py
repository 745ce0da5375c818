"""
Result files: JSON and CSV writers for rankings, selections, evaluations and sweeps

Every file is written to a temporary sibling and renamed into place.
"""
import json
import os
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import pandas as pd

from .evaluator import EvalReport
from .infotheory import FanoBounds
from .selector import MICurvePoint
from .state import BandScore, SelectionResult


MISSING_CELL = "-"


def _atomic_target(path: Union[str, Path]) -> tuple:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path, path.with_name(f".{path.name}.tmp")


def write_json(path: Union[str, Path], payload: Any) -> Path:
    """Write sorted, indented JSON atomically"""
    path, tmp = _atomic_target(path)
    with open(tmp, "w") as f:
        f.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    os.replace(tmp, path)
    return path


def write_csv(path: Union[str, Path], frame: pd.DataFrame) -> Path:
    """Write a frame without index atomically"""
    path, tmp = _atomic_target(path)
    frame.to_csv(tmp, index=False, lineterminator="\n")
    os.replace(tmp, path)
    return path


def read_json(path: Union[str, Path]) -> Dict[str, Any]:
    with open(path) as f:
        return json.load(f)


def ranking_frame(ranking: Sequence[BandScore]) -> pd.DataFrame:
    return pd.DataFrame(
        {"band": [s.band for s in ranking], "mi": [s.mi_with_gt for s in ranking]}
    )


def mi_curve_frame(curve: Sequence[MICurvePoint]) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "band": [p.band for p in curve],
            "mi_gt": [p.mi_gt for p in curve],
            "mi_approx": [p.mi_approx for p in curve],
        }
    )


def selection_frame(result: SelectionResult) -> pd.DataFrame:
    """Two-column (band, accepted) view of the trajectory"""
    return pd.DataFrame(
        {
            "band": [e.band for e in result.mi_trajectory],
            "accepted": [e.accepted for e in result.mi_trajectory],
        }
    )


def write_selection(result: SelectionResult, out_dir: Union[str, Path], stem: str = "selection") -> Dict[str, Path]:
    out_dir = Path(out_dir)
    return {
        "json": write_json(out_dir / f"{stem}.json", result.to_json_dict()),
        "csv": write_csv(out_dir / f"{stem}.csv", selection_frame(result)),
    }


def load_selection(path: Union[str, Path]) -> SelectionResult:
    return SelectionResult.from_json_dict(read_json(path))


def eval_report_dict(report: EvalReport) -> Dict[str, Any]:
    payload = report.model_dump(mode="json")
    payload["per_class_accuracy"] = {str(k): v for k, v in sorted(report.per_class_accuracy.items())}
    payload["bands_hash"] = report.bands_hash
    return payload


def eval_report_frame(report: EvalReport) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "bands_hash": [report.bands_hash],
            "n_bands": [len(report.bands_used)],
            "accuracy": [report.overall_accuracy],
        }
    )


def write_eval_report(report: EvalReport, out_dir: Union[str, Path], stem: str = "evaluation") -> Dict[str, Path]:
    out_dir = Path(out_dir)
    return {
        "json": write_json(out_dir / f"{stem}.json", eval_report_dict(report)),
        "csv": write_csv(out_dir / f"{stem}.csv", eval_report_frame(report)),
    }


def fano_dict(bounds: FanoBounds) -> Dict[str, Any]:
    return bounds.model_dump()


def threshold_label(threshold: float) -> str:
    return repr(float(threshold))


def sweep_summary_frame(results: Mapping[float, SelectionResult]) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "threshold": list(results.keys()),
            "n_selected": [len(r.selected) for r in results.values()],
            "final_mi": [r.final_mi for r in results.values()],
        }
    )


def sweep_table_frame(cells: Mapping[float, Mapping[int, float]], max_rows: Optional[int] = None) -> pd.DataFrame:
    """
    Rows = number of bands retained, one column per threshold

    Args:
        cells: threshold -> (k -> value)
        max_rows: Largest k to list; defaults to the largest k present

    Returns:
        Frame with a "bands_retained" column; absent cells hold "-"
    """
    largest = max((max(v.keys()) for v in cells.values() if v), default=0)
    rows: List[int] = list(range(1, (max_rows or largest) + 1))
    table: Dict[str, List[Any]] = {"bands_retained": rows}
    for threshold, values in cells.items():
        table[threshold_label(threshold)] = [values.get(k, MISSING_CELL) for k in rows]
    return pd.DataFrame(table)


def accepted_mi_by_count(result: SelectionResult) -> Dict[int, float]:
    """MI of the estimate after the k-th accepted band, keyed by k"""
    accepted = [e.mi for e in result.mi_trajectory if e.accepted]
    return {k: mi for k, mi in enumerate(accepted, start=1)}
