"""
Métricas de classificação a partir da matriz de confusão inteira.

Convenção: F1 = 2PR / (P + R) e qualquer 0/0 (precisão, recall ou F1) vale 0.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from catequiv.data.ucihar import ACTIVITY_LABELS
from catequiv.exceptions import DataError


def _safe_divide(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    return np.divide(num, den, out=np.zeros_like(num), where=den > 0)


def confusion_matrix(y_true, y_pred, num_classes: int) -> np.ndarray:
    """
    C[i, j] = #{amostras com classe verdadeira i previstas como j}.

    Raises:
        DataError: bad_label se algum índice estiver fora de [0, num_classes)
    """
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    for name, values in (("y_true", y_true), ("y_pred", y_pred)):
        outside = (values < 0) | (values >= num_classes)
        if outside.any():
            raise DataError(
                code="bad_label",
                message=f"{name} contém índices fora de [0, {num_classes}): {sorted(set(values[outside].tolist()))}",
                context={"array": name, "num_classes": num_classes},
            )
    flat = np.bincount(y_true * num_classes + y_pred, minlength=num_classes * num_classes)
    return flat[: num_classes * num_classes].reshape(num_classes, num_classes)


def macro_average(values) -> float:
    return float(np.mean(np.asarray(values, dtype=np.float64)))


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    macro_f1: float
    macro_precision: float
    macro_recall: float
    precision: list[float]
    recall: list[float]
    f1: list[float]
    support: list[int]
    confusion: list[list[int]]
    class_names: list[str] = field(default_factory=lambda: list(ACTIVITY_LABELS))

    @property
    def total(self) -> int:
        return int(sum(self.support))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> MetricsReport:
        return cls(**{key: data[key] for key in cls.__dataclass_fields__ if key in data})

    def per_class_frame(self) -> pd.DataFrame:
        """Uma linha por classe mais a linha agregada "macro"."""
        frame = pd.DataFrame(
            {
                "class": self.class_names,
                "precision": self.precision,
                "recall": self.recall,
                "f1": self.f1,
                "support": self.support,
            }
        )
        macro = pd.DataFrame(
            [
                {
                    "class": "macro",
                    "precision": self.macro_precision,
                    "recall": self.macro_recall,
                    "f1": self.macro_f1,
                    "support": self.total,
                }
            ]
        )
        return pd.concat([frame, macro], ignore_index=True)


def compute_metrics(y_true, y_pred, num_classes: int = len(ACTIVITY_LABELS), class_names=None) -> MetricsReport:
    """
    Acurácia, F1 macro e precisão/recall/F1 por classe.

    Raises:
        DataError: empty_split para entrada vazia
    """
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.size == 0:
        raise DataError(code="empty_split", message="Não é possível avaliar um conjunto vazio")
    if y_true.shape != y_pred.shape:
        raise DataError(
            code="row_count_mismatch",
            message=f"Rótulos {y_true.shape} e previsões {y_pred.shape} com tamanhos diferentes",
        )

    cm = confusion_matrix(y_true, y_pred, num_classes)
    tp = np.diag(cm)
    precision = _safe_divide(tp, cm.sum(axis=0))
    recall = _safe_divide(tp, cm.sum(axis=1))
    f1 = _safe_divide(2.0 * precision * recall, precision + recall)
    names = list(class_names) if class_names is not None else list(ACTIVITY_LABELS[:num_classes])

    return MetricsReport(
        accuracy=float(np.trace(cm) / cm.sum()),
        macro_f1=macro_average(f1),
        macro_precision=macro_average(precision),
        macro_recall=macro_average(recall),
        precision=precision.tolist(),
        recall=recall.tolist(),
        f1=f1.tolist(),
        support=cm.sum(axis=1).astype(int).tolist(),
        confusion=cm.astype(int).tolist(),
        class_names=names,
    )


# =============================================================================
# ESCRITA
# =============================================================================


def write_report_csv(report: MetricsReport, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    report.per_class_frame().to_csv(path, index=False, float_format="%.6f")
    return path


def write_report_json(report: MetricsReport, path, **extra) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {**report.to_dict(), **extra}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_sweep_csv(axis: str, points, reports: list[MetricsReport], path) -> Path:
    """Colunas (grid point, accuracy, macro_f1), uma linha por ponto."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        {
            axis: [str(p) for p in points],
            "accuracy": [r.accuracy for r in reports],
            "macro_f1": [r.macro_f1 for r in reports],
        }
    )
    frame.to_csv(path, index=False, float_format="%.6f")
    return path
