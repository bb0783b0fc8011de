"""
Leitura do UCI-HAR (streams inerciais brutos) e partições.

Layout esperado:
    <root>/<split>/Inertial Signals/{total|body}_acc_{x,y,z}_<split>.txt
    <root>/<split>/Inertial Signals/body_gyro_{x,y,z}_<split>.txt
    <root>/<split>/y_<split>.txt
    <root>/<split>/subject_<split>.txt   (opcional)

Cada linha de um arquivo de sinal é uma janela de 128 reais separados por espaço.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from catequiv.data.windows import ACTIVITY_LABELS, NUM_AXES, NUM_SENSORS, WINDOW_LENGTH, Window
from catequiv.exceptions import DataError

logger = logging.getLogger(__name__)

NUM_CLASSES = len(ACTIVITY_LABELS)
SPLITS = ("train", "test")
ACC_SOURCES = ("total", "body")
OFFICIAL_COUNTS = {"train": 7352, "test": 2947}


@dataclass(frozen=True)
class DatasetSplit:
    """
    Conjunto imutável de janelas.

    values: (N, T, 2, 3); labels: (N,) em 1..6; subjects: (N,).
    """

    values: np.ndarray
    labels: np.ndarray
    subjects: np.ndarray
    split: str = "train"

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    def __getitem__(self, index: int) -> Window:
        return Window(
            values=self.values[index],
            label=int(self.labels[index]),
            subject=int(self.subjects[index]),
            expected_length=self.values.shape[1],
        )

    @property
    def windows(self) -> list[Window]:
        return [self[i] for i in range(len(self))]

    @property
    def targets(self) -> np.ndarray:
        """Índices de classe 0..K-1 usados pela rede."""
        return self.labels.astype(np.int64) - 1

    def class_counts(self, num_classes: int = NUM_CLASSES) -> list[int]:
        return np.bincount(self.targets, minlength=num_classes)[:num_classes].tolist()

    def subset(self, indices, split: str | None = None) -> DatasetSplit:
        indices = np.asarray(indices, dtype=np.int64)
        return DatasetSplit(
            values=self.values[indices],
            labels=self.labels[indices],
            subjects=self.subjects[indices],
            split=split or self.split,
        )

    def with_values(self, values: np.ndarray) -> DatasetSplit:
        """Mesmo rótulos/sujeitos com streams substituídos (ex.: perturbados)."""
        return DatasetSplit(values=values, labels=self.labels, subjects=self.subjects, split=self.split)

    @classmethod
    def from_windows(cls, windows: list[Window], split: str = "train") -> DatasetSplit:
        return cls(
            values=np.stack([w.values for w in windows]),
            labels=np.array([w.label for w in windows], dtype=np.int64),
            subjects=np.array([w.subject for w in windows], dtype=np.int64),
            split=split,
        )


def _read_matrix(path: Path) -> np.ndarray:
    if not path.exists():
        raise DataError(
            code="missing_file",
            message=f"Arquivo não encontrado: {path}",
            context={"path": str(path)},
        )
    try:
        frame = pd.read_csv(path, sep=r"\s+", header=None)
    except pd.errors.EmptyDataError:
        return np.zeros((0, 0))
    except pd.errors.ParserError as exc:
        raise DataError(
            code="bad_row_length",
            message=f"Linhas com número de colunas inconsistente em {path.name}: {exc}",
            context={"path": str(path)},
        ) from exc

    numeric = frame.apply(pd.to_numeric, errors="coerce")
    bad = numeric.isna() & frame.notna()
    if bad.to_numpy().any():
        row, col = np.argwhere(bad.to_numpy())[0]
        raise DataError(
            code="non_numeric",
            message=f"Token não numérico {frame.iat[row, col]!r} em {path.name} (linha {row + 1}, coluna {col + 1})",
            context={"path": str(path), "row": int(row + 1), "column": int(col + 1)},
        )
    if numeric.isna().to_numpy().any():
        raise DataError(
            code="bad_row_length",
            message=f"Linhas com número de colunas inconsistente em {path.name}",
            context={"path": str(path)},
        )
    return numeric.to_numpy(dtype=np.float64)


def signal_files(root: Path, split: str, acc_source: str = "total") -> list[Path]:
    """Os 6 arquivos usados, na ordem ACCx, ACCy, ACCz, GYRx, GYRy, GYRz."""
    folder = Path(root) / split / "Inertial Signals"
    acc = [folder / f"{acc_source}_acc_{axis}_{split}.txt" for axis in "xyz"]
    gyr = [folder / f"body_gyro_{axis}_{split}.txt" for axis in "xyz"]
    return acc + gyr


def load_ucihar(root_path, split: str, acc_source: str = "total") -> DatasetSplit:
    """
    Carrega uma partição oficial do UCI-HAR.

    Args:
        root_path: Diretório raiz do dataset ("UCI HAR Dataset")
        split: "train" ou "test"
        acc_source: "total" (total_acc, com gravidade) ou "body" (body_acc)

    Raises:
        DataError: missing_file, row_count_mismatch, non_numeric, bad_row_length, bad_label
    """
    if split not in SPLITS:
        raise DataError(code="missing_file", message=f"Partição desconhecida: {split}", context={"split": split})
    if acc_source not in ACC_SOURCES:
        raise DataError(code="missing_file", message=f"Fonte de ACC desconhecida: {acc_source}")
    root = Path(root_path)

    labels_path = root / split / f"y_{split}.txt"
    labels = _read_matrix(labels_path).reshape(-1)
    streams = []
    for path in signal_files(root, split, acc_source):
        matrix = _read_matrix(path)
        if matrix.shape[0] != labels.shape[0]:
            raise DataError(
                code="row_count_mismatch",
                message=f"{path.name} tem {matrix.shape[0]} janelas, mas {labels_path.name} tem {labels.shape[0]} rótulos",
                context={"path": str(path), "rows": int(matrix.shape[0]), "labels": int(labels.shape[0])},
            )
        if matrix.shape[1] != WINDOW_LENGTH:
            raise DataError(
                code="bad_row_length",
                message=f"{path.name}: esperado {WINDOW_LENGTH} valores por linha, recebido {matrix.shape[1]}",
                context={"path": str(path)},
            )
        streams.append(matrix)

    if labels.size and (np.any(labels != np.round(labels)) or labels.min() < 1 or labels.max() > NUM_CLASSES):
        raise DataError(
            code="bad_label",
            message=f"Rótulos devem ser inteiros em 1..{NUM_CLASSES}",
            context={"path": str(labels_path)},
        )

    n = labels.shape[0]
    values = np.stack(streams, axis=-1).reshape(n, WINDOW_LENGTH, NUM_SENSORS, NUM_AXES)

    subjects_path = root / split / f"subject_{split}.txt"
    if subjects_path.exists():
        subjects = _read_matrix(subjects_path).reshape(-1).astype(np.int64)
        if subjects.shape[0] != n:
            raise DataError(
                code="row_count_mismatch",
                message=f"{subjects_path.name} tem {subjects.shape[0]} linhas, esperado {n}",
                context={"path": str(subjects_path)},
            )
    else:
        logger.warning("load_ucihar: %s not found, subject ids set to 0", subjects_path)
        subjects = np.zeros(n, dtype=np.int64)

    if n != OFFICIAL_COUNTS[split]:
        logger.info("load_ucihar: %s split has %d windows (official archive has %d)", split, n, OFFICIAL_COUNTS[split])
    logger.debug("load_ucihar: loaded %d %s windows from %s (acc=%s)", n, split, root, acc_source)
    return DatasetSplit(values=values, labels=labels.astype(np.int64), subjects=subjects, split=split)


def stratified_split(data: DatasetSplit, fraction: float, rng) -> tuple[DatasetSplit, DatasetSplit]:
    """
    Separa uma fração estratificada por classe para validação.

    Returns:
        (treino restante, validação), ambos com ordem original preservada
    """
    val_indices: list[int] = []
    for label in np.unique(data.labels):
        members = np.flatnonzero(data.labels == label)
        take = int(round(fraction * members.size))
        if members.size > 1:
            take = min(max(take, 1), members.size - 1)
        else:
            take = 0
        val_indices.extend(members[rng.permutation(members.size)[:take]].tolist())
    val_mask = np.zeros(len(data), dtype=bool)
    val_mask[val_indices] = True
    return (
        data.subset(np.flatnonzero(~val_mask), split="train"),
        data.subset(np.flatnonzero(val_mask), split="val"),
    )
