"""
Fábricas compartilhadas pelos testes: configurações mínimas de rede,
janelas sintéticas e um UCI-HAR em miniatura gravado em disco.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from catequiv.data.ucihar import DatasetSplit, signal_files
from catequiv.networks import ModelSpec, build_network
from catequiv.nn.rng import Rng

TINY = {
    "c1": 2,
    "c2": (2, 2, 2),
    "k1": 3,
    "k2": (3, 3, 3),
    "dilations": (1, 2, 3),
    "box": 3,
    "dropout": 0.0,
    "baseline_widths": (4, 4),
    "baseline_kernels": (3, 3),
}


def tiny_spec(length: int = 16, **changes) -> ModelSpec:
    return ModelSpec(length=length, **{**TINY, **changes})


def tiny_network(seed: int = 0, length: int = 16, dtype=np.float64, **changes):
    return build_network(tiny_spec(length, **changes), Rng(seed).spawn("init"), dtype=dtype)


def random_values(seed: int, count: int, length: int = 16) -> np.ndarray:
    """Janelas brutas (count, T, 2, 3) com RMS ~ 1."""
    return Rng(seed).normal(size=(count, length, 2, 3))


def synthetic_split(per_class: int = 2, length: int = 128, seed: int = 0, split: str = "train") -> DatasetSplit:
    """Janelas com assinatura dependente da classe (frequência no ACC, offset no GYR)."""
    rng = Rng(seed)
    labels = np.repeat(np.arange(1, 7), per_class)
    t = np.arange(length)
    values = rng.normal(scale=0.1, size=(labels.size, length, 2, 3))
    for i, label in enumerate(labels):
        values[i, :, 0, :] += np.sin(2.0 * np.pi * label * t / length)[:, None]
        values[i, :, 1, :] += 0.2 * label
    subjects = np.arange(labels.size) % 3 + 1
    return DatasetSplit(values=values, labels=labels.astype(np.int64), subjects=subjects.astype(np.int64), split=split)


def write_ucihar(root, data: DatasetSplit, split: str, acc_source: str = "total", subjects: bool = True) -> Path:
    """Grava `data` no layout do arquivo oficial sob <root>/<split>."""
    root = Path(root)
    files = signal_files(root, split, acc_source)
    files[0].parent.mkdir(parents=True, exist_ok=True)
    for index, path in enumerate(files):
        sensor, axis = divmod(index, 3)
        np.savetxt(path, data.values[:, :, sensor, axis], fmt="%.12e")
    np.savetxt(root / split / f"y_{split}.txt", data.labels, fmt="%d")
    if subjects:
        np.savetxt(root / split / f"subject_{split}.txt", data.subjects, fmt="%d")
    return root


def write_mini_dataset(root, per_class_train: int = 3, per_class_test: int = 1) -> Path:
    write_ucihar(root, synthetic_split(per_class_train, seed=1, split="train"), "train")
    write_ucihar(root, synthetic_split(per_class_test, seed=2, split="test"), "test")
    return Path(root)


def write_config(path, **sections) -> Path:
    path = Path(path)
    path.write_text(json.dumps(sections), encoding="utf-8")
    return path


def tiny_model_config(length: int = 128) -> dict:
    return {"kind": "catequiv", "length": length, **{k: list(v) if isinstance(v, tuple) else v for k, v in TINY.items()}}
