"""
Janelas inerciais e processamento de ganho por sensor.

Uma janela bruta tem forma (T, 2 sensores, 3 eixos). O processamento de ganho
produz a entrada de 8 canais × T da rede:

    linhas 0–2: ACC / ρ_ACC      linhas 3–5: GYR / ρ_GYR
    linha  6:   r_ACC (constante no tempo)
    linha  7:   r_GYR (constante no tempo)

com R_s = (1/3T) ΣΣ x², ρ_s = max(ε, √R_s) e r_s = ½ log max(R_s, ε²).
O clamp de r_s substitui a convenção r_s = −∞ para janelas nulas.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from catequiv.exceptions import DataError, ShapeError

WINDOW_LENGTH = 128
NUM_SENSORS = 2
NUM_AXES = 3
INPUT_CHANNELS = 8
RMS_EPSILON = 1e-6

ACTIVITY_LABELS = (
    "WALKING",
    "WALKING_UPSTAIRS",
    "WALKING_DOWNSTAIRS",
    "SITTING",
    "STANDING",
    "LAYING",
)


class RmsStats(NamedTuple):
    R: float
    rho: float
    r: float


@dataclass(frozen=True)
class Window:
    """
    Uma amostra bruta: values (T, 2, 3), rótulo em 1..6 e sujeito.

    T deve ser igual a `expected_length` (default WINDOW_LENGTH).

    Raises:
        ShapeError: shape_mismatch
        DataError: bad_label
    """

    values: np.ndarray
    label: int
    subject: int = 0
    expected_length: int = field(default=WINDOW_LENGTH, repr=False, compare=False)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 3 or values.shape[1:] != (NUM_SENSORS, NUM_AXES):
            raise ShapeError(
                code="shape_mismatch",
                message=f"Janela deve ter forma (T, 2, 3), recebido {values.shape}",
            )
        if values.shape[0] != self.expected_length:
            raise ShapeError(
                code="shape_mismatch",
                message=f"Janela com T={values.shape[0]}, esperado {self.expected_length}",
                context={"length": int(values.shape[0]), "expected": self.expected_length},
            )
        if not 1 <= int(self.label) <= len(ACTIVITY_LABELS):
            raise DataError(
                code="bad_label",
                message=f"Rótulo {self.label} fora de 1..{len(ACTIVITY_LABELS)}",
                context={"label": self.label},
            )
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "label", int(self.label))

    @property
    def length(self) -> int:
        return self.values.shape[0]

    @property
    def acc(self) -> np.ndarray:
        """Stream do acelerômetro, (3, T)."""
        return self.values[:, 0, :].T

    @property
    def gyr(self) -> np.ndarray:
        """Stream do giroscópio, (3, T)."""
        return self.values[:, 1, :].T


@dataclass(frozen=True)
class ProcessedInput:
    axes: np.ndarray
    log_rms: tuple[float, float]
    assembled: np.ndarray


def _sorted_energy(squares: np.ndarray) -> np.ndarray:
    # soma ordenada: R é exatamente invariante a permutações do tempo
    return np.sort(squares, axis=-1).sum(axis=-1)


def compute_rms(x, epsilon: float = RMS_EPSILON) -> RmsStats:
    """
    Energia e escalas de um stream tri-axial (3, T).

    Returns:
        RmsStats(R, ρ = max(ε, √R), r = ½ log max(R, ε²))
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != NUM_AXES:
        raise ShapeError(code="shape_mismatch", message=f"compute_rms espera (3, T), recebido {x.shape}")
    energy = float(_sorted_energy((x * x).reshape(-1)) / x.size)
    rho = max(epsilon, float(np.sqrt(energy)))
    log_rms = 0.5 * float(np.log(max(energy, epsilon * epsilon)))
    return RmsStats(R=energy, rho=rho, r=log_rms)


def normalize_stream(x, epsilon: float = RMS_EPSILON) -> np.ndarray:
    """𝒩_s(x) = x / max(ε, √R_s(x))."""
    x = np.asarray(x, dtype=np.float64)
    return x / compute_rms(x, epsilon).rho


def gain_process_batch(values, epsilon: float = RMS_EPSILON, normalize: bool = True) -> np.ndarray:
    """
    Processa um lote de janelas brutas (N, T, 2, 3) em entradas (N, 8, T).

    Com normalize=False as linhas 0–5 recebem os streams brutos e as linhas 6–7
    ficam zeradas (entrada sem RMS/log-RMS).
    """
    values = np.asarray(values)
    if values.ndim == 3:
        values = values[None]
    if values.ndim != 4 or values.shape[2:] != (NUM_SENSORS, NUM_AXES):
        raise ShapeError(
            code="shape_mismatch",
            message=f"gain_process_batch espera (N, T, 2, 3), recebido {values.shape}",
        )
    n, length = values.shape[:2]
    streams = np.transpose(values, (0, 2, 3, 1))
    out = np.zeros((n, INPUT_CHANNELS, length), dtype=values.dtype if np.issubdtype(values.dtype, np.floating) else np.float64)
    if not normalize:
        out[:, :6] = streams.reshape(n, 6, length)
        return out
    energy = _sorted_energy((streams * streams).reshape(n, NUM_SENSORS, -1)) / (NUM_AXES * length)
    rho = np.maximum(epsilon, np.sqrt(energy))
    log_rms = 0.5 * np.log(np.maximum(energy, epsilon * epsilon))
    out[:, :6] = (streams / rho[:, :, None, None]).reshape(n, 6, length)
    out[:, 6:] = log_rms[:, :, None]
    return out


def gain_process(window: Window, epsilon: float = RMS_EPSILON) -> ProcessedInput:
    """Entrada de 8 canais de uma janela: eixos normalizados + log-RMS replicado no tempo."""
    assembled = gain_process_batch(window.values[None], epsilon)[0]
    return ProcessedInput(
        axes=assembled[:6],
        log_rms=(float(assembled[6, 0]), float(assembled[7, 0])),
        assembled=assembled,
    )
