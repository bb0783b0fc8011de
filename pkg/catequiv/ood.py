"""
Perturbações fora da distribuição sobre streams brutos (N, T, 2, 3).

Cada janela recebe, nesta ordem:
    1. deslocamento cíclico Δ ~ Unif{−s, …, s}, o mesmo para todos os canais
    2. ganho por sensor g_s ~ Unif[lo, hi]
    3. uma rotação R ∈ SO(3) aplicada a ACC e a GYR

As três operações comutam sobre streams brutos, então a ordem é só convenção
de sorteio (shift, ganhos, rotação).
"""

from __future__ import annotations

import dataclasses
import logging
import math
import zlib
from dataclasses import dataclass
from threading import RLock

import numpy as np

from catequiv.data.windows import WINDOW_LENGTH, Window
from catequiv.exceptions import ConfigError
from catequiv.nn.rng import Rng

logger = logging.getLogger(__name__)

SWEEP_AXES = ("shift", "gain", "rotation")
OPERATIONS = ("shift", "gain", "rotation")


@dataclass(frozen=True)
class OodConfig:
    shift_range: int = 18
    gain_lo: float = 0.7
    gain_hi: float = 1.4
    rotate: bool = True
    rotation_max_angle: float | None = None
    seed: int = 0

    @classmethod
    def identity(cls, seed: int = 0) -> OodConfig:
        return cls(shift_range=0, gain_lo=1.0, gain_hi=1.0, rotate=False, seed=seed)

    @property
    def is_identity(self) -> bool:
        no_rotation = not self.rotate or self.rotation_max_angle == 0
        return self.shift_range == 0 and self.gain_lo == self.gain_hi == 1.0 and no_rotation

    def validate(self, length: int = WINDOW_LENGTH) -> OodConfig:
        if not 0 <= self.shift_range < length:
            raise ConfigError(
                code="invalid_config",
                message=f"shift_range deve estar em [0, {length}), recebido {self.shift_range}",
            )
        if not 0 < self.gain_lo <= self.gain_hi:
            raise ConfigError(
                code="invalid_config",
                message=f"Ganhos devem satisfazer 0 < lo ≤ hi, recebido ({self.gain_lo}, {self.gain_hi})",
            )
        if self.rotation_max_angle is not None and not 0 <= self.rotation_max_angle <= 180:
            raise ConfigError(
                code="invalid_config",
                message=f"rotation_max_angle deve estar em [0, 180], recebido {self.rotation_max_angle}",
            )
        return self

    def replace(self, **changes) -> OodConfig:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# =============================================================================
# ROTAÇÕES
# =============================================================================


def haar_correct(q: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Q·diag(sign(diag R)) e, se det < 0, troca o sinal da primeira coluna."""
    signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    signs[signs == 0] = 1.0
    q = q * signs[..., None, :]
    flip = np.where(np.linalg.det(q) < 0, -1.0, 1.0)
    q[..., :, 0] *= flip[..., None]
    return q


def sample_rotation(rng) -> np.ndarray:
    """R ∈ SO(3) distribuída segundo a medida de Haar (QR com correção de sinal)."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    return haar_correct(q, r)


def sample_rotations(rng, count: int) -> np.ndarray:
    """`count` rotações de Haar independentes, (count, 3, 3)."""
    q, r = np.linalg.qr(rng.normal(size=(count, 3, 3)))
    return haar_correct(q, r)


def axis_angle_rotation(axis, angle: float) -> np.ndarray:
    """Fórmula de Rodrigues para eixo unitário e ângulo em radianos."""
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    k = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return np.eye(3) + math.sin(angle) * k + (1.0 - math.cos(angle)) * (k @ k)


def sample_bounded_rotation(rng, max_angle_degrees: float) -> np.ndarray:
    """Eixo uniforme na esfera, ângulo uniforme em [0, max]; max = 0 é a identidade."""
    axis = rng.normal(size=3)
    angle = math.radians(float(rng.uniform(0.0, max_angle_degrees)))
    if max_angle_degrees == 0:
        return np.eye(3)
    return axis_angle_rotation(axis, angle)


# =============================================================================
# AÇÕES SOBRE STREAMS BRUTOS
# =============================================================================


def apply_shift(values, delta: int) -> np.ndarray:
    """x(t) ↦ x((t − Δ) mod T) no eixo do tempo de (…, T, 2, 3)."""
    return np.roll(np.asarray(values), int(delta), axis=-3)


def apply_gain(values, gains) -> np.ndarray:
    """x_s ↦ g_s · x_s para s ∈ {ACC, GYR}."""
    values = np.asarray(values)
    return values * np.asarray(gains, dtype=values.dtype)[..., None, :, None]


def apply_rotation(values, rotation) -> np.ndarray:
    """x_s ↦ R x_s em ambos os sensores (mesma R)."""
    values = np.asarray(values)
    return np.einsum("...ij,...tsj->...tsi", np.asarray(rotation, dtype=values.dtype), values)


@dataclass(frozen=True)
class Perturbation:
    """Um sorteio concreto (Δ, g, R) para uma janela."""

    delta: int
    gains: tuple[float, float]
    rotation: np.ndarray

    def apply(self, values, order: tuple[str, ...] = OPERATIONS) -> np.ndarray:
        out = np.asarray(values, dtype=np.float64)
        for op in order:
            if op == "shift":
                out = apply_shift(out, self.delta)
            elif op == "gain":
                out = apply_gain(out, self.gains)
            elif op == "rotation":
                out = apply_rotation(out, self.rotation)
            else:
                raise ConfigError(code="invalid_config", message=f"Operação desconhecida: {op!r}")
        return out


def draw_perturbation(cfg: OodConfig, rng) -> Perturbation:
    """Sorteia, nesta ordem, Δ, os dois ganhos e a rotação."""
    delta = int(rng.integers(-cfg.shift_range, cfg.shift_range, endpoint=True)) if cfg.shift_range else 0
    gains = rng.uniform(cfg.gain_lo, cfg.gain_hi, size=2) if cfg.gain_lo != cfg.gain_hi else np.full(2, cfg.gain_lo)
    if not cfg.rotate:
        rotation = np.eye(3)
    elif cfg.rotation_max_angle is None:
        rotation = sample_rotation(rng)
    else:
        rotation = sample_bounded_rotation(rng, cfg.rotation_max_angle)
    return Perturbation(delta=delta, gains=(float(gains[0]), float(gains[1])), rotation=rotation)


def perturb(window: Window, cfg: OodConfig, rng) -> Window:
    """Janela perturbada (shift → ganho → rotação)."""
    values = draw_perturbation(cfg, rng).apply(window.values)
    return Window(values=values, label=window.label, subject=window.subject, expected_length=window.length)


def perturb_values(values, cfg: OodConfig, rng) -> np.ndarray:
    """
    Perturba um lote (N, T, 2, 3). A janela i usa o stream `rng.spawn(i)`,
    então o sorteio depende só de (seed, índice).
    """
    values = np.asarray(values, dtype=np.float64)
    if cfg.is_identity:
        return values.copy()
    out = np.empty_like(values)
    for i in range(values.shape[0]):
        out[i] = draw_perturbation(cfg, rng.spawn(i)).apply(values[i])
    return out


# =============================================================================
# CACHE DE CONJUNTOS PERTURBADOS
# =============================================================================


class _PerturbationCache:
    """Conjuntos de avaliação perturbados, sorteados uma vez por (dados, cfg, seed)."""

    def __init__(self, max_entries: int = 16) -> None:
        self._lock = RLock()
        self._entries: dict[tuple, np.ndarray] = {}
        self.max_entries = max_entries

    @staticmethod
    def fingerprint(values: np.ndarray) -> tuple:
        return values.shape, zlib.crc32(np.ascontiguousarray(values).tobytes())

    def get(self, values, cfg: OodConfig, seed: int) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        key = (self.fingerprint(values), cfg.replace(seed=0), int(seed))
        with self._lock:
            cached = self._entries.get(key)
        if cached is not None:
            return cached
        perturbed = perturb_values(values, cfg, Rng(seed).spawn("ood"))
        perturbed.setflags(write=False)
        with self._lock:
            if len(self._entries) >= self.max_entries:
                self._entries.pop(next(iter(self._entries)))
            self._entries[key] = perturbed
        logger.debug("ood cache: drew %d perturbed windows (seed=%d)", values.shape[0], seed)
        return perturbed

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()


perturbation_cache = _PerturbationCache()


# =============================================================================
# GRADES DE SWEEP
# =============================================================================


def _range(token: str, cast) -> list:
    try:
        start, stop, step = (float(part) for part in token.split(":"))
    except ValueError as exc:
        raise ConfigError(code="bad_grid", message=f"Intervalo inválido: {token!r}") from exc
    if step <= 0 or stop < start:
        raise ConfigError(code="bad_grid", message=f"Intervalo vazio ou passo não positivo: {token!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [cast(round(start + i * step, 10)) for i in range(count)]


def _number(token: str, cast):
    try:
        return cast(float(token))
    except ValueError as exc:
        raise ConfigError(code="bad_grid", message=f"Valor de grade inválido: {token!r}") from exc


def parse_grid(axis: str, text: str) -> list:
    """
    Converte a grade da linha de comando em pontos.

    shift:    inteiros s (Δ ~ Unif{−s..s}), "0:18:3" ou "0,6,12"
    gain:     pares "lo:hi" ou um g (intervalo [1/g, g]); "1:2:0.25" é uma faixa de g
    rotation: ângulos máximos em graus
    """
    if axis not in SWEEP_AXES:
        raise ConfigError(code="bad_grid", message=f"Eixo de sweep desconhecido: {axis!r}")
    points: list = []
    for token in (t.strip() for t in str(text).split(",")):
        if not token:
            continue
        parts = token.count(":")
        if axis == "gain" and parts == 1:
            lo, hi = (_number(p, float) for p in token.split(":"))
            points.append((lo, hi))
        elif parts == 2:
            cast = int if axis == "shift" else float
            points.extend(_range(token, cast))
        elif parts == 0:
            points.append(_number(token, int if axis == "shift" else float))
        else:
            raise ConfigError(code="bad_grid", message=f"Token de grade inválido: {token!r}")
    if not points:
        raise ConfigError(code="bad_grid", message="Grade vazia")
    return points


def sweep_config(axis: str, point, seed: int = 0) -> OodConfig:
    """OodConfig que varia só um eixo, com os demais na identidade."""
    base = OodConfig.identity(seed=seed)
    if axis == "shift":
        return base.replace(shift_range=int(point))
    if axis == "gain":
        if isinstance(point, tuple):
            lo, hi = point
        else:
            g = float(point)
            if g <= 0:
                raise ConfigError(code="bad_grid", message=f"Ganho deve ser positivo, recebido {g}")
            lo, hi = min(g, 1.0 / g), max(g, 1.0 / g)
        return base.replace(gain_lo=float(lo), gain_hi=float(hi))
    if axis == "rotation":
        return base.replace(rotate=float(point) > 0, rotation_max_angle=float(point))
    raise ConfigError(code="bad_grid", message=f"Eixo de sweep desconhecido: {axis!r}")
