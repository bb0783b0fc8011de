"""
ModelSpec — Descrição imutável de uma arquitetura (CatEquiv ou baselines).

Os defaults reproduzem a configuração de referência:
C₁=32, C₂=(64, 32, 32), κ₁=9, κ₂=(9, 11, 15), dilatações (1, 2, 3), box k=5,
dropout 0.15; baselines 8→64→64 com κ=9.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum

from catequiv.data.windows import INPUT_CHANNELS, WINDOW_LENGTH
from catequiv.exceptions import ConfigError, ShapeError
from catequiv.nn.functional import PADDING_MODES

INPUT_MODES = ("processed", "raw")


class ModelKind(str, Enum):
    CATEQUIV = "catequiv"
    CIRC_CNN = "circcnn"
    PLAIN_CNN = "plaincnn"

    @classmethod
    def parse(cls, value) -> ModelKind:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError as exc:
            raise ConfigError(
                code="unknown_model",
                message=f"Modelo desconhecido: {value!r} (opções: {', '.join(k.value for k in cls)})",
                context={"model": value},
            ) from exc


@dataclass(frozen=True)
class ModelSpec:
    kind: ModelKind = ModelKind.CATEQUIV
    length: int = WINDOW_LENGTH
    num_classes: int = 6
    c1: int = 32
    c2: tuple[int, ...] = (64, 32, 32)
    k1: int = 9
    k2: tuple[int, ...] = (9, 11, 15)
    dilations: tuple[int, ...] = (1, 2, 3)
    box: int = 5
    dropout: float = 0.15
    gn_eps: float = 1e-5
    # ablações
    padding: str = "circular"
    input_mode: str = "processed"
    tie_axes: bool = True
    axis_l2: bool = True
    multiscale: bool = True
    group_norm: bool = True
    smoothing: bool = True
    # baselines
    baseline_widths: tuple[int, ...] = field(default=(64, 64))
    baseline_kernels: tuple[int, ...] = field(default=(9, 9))

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ModelKind.parse(self.kind))
        for name in ("c2", "k2", "dilations", "baseline_widths", "baseline_kernels"):
            object.__setattr__(self, name, tuple(int(v) for v in getattr(self, name)))

    # ------------------------------------------------------------------
    # Derivados
    # ------------------------------------------------------------------

    @property
    def conv_padding(self) -> str:
        """Padding efetivo: PlainCNN sempre zero, CircCNN sempre circular."""
        if self.kind is ModelKind.PLAIN_CNN:
            return "zeros"
        if self.kind is ModelKind.CIRC_CNN:
            return "circular"
        return self.padding

    @property
    def uses_log_rms(self) -> bool:
        return self.input_mode == "processed"

    @property
    def branches(self) -> tuple[tuple[int, int, int], ...]:
        """(largura, kernel, dilatação) de cada ramo do Stage 2."""
        if self.multiscale:
            return tuple(zip(self.c2, self.k2, self.dilations))
        return ((sum(self.c2), self.k2[0], 1),)

    @property
    def feature_width(self) -> int:
        """F = Σ_d C₂⁽ᵈ⁾ (ou a largura única do ramo single-scale)."""
        return sum(width for width, _, _ in self.branches)

    @property
    def stage2_in(self) -> int:
        """Canais por sensor que entram no Stage 2."""
        return self.c1 if self.axis_l2 else 3 * self.c1

    @property
    def head_dim(self) -> int:
        if self.kind is not ModelKind.CATEQUIV:
            return self.baseline_widths[-1]
        return self.feature_width + (2 if self.uses_log_rms else 0)

    @property
    def input_channels(self) -> int:
        """Canais consumidos pela primeira convolução."""
        if self.kind is ModelKind.CATEQUIV:
            return 6
        return INPUT_CHANNELS if self.uses_log_rms else 6

    # ------------------------------------------------------------------
    # Validação / serialização
    # ------------------------------------------------------------------

    def validate(self) -> ModelSpec:
        """
        Verifica kernels ímpares e dilatação·(κ−1) < T.

        Raises:
            ShapeError: even_kernel, dilation_too_large
            ConfigError: invalid_config
        """
        if self.padding not in PADDING_MODES:
            raise ConfigError(code="invalid_config", message=f"padding inválido: {self.padding!r}")
        if self.input_mode not in INPUT_MODES:
            raise ConfigError(code="invalid_config", message=f"input_mode inválido: {self.input_mode!r}")
        if not (len(self.c2) == len(self.k2) == len(self.dilations)):
            raise ConfigError(
                code="invalid_config",
                message="c2, k2 e dilations devem ter o mesmo número de ramos",
                context={"c2": self.c2, "k2": self.k2, "dilations": self.dilations},
            )
        if len(self.baseline_widths) != len(self.baseline_kernels):
            raise ConfigError(code="invalid_config", message="baseline_widths e baseline_kernels com tamanhos diferentes")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(code="invalid_config", message=f"dropout deve estar em [0, 1), recebido {self.dropout}")

        if self.kind is ModelKind.CATEQUIV:
            kernels = [(self.k1, 1), (self.box, 1)] + [(k, d) for _, k, d in self.branches]
        else:
            kernels = [(k, 1) for k in self.baseline_kernels]
        for kernel, dilation in kernels:
            if kernel % 2 != 1:
                raise ShapeError(code="even_kernel", message=f"Kernel deve ter comprimento ímpar, recebido {kernel}")
            if dilation * (kernel - 1) >= self.length:
                raise ShapeError(
                    code="dilation_too_large",
                    message=f"dilation·(κ-1) = {dilation * (kernel - 1)} deve ser < T = {self.length}",
                )
        return self

    def replace(self, **changes) -> ModelSpec:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        data = dataclasses.asdict(self)
        data["kind"] = self.kind.value
        for name in ("c2", "k2", "dilations", "baseline_widths", "baseline_kernels"):
            data[name] = list(data[name])
        return data

    @classmethod
    def from_dict(cls, data: dict) -> ModelSpec:
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(
                code="invalid_config",
                message=f"Campos desconhecidos no ModelSpec: {', '.join(sorted(unknown))}",
            )
        return cls(**data)


def param_count(spec: ModelSpec) -> int:
    """
    Número de parâmetros livres (parâmetros amarrados contam uma vez).

    CatEquiv:
        Stage 1   C₁·κ₁ (×6 se desamarrado), sem bias
        GN        2 · canais (γ, β)
        Stage 2   Σ_d C₂⁽ᵈ⁾·C_in·κ₂⁽ᵈ⁾ + C₂⁽ᵈ⁾, amarrado entre sensores
        Head      K·D + K
    Baselines:
        Σ_l C_l·C_{l-1}·κ_l + C_l  +  K·C_L + K
    """
    k = spec.num_classes
    if spec.kind is not ModelKind.CATEQUIV:
        total, previous = 0, spec.input_channels
        for width, kernel in zip(spec.baseline_widths, spec.baseline_kernels):
            total += width * previous * kernel + width
            previous = width
        return total + k * previous + k

    stage1 = spec.c1 * spec.k1 * (1 if spec.tie_axes else 6)
    gn = 2 * (2 * spec.stage2_in) if spec.group_norm else 0
    stage2 = sum(width * spec.stage2_in * kernel + width for width, kernel, _ in spec.branches)
    head = k * spec.head_dim + k
    return stage1 + gn + stage2 + head
