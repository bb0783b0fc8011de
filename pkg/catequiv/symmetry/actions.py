"""
Morfismos da categoria de simetrias (deslocamento, ganhos, seta do poset) e sua ação sobre tensores.

Convenção de deslocamento: (τ_Δ x)(t) = x((t − τ) mod T).

Os tensores têm o eixo de canais primeiro e o tempo por último; eixos
intermediários (features) são permitidos, de modo que as mesmas funções
realizam o functor de dados X e o functor de saída Y do núcleo linear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from catequiv.exceptions import ShapeError, SymmetryError
from catequiv.nn.tensor import Tensor
from catequiv.symmetry.poset import ARROWS, PosetObject, channel_sensor, placement


def _as_array(x) -> np.ndarray:
    return x.data if isinstance(x, Tensor) else np.asarray(x)


def _check_gains(gains: tuple[float, float]) -> tuple[float, float]:
    lam_acc, lam_gyr = (float(g) for g in gains)
    if not (lam_acc > 0 and lam_gyr > 0):
        raise SymmetryError(
            code="non_positive_gain",
            message=f"Ganhos devem ser positivos, recebido ({lam_acc}, {lam_gyr})",
            context={"gains": (lam_acc, lam_gyr)},
        )
    return lam_acc, lam_gyr


def _check_carrier(x: np.ndarray, obj: PosetObject) -> None:
    if x.ndim < 2 or x.shape[0] != obj.dim:
        raise ShapeError(
            code="shape_mismatch",
            message=f"Tensor sobre {obj.value} deve ter {obj.dim} canais na primeira dimensão, recebido {x.shape}",
            context={"object": obj.value},
        )


@dataclass(frozen=True)
class Morphism:
    """
    Elemento (τ, λ, u) da categoria: deslocamento cíclico, ganhos por sensor e seta do poset.

    Composição: (τ₂, λ₂) ∘ (τ₁, λ₁) = (τ₂ + τ₁ mod T, λ₂ · λ₁).
    """

    tau: int
    lambda_acc: float
    lambda_gyr: float
    source: PosetObject
    target: PosetObject
    period: int = field(default=128)

    def __post_init__(self) -> None:
        if self.period < 1:
            raise SymmetryError(code="period_mismatch", message=f"Período inválido: {self.period}")
        _check_gains((self.lambda_acc, self.lambda_gyr))
        if (self.source, self.target) not in ARROWS:
            raise SymmetryError(
                code="not_below",
                message=f"Não há seta {self.source.value} → {self.target.value} no poset",
                context={"source": self.source.value, "target": self.target.value},
            )
        object.__setattr__(self, "tau", int(self.tau) % self.period)

    @classmethod
    def identity(cls, obj: PosetObject, period: int = 128) -> Morphism:
        return cls(tau=0, lambda_acc=1.0, lambda_gyr=1.0, source=obj, target=obj, period=period)

    @property
    def gains(self) -> tuple[float, float]:
        return self.lambda_acc, self.lambda_gyr

    @property
    def is_identity(self) -> bool:
        return self.tau == 0 and self.gains == (1.0, 1.0) and self.source is self.target

    def compose(self, first: Morphism) -> Morphism:
        """self ∘ first (aplica `first` antes)."""
        if first.period != self.period:
            raise SymmetryError(
                code="period_mismatch",
                message=f"Períodos diferentes: {first.period} e {self.period}",
            )
        if first.target is not self.source:
            raise SymmetryError(
                code="not_composable",
                message=f"Não é possível compor {first.source.value}→{first.target.value} com {self.source.value}→{self.target.value}",
            )
        return Morphism(
            tau=(self.tau + first.tau) % self.period,
            lambda_acc=self.lambda_acc * first.lambda_acc,
            lambda_gyr=self.lambda_gyr * first.lambda_gyr,
            source=first.source,
            target=self.target,
            period=self.period,
        )

    def __matmul__(self, first: Morphism) -> Morphism:
        return self.compose(first)


def shift_time(x, tau: int) -> np.ndarray:
    """(τ_Δ x)(t) = x((t − τ) mod T) no último eixo."""
    return np.roll(_as_array(x), int(tau), axis=-1)


def apply_time_gain(x, obj: PosetObject, tau: int, gains: tuple[float, float]) -> np.ndarray:
    """
    ρ_s(λ) ∘ τ_Δ: desloca todos os canais por τ e escala os canais de ACC por λ_ACC
    e os de GYR por λ_GYR.
    """
    arr = _as_array(x)
    _check_carrier(arr, obj)
    lam_acc, lam_gyr = _check_gains(gains)
    row_gain = np.array(
        [lam_acc if channel_sensor(c) == "ACC" else lam_gyr for c in obj.channels],
        dtype=arr.dtype,
    )
    return shift_time(arr, tau) * row_gain.reshape((-1,) + (1,) * (arr.ndim - 1))


def inject(x, source: PosetObject, target: PosetObject) -> np.ndarray:
    """Injeção canônica source → target: coloca x no bloco de target e zera o restante."""
    arr = _as_array(x)
    _check_carrier(arr, source)
    if not source.precedes(target):
        raise SymmetryError(
            code="not_below",
            message=f"{source.value} não está abaixo de {target.value} no poset",
            context={"source": source.value, "target": target.value},
        )
    if source is target:
        return arr.copy()
    out = np.zeros((target.dim,) + arr.shape[1:], dtype=arr.dtype)
    out[placement(source, target)] = arr
    return out


def apply_morphism(x, m: Morphism) -> np.ndarray:
    """X((τ, λ), u) = J_u ∘ S^{(s)}_{(τ, λ)}."""
    return inject(apply_time_gain(x, m.source, m.tau, m.gains), m.source, m.target)


def apply_morphism_inject_first(x, m: Morphism) -> np.ndarray:
    """Mesma ação na outra ordem: S^{(t)}_{(τ, λ)} ∘ J_u."""
    return apply_time_gain(inject(x, m.source, m.target), m.target, m.tau, m.gains)


def sample_morphism(
    rng,
    period: int,
    arrow: tuple[PosetObject, PosetObject] | None = None,
    gain_range: tuple[float, float] = (0.5, 2.0),
) -> Morphism:
    """Morfismo aleatório: τ uniforme, ganhos log-uniformes, seta uniforme (ou fixa)."""
    if arrow is None:
        arrow = ARROWS[int(rng.integers(0, len(ARROWS)))]
    lo, hi = math.log(gain_range[0]), math.log(gain_range[1])
    lam = np.exp(rng.uniform(lo, hi, size=2))
    return Morphism(
        tau=int(rng.integers(0, period)),
        lambda_acc=float(lam[0]),
        lambda_gyr=float(lam[1]),
        source=arrow[0],
        target=arrow[1],
        period=period,
    )
