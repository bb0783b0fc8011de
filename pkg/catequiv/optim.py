"""
Otimização — Pesos de classe, clipping por norma global, Adam e agendas
de learning rate / early stopping monitoradas por uma métrica de validação.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from catequiv.exceptions import DataError, TrainingError
from catequiv.nn.tensor import Parameter

logger = logging.getLogger(__name__)


def class_weights(counts, num_classes: int | None = None) -> list[float]:
    """
    w_c = (1/n_c) / ((1/K) Σ_k 1/n_k), de modo que (1/K) Σ_c w_c = 1.

    Raises:
        DataError: empty_split se alguma classe não tiver amostras
    """
    counts = [int(c) for c in counts]
    k = num_classes if num_classes is not None else len(counts)
    if len(counts) != k or any(c <= 0 for c in counts):
        raise DataError(
            code="empty_split",
            message=f"Todas as {k} classes precisam de amostras no treino, recebido {counts}",
            context={"counts": counts},
        )
    inverse = np.array([1.0 / c for c in counts])
    return (inverse / inverse.mean()).tolist()


def global_norm(grads: Mapping[str, np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.sum(np.square(g, dtype=np.float64))) for g in grads.values())))


def clip_grad_norm(grads: Mapping[str, np.ndarray], max_norm: float) -> tuple[dict[str, np.ndarray], float]:
    """
    Reescala todos os gradientes por max_norm/‖g‖ quando ‖g‖ > max_norm.

    Returns:
        (gradientes, norma antes do clipping); abaixo do limiar os arrays
        são devolvidos sem alteração
    """
    norm = global_norm(grads)
    if norm <= max_norm:
        return dict(grads), norm
    factor = max_norm / norm
    return {name: g * factor for name, g in grads.items()}, norm


# =============================================================================
# ADAM
# =============================================================================


@dataclass
class AdamState:
    """Momentos por parâmetro e contador de passos."""

    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0

    @classmethod
    def for_params(cls, params: Mapping[str, Parameter]) -> AdamState:
        return cls(
            m={name: np.zeros_like(p.data) for name, p in params.items()},
            v={name: np.zeros_like(p.data) for name, p in params.items()},
        )


def adam_step(
    state: AdamState,
    params: Mapping[str, Parameter],
    grads: Mapping[str, np.ndarray],
    *,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    weight_decay: float = 0.0,
    decoupled: bool = False,
) -> AdamState:
    """
    Um passo de Adam com correção de viés.

    weight decay acoplado soma wd·θ ao gradiente (L2 clássico);
    desacoplado aplica θ ← θ − lr·wd·θ fora dos momentos.

    Raises:
        TrainingError: non_finite_grad (nenhum parâmetro é alterado)
    """
    for name, grad in grads.items():
        if not np.all(np.isfinite(grad)):
            raise TrainingError(
                code="non_finite_grad",
                message=f"Gradiente não finito em {name}; passo abortado",
                context={"parameter": name, "step": state.step},
            )

    state.step += 1
    correction1 = 1.0 - beta1**state.step
    correction2 = 1.0 - beta2**state.step
    for name, param in params.items():
        theta = param.data
        grad = grads.get(name)
        grad = np.zeros_like(theta) if grad is None else grad.astype(theta.dtype, copy=False)
        if weight_decay and not decoupled:
            grad = grad + weight_decay * theta
        m = state.m.setdefault(name, np.zeros_like(theta))
        v = state.v.setdefault(name, np.zeros_like(theta))
        m = beta1 * m + (1.0 - beta1) * grad
        v = beta2 * v + (1.0 - beta2) * grad * grad
        state.m[name], state.v[name] = m, v
        update = lr * (m / correction1) / (np.sqrt(v / correction2) + eps)
        if weight_decay and decoupled:
            update = update + lr * weight_decay * theta
        param.assign(theta - update)
    return state


# =============================================================================
# AGENDAS
# =============================================================================


class PlateauScheduler:
    """
    Reduz o learning rate por `factor` quando a métrica monitorada (maior é
    melhor) não melhora por `patience` épocas seguidas; o contador zera a
    cada redução.
    """

    def __init__(self, lr: float, factor: float = 0.5, patience: int = 3, min_delta: float = 1e-4):
        self.lr = lr
        self.factor = factor
        self.patience = patience
        self.min_delta = min_delta
        self.best = -np.inf
        self.bad_epochs = 0
        self.reductions = 0

    def step(self, metric: float) -> bool:
        """Registra a métrica da época; retorna True se o LR foi reduzido."""
        if metric > self.best + self.min_delta:
            self.best = metric
            self.bad_epochs = 0
            return False
        self.bad_epochs += 1
        if self.bad_epochs >= self.patience:
            self.lr *= self.factor
            self.bad_epochs = 0
            self.reductions += 1
            logger.warning("plateau: no improvement for %d epochs, lr reduced to %.3e", self.patience, self.lr)
            return True
        return False


class EarlyStopping:
    """Sinaliza parada após `patience` épocas sem melhora sobre a melhor métrica."""

    def __init__(self, patience: int = 10, min_delta: float = 1e-4):
        self.patience = patience
        self.min_delta = min_delta
        self.best = -np.inf
        self.best_epoch = -1
        self.bad_epochs = 0

    def step(self, metric: float, epoch: int) -> bool:
        """Retorna True quando o treino deve parar."""
        if metric > self.best + self.min_delta:
            self.best = metric
            self.best_epoch = epoch
            self.bad_epochs = 0
            return False
        self.bad_epochs += 1
        return self.bad_epochs >= self.patience

    @property
    def improved(self) -> bool:
        return self.bad_epochs == 0
