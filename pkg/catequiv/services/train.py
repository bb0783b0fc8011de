"""
TrainService — Laço de otimização com Adam, cross-entropy balanceada por
classe, clipping global, agenda de plateau, early stopping e augmentação
OOD aplicada aos streams brutos.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from catequiv.data.ucihar import DatasetSplit
from catequiv.data.windows import RMS_EPSILON
from catequiv.exceptions import ConfigError, TrainingError
from catequiv.metrics import compute_metrics
from catequiv.networks import Network, build_network
from catequiv.networks.spec import ModelSpec
from catequiv.nn import functional as F
from catequiv.nn.rng import Rng
from catequiv.nn.tensor import Tape
from catequiv.ood import OodConfig, perturb_values
from catequiv.optim import AdamState, EarlyStopping, PlateauScheduler, adam_step, class_weights, clip_grad_norm

logger = logging.getLogger(__name__)

WEIGHT_DECAY_MODES = ("coupled", "decoupled")
AUGMENT_MODES = ("per_epoch", "fixed")


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    weight_decay: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 128
    clip_norm: float = 5.0
    plateau_factor: float = 0.5
    plateau_patience: int = 3
    early_stop_patience: int = 10
    dropout: float = 0.15
    max_epochs: int = 100
    seed: int = 0
    augment: bool = True
    augment_mode: str = "per_epoch"
    weight_decay_mode: str = "coupled"
    min_delta: float = 1e-4
    dtype: str = "float32"

    def validate(self) -> TrainConfig:
        positive = ("lr", "adam_eps", "batch_size", "clip_norm", "plateau_factor", "max_epochs")
        bad = [name for name in positive if not getattr(self, name) > 0]
        if self.weight_decay < 0 or self.min_delta < 0:
            bad.append("weight_decay/min_delta")
        if self.plateau_patience < 1 or self.early_stop_patience < 1:
            bad.append("patience")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            bad.append("betas")
        if self.augment_mode not in AUGMENT_MODES or self.weight_decay_mode not in WEIGHT_DECAY_MODES:
            bad.append("mode")
        if bad:
            raise ConfigError(
                code="invalid_config",
                message=f"TrainConfig inválido: {', '.join(bad)}",
                context={"fields": bad},
            )
        return self

    def replace(self, **changes) -> TrainConfig:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class TrainResult:
    network: Network
    best_epoch: int
    best_val_macro_f1: float
    final_lr: float
    stopped_early: bool
    log: list[dict] = field(default_factory=list)


class TrainService:
    """
    Serviço de treinamento.

    Streams de aleatoriedade derivados da seed mestre por rótulo:
    "init", ("augment", época), ("shuffle", época), ("dropout", época).
    """

    @staticmethod
    def train(
        spec: ModelSpec,
        train_data: DatasetSplit,
        val_data: DatasetSplit,
        cfg: TrainConfig,
        ood: OodConfig | None = None,
        *,
        epsilon: float = RMS_EPSILON,
        on_epoch: Callable[[dict], None] | None = None,
    ) -> TrainResult:
        """
        Treina e devolve a rede do melhor F1 macro de validação.

        Args:
            spec: Arquitetura (o dropout do cfg substitui o do spec)
            train_data: Partição de treino
            val_data: Partição de validação
            cfg: Hiperparâmetros
            ood: Perturbação usada na augmentação (default: OodConfig())
            epsilon: Piso do RMS
            on_epoch: Callback chamado com o registro de cada época

        Raises:
            TrainingError: empty_split, diverged, non_finite_grad
        """
        cfg = cfg.validate()
        if len(train_data) == 0 or len(val_data) == 0:
            raise TrainingError(
                code="empty_split",
                message="Treino e validação precisam de ao menos uma janela",
                context={"train": len(train_data), "val": len(val_data)},
            )
        ood = (ood or OodConfig()).validate(spec.length)
        rng = Rng(cfg.seed)
        network = build_network(spec.replace(dropout=cfg.dropout), rng.spawn("init"), dtype=np.dtype(cfg.dtype))
        weights = class_weights(train_data.class_counts(spec.num_classes), spec.num_classes)
        state = AdamState.for_params(network.params)
        scheduler = PlateauScheduler(cfg.lr, cfg.plateau_factor, cfg.plateau_patience, cfg.min_delta)
        stopper = EarlyStopping(cfg.early_stop_patience, cfg.min_delta)

        targets = train_data.targets
        val_x = network.prepare(val_data.values, epsilon)
        fixed_x = None
        best_state = network.state_dict()
        log: list[dict] = []
        n = len(train_data)
        stopped_early = False

        logger.info(
            "train: %s, %d train / %d val windows, %d parameters, seed=%d",
            spec.kind.value, n, len(val_data), network.num_parameters(), cfg.seed,
        )

        for epoch in range(cfg.max_epochs):
            if not cfg.augment:
                x = fixed_x if fixed_x is not None else network.prepare(train_data.values, epsilon)
                fixed_x = x
            elif cfg.augment_mode == "fixed":
                if fixed_x is None:
                    fixed_x = network.prepare(perturb_values(train_data.values, ood, rng.spawn("augment")), epsilon)
                x = fixed_x
            else:
                x = network.prepare(perturb_values(train_data.values, ood, rng.spawn("augment", epoch)), epsilon)

            order = rng.spawn("shuffle", epoch).permutation(n)
            dropout_rng = rng.spawn("dropout", epoch)
            lr = scheduler.lr
            loss_sum, correct = 0.0, 0
            for start in range(0, n, cfg.batch_size):
                idx = order[start : start + cfg.batch_size]
                with Tape() as tape:
                    logits = network.forward(x[idx], train=True, rng=dropout_rng)
                    loss = F.cross_entropy(logits, targets[idx], weights)
                    value = loss.item()
                    if not np.isfinite(value):
                        raise TrainingError(
                            code="diverged",
                            message=f"Loss não finita na época {epoch} (lr={lr:.3e})",
                            context={"epoch": epoch, "lr": lr, "batch_start": int(start)},
                        )
                    tape.backward(loss)
                grads = {name: tape.grad(p) for name, p in network.params.items()}
                grads, norm = clip_grad_norm(grads, cfg.clip_norm)
                adam_step(
                    state,
                    network.params,
                    grads,
                    lr=lr,
                    beta1=cfg.beta1,
                    beta2=cfg.beta2,
                    eps=cfg.adam_eps,
                    weight_decay=cfg.weight_decay,
                    decoupled=cfg.weight_decay_mode == "decoupled",
                )
                loss_sum += value * len(idx)
                correct += int((logits.numpy().argmax(axis=1) == targets[idx]).sum())
                logger.debug("train: epoch %d batch %d loss %.6f grad norm %.4f", epoch, start // cfg.batch_size, value, norm)

            report = compute_metrics(val_data.targets, network.predict(val_x), spec.num_classes)
            record = {
                "epoch": epoch,
                "lr": lr,
                "train_loss": loss_sum / n,
                "train_accuracy": correct / n,
                "val_accuracy": report.accuracy,
                "val_macro_f1": report.macro_f1,
            }
            log.append(record)
            if on_epoch is not None:
                on_epoch(record)
            logger.info(
                "train: epoch %d lr=%.2e loss=%.4f val_acc=%.4f val_f1=%.4f",
                epoch, lr, record["train_loss"], report.accuracy, report.macro_f1,
            )

            stop = stopper.step(report.macro_f1, epoch)
            if stopper.improved:
                best_state = network.state_dict()
            scheduler.step(report.macro_f1)
            if stop:
                stopped_early = True
                logger.warning(
                    "train: early stop at epoch %d (best epoch %d, val_f1=%.4f)",
                    epoch, stopper.best_epoch, stopper.best,
                )
                break

        network.load_state_dict(best_state)
        return TrainResult(
            network=network,
            best_epoch=stopper.best_epoch,
            best_val_macro_f1=float(stopper.best),
            final_lr=scheduler.lr,
            stopped_early=stopped_early,
            log=log,
        )
