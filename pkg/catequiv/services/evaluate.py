"""
EvaluationService — Avaliação limpa ou sob OOD e sweeps por eixo.
"""

from __future__ import annotations

import logging

from catequiv.data.ucihar import DatasetSplit
from catequiv.data.windows import RMS_EPSILON
from catequiv.exceptions import DataError
from catequiv.ids import derive_seed
from catequiv.metrics import MetricsReport, compute_metrics
from catequiv.networks import Network
from catequiv.ood import OodConfig, perturbation_cache, sweep_config

logger = logging.getLogger(__name__)


class EvaluationService:
    @staticmethod
    def evaluate(
        network: Network,
        data: DatasetSplit,
        ood: OodConfig | None = None,
        *,
        epsilon: float = RMS_EPSILON,
        batch_size: int = 256,
    ) -> MetricsReport:
        """
        Avalia a rede em modo de avaliação.

        Com `ood`, as janelas são perturbadas uma única vez por (dados, cfg, seed)
        e reutilizadas por todos os modelos avaliados no mesmo processo.

        Raises:
            DataError: empty_split
        """
        if len(data) == 0:
            raise DataError(code="empty_split", message="Não é possível avaliar uma partição vazia")
        values = data.values
        if ood is not None and not ood.is_identity:
            values = perturbation_cache.get(values, ood.validate(network.spec.length), ood.seed)
        predictions = network.predict(network.prepare(values, epsilon), batch_size)
        report = compute_metrics(data.targets, predictions, network.spec.num_classes)
        logger.info(
            "evaluate: %s on %d windows (%s): acc=%.4f macro_f1=%.4f",
            network.spec.kind.value, len(data), "ood" if ood is not None else "clean",
            report.accuracy, report.macro_f1,
        )
        return report

    @staticmethod
    def sweep(
        network: Network,
        data: DatasetSplit,
        axis: str,
        grid: list,
        *,
        seed: int = 0,
        epsilon: float = RMS_EPSILON,
        batch_size: int = 256,
    ) -> list[tuple[object, MetricsReport]]:
        """
        Um relatório por ponto da grade; cada ponto tem seed própria
        derivada de (seed, "sweep", eixo, índice).
        """
        if not grid:
            raise DataError(code="empty_split", message="Grade de sweep vazia")
        results = []
        for index, point in enumerate(grid):
            cfg = sweep_config(axis, point, seed=derive_seed(seed, "sweep", axis, index))
            report = EvaluationService.evaluate(network, data, cfg, epsilon=epsilon, batch_size=batch_size)
            results.append((point, report))
        return results
