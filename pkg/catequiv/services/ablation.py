"""
AblationService — Treina uma variante do CatEquiv com um componente removido
e mede a variação do F1 macro sob OOD em relação ao modelo completo.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from catequiv import registry
from catequiv.data.ucihar import DatasetSplit
from catequiv.data.windows import RMS_EPSILON
from catequiv.exceptions import ConfigError
from catequiv.metrics import MetricsReport
from catequiv.networks.spec import ModelKind, ModelSpec
from catequiv.ood import OodConfig
from catequiv.services.evaluate import EvaluationService
from catequiv.services.train import TrainConfig, TrainResult, TrainService

logger = logging.getLogger(__name__)

REFERENCE_VARIANT = "full"


@dataclass(frozen=True)
class SpecVariant:
    """Variante definida por substituição de campos do ModelSpec."""

    code: str
    label: str
    changes: tuple[tuple[str, object], ...] = ()

    def apply(self, spec: ModelSpec) -> ModelSpec:
        return spec.replace(kind=ModelKind.CATEQUIV, **dict(self.changes))


DEFAULT_VARIANTS = (
    SpecVariant(REFERENCE_VARIANT, "CatEquiv completo"),
    SpecVariant("zero-padding", "Padding zero no lugar do circular", (("padding", "zeros"),)),
    SpecVariant("no-log-rms", "Sem normalização RMS e sem canais log-RMS", (("input_mode", "raw"),)),
    SpecVariant("untie-axes", "Filtros do Stage 1 independentes por eixo", (("tie_axes", False),)),
    SpecVariant("no-l2", "Sem ℓ2 sobre os eixos", (("axis_l2", False),)),
    SpecVariant("single-scale", "Stage 2 com um único ramo (sem dilatações)", (("multiscale", False),)),
    SpecVariant("no-groupnorm", "Sem GroupNorm", (("group_norm", False),)),
    SpecVariant("no-smoothing", "Sem suavização temporal", (("smoothing", False),)),
)


@dataclass
class AblationResult:
    variant: str
    spec: ModelSpec
    report: MetricsReport
    reference_macro_f1: float
    train_result: TrainResult | None = None

    @property
    def delta_macro_f1(self) -> float:
        return self.report.macro_f1 - self.reference_macro_f1

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "spec": self.spec.to_dict(),
            "report": self.report.to_dict(),
            "reference_macro_f1": self.reference_macro_f1,
            "delta_macro_f1": self.delta_macro_f1,
            "best_epoch": self.train_result.best_epoch if self.train_result else None,
        }


class AblationService:
    @staticmethod
    def get_variant(code: str):
        variant = registry.get_ablation(code)
        if variant is None:
            raise ConfigError(
                code="unknown_variant",
                message=f"Variante desconhecida: {code!r} (opções: {', '.join(sorted(registry.get_ablations()))})",
                context={"variant": code},
            )
        return variant

    @staticmethod
    def train_and_evaluate(
        spec: ModelSpec,
        train_data: DatasetSplit,
        val_data: DatasetSplit,
        test_data: DatasetSplit,
        cfg: TrainConfig,
        ood: OodConfig,
        epsilon: float = RMS_EPSILON,
    ) -> tuple[TrainResult, MetricsReport]:
        result = TrainService.train(spec, train_data, val_data, cfg, ood, epsilon=epsilon)
        report = EvaluationService.evaluate(result.network, test_data, ood, epsilon=epsilon)
        return result, report

    @staticmethod
    def run_ablation(
        variant_id: str,
        train_data: DatasetSplit,
        val_data: DatasetSplit,
        test_data: DatasetSplit,
        cfg: TrainConfig,
        ood: OodConfig | None = None,
        *,
        spec: ModelSpec | None = None,
        reference: MetricsReport | None = None,
        epsilon: float = RMS_EPSILON,
    ) -> AblationResult:
        """
        Treina a variante com o mesmo cfg e seed e avalia sob OOD.

        Sem `reference`, o modelo completo é treinado nas mesmas condições
        para servir de referência (a própria variante "full" é sua referência).

        Raises:
            ConfigError: unknown_variant
        """
        variant = AblationService.get_variant(variant_id)
        ood = ood or OodConfig()
        base = spec or ModelSpec()
        variant_spec = variant.apply(base).validate()
        logger.info("ablation: training variant %s", variant_id)
        result, report = AblationService.train_and_evaluate(
            variant_spec, train_data, val_data, test_data, cfg, ood, epsilon
        )

        if reference is None:
            if variant_id == REFERENCE_VARIANT:
                reference = report
            else:
                logger.info("ablation: training full reference model")
                full_spec = AblationService.get_variant(REFERENCE_VARIANT).apply(base)
                _, reference = AblationService.train_and_evaluate(
                    full_spec, train_data, val_data, test_data, cfg, ood, epsilon
                )

        outcome = AblationResult(
            variant=variant_id,
            spec=variant_spec,
            report=report,
            reference_macro_f1=reference.macro_f1,
            train_result=result,
        )
        logger.info("ablation: %s delta macro-F1 %+.4f", variant_id, outcome.delta_macro_f1)
        return outcome
