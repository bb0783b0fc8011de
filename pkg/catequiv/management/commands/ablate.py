from __future__ import annotations

import json
from pathlib import Path

from catequiv import registry
from catequiv.exceptions import ConfigError
from catequiv.management.base import CatEquivCommand
from catequiv.metrics import MetricsReport
from catequiv.services import AblationService


class Command(CatEquivCommand):
    help = "Treina uma variante de ablação do CatEquiv e reporta ΔmacroF1 (OOD) contra o modelo completo."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--variant", required=True, help="Código da variante (ex.: no-l2, zero-padding).")
        parser.add_argument("--reference", help="Relatório JSON do modelo completo; sem ele a referência é treinada.")
        parser.add_argument("--epochs", type=int, dest="max_epochs", help="Máximo de épocas (default: 100).")

    def _reference(self, path: str | None) -> MetricsReport | None:
        if not path:
            return None
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(code="invalid_config", message=f"Relatório de referência ilegível: {path} ({exc})") from exc
        return MetricsReport.from_dict(data.get("report", data))

    def run(self, **options):
        variant = options["variant"]
        AblationService.get_variant(variant)
        reference = self._reference(options.get("reference"))
        cfg = self.resolve_config(options, train={"max_epochs": options.get("max_epochs")})
        train, val, test = self.load_splits(cfg)
        out = self.output_dir(cfg)

        result = AblationService.run_ablation(
            variant,
            train,
            val,
            test,
            cfg.train,
            cfg.ood,
            spec=cfg.model,
            reference=reference,
            epsilon=cfg.signal.epsilon,
        )
        payload = {**result.to_dict(), "label": registry.get_ablation(variant).label}
        path = out / f"ablation_{variant}.json"
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        self.success(
            f"{variant}: macro-F1 OOD {result.report.macro_f1:.4f} "
            f"(referência {result.reference_macro_f1:.4f}, Δ {result.delta_macro_f1:+.4f})"
        )
