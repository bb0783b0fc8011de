from __future__ import annotations

from catequiv.conf import get_catequiv_setting
from catequiv.exceptions import CheckpointError
from catequiv.management.base import CatEquivCommand
from catequiv.metrics import write_report_csv, write_report_json
from catequiv.networks import load_checkpoint
from catequiv.networks.spec import ModelKind
from catequiv.services import EvaluationService


class Command(CatEquivCommand):
    help = "Avalia um checkpoint no teste limpo e/ou sob a perturbação OOD composta."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--checkpoint", required=True, help="Arquivo .npz gravado pelo train.")
        parser.add_argument("--model", choices=["catequiv", "circcnn", "plaincnn"], help="Falha se o checkpoint for de outro modelo.")
        parser.add_argument("--mode", choices=["clean", "ood", "both"], default="both")
        parser.add_argument("--shift-range", type=int, help="Δ ~ Unif{−s..s} (default: 18).")
        parser.add_argument("--gain-lo", type=float, help="Ganho mínimo (default: 0.7).")
        parser.add_argument("--gain-hi", type=float, help="Ganho máximo (default: 1.4).")
        parser.add_argument("--rotation-max-angle", type=float, help="Ângulo máximo em graus (default: Haar).")
        parser.add_argument("--no-rotate", action="store_true", help="Desliga a rotação.")

    def run(self, **options):
        cfg = self.resolve_config(
            options,
            ood={
                "shift_range": options.get("shift_range"),
                "gain_lo": options.get("gain_lo"),
                "gain_hi": options.get("gain_hi"),
                "rotation_max_angle": options.get("rotation_max_angle"),
                "rotate": False if options.get("no_rotate") else None,
            },
        )
        network = load_checkpoint(options["checkpoint"])
        expected = options.get("model")
        if expected and ModelKind.parse(expected) is not network.spec.kind:
            raise CheckpointError(
                code="spec_mismatch",
                message=f"Checkpoint é de {network.spec.kind.value}, esperado {expected}",
                context={"checkpoint": options["checkpoint"]},
            )

        test = self.load_test(cfg)
        out = self.output_dir(cfg)
        batch_size = get_catequiv_setting("EVAL_BATCH_SIZE")

        modes = ["clean", "ood"] if options["mode"] == "both" else [options["mode"]]
        for mode in modes:
            ood = cfg.ood if mode == "ood" else None
            report = EvaluationService.evaluate(network, test, ood, epsilon=cfg.signal.epsilon, batch_size=batch_size)
            write_report_json(report, out / f"eval_{mode}.json", model=network.spec.kind.value, mode=mode)
            write_report_csv(report, out / f"eval_{mode}.csv")
            self.success(f"{mode}: acurácia {report.accuracy:.4f}, macro-F1 {report.macro_f1:.4f}")
