from __future__ import annotations

import json

from catequiv.api.serializers import CheckResultSerializer
from catequiv.exceptions import VerificationError
from catequiv.management.base import CatEquivCommand
from catequiv.networks import load_checkpoint
from catequiv.services import VerifierService
from catequiv.services.verify import fresh_network


class Command(CatEquivCommand):
    help = "Executa as verificações de equivariância/invariância (não requer dataset)."

    uses_dataset = False

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--checkpoint", help="Verifica um checkpoint em vez de uma rede recém-inicializada.")
        parser.add_argument("--trials", type=int, help="Sobrescreve o número de tentativas de todas as verificações.")
        parser.add_argument("--check", action="append", dest="checks", help="Executa só esta verificação (repetível).")
        parser.add_argument(
            "--controls",
            action="store_true",
            help="Também roda os controles negativos, que devem falhar.",
        )

    def run(self, **options):
        cfg = self.resolve_config(options)
        if options.get("checkpoint"):
            network = load_checkpoint(options["checkpoint"])
        else:
            network = fresh_network(cfg.seed, cfg.model)
        out = self.output_dir(cfg)

        results = VerifierService.run_all(
            network,
            seed=cfg.seed,
            trials=options.get("trials"),
            epsilon=cfg.signal.epsilon,
            names=options.get("checks"),
        )
        summary = VerifierService.summary(results, cfg.seed)
        summary["checks"] = CheckResultSerializer(results, many=True).data

        controls_ok = True
        if options.get("controls"):
            controls = VerifierService.run_negative_controls(cfg.seed, cfg.model)
            controls_ok = not any(r.passed for r in controls)
            summary["negative_controls"] = CheckResultSerializer(controls, many=True).data
            summary["negative_controls_failed_as_expected"] = controls_ok

        (out / "verify.json").write_text(json.dumps(summary, indent=2, sort_keys=True, default=str, allow_nan=False) + "\n", encoding="utf-8")
        self.stdout.write(VerifierService.format_table(results))

        failed = [r.name for r in results if not r.passed]
        if failed or not controls_ok:
            raise VerificationError(
                code="checks_failed",
                message=(
                    f"Verificações falharam: {', '.join(failed)}"
                    if failed
                    else "Um controle negativo passou: as verificações não detectaram a quebra de simetria"
                ),
                context={"failed": failed},
            )
        self.success(f"Todas as {len(results)} verificações passaram (seed {cfg.seed}).")
