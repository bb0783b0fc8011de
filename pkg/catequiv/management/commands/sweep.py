from __future__ import annotations

from catequiv.conf import get_catequiv_setting
from catequiv.management.base import CatEquivCommand
from catequiv.metrics import write_report_json, write_sweep_csv
from catequiv.networks import load_checkpoint
from catequiv.ood import SWEEP_AXES, parse_grid
from catequiv.services import EvaluationService


class Command(CatEquivCommand):
    help = "Varre a magnitude de um eixo OOD (shift, gain ou rotation) e grava sweep_<eixo>.csv."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--checkpoint", required=True)
        parser.add_argument("--axis", required=True, choices=SWEEP_AXES)
        parser.add_argument(
            "--grid",
            required=True,
            help="start:stop:step (inclusivo) ou lista separada por vírgulas; gain aceita pares lo:hi.",
        )

    def run(self, **options):
        axis = options["axis"]
        grid = parse_grid(axis, options["grid"])
        cfg = self.resolve_config(options)
        network = load_checkpoint(options["checkpoint"])
        test = self.load_test(cfg)
        out = self.output_dir(cfg)

        results = EvaluationService.sweep(
            network,
            test,
            axis,
            grid,
            seed=cfg.seed,
            epsilon=cfg.signal.epsilon,
            batch_size=get_catequiv_setting("EVAL_BATCH_SIZE"),
        )
        points = [point for point, _ in results]
        reports = [report for _, report in results]
        csv_path = write_sweep_csv(axis, points, reports, out / f"sweep_{axis}.csv")
        for index, (point, report) in enumerate(results):
            write_report_json(report, out / f"sweep_{axis}_{index:02d}.json", axis=axis, point=str(point))
            self.stdout.write(f"{axis}={point}: acurácia {report.accuracy:.4f}, macro-F1 {report.macro_f1:.4f}")
        self.success(f"Sweep gravado em {csv_path} ({len(results)} pontos)")
