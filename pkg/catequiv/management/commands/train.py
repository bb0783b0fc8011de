from __future__ import annotations

import json

from catequiv.management.base import CatEquivCommand
from catequiv.metrics import write_report_csv, write_report_json
from catequiv.networks import save_checkpoint
from catequiv.services import EvaluationService, TrainService


class Command(CatEquivCommand):
    help = "Treina CatEquiv ou um baseline e grava checkpoint, log de treino e relatório limpo de teste."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--model", choices=["catequiv", "circcnn", "plaincnn"], help="Arquitetura (default: catequiv).")
        parser.add_argument("--input-mode", choices=["processed", "raw"], help="Entrada com RMS/log-RMS ou streams brutos.")
        parser.add_argument("--epochs", type=int, dest="max_epochs", help="Máximo de épocas (default: 100).")
        parser.add_argument("--batch-size", type=int, help="Tamanho do lote (default: 128).")
        parser.add_argument("--lr", type=float, help="Learning rate inicial (default: 1e-3).")
        parser.add_argument("--dtype", choices=["float32", "float64"], help="Precisão do treino.")
        parser.add_argument("--weight-decay-mode", choices=["coupled", "decoupled"])
        parser.add_argument("--augment-mode", choices=["per_epoch", "fixed"])
        parser.add_argument("--no-augment", action="store_true", help="Desliga a augmentação OOD no treino.")

    def run(self, **options):
        cfg = self.resolve_config(
            options,
            model={"kind": options.get("model"), "input_mode": options.get("input_mode")},
            train={
                "max_epochs": options.get("max_epochs"),
                "batch_size": options.get("batch_size"),
                "lr": options.get("lr"),
                "dtype": options.get("dtype"),
                "weight_decay_mode": options.get("weight_decay_mode"),
                "augment_mode": options.get("augment_mode"),
                "augment": False if options.get("no_augment") else None,
            },
        )
        train, val, test = self.load_splits(cfg)
        out = self.output_dir(cfg)

        log_path = out / "train_log.jsonl"
        with log_path.open("w", encoding="utf-8") as log_file:

            def on_epoch(record: dict) -> None:
                log_file.write(json.dumps(record, sort_keys=True) + "\n")
                log_file.flush()

            result = TrainService.train(
                cfg.model, train, val, cfg.train, cfg.ood, epsilon=cfg.signal.epsilon, on_epoch=on_epoch
            )

        checkpoint = save_checkpoint(
            result.network,
            out / "checkpoint.npz",
            extra={"best_epoch": result.best_epoch, "best_val_macro_f1": result.best_val_macro_f1, "seed": cfg.seed},
        )
        report = EvaluationService.evaluate(result.network, test, epsilon=cfg.signal.epsilon)
        write_report_json(report, out / "report_clean.json")
        write_report_csv(report, out / "report_clean.csv")

        self.stdout.write(f"Checkpoint: {checkpoint}")
        self.stdout.write(f"Melhor época: {result.best_epoch} (val macro-F1 {result.best_val_macro_f1:.4f})")
        self.success(f"Teste limpo: acurácia {report.accuracy:.4f}, macro-F1 {report.macro_f1:.4f}")
