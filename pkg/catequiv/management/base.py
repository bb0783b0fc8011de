"""
Base dos comandos do CatEquiv: argumentos comuns, resolução da RunConfig,
diretório de saída e tradução de erros em códigos de saída.

Códigos: 0 sucesso, 1 uso/configuração, 2 dados/checkpoint/treino, 3 verificação.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path

from django.core.management import BaseCommand, CommandError

from catequiv.conf import RunConfig, get_catequiv_setting, load_run_config, resolve_data_root
from catequiv.data.ucihar import DatasetSplit, load_ucihar, stratified_split
from catequiv.exceptions import (
    CatEquivError,
    CheckpointError,
    ConfigError,
    DataError,
    ShapeError,
    SymmetryError,
    TrainingError,
    VerificationError,
)
from catequiv.ids import generate_run_id
from catequiv.nn.rng import Rng

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_VERIFY = 3

_EXIT_CODES = (
    (VerificationError, EXIT_VERIFY),
    ((DataError, CheckpointError, TrainingError), EXIT_DATA),
    ((ConfigError, ShapeError, SymmetryError), EXIT_USAGE),
)


def exit_code_for(exc: CatEquivError) -> int:
    for types, code in _EXIT_CODES:
        if isinstance(exc, types):
            return code
    return EXIT_USAGE


class CatEquivCommand(BaseCommand):
    """Subclasses implementam `run(**options)`."""

    uses_dataset = True

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)

        def error(message):
            if parser.called_from_command_line:
                parser.print_usage(sys.stderr)
                parser.exit(EXIT_USAGE, f"{parser.prog}: error: {message}\n")
            raise CommandError(f"Error: {message}", returncode=EXIT_USAGE)

        parser.error = error
        return parser

    def add_arguments(self, parser):
        parser.add_argument("--config", help="Arquivo JSON de configuração (sobrescrito pelas flags).")
        parser.add_argument("--seed", type=int, help="Seed mestre (default: 0).")
        parser.add_argument("--out", help="Diretório de saída (default: OUTPUT_ROOT/RUN-...).")
        if self.uses_dataset:
            parser.add_argument("--data-root", help="Diretório 'UCI HAR Dataset' (fallback: variável de ambiente).")
            parser.add_argument("--acc-source", choices=["total", "body"], help="Stream de ACC (default: total).")

    def handle(self, *args, **options):
        try:
            return self.run(**options)
        except CatEquivError as exc:
            logger.error("%s failed: [%s] %s", self.__module__.rsplit(".", 1)[-1], exc.code, exc.message)
            raise CommandError(f"[{exc.code}] {exc.message}", returncode=exit_code_for(exc)) from exc

    def run(self, **options):
        raise NotImplementedError

    # ------------------------------------------------------------------
    # Helpers
    # ------------------------------------------------------------------

    def overrides(self, options: dict, **sections) -> dict:
        """Camada de flags: só os valores efetivamente informados."""
        layer: dict = {
            "seed": options.get("seed"),
            "output_dir": options.get("out"),
            "signal": {
                "data_root": options.get("data_root"),
                "acc_source": options.get("acc_source"),
            },
        }
        for name, values in sections.items():
            layer[name] = {key: value for key, value in values.items() if value is not None}
        layer["signal"] = {k: v for k, v in layer["signal"].items() if v is not None}
        return {k: v for k, v in layer.items() if v is not None and v != {}}

    def resolve_config(self, options: dict, **sections) -> RunConfig:
        return load_run_config(options.get("config"), self.overrides(options, **sections))

    def output_dir(self, cfg: RunConfig) -> Path:
        out = Path(cfg.output_dir) if cfg.output_dir else Path(get_catequiv_setting("OUTPUT_ROOT")) / generate_run_id()
        out.mkdir(parents=True, exist_ok=True)
        cfg.write(out)
        return out

    def load_test(self, cfg: RunConfig) -> DatasetSplit:
        root = resolve_data_root(cfg.signal)
        return load_ucihar(root, "test", cfg.signal.acc_source)

    def load_splits(self, cfg: RunConfig) -> tuple[DatasetSplit, DatasetSplit, DatasetSplit]:
        """(treino, validação estratificada, teste)."""
        root = resolve_data_root(cfg.signal)
        full_train = load_ucihar(root, "train", cfg.signal.acc_source)
        train, val = stratified_split(full_train, cfg.signal.val_fraction, Rng(cfg.seed).spawn("val_split"))
        test = load_ucihar(root, "test", cfg.signal.acc_source)
        logger.info("data: %d train / %d val / %d test windows", len(train), len(val), len(test))
        return train, val, test

    def success(self, message: str) -> None:
        self.stdout.write(self.style.SUCCESS(message))
