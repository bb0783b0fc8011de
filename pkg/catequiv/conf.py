"""
Configuração do CatEquiv.

Settings do pacote ficam em `settings.CATEQUIV`; a configuração de uma
execução (RunConfig) é resolvida em camadas: defaults → arquivo JSON → flags,
cada camada validada pelos serializers de `catequiv.api.serializers`.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from django.conf import settings

from catequiv.exceptions import ConfigError, DataError
from catequiv.networks.spec import ModelSpec
from catequiv.ood import OodConfig
from catequiv.services.train import TrainConfig

CATEQUIV_DEFAULTS = {
    "DATA_ROOT": None,
    "DATA_ROOT_ENV": "CATEQUIV_DATA_ROOT",
    "RMS_EPSILON": 1e-6,
    "ACC_SOURCE": "total",
    "VAL_FRACTION": 0.1,
    "TRAIN_DTYPE": "float32",
    "VERIFY_DTYPE": "float64",
    "EVAL_BATCH_SIZE": 256,
    "OUTPUT_ROOT": "runs",
}


def get_catequiv_setting(key: str):
    """Retrieve a CatEquiv setting, falling back to CATEQUIV_DEFAULTS."""
    user_settings = getattr(settings, "CATEQUIV", {})
    return user_settings.get(key, CATEQUIV_DEFAULTS.get(key))


@dataclass(frozen=True)
class SignalConfig:
    data_root: str | None = None
    acc_source: str = "total"
    epsilon: float = 1e-6
    val_fraction: float = 0.1


@dataclass(frozen=True)
class RunConfig:
    model: ModelSpec = field(default_factory=ModelSpec)
    train: TrainConfig = field(default_factory=TrainConfig)
    ood: OodConfig = field(default_factory=OodConfig)
    signal: SignalConfig = field(default_factory=SignalConfig)
    seed: int = 0
    output_dir: str | None = None

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "output_dir": self.output_dir,
            "model": self.model.to_dict(),
            "train": self.train.to_dict(),
            "ood": self.ood.to_dict(),
            "signal": {
                "data_root": self.signal.data_root,
                "acc_source": self.signal.acc_source,
                "epsilon": self.signal.epsilon,
                "val_fraction": self.signal.val_fraction,
            },
        }

    def write(self, directory) -> Path:
        """Persiste a configuração resolvida em <directory>/config.json."""
        path = Path(directory) / "config.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path


def default_run_config() -> dict:
    """Camada de defaults, com os valores de settings.CATEQUIV aplicados."""
    return {
        "seed": 0,
        "output_dir": None,
        "model": ModelSpec().to_dict(),
        "train": TrainConfig(dtype=get_catequiv_setting("TRAIN_DTYPE")).to_dict(),
        "ood": OodConfig().to_dict(),
        "signal": {
            "data_root": get_catequiv_setting("DATA_ROOT"),
            "acc_source": get_catequiv_setting("ACC_SOURCE"),
            "epsilon": get_catequiv_setting("RMS_EPSILON"),
            "val_fraction": get_catequiv_setting("VAL_FRACTION"),
        },
    }


def deep_merge(base: dict, override: dict) -> dict:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        elif value is not None or key in ("output_dir", "rotation_max_angle", "data_root"):
            merged[key] = value
    return merged


def _validated(layer: dict, source: str) -> dict:
    from catequiv.api.serializers import RunConfigSerializer

    serializer = RunConfigSerializer(data=layer)
    if not serializer.is_valid():
        raise ConfigError(
            code="invalid_config",
            message=f"Configuração inválida ({source}): {json.dumps(serializer.errors, default=str)}",
            context={"source": source, "errors": serializer.errors},
        )
    return layer


def _unify_dropout(layer: dict, source: str) -> dict:
    """
    Um único dropout efetivo por camada: `model.dropout` sozinho vale também
    para `train.dropout`; valores diferentes nas duas seções são rejeitados.
    """
    model, train = layer.get("model") or {}, layer.get("train") or {}
    model_p, train_p = model.get("dropout"), train.get("dropout")
    if model_p is not None and train_p is not None and float(model_p) != float(train_p):
        raise ConfigError(
            code="invalid_config",
            message=f"model.dropout ({model_p}) e train.dropout ({train_p}) divergem ({source})",
            context={"source": source},
        )
    if model_p is not None and train_p is None:
        return {**layer, "train": {**train, "dropout": model_p}}
    return layer


def read_config_file(path) -> dict:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(code="invalid_config", message=f"Arquivo de configuração não encontrado: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(code="invalid_config", message=f"JSON inválido em {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(code="invalid_config", message=f"{path}: o JSON deve ser um objeto")
    return data


def load_run_config(path=None, overrides: dict | None = None) -> RunConfig:
    """
    Resolve a RunConfig.

    Args:
        path: Arquivo JSON opcional
        overrides: Valores vindos das flags (None = não informado)

    Raises:
        ConfigError: invalid_config
    """
    merged = default_run_config()
    if path:
        merged = deep_merge(merged, _unify_dropout(_validated(read_config_file(path), str(path)), str(path)))
    if overrides:
        merged = deep_merge(merged, _unify_dropout(_validated(overrides, "command line"), "command line"))
    _validated(merged, "resolved")

    seed = int(merged["seed"])
    try:
        model = ModelSpec.from_dict({**merged["model"], "dropout": merged["train"]["dropout"]}).validate()
        train = TrainConfig(**{**merged["train"], "seed": seed}).validate()
        ood = OodConfig(**{**merged["ood"], "seed": seed}).validate(model.length)
        signal = SignalConfig(**merged["signal"])
    except TypeError as exc:
        raise ConfigError(code="invalid_config", message=f"Campo desconhecido na configuração: {exc}") from exc
    return RunConfig(
        model=model,
        train=train,
        ood=ood,
        signal=signal,
        seed=seed,
        output_dir=merged.get("output_dir"),
    )


def resolve_data_root(signal: SignalConfig) -> Path:
    """
    Diretório do UCI-HAR: flag/arquivo, senão a variável de ambiente DATA_ROOT_ENV.

    Raises:
        DataError: missing_file com instruções de como apontar o dataset
    """
    env_var = get_catequiv_setting("DATA_ROOT_ENV")
    root = signal.data_root or os.environ.get(env_var)
    if not root or not Path(root).is_dir():
        raise DataError(
            code="missing_file",
            message=(
                f"Dataset UCI-HAR não encontrado ({root or 'nenhum caminho informado'}). "
                f"Extraia o arquivo 'UCI HAR Dataset' e informe o diretório com --data-root "
                f"ou com a variável de ambiente {env_var}."
            ),
            context={"data_root": root, "env_var": env_var},
        )
    return Path(root)
