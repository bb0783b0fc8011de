"""
Checkpoints `.npz`: um array por parâmetro nomeado mais a entrada `__meta__`
(string JSON):

    {"format": "catequiv-checkpoint", "version": 1,
     "spec": {...ModelSpec...}, "tensors": {"<nome>": [shape...]}, "extra": {...}}

Lido sem pickle. Ver CONTRACTS.md.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from catequiv.exceptions import CheckpointError
from catequiv.networks.spec import ModelSpec

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "catequiv-checkpoint"
CHECKPOINT_VERSION = 1
META_KEY = "__meta__"


def save_checkpoint(network, path, extra: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    state = network.state_dict()
    meta = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "spec": network.spec.to_dict(),
        "tensors": {name: list(arr.shape) for name, arr in state.items()},
        "extra": extra or {},
    }
    with path.open("wb") as fh:
        np.savez(fh, **{META_KEY: np.array(json.dumps(meta, sort_keys=True))}, **state)
    logger.info("checkpoint saved to %s (%d tensors)", path, len(state))
    return path


def read_checkpoint(path) -> tuple[dict, dict[str, np.ndarray]]:
    """
    Lê metadados e tensores sem construir a rede.

    Raises:
        CheckpointError: unsupported_format, missing_tensor
    """
    path = Path(path)
    if not path.exists():
        raise CheckpointError(
            code="unsupported_format",
            message=f"Checkpoint não encontrado: {path}",
            context={"path": str(path)},
        )
    try:
        with np.load(path, allow_pickle=False) as archive:
            meta = json.loads(str(archive[META_KEY]))
            tensors = {name: archive[name] for name in archive.files if name != META_KEY}
    except (KeyError, ValueError, OSError) as exc:
        raise CheckpointError(
            code="unsupported_format",
            message=f"Arquivo não é um checkpoint CatEquiv: {path} ({exc})",
            context={"path": str(path)},
        ) from exc

    if meta.get("format") != CHECKPOINT_FORMAT or meta.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(
            code="unsupported_format",
            message=f"Formato/versão não suportados: {meta.get('format')!r} v{meta.get('version')!r}",
            context={"path": str(path)},
        )
    for name, shape in meta.get("tensors", {}).items():
        if name not in tensors:
            raise CheckpointError(code="missing_tensor", message=f"Tensor ausente no checkpoint: {name}")
        if list(tensors[name].shape) != list(shape):
            raise CheckpointError(
                code="missing_tensor",
                message=f"Tensor {name}: forma {tensors[name].shape} difere dos metadados {shape}",
            )
    return meta, tensors


def load_checkpoint(path, expected_spec: ModelSpec | None = None, dtype=None):
    """
    Reconstrói a rede gravada.

    Args:
        path: Arquivo .npz
        expected_spec: Se fornecido, o spec gravado deve ser idêntico
        dtype: Converte os parâmetros (default: dtype gravado)

    Raises:
        CheckpointError: unsupported_format, spec_mismatch, missing_tensor
    """
    from catequiv.networks import network_class
    from catequiv.nn.tensor import Parameter

    meta, tensors = read_checkpoint(path)
    spec = ModelSpec.from_dict(meta["spec"])
    if expected_spec is not None and expected_spec != spec:
        raise CheckpointError(
            code="spec_mismatch",
            message="O ModelSpec do checkpoint difere do esperado",
            context={"checkpoint": spec.to_dict(), "expected": expected_spec.to_dict()},
        )
    cls = network_class(spec.kind)
    missing = set(cls.shapes(spec)) - set(tensors)
    if missing:
        raise CheckpointError(code="missing_tensor", message=f"Tensores ausentes: {', '.join(sorted(missing))}")
    params = {
        name: Parameter(tensors[name], name=name, dtype=dtype or tensors[name].dtype)
        for name in cls.shapes(spec)
    }
    logger.debug("checkpoint loaded from %s (%s)", path, spec.kind.value)
    return cls(spec, params)
