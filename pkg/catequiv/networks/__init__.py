"""
CatEquiv Networks — CatEquivNet, baselines convolucionais e checkpoints.
"""

from __future__ import annotations

from catequiv.nn.tensor import DEFAULT_DTYPE

from .base import Network  # noqa: F401
from .baselines import CircCNN, PlainCNN  # noqa: F401
from .catequiv import CatEquivNet  # noqa: F401
from .checkpoint import load_checkpoint, read_checkpoint, save_checkpoint  # noqa: F401
from .spec import ModelKind, ModelSpec, param_count  # noqa: F401

_NETWORKS = {
    ModelKind.CATEQUIV: CatEquivNet,
    ModelKind.CIRC_CNN: CircCNN,
    ModelKind.PLAIN_CNN: PlainCNN,
}


def network_class(kind) -> type[Network]:
    return _NETWORKS[ModelKind.parse(kind)]


def build_network(spec: ModelSpec, rng, dtype=DEFAULT_DTYPE) -> Network:
    """Rede com parâmetros iniciais derivados de `rng`."""
    return network_class(spec.kind).initialize(spec, rng, dtype=dtype)
