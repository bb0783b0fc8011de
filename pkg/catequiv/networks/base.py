"""
Network — Base comum: parâmetros nomeados, inicialização, preparação da entrada,
predição em lote e estado serializável.
"""

from __future__ import annotations

import logging
from contextlib import contextmanager
from typing import Iterator

import numpy as np

from catequiv.data.windows import INPUT_CHANNELS, RMS_EPSILON, gain_process_batch
from catequiv.exceptions import ShapeError
from catequiv.networks.spec import ModelSpec, param_count
from catequiv.nn import functional as F
from catequiv.nn.tensor import DEFAULT_DTYPE, Parameter, Tensor, as_tensor

logger = logging.getLogger(__name__)


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Reetiqueta ShapeError com o estágio da rede onde ocorreu."""
    try:
        yield
    except ShapeError as exc:
        raise ShapeError(
            code="bad_stage_input",
            message=f"Estágio {name!r}: {exc.message}",
            context={**exc.context, "stage": name, "cause": exc.code},
        ) from exc


def uniform_init(rng, shape: tuple[int, ...], fan_in: int, dtype) -> np.ndarray:
    """U(−1/√fan_in, 1/√fan_in)."""
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


class Network:
    """
    Classe base. Subclasses definem `param_shapes()` e `features()`.

    Os parâmetros ficam num dict ordenado nome -> Parameter; o otimizador
    troca os buffers via Parameter.assign.
    """

    def __init__(self, spec: ModelSpec, params: dict[str, Parameter]):
        self.spec = spec.validate()
        expected = self.param_shapes()
        missing = set(expected) - set(params)
        if missing:
            raise ShapeError(
                code="shape_mismatch",
                message=f"Parâmetros ausentes: {', '.join(sorted(missing))}",
            )
        for name, shape in expected.items():
            if params[name].shape != shape:
                raise ShapeError(
                    code="shape_mismatch",
                    message=f"Parâmetro {name}: esperado {shape}, recebido {params[name].shape}",
                    context={"parameter": name},
                )
        self.params = {name: params[name] for name in expected}

    # ------------------------------------------------------------------
    # Construção
    # ------------------------------------------------------------------

    @classmethod
    def shapes(cls, spec: ModelSpec) -> dict[str, tuple[int, ...]]:
        """Nome -> forma de cada parâmetro, na ordem canônica."""
        raise NotImplementedError

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        return self.shapes(self.spec)

    @classmethod
    def fan_in(cls, spec: ModelSpec, name: str, shape: tuple[int, ...]) -> int:
        if name.endswith(".bias"):
            weight = cls.shapes(spec)[name[: -len(".bias")] + ".weight"]
            return int(np.prod(weight[1:]))
        return int(np.prod(shape[1:]))

    @classmethod
    def initialize(cls, spec: ModelSpec, rng, dtype=DEFAULT_DTYPE) -> Network:
        """Inicialização U(±1/√fan_in) por parâmetro, cada um com seu stream derivado do nome."""
        spec = spec.validate()
        params = {}
        for name, shape in cls.shapes(spec).items():
            params[name] = Parameter(cls.init_value(spec, name, shape, rng.spawn(name), dtype), name=name, dtype=dtype)
        network = cls(spec, params)
        logger.debug("initialized %s with %d parameters", spec.kind.value, network.num_parameters())
        return network

    @classmethod
    def init_value(cls, spec: ModelSpec, name: str, shape, rng, dtype) -> np.ndarray:
        return uniform_init(rng, shape, cls.fan_in(spec, name, shape), dtype)

    # ------------------------------------------------------------------
    # Forward
    # ------------------------------------------------------------------

    @property
    def dtype(self):
        return next(iter(self.params.values())).dtype

    def prepare(self, values, epsilon: float = RMS_EPSILON) -> np.ndarray:
        """Janelas brutas (N, T, 2, 3) → entrada (N, 8, T) no dtype da rede."""
        processed = gain_process_batch(np.asarray(values, dtype=np.float64), epsilon, normalize=self.spec.uses_log_rms)
        return processed.astype(self.dtype, copy=False)

    def check_input(self, x) -> Tensor:
        x = as_tensor(x)
        if x.ndim == 2:
            x = F.reshape(x, (1,) + x.shape)
        if x.ndim != 3 or x.shape[1] != INPUT_CHANNELS or x.shape[2] != self.spec.length:
            raise ShapeError(
                code="bad_stage_input",
                message=f"Estágio 'input': esperado (N, {INPUT_CHANNELS}, {self.spec.length}), recebido {x.shape}",
                context={"stage": "input"},
            )
        return x

    def features(self, x: Tensor, *, train: bool = False, rng=None) -> Tensor:
        """Descritor da cabeça (com dropout se train)."""
        raise NotImplementedError

    def descriptor(self, x) -> Tensor:
        """Descritor z em modo de avaliação, (N, D)."""
        return self.features(self.check_input(x), train=False)

    def forward(self, x, *, train: bool = False, rng=None) -> Tensor:
        """Logits (N, K)."""
        z = self.features(self.check_input(x), train=train, rng=rng)
        with stage("head"):
            return F.linear(z, self.params["head.weight"], self.params["head.bias"])

    __call__ = forward

    def logits(self, x, batch_size: int = 256) -> np.ndarray:
        """Logits em modo de avaliação, em lotes, como numpy."""
        x = np.asarray(x.data if isinstance(x, Tensor) else x)
        if x.ndim == 2:
            x = x[None]
        chunks = [self.forward(x[i : i + batch_size]).numpy() for i in range(0, x.shape[0], batch_size)]
        if not chunks:
            return np.zeros((0, self.spec.num_classes), dtype=self.dtype)
        return np.concatenate(chunks, axis=0)

    def predict(self, x, batch_size: int = 256) -> np.ndarray:
        return self.logits(x, batch_size).argmax(axis=1)

    # ------------------------------------------------------------------
    # Estado
    # ------------------------------------------------------------------

    def parameters(self) -> list[Parameter]:
        return list(self.params.values())

    def num_parameters(self) -> int:
        return param_count(self.spec)

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.numpy() for name, p in self.params.items()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        for name, param in self.params.items():
            param.assign(state[name])

    def __repr__(self) -> str:
        return f"{type(self).__name__}(kind={self.spec.kind.value}, params={self.num_parameters()})"
