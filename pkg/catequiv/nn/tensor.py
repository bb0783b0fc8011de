"""
Tensor e Tape — Arrays densos com gravação de gradiente em modo reverso.

Tensors são valores imutáveis após a construção (o buffer numpy é marcado
read-only). Parameters são os únicos holders mutáveis: o otimizador troca
o array inteiro a cada passo.

Uso:
    with Tape() as tape:
        loss = F.sum(F.mul(w, w))
    grads = tape.backward(loss)
    tape.grad(w)
"""

from __future__ import annotations

from contextvars import ContextVar
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from catequiv.exceptions import ShapeError

DEFAULT_DTYPE = np.float64

_ACTIVE_TAPE: ContextVar["Tape | None"] = ContextVar("catequiv_active_tape", default=None)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class Tensor:
    """
    Array denso row-major, channels-first, com flag de gradiente.

    Invariante: product(shape) == data.size (garantido pelo numpy).
    """

    __slots__ = ("_data", "requires_grad", "name")

    def __init__(self, data, *, requires_grad: bool = False, name: str | None = None, dtype=None):
        if isinstance(data, Tensor):
            data = data.data
        arr = np.array(data, dtype=dtype if dtype is not None else _infer_dtype(data), copy=True)
        self._data = _freeze(arr)
        self.requires_grad = requires_grad
        self.name = name

    @classmethod
    def _wrap(cls, arr: np.ndarray, *, requires_grad: bool = False) -> Tensor:
        """Envolve um array recém-criado sem copiar (uso interno das ops)."""
        out = cls.__new__(cls)
        out._data = _freeze(np.ascontiguousarray(arr))
        out.requires_grad = requires_grad
        out.name = None
        return out

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def shape(self) -> tuple[int, ...]:
        return self._data.shape

    @property
    def ndim(self) -> int:
        return self._data.ndim

    @property
    def dtype(self):
        return self._data.dtype

    def numpy(self) -> np.ndarray:
        """Cópia gravável dos dados."""
        return np.array(self._data, copy=True)

    def item(self) -> float:
        return float(self._data.reshape(-1)[0]) if self._data.size == 1 else float(self._data)

    def __len__(self) -> int:
        return self._data.shape[0]

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{label}, requires_grad={self.requires_grad})"


class Parameter(Tensor):
    """
    Tensor aprendível com nome. O buffer é trocado (nunca mutado) pelo otimizador.
    """

    __slots__ = ()

    def __init__(self, data, *, name: str, dtype=None):
        super().__init__(data, requires_grad=True, name=name, dtype=dtype)

    def assign(self, arr: np.ndarray) -> None:
        """Substitui os dados mantendo forma e dtype."""
        arr = np.asarray(arr)
        if arr.shape != self.shape:
            raise ShapeError(
                code="shape_mismatch",
                message=f"Parâmetro {self.name}: esperado {self.shape}, recebido {arr.shape}",
                context={"parameter": self.name},
            )
        self._data = _freeze(np.array(arr, dtype=self.dtype, copy=True))

    def __repr__(self) -> str:
        return f"Parameter(name={self.name!r}, shape={self.shape}, dtype={self.dtype})"


def _infer_dtype(data):
    if isinstance(data, np.ndarray) and np.issubdtype(data.dtype, np.floating):
        return data.dtype
    if isinstance(data, Tensor):
        return data.dtype
    return DEFAULT_DTYPE


def as_tensor(value, dtype=None) -> Tensor:
    """Converte arrays/escalares em Tensor constante (sem gradiente)."""
    if isinstance(value, Tensor):
        return value
    arr = np.asarray(value, dtype=dtype if dtype is not None else _infer_dtype(value))
    return Tensor._wrap(np.array(arr, copy=True))


# =============================================================================
# TAPE
# =============================================================================


@dataclass(frozen=True)
class TapeRecord:
    """Uma primitiva gravada: saída, entradas e a regra de propagação reversa."""

    op: str
    output: Tensor
    inputs: tuple[Tensor, ...]
    backward: Callable[[np.ndarray], Sequence[np.ndarray | None]]


class Tape:
    """
    Registro ordenado de primitivas e mapa id(tensor) -> gradiente acumulado.

    A execução reversa é single-thread; a ordem de redução é a ordem inversa
    de gravação, portanto determinística.
    """

    def __init__(self) -> None:
        self.records: list[TapeRecord] = []
        self.grads: dict[int, np.ndarray] = {}
        self._token = None

    def __enter__(self) -> Tape:
        self._token = _ACTIVE_TAPE.set(self)
        return self

    def __exit__(self, *exc) -> None:
        _ACTIVE_TAPE.reset(self._token)
        self._token = None

    def record(self, op: str, output: Tensor, inputs: tuple[Tensor, ...], backward) -> None:
        self.records.append(TapeRecord(op=op, output=output, inputs=inputs, backward=backward))

    def backward(self, loss: Tensor) -> dict[int, np.ndarray]:
        """
        Propaga gradientes de `loss` (escalar) para todas as entradas gravadas.

        Returns:
            Mapa id(tensor) -> gradiente
        """
        if loss.data.size != 1:
            raise ShapeError(
                code="shape_mismatch",
                message=f"backward exige um escalar, recebido shape {loss.shape}",
            )
        grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        for rec in reversed(self.records):
            upstream = grads.get(id(rec.output))
            if upstream is None:
                continue
            for tensor, grad in zip(rec.inputs, rec.backward(upstream)):
                if grad is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                acc = grads.get(key)
                grads[key] = grad if acc is None else acc + grad
        self.grads = grads
        return grads

    def grad(self, tensor: Tensor) -> np.ndarray:
        """Gradiente acumulado de `tensor` (zeros se não alcançado)."""
        grad = self.grads.get(id(tensor))
        if grad is None:
            return np.zeros_like(tensor.data)
        return grad


def current_tape() -> Tape | None:
    return _ACTIVE_TAPE.get()


def make_result(op: str, data: np.ndarray, inputs: tuple[Tensor, ...], backward) -> Tensor:
    """Cria a saída de uma primitiva e grava no tape ativo quando necessário."""
    requires_grad = any(t.requires_grad for t in inputs)
    out = Tensor._wrap(data, requires_grad=requires_grad)
    tape = current_tape()
    if tape is not None and requires_grad:
        tape.record(op, out, inputs, backward)
    return out
