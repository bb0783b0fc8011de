"""
CatEquiv NN — Núcleo numérico: tensores, tape de gradientes, primitivas e RNG.
"""

from . import functional  # noqa: F401
from .gradcheck import grad_check  # noqa: F401
from .rng import Rng  # noqa: F401
from .tensor import DEFAULT_DTYPE, Parameter, Tape, Tensor, as_tensor, current_tape  # noqa: F401
