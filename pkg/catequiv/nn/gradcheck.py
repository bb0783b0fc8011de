"""
Verificação de gradientes por diferenças finitas centrais.
"""

from __future__ import annotations

import logging
from typing import Callable, Mapping

import numpy as np

from catequiv.nn.tensor import Parameter, Tape, Tensor

logger = logging.getLogger(__name__)


def _evaluate(f: Callable, theta) -> float:
    value = f(theta)
    return float(np.asarray(value.data if isinstance(value, Tensor) else value).reshape(-1)[0])


def grad_check(
    f: Callable,
    theta: Tensor | Mapping[str, Parameter],
    *,
    step: float = 1e-5,
    max_coords: int | None = None,
    rng=None,
) -> float:
    """
    Compara o gradiente do tape com diferenças finitas centrais.

    Args:
        f: Função escalar determinística; recebe `theta` (o Parameter ou o mapping)
        theta: Tensor único ou mapping nome -> Parameter
        step: Passo das diferenças centrais
        max_coords: Limite de coordenadas por parâmetro (amostradas com `rng`)
        rng: Rng usado para amostrar coordenadas

    Returns:
        max_i |analítico - numérico| / max(1, |analítico|); inf se f não for finita
    """
    if isinstance(theta, Tensor):
        params = {"theta": theta if isinstance(theta, Parameter) else Parameter(theta.data, name="theta")}
        argument = params["theta"]
    else:
        params = dict(theta)
        argument = theta

    with Tape() as tape:
        loss = f(argument)
        if not np.all(np.isfinite(loss.data)):
            logger.warning("grad_check: non-finite objective %s", loss.data)
            return float("inf")
        tape.backward(loss)
    analytic = {name: tape.grad(p).copy() for name, p in params.items()}

    worst = 0.0
    for name, param in params.items():
        original = param.numpy()
        flat_size = original.size
        coords = np.arange(flat_size)
        if max_coords is not None and flat_size > max_coords:
            coords = np.sort(rng.choice(flat_size, size=max_coords, replace=False))
        try:
            for idx in coords:
                plus = original.copy().reshape(-1)
                minus = original.copy().reshape(-1)
                plus[idx] += step
                minus[idx] -= step
                param.assign(plus.reshape(original.shape))
                f_plus = _evaluate(f, argument)
                param.assign(minus.reshape(original.shape))
                f_minus = _evaluate(f, argument)
                if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
                    return float("inf")
                numeric = (f_plus - f_minus) / (2.0 * step)
                exact = float(analytic[name].reshape(-1)[idx])
                worst = max(worst, abs(exact - numeric) / max(1.0, abs(exact)))
        finally:
            param.assign(original)
    logger.debug("grad_check: max relative error %.3e over %d parameter(s)", worst, len(params))
    return worst
