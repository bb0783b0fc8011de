"""
Primitivas diferenciáveis: todas gravadas no Tape ativo.

Convenções:
- Layout channels-first: (N, C, T) com lote opcional; entradas 2-D (C, T)
  são tratadas como lote de um e devolvidas sem o eixo de lote.
- Convolução 1-D é implementada como correlação cruzada centrada
  ("same"): out[t] = Σ_j w[j] · x[t + (j - h)·d], h = (κ - 1) / 2,
  com índices módulo T (padding="circular") ou zero fora de [0, T)
  (padding="zeros"). A orientação é fixa no repositório inteiro.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from catequiv.exceptions import ShapeError
from catequiv.nn.tensor import Tensor, as_tensor, make_result

PADDING_MODES = ("circular", "zeros")


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _require(condition: bool, code: str, message: str, **context) -> None:
    if not condition:
        raise ShapeError(code=code, message=message, context=context)


# =============================================================================
# ELEMENTWISE
# =============================================================================


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data + b.data

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return make_result("add", out, (a, b), backward)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data - b.data

    def backward(g):
        return _unbroadcast(g, a.shape), -_unbroadcast(g, b.shape)

    return make_result("sub", out, (a, b), backward)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data * b.data

    def backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return make_result("mul", out, (a, b), backward)


def scale(x, factor: float) -> Tensor:
    """Multiplicação por constante."""
    x = as_tensor(x)
    out = x.data * factor

    def backward(g):
        return (g * factor,)

    return make_result("scale", out, (x,), backward)


def relu(x) -> Tensor:
    x = as_tensor(x)
    mask = x.data > 0
    out = np.where(mask, x.data, 0.0).astype(x.dtype, copy=False)

    def backward(g):
        return (g * mask,)

    return make_result("relu", out, (x,), backward)


# =============================================================================
# REDUCTIONS
# =============================================================================


def _expand(g: np.ndarray, axis, keepdims: bool) -> np.ndarray:
    if axis is None or keepdims:
        return g
    axes = (axis,) if isinstance(axis, int) else tuple(axis)
    return np.expand_dims(g, axes)


def sum(x, axis=None, keepdims: bool = False) -> Tensor:  # noqa: A001
    x = as_tensor(x)
    out = np.asarray(x.data.sum(axis=axis, keepdims=keepdims))

    def backward(g):
        return (np.broadcast_to(_expand(g, axis, keepdims), x.shape),)

    return make_result("sum", out, (x,), backward)


def mean(x, axis=None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    out = np.asarray(x.data.mean(axis=axis, keepdims=keepdims))
    count = x.data.size // max(out.size, 1)

    def backward(g):
        return (np.broadcast_to(_expand(g, axis, keepdims) / count, x.shape),)

    return make_result("mean", out, (x,), backward)


def gap_t(x) -> Tensor:
    """Global average pooling no tempo (último eixo)."""
    x = as_tensor(x)
    return mean(x, axis=x.ndim - 1)


def l2_norm(x, axis: int) -> Tensor:
    """Norma ℓ2 ao longo de `axis` (gradiente nulo onde a norma é zero)."""
    x = as_tensor(x)
    norm = np.sqrt(np.sum(x.data * x.data, axis=axis))

    def backward(g):
        n = np.expand_dims(norm, axis)
        ratio = np.divide(x.data, n, out=np.zeros_like(x.data), where=n > 0)
        return (np.expand_dims(g, axis) * ratio,)

    return make_result("l2_norm", norm, (x,), backward)


# =============================================================================
# SHAPE
# =============================================================================


def reshape(x, shape: Sequence[int]) -> Tensor:
    x = as_tensor(x)
    out = x.data.reshape(shape)

    def backward(g):
        return (g.reshape(x.shape),)

    return make_result("reshape", out, (x,), backward)


def narrow(x, axis: int, start: int, length: int) -> Tensor:
    """Fatia contígua [start, start + length) ao longo de `axis`."""
    x = as_tensor(x)
    axis = axis % x.ndim
    _require(
        0 <= start and start + length <= x.shape[axis],
        "shape_mismatch",
        f"narrow fora dos limites: eixo {axis} com extensão {x.shape[axis]}, pedido [{start}, {start + length})",
    )
    index = [slice(None)] * x.ndim
    index[axis] = slice(start, start + length)
    index = tuple(index)
    out = x.data[index]

    def backward(g):
        full = np.zeros_like(x.data)
        full[index] = g
        return (full,)

    return make_result("narrow", out, (x,), backward)


def tile(x, reps: int, axis: int = 0) -> Tensor:
    """Concatena `reps` cópias de x ao longo de `axis`; o gradiente soma as cópias."""
    x = as_tensor(x)
    out = np.concatenate([x.data] * reps, axis=axis)

    def backward(g):
        return (np.sum(np.stack(np.split(g, reps, axis=axis)), axis=0),)

    return make_result("tile", out, (x,), backward)


def concat(tensors: Sequence, axis: int = 1) -> Tensor:
    tensors = tuple(as_tensor(t) for t in tensors)
    ref = tensors[0]
    axis = axis % ref.ndim
    for t in tensors[1:]:
        _require(
            t.ndim == ref.ndim and all(t.shape[i] == ref.shape[i] for i in range(ref.ndim) if i != axis),
            "shape_mismatch",
            f"concat: shapes incompatíveis {ref.shape} e {t.shape} no eixo {axis}",
        )
    out = np.concatenate([t.data for t in tensors], axis=axis)
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return make_result("concat", out, tensors, backward)


# =============================================================================
# AFFINE / NORMALIZATION / REGULARIZATION
# =============================================================================


def linear(z, weight, bias=None) -> Tensor:
    """Mapa afim z @ Wᵀ + b, com W (K, D)."""
    z, weight = as_tensor(z), as_tensor(weight)
    _require(
        weight.ndim == 2 and z.shape[-1] == weight.shape[1],
        "shape_mismatch",
        f"linear: entrada {z.shape} incompatível com peso {weight.shape}",
    )
    out = z.data @ weight.data.T
    inputs: tuple[Tensor, ...] = (z, weight)
    if bias is not None:
        bias = as_tensor(bias)
        out = out + bias.data
        inputs = inputs + (bias,)

    def backward(g):
        lead = tuple(range(g.ndim - 1))
        grads = [g @ weight.data, np.tensordot(g, z.data, axes=(lead, lead))]
        if bias is not None:
            grads.append(g.reshape(-1, g.shape[-1]).sum(axis=0))
        return tuple(grads)

    return make_result("linear", out, inputs, backward)


def group_norm(x, groups: int, weight=None, bias=None, eps: float = 1e-5) -> Tensor:
    """
    GroupNorm por amostra: estatísticas sobre (canais do grupo × tempo),
    afim aprendível por canal.
    """
    x = as_tensor(x)
    squeeze = x.ndim == 2
    data = x.data[None] if squeeze else x.data
    n, c, t = data.shape
    _require(c % groups == 0, "bad_groups", f"group_norm: {c} canais não divisíveis em {groups} grupos")

    xg = data.reshape(n, groups, c // groups, t)
    mu = xg.mean(axis=(2, 3), keepdims=True)
    centered = xg - mu
    inv = 1.0 / np.sqrt((centered * centered).mean(axis=(2, 3), keepdims=True) + eps)
    xhat = (centered * inv).reshape(n, c, t)

    out = xhat
    inputs: list[Tensor] = [x]
    if weight is not None:
        weight = as_tensor(weight)
        out = out * weight.data[None, :, None]
        inputs.append(weight)
    if bias is not None:
        bias = as_tensor(bias)
        out = out + bias.data[None, :, None]
        inputs.append(bias)

    def backward(g):
        g3 = g[None] if squeeze else g
        gxhat = g3 * weight.data[None, :, None] if weight is not None else g3
        gxhat = gxhat.reshape(n, groups, c // groups, t)
        xh = xhat.reshape(n, groups, c // groups, t)
        gx = inv * (
            gxhat - gxhat.mean(axis=(2, 3), keepdims=True) - xh * (gxhat * xh).mean(axis=(2, 3), keepdims=True)
        )
        gx = gx.reshape(n, c, t)
        grads: list[np.ndarray] = [gx[0] if squeeze else gx]
        if weight is not None:
            grads.append((g3 * xhat).sum(axis=(0, 2)))
        if bias is not None:
            grads.append(g3.sum(axis=(0, 2)))
        return tuple(grads)

    return make_result("group_norm", out[0] if squeeze else out, tuple(inputs), backward)


def dropout(x, p: float, rng=None, train: bool = False) -> Tensor:
    """
    Dropout invertido: em treino divide pela probabilidade de manter;
    em avaliação é a identidade.
    """
    x = as_tensor(x)
    if not train or p <= 0.0:
        return x
    keep = 1.0 - p
    mask = (rng.uniform(size=x.shape) < keep).astype(x.dtype) / keep
    out = x.data * mask

    def backward(g):
        return (g * mask,)

    return make_result("dropout", out, (x,), backward)


def cross_entropy(logits, targets, class_weights=None) -> Tensor:
    """
    Softmax cross-entropy ponderada por classe.

    loss = Σ_i w[y_i] · ce_i / Σ_i w[y_i]; com pesos uniformes é a média simples.
    """
    logits = as_tensor(logits)
    targets = np.asarray(targets, dtype=np.int64)
    _require(
        logits.ndim == 2 and targets.shape == (logits.shape[0],),
        "shape_mismatch",
        f"cross_entropy: logits {logits.shape} incompatíveis com alvos {targets.shape}",
    )
    n, k = logits.shape
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_p = shifted - log_z
    rows = np.arange(n)
    weights = np.ones(k, dtype=logits.dtype) if class_weights is None else np.asarray(class_weights, dtype=logits.dtype)
    sample_w = weights[targets]
    total_w = sample_w.sum()
    loss = np.asarray(-(sample_w * log_p[rows, targets]).sum() / total_w, dtype=logits.dtype)

    def backward(g):
        grad = np.exp(log_p)
        grad[rows, targets] -= 1.0
        return (grad * (sample_w / total_w)[:, None] * g,)

    return make_result("cross_entropy", loss, (logits,), backward)


# =============================================================================
# CONVOLUTION
# =============================================================================


def _shift(x: np.ndarray, offset: int, padding: str) -> np.ndarray:
    """out[..., t] = x[..., t + offset] (módulo T ou zero fora do suporte)."""
    if padding == "circular":
        return np.roll(x, -offset, axis=-1)
    length = x.shape[-1]
    out = np.zeros_like(x)
    if offset >= 0:
        out[..., : length - offset] = x[..., offset:]
    else:
        out[..., -offset:] = x[..., : length + offset]
    return out


def _shift_adjoint(g: np.ndarray, offset: int, padding: str) -> np.ndarray:
    if padding == "circular":
        return np.roll(g, offset, axis=-1)
    return _shift(g, -offset, "zeros")


def validate_conv(in_channels: int, length: int, weight_shape: tuple[int, ...], groups: int, dilation: int) -> None:
    """Valida o contrato de conv1d; levanta ShapeError descritivo."""
    _require(len(weight_shape) == 3, "shape_mismatch", f"conv1d: peso deve ser 3-D, recebido {weight_shape}")
    out_channels, per_group, kernel = weight_shape
    _require(kernel % 2 == 1, "even_kernel", f"conv1d: kernel deve ter comprimento ímpar, recebido {kernel}")
    _require(groups >= 1 and in_channels % groups == 0, "bad_groups", f"conv1d: {in_channels} canais de entrada não divisíveis por groups={groups}")
    _require(out_channels % groups == 0, "bad_groups", f"conv1d: {out_channels} canais de saída não divisíveis por groups={groups}")
    _require(
        per_group * groups == in_channels,
        "shape_mismatch",
        f"conv1d: peso espera {per_group * groups} canais de entrada, recebido {in_channels}",
    )
    _require(
        dilation >= 1 and dilation * (kernel - 1) < length,
        "dilation_too_large",
        f"conv1d: dilation·(κ-1) = {dilation * (kernel - 1)} deve ser < T = {length}",
    )


def conv1d(x, weight, bias=None, *, groups: int = 1, dilation: int = 1, padding: str = "circular") -> Tensor:
    """
    Convolução 1-D agrupada/dilatada com saída de comprimento exatamente T.

    Args:
        x: (N, C_in, T) ou (C_in, T)
        weight: (C_out, C_in / groups, κ), κ ímpar
        bias: (C_out,) opcional
        groups: número de grupos (C_in = groups → depthwise)
        dilation: espaçamento entre taps
        padding: "circular" (equivariante a C_T) ou "zeros"
    """
    x, weight = as_tensor(x), as_tensor(weight)
    _require(padding in PADDING_MODES, "shape_mismatch", f"conv1d: padding desconhecido {padding!r}")
    squeeze = x.ndim == 2
    _require(x.ndim in (2, 3), "shape_mismatch", f"conv1d: entrada deve ser (C, T) ou (N, C, T), recebido {x.shape}")
    data = x.data[None] if squeeze else x.data
    n, c_in, length = data.shape
    validate_conv(c_in, length, weight.shape, groups, dilation)
    c_out, per_group, kernel = weight.shape
    half = (kernel - 1) // 2
    offsets = [(j - half) * dilation for j in range(kernel)]

    cols = np.stack([_shift(data, s, padding) for s in offsets], axis=2)
    cols_g = cols.reshape(n, groups, per_group, kernel, length)
    w_g = weight.data.reshape(groups, c_out // groups, per_group, kernel)
    out = np.einsum("ngckt,gock->ngot", cols_g, w_g, optimize=True).reshape(n, c_out, length)

    inputs: tuple[Tensor, ...] = (x, weight)
    if bias is not None:
        bias = as_tensor(bias)
        _require(bias.shape == (c_out,), "shape_mismatch", f"conv1d: bias {bias.shape} deveria ser ({c_out},)")
        out = out + bias.data[None, :, None]
        inputs = inputs + (bias,)

    def backward(g):
        g3 = (g[None] if squeeze else g).reshape(n, groups, c_out // groups, length)
        grad_w = np.einsum("ngot,ngckt->gock", g3, cols_g, optimize=True).reshape(weight.shape)
        grad_cols = np.einsum("ngot,gock->ngckt", g3, w_g, optimize=True).reshape(n, c_in, kernel, length)
        grad_x = np.zeros_like(data)
        for j, s in enumerate(offsets):
            grad_x += _shift_adjoint(grad_cols[:, :, j, :], s, padding)
        grads: list[np.ndarray] = [grad_x[0] if squeeze else grad_x, grad_w]
        if bias is not None:
            grads.append(g3.sum(axis=(0, 3)).reshape(c_out))
        return tuple(grads)

    return make_result("conv1d", out[0] if squeeze else out, inputs, backward)


def conv1d_circular(x, weight, groups: int = 1, dilation: int = 1) -> Tensor:
    """Convolução circular sem bias (comuta com deslocamentos cíclicos)."""
    return conv1d(x, weight, groups=groups, dilation=dilation, padding="circular")


def box_smooth(x, k: int, padding: str = "circular") -> Tensor:
    """Filtro de média móvel depthwise de comprimento k, mesmo kernel em todos os canais."""
    x = as_tensor(x)
    channels = x.shape[-2]
    kernel = np.full((channels, 1, k), 1.0 / k, dtype=x.dtype)
    return conv1d(x, kernel, groups=channels, padding=padding)
