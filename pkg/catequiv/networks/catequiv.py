"""
CatEquivNet — Rede 1-D equivariante com amarração explícita de parâmetros.

Pipeline (entrada (N, 8, T); só as linhas 0–5 passam pelas convoluções):

    Stage 1   conv depthwise circular, um banco C₁×κ₁ replicado nos 6 eixos
    Redução   ℓ2 sobre {x, y, z} por sensor, depois ReLU
    GN        GroupNorm com 2 grupos (um por sensor)
    Stage 2   3 ramos (dilatação 1, 2, 3), banco compartilhado ACC/GYR, ReLU
    Fusão     média sobre sensores, box filter circular, GAP_t
    Cabeça    [g⁽¹⁾ ‖ g⁽²⁾ ‖ g⁽³⁾ ‖ GAP_t(X_log)] → dropout → afim

A amarração é estrutural: guardamos um banco e materializamos as cópias
com `tile`, cujo gradiente soma as contribuições.
"""

from __future__ import annotations

import numpy as np

from catequiv.exceptions import ShapeError
from catequiv.networks.base import Network, stage
from catequiv.networks.spec import ModelSpec
from catequiv.nn import functional as F
from catequiv.nn.tensor import Tensor
from catequiv.symmetry.poset import PosetObject


class CatEquivNet(Network):
    @classmethod
    def shapes(cls, spec: ModelSpec) -> dict[str, tuple[int, ...]]:
        shapes: dict[str, tuple[int, ...]] = {
            "stage1.weight": (spec.c1 if spec.tie_axes else 6 * spec.c1, 1, spec.k1),
        }
        if spec.group_norm:
            shapes["gn.weight"] = (2 * spec.stage2_in,)
            shapes["gn.bias"] = (2 * spec.stage2_in,)
        for i, (width, kernel, _) in enumerate(spec.branches, start=1):
            shapes[f"stage2.{i}.weight"] = (width, spec.stage2_in, kernel)
            shapes[f"stage2.{i}.bias"] = (width,)
        shapes["head.weight"] = (spec.num_classes, spec.head_dim)
        shapes["head.bias"] = (spec.num_classes,)
        return shapes

    @classmethod
    def init_value(cls, spec, name, shape, rng, dtype) -> np.ndarray:
        if name == "gn.weight":
            return np.ones(shape, dtype=dtype)
        if name == "gn.bias":
            return np.zeros(shape, dtype=dtype)
        return super().init_value(spec, name, shape, rng, dtype)

    # ------------------------------------------------------------------
    # Bancos materializados
    # ------------------------------------------------------------------

    def stage1_bank(self) -> Tensor:
        """Banco depthwise (6·C₁, 1, κ₁); canal de saída a·C₁ + c para o eixo a."""
        weight = self.params["stage1.weight"]
        return F.tile(weight, 6, axis=0) if self.spec.tie_axes else weight

    def stage2_bank(self, branch: int) -> tuple[Tensor, Tensor]:
        """Peso (2·C₂, C_in, κ₂) e bias (2·C₂,) com ACC e GYR compartilhando o banco."""
        weight = self.params[f"stage2.{branch}.weight"]
        bias = self.params[f"stage2.{branch}.bias"]
        return F.tile(weight, 2, axis=0), F.tile(bias, 2, axis=0)

    # ------------------------------------------------------------------
    # Forward
    # ------------------------------------------------------------------

    def features(self, x: Tensor, *, train: bool = False, rng=None) -> Tensor:
        spec = self.spec
        padding = spec.conv_padding
        n, _, length = x.shape

        with stage("stage1"):
            h = F.conv1d(F.narrow(x, 1, 0, 6), self.stage1_bank(), groups=6, padding=padding)

        with stage("axis_reduction"):
            if spec.axis_l2:
                h = F.l2_norm(F.reshape(h, (n, 2, 3, spec.c1, length)), axis=2)
                h = F.reshape(h, (n, 2 * spec.c1, length))
            h = F.relu(h)

        if spec.group_norm:
            with stage("group_norm"):
                h = F.group_norm(h, 2, self.params["gn.weight"], self.params["gn.bias"], eps=spec.gn_eps)

        pooled = []
        for i, (width, _, dilation) in enumerate(spec.branches, start=1):
            weight, bias = self.stage2_bank(i)
            with stage(f"stage2.{i}"):
                y = F.relu(F.conv1d(h, weight, bias, groups=2, dilation=dilation, padding=padding))
            with stage("sensor_fusion"):
                y = F.mean(F.reshape(y, (n, 2, width, length)), axis=1)
                if spec.smoothing:
                    y = F.box_smooth(y, spec.box, padding)
                pooled.append(F.gap_t(y))

        if spec.uses_log_rms:
            pooled.append(F.gap_t(F.narrow(x, 1, 6, 2)))

        with stage("head_fusion"):
            z = F.concat(pooled, axis=1) if len(pooled) > 1 else pooled[0]
        return F.dropout(z, spec.dropout, rng, train)

    # ------------------------------------------------------------------
    # Núcleo linear
    # ------------------------------------------------------------------

    def linear_core(self, x, obj: PosetObject) -> np.ndarray:
        """
        Núcleo linearizado η_obj: (C_obj, T) → (C_obj, F, T).

        Mantém só os operadores lineares da rede viva: Stage 1, Stage 2 com
        ativação identidade e sem bias, e o box filter por stream. Cada linha
        (eixo) é processada isoladamente, antes de qualquer mistura entre
        eixos ou sensores; na variante sem ℓ2 cada eixo usa a fatia do banco
        do Stage 2 que lhe corresponde.
        """
        spec = self.spec
        padding = spec.conv_padding
        arr = np.asarray(x.data if isinstance(x, Tensor) else x, dtype=self.dtype)
        if arr.ndim != 2 or arr.shape != (obj.dim, spec.length):
            raise ShapeError(
                code="bad_stage_input",
                message=f"Núcleo linear sobre {obj.value}: esperado ({obj.dim}, {spec.length}), recebido {arr.shape}",
                context={"stage": "linear_core", "object": obj.value},
            )

        stage1 = self.params["stage1.weight"]
        rows = []
        for row, channel in enumerate(obj.channels):
            bank = stage1 if spec.tie_axes else F.narrow(stage1, 0, channel * spec.c1, spec.c1)
            h = F.conv1d(arr[row : row + 1][None], bank, padding=padding)
            streams = []
            for i, (_, _, dilation) in enumerate(spec.branches, start=1):
                weight = self.params[f"stage2.{i}.weight"]
                if not spec.axis_l2:
                    weight = F.narrow(weight, 1, (channel % 3) * spec.c1, spec.c1)
                y = F.conv1d(h, weight, dilation=dilation, padding=padding)
                if spec.smoothing:
                    y = F.box_smooth(y, spec.box, padding)
                streams.append(y)
            rows.append(F.concat(streams, axis=1).numpy()[0])
        return np.stack(rows)
