"""
Baselines convolucionais: duas convoluções 1-D, ReLU, dropout, GAP e cabeça linear.

PlainCNN usa padding zero; CircCNN usa padding circular em todas as
convoluções e por isso é invariante a deslocamentos cíclicos na saída.
"""

from __future__ import annotations

from catequiv.networks.base import Network, stage
from catequiv.networks.spec import ModelSpec
from catequiv.nn import functional as F
from catequiv.nn.tensor import Tensor


class ConvBaseline(Network):
    @classmethod
    def shapes(cls, spec: ModelSpec) -> dict[str, tuple[int, ...]]:
        shapes: dict[str, tuple[int, ...]] = {}
        previous = spec.input_channels
        for i, (width, kernel) in enumerate(zip(spec.baseline_widths, spec.baseline_kernels), start=1):
            shapes[f"conv{i}.weight"] = (width, previous, kernel)
            shapes[f"conv{i}.bias"] = (width,)
            previous = width
        shapes["head.weight"] = (spec.num_classes, previous)
        shapes["head.bias"] = (spec.num_classes,)
        return shapes

    def features(self, x: Tensor, *, train: bool = False, rng=None) -> Tensor:
        spec = self.spec
        h = x if spec.input_channels == x.shape[1] else F.narrow(x, 1, 0, spec.input_channels)
        for i in range(1, len(spec.baseline_widths) + 1):
            with stage(f"conv{i}"):
                h = F.relu(
                    F.conv1d(
                        h,
                        self.params[f"conv{i}.weight"],
                        self.params[f"conv{i}.bias"],
                        padding=spec.conv_padding,
                    )
                )
        h = F.dropout(h, spec.dropout, rng, train)
        return F.gap_t(h)


class PlainCNN(ConvBaseline):
    pass


class CircCNN(ConvBaseline):
    pass
