"""
Rng — Gerador pseudo-aleatório determinístico do repositório.

Algoritmo fixo: PCG64 do numpy (stream idêntico entre execuções e plataformas
para a mesma seed). Streams filhos são derivados por rótulo, nunca por estado
compartilhado, para que a ordem de consumo de um módulo não afete outro.
"""

from __future__ import annotations

import numpy as np

from catequiv.ids import derive_seed


class Rng:
    ALGORITHM = "PCG64"

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def spawn(self, *labels: object) -> Rng:
        """Stream independente derivado de (seed, labels)."""
        return Rng(derive_seed(self.seed, *labels))

    def normal(self, loc: float = 0.0, scale: float = 1.0, size=None):
        return self._gen.normal(loc, scale, size)

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        return self._gen.uniform(low, high, size)

    def integers(self, low: int, high: int | None = None, size=None, endpoint: bool = False):
        return self._gen.integers(low, high, size=size, endpoint=endpoint)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def choice(self, a, size=None, replace: bool = True):
        return self._gen.choice(a, size=size, replace=replace)

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, algorithm={self.ALGORITHM})"
