"""
CatEquiv IDs — Identificadores de execução e derivação determinística de seeds.
"""

from __future__ import annotations

import secrets
import string
import zlib

import numpy as np
from django.utils import timezone


# Caracteres seguros para IDs (sem ambíguos: 0/O, 1/l/I)
_SAFE_CHARS = string.ascii_uppercase.replace("O", "").replace("I", "") + string.digits.replace("0", "").replace("1", "")


def _generate_id(prefix: str, length: int = 8) -> str:
    """
    Gera um ID único com prefixo.

    Args:
        prefix: Prefixo do ID (ex.: "RUN-20261019")
        length: Comprimento da parte aleatória

    Returns:
        ID no formato PREFIX-XXXXXXXX
    """
    random_part = "".join(secrets.choice(_SAFE_CHARS) for _ in range(length))
    return f"{prefix}-{random_part}"


def generate_run_id() -> str:
    """
    Gera identificador para um diretório de execução sem --out explícito.

    Formato: RUN-YYYYMMDD-XXXXXXXX
    """
    date_part = timezone.localdate().strftime("%Y%m%d")
    return _generate_id(f"RUN-{date_part}")


def _label_key(label: object) -> int:
    if isinstance(label, (int, np.integer)):
        return int(label) & 0xFFFFFFFF
    return zlib.crc32(str(label).encode("utf-8"))


def derive_seed(master: int, *labels: object) -> int:
    """
    Deriva uma seed filha estável a partir da seed mestre e de rótulos.

    O mesmo (master, labels) produz a mesma seed em qualquer plataforma;
    rótulos diferentes produzem streams independentes (SeedSequence spawn key).
    """
    spawn_key = tuple(_label_key(label) for label in labels)
    seq = np.random.SeedSequence(entropy=int(master) & 0xFFFFFFFFFFFFFFFF, spawn_key=spawn_key)
    return int(seq.generate_state(1, dtype=np.uint64)[0])
