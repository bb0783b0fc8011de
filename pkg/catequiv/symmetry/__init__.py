"""
CatEquiv Symmetry — Categoria de simetrias (tempo, ganho, poset de sensores) e sua ação sobre os dados.
"""

from .actions import (  # noqa: F401
    Morphism,
    apply_morphism,
    apply_morphism_inject_first,
    apply_time_gain,
    inject,
    sample_morphism,
    shift_time,
)
from .poset import ARROWS, AXIS_OBJECTS, SENSORS, TOTAL_CHANNELS, PosetObject, placement  # noqa: F401
