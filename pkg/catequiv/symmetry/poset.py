"""
Poset de sensores — eixos ≺ sensor ≺ TOTAL.

Os 9 objetos e as 23 setas são enumerados explicitamente; não há motor
genérico de alcançabilidade.
"""

from __future__ import annotations

from enum import Enum

# Ordem canônica das linhas em TOTAL.
TOTAL_CHANNELS = ("ACCx", "ACCy", "ACCz", "GYRx", "GYRy", "GYRz")
SENSORS = ("ACC", "GYR")


class PosetObject(str, Enum):
    ACC_X = "ACCx"
    ACC_Y = "ACCy"
    ACC_Z = "ACCz"
    GYR_X = "GYRx"
    GYR_Y = "GYRy"
    GYR_Z = "GYRz"
    ACC = "ACC"
    GYR = "GYR"
    TOTAL = "TOTAL"

    @property
    def channels(self) -> tuple[int, ...]:
        """Índices (na ordem de TOTAL) das linhas que formam o portador deste objeto."""
        return _CHANNELS[self]

    @property
    def dim(self) -> int:
        """Dimensão de canais C_s: eixo → 1, sensor → 3, TOTAL → 6."""
        return len(self.channels)

    @property
    def level(self) -> str:
        if self is PosetObject.TOTAL:
            return "total"
        if self in (PosetObject.ACC, PosetObject.GYR):
            return "sensor"
        return "axis"

    @property
    def sensor(self) -> str | None:
        """Sensor ao qual o objeto pertence (None para TOTAL)."""
        if self is PosetObject.TOTAL:
            return None
        return self.value[:3]

    def precedes(self, other: PosetObject) -> bool:
        """self ⪯ other na ordem parcial."""
        return (self, other) in ARROWS


_CHANNELS: dict[PosetObject, tuple[int, ...]] = {
    PosetObject.ACC_X: (0,),
    PosetObject.ACC_Y: (1,),
    PosetObject.ACC_Z: (2,),
    PosetObject.GYR_X: (3,),
    PosetObject.GYR_Y: (4,),
    PosetObject.GYR_Z: (5,),
    PosetObject.ACC: (0, 1, 2),
    PosetObject.GYR: (3, 4, 5),
    PosetObject.TOTAL: (0, 1, 2, 3, 4, 5),
}

AXIS_OBJECTS = (
    PosetObject.ACC_X,
    PosetObject.ACC_Y,
    PosetObject.ACC_Z,
    PosetObject.GYR_X,
    PosetObject.GYR_Y,
    PosetObject.GYR_Z,
)


def _enumerate_arrows() -> tuple[tuple[PosetObject, PosetObject], ...]:
    identities = [(obj, obj) for obj in PosetObject]
    axis_to_sensor = [(axis, PosetObject(axis.sensor)) for axis in AXIS_OBJECTS]
    sensor_to_total = [(PosetObject.ACC, PosetObject.TOTAL), (PosetObject.GYR, PosetObject.TOTAL)]
    axis_to_total = [(axis, PosetObject.TOTAL) for axis in AXIS_OBJECTS]
    return tuple(identities + axis_to_sensor + sensor_to_total + axis_to_total)


# 9 identidades + 6 eixo→sensor + 2 sensor→TOTAL + 6 eixo→TOTAL
ARROWS: tuple[tuple[PosetObject, PosetObject], ...] = _enumerate_arrows()


def placement(source: PosetObject, target: PosetObject) -> list[int]:
    """Linhas de `target` que recebem as linhas de `source` na injeção canônica."""
    return [target.channels.index(c) for c in source.channels]


def channel_sensor(channel: int) -> str:
    """Sensor dono de uma linha de TOTAL."""
    return SENSORS[0] if channel < 3 else SENSORS[1]
