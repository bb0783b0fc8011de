"""
CatEquiv Registry — Sistema de extensibilidade via Protocols e Registry.

Permite registrar verificações de equivariância e variantes de ablação.
"""

from __future__ import annotations

import threading
from typing import Any, Protocol, runtime_checkable


# =============================================================================
# PROTOCOLS
# =============================================================================


@runtime_checkable
class Check(Protocol):
    """
    Verificação numérica executada pelo `verify`.

    Determinística dado o rng recebido; não faz IO.
    """

    name: str
    tolerance: float

    def run(self, *, network: Any, rng: Any, ctx: dict) -> Any:
        """Returns CheckResult."""
        ...


@runtime_checkable
class AblationVariant(Protocol):
    """
    Modificação de arquitetura para o estudo de ablação.

    `apply` recebe o ModelSpec completo e devolve o spec modificado.
    """

    code: str
    label: str

    def apply(self, spec: Any) -> Any:
        """Returns ModelSpec."""
        ...


# =============================================================================
# REGISTRY
# =============================================================================


class _Registry:
    """
    Registro central de extensões do CatEquiv.

    Uso:
        from catequiv import registry

        registry.register_check(MyCheck())
        registry.register_ablation(MyVariant())
    """

    def __init__(self) -> None:
        self._lock = threading.RLock()
        self._checks: dict[str, Check] = {}
        self._ablations: dict[str, AblationVariant] = {}

    # -------------------------------------------------------------------------
    # Checks
    # -------------------------------------------------------------------------

    def register_check(self, check: Check) -> None:
        """
        Registra uma verificação.

        Nota: Um nome só pode ter uma verificação registrada.
        """
        if not isinstance(check, Check):
            raise TypeError(f"Expected Check protocol, got {type(check)}")
        with self._lock:
            if check.name in self._checks:
                raise ValueError(f"Check '{check.name}' already registered")
            self._checks[check.name] = check

    def get_check(self, name: str) -> Check | None:
        with self._lock:
            return self._checks.get(name)

    def get_checks(self) -> list[Check]:
        """Retorna verificações na ordem de registro."""
        with self._lock:
            return list(self._checks.values())

    # -------------------------------------------------------------------------
    # Ablations
    # -------------------------------------------------------------------------

    def register_ablation(self, variant: AblationVariant) -> None:
        """
        Registra uma variante de ablação.

        Nota: Um código só pode ter uma variante registrada.
        """
        if not isinstance(variant, AblationVariant):
            raise TypeError(f"Expected AblationVariant protocol, got {type(variant)}")
        with self._lock:
            if variant.code in self._ablations:
                raise ValueError(f"Ablation '{variant.code}' already registered")
            self._ablations[variant.code] = variant

    def get_ablation(self, code: str) -> AblationVariant | None:
        with self._lock:
            return self._ablations.get(code)

    def get_ablations(self) -> dict[str, AblationVariant]:
        with self._lock:
            return dict(self._ablations)

    # -------------------------------------------------------------------------
    # Utility
    # -------------------------------------------------------------------------

    def clear(self) -> None:
        """Limpa todos os registros. Útil para testes."""
        with self._lock:
            self._checks.clear()
            self._ablations.clear()

    def register_defaults(self) -> None:
        """Registra as verificações e ablações embutidas que ainda não estiverem presentes."""
        from catequiv.services.ablation import DEFAULT_VARIANTS
        from catequiv.services.verify import DEFAULT_CHECKS

        with self._lock:
            for check in DEFAULT_CHECKS:
                if check.name not in self._checks:
                    self._checks[check.name] = check
            for variant in DEFAULT_VARIANTS:
                if variant.code not in self._ablations:
                    self._ablations[variant.code] = variant


# Instância global do registry
_registry = _Registry()

# API pública — funções delegam para a instância global
register_check = _registry.register_check
get_check = _registry.get_check
get_checks = _registry.get_checks
register_ablation = _registry.register_ablation
get_ablation = _registry.get_ablation
get_ablations = _registry.get_ablations
register_defaults = _registry.register_defaults
clear = _registry.clear


def reset() -> None:
    """Limpa e registra novamente os defaults. Útil para testes."""
    _registry.clear()
    _registry.register_defaults()
