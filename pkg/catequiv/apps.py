from __future__ import annotations

from django.apps import AppConfig
from django.utils.translation import gettext_lazy as _


class CatEquivConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "catequiv"
    verbose_name = _("Reconhecimento de atividades equivariante")

    def ready(self) -> None:
        from catequiv import registry

        registry.register_defaults()
