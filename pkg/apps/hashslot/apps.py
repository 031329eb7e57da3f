from django.apps import AppConfig


class HashslotConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "apps.hashslot"
    verbose_name = "Hash slot tables"
