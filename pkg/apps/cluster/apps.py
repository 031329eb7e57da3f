from django.apps import AppConfig


class ClusterAppConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "apps.cluster"
    verbose_name = "Cluster registry and experiments"
