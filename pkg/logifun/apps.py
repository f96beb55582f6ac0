from django.apps import AppConfig


class LogifunConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "logifun"
    verbose_name = "Logical function rewriting"
