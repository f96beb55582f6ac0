from django.apps import AppConfig


class FolConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "fol"
    verbose_name = "First-order logic"
