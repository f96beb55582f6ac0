from django.apps import AppConfig


class ReasonConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "reason"
    verbose_name = "Entailment reasoning"
