from django.apps import AppConfig


class RewriteConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "rewrite"
    verbose_name = "Intermediate graph rewriting"
