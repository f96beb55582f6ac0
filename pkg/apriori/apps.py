from django.apps import AppConfig


class AprioriConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "apriori"
    verbose_name = "A-priori entity resolution"
