import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "FactoidEntailment_project.settings")
django.setup()
