from django.apps import AppConfig


class AppmodelConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'APPMODEL'
