from django.apps import AppConfig


class SimkernelConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'SIMKERNEL'
