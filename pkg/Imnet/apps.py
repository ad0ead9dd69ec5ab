from django.apps import AppConfig


class ImnetConfig(AppConfig):
    name = 'Imnet'
    verbose_name = 'ImNet interpreter and switch fabric'
