from django.apps import AppConfig


class HypocalConfig(AppConfig):
    name = 'hypocal'
    verbose_name = 'Sand hypoplasticity calibration'
