from django.apps import AppConfig


class GeometryConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'cartankit.geometry'
    verbose_name = 'Flat models and symmetries'
