from django.apps import AppConfig


class AlgebraConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'cartankit.algebra'
    verbose_name = 'Graded algebras'
