from django.apps import AppConfig


class MontecarloConfig(AppConfig):
    name = 'montecarlo'
