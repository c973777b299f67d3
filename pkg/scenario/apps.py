from django.apps import AppConfig


class ScenarioAppConfig(AppConfig):
    name = 'scenario'
