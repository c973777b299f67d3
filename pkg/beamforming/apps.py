from django.apps import AppConfig


class BeamformingConfig(AppConfig):
    name = 'beamforming'
