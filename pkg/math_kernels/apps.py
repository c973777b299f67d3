from django.apps import AppConfig


class MathKernelsConfig(AppConfig):
    name = 'math_kernels'
