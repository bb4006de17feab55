"""
Quantum Core App Configuration
"""
from django.apps import AppConfig


class QuantumCoreConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'quantum_core'
    verbose_name = 'Quantum State Algebra'
