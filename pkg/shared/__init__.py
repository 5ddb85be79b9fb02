# coding: utf-8
"""
Módulo transversal compartido para todos los módulos del proyecto.
Contiene logging, configuración, validaciones, archivos JSON/lock y excepciones.
"""

__version__ = "1.0.0"
__author__ = "Rocketbot Team"

