# coding: utf-8
"""
Módulo EraNavegacion: controlador Event-Retrieve-Action para evasión de
colisiones de un UAV en un mundo cinemático con intrusos adversariales.

Funcionalidades:
- Mundo 3D determinista con intrusos tipo A/B/C y currículo de dificultad
- Experto de Campo Potencial Virtual para generar demostraciones
- Codificador de conjuntos invariante a permutaciones y dinámica latente contractiva
- Banco de conocimiento con búsqueda exacta e IVF, pesos por confiabilidad y poda
- Filtro de Lyapunov y Selección Bayesiana por Clusters
- Arnés de línea de comandos: datos, preentrenamiento, currículo, evaluación y benchmark
"""

__version__ = "1.0.0"
