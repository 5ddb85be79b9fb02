# coding: utf-8
"""
Servicios del módulo EraNavegacion.
Orquestan el mundo, el codificador y el banco para cada subcomando del arnés.
"""
