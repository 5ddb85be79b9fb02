# coding: utf-8
"""
Funciones auxiliares reutilizables.
"""

import math
from typing import Any, Dict, Sequence

import numpy as np


def parse_bool(value: Any) -> bool:
    """
    Convierte un valor a booleano de forma segura.

    Args:
        value: Valor a convertir

    Returns:
        Valor booleano

    Example:
        parse_bool("true")  # True
        parse_bool(0)  # False
    """
    if isinstance(value, bool):
        return value
    if isinstance(value, str):
        return value.lower() in ('true', '1', 'yes', 'on', 'si', 'sí')
    return bool(value)


def percentiles_ms(samples_s: Sequence[float], qs: Sequence[float] = (50.0, 90.0, 99.0)) -> Dict[str, float]:
    """
    Calcula percentiles en milisegundos a partir de muestras en segundos.

    Args:
        samples_s: Muestras de tiempo en segundos
        qs: Percentiles a calcular

    Returns:
        Diccionario ``{"p50": ..., "p90": ..., "p99": ..., "mean": ...}``
    """
    if len(samples_s) == 0:
        return {**{f"p{int(q)}": 0.0 for q in qs}, "mean": 0.0}
    arr = np.asarray(samples_s, dtype=float) * 1000.0
    result = {f"p{int(q)}": float(np.percentile(arr, q)) for q in qs}
    result["mean"] = float(arr.mean())
    return result


def safe_mean(values: Sequence[float]) -> float:
    """
    Media aritmética que retorna 0.0 para secuencias vacías.

    Args:
        values: Valores

    Returns:
        Media o 0.0
    """
    if len(values) == 0:
        return 0.0
    return math.fsum(values) / len(values)
