# coding: utf-8
"""
Validaciones comunes reutilizables.

Todas lanzan ConfigurationError con el nombre del campo para que el mensaje
llegue legible hasta la CLI.
"""

from typing import Any, Iterable, Sequence

import numpy as np

from shared.utils.exceptions import ConfigurationError


def validate_finite(name: str, value: Any) -> None:
    """
    Valida que un escalar o arreglo sea completamente finito.

    Args:
        name: Nombre del campo para el mensaje de error
        value: Escalar o arreglo a validar

    Raises:
        ConfigurationError: Si algún componente es NaN o infinito
    """
    if not np.all(np.isfinite(np.asarray(value, dtype=float))):
        raise ConfigurationError(f"{name} debe ser finito, se recibió {value!r}")


def validate_positive(name: str, value: float, allow_zero: bool = False) -> None:
    """
    Valida que un valor sea positivo (o no negativo si allow_zero).

    Args:
        name: Nombre del campo
        value: Valor a validar
        allow_zero: Si True acepta 0
    """
    validate_finite(name, value)
    if value < 0 or (value == 0 and not allow_zero):
        cota = ">= 0" if allow_zero else "> 0"
        raise ConfigurationError(f"{name} debe ser {cota}, se recibió {value!r}")


def validate_in_range(name: str, value: float, low: float, high: float,
                      inclusive: bool = True) -> None:
    """
    Valida que un valor esté dentro de un intervalo.

    Args:
        name: Nombre del campo
        value: Valor a validar
        low: Límite inferior
        high: Límite superior
        inclusive: Si False el intervalo es abierto

    Example:
        validate_in_range("difficulty", 0.5, 0.0, 1.0)
    """
    validate_finite(name, value)
    ok = low <= value <= high if inclusive else low < value < high
    if not ok:
        izq, der = ("[", "]") if inclusive else ("(", ")")
        raise ConfigurationError(f"{name} debe estar en {izq}{low}, {high}{der}, se recibió {value!r}")


def validate_integer(name: str, value: Any, minimum: int = 0) -> None:
    """
    Valida que un valor sea entero y mayor o igual que ``minimum``.

    Args:
        name: Nombre del campo
        value: Valor a validar
        minimum: Mínimo permitido
    """
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ConfigurationError(f"{name} debe ser entero, se recibió {value!r}")
    if value < minimum:
        raise ConfigurationError(f"{name} debe ser >= {minimum}, se recibió {value!r}")


def validate_strictly_increasing(names: Sequence[str], values: Sequence[float]) -> None:
    """
    Valida que una secuencia de valores sea estrictamente creciente.

    Args:
        names: Nombres de los campos, en el mismo orden
        values: Valores correspondientes
    """
    for (name_a, a), (name_b, b) in zip(zip(names, values), zip(names[1:], values[1:])):
        if not a < b:
            raise ConfigurationError(f"Se requiere {name_a} < {name_b}, se recibió {a!r} >= {b!r}")


def validate_choice(name: str, value: Any, choices: Iterable[Any]) -> None:
    """
    Valida que un valor pertenezca a un conjunto de opciones.

    Args:
        name: Nombre del campo
        value: Valor a validar
        choices: Opciones permitidas
    """
    opciones = list(choices)
    if value not in opciones:
        raise ConfigurationError(f"{name} debe ser uno de {opciones}, se recibió {value!r}")
