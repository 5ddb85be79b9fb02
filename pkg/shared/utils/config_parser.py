# coding: utf-8
"""
Utilidades para parsear y validar configuraciones.

Soporta tres formatos: diccionarios, texto JSON y texto plano key=value con
claves punteadas por sección (``world.dt=0.05``).
"""

import json
from typing import Any, Dict, List, Union
from shared.utils.logger import get_logger
from shared.utils.exceptions import ConfigurationError

logger = get_logger("ConfigParser")


def parse_config(config: Union[str, Dict[str, Any]]) -> Dict[str, Any]:
    """
    Parsea una configuración que puede ser string JSON o diccionario.

    Args:
        config: Configuración como string JSON o diccionario

    Returns:
        Diccionario con la configuración parseada

    Example:
        config = parse_config('{"world": {"dt": 0.05}}')
        config = parse_config({"world": {"dt": 0.05}})
    """
    if isinstance(config, dict):
        return config

    if isinstance(config, str):
        try:
            parsed = json.loads(config)
        except json.JSONDecodeError as e:
            logger.error(f"Error al parsear JSON: {e}")
            raise ConfigurationError(f"Configuración JSON inválida: {e}") from e
        if not isinstance(parsed, dict):
            raise ConfigurationError(f"La configuración JSON debe ser un objeto, se recibió {type(parsed).__name__}")
        return parsed

    raise ConfigurationError(f"Tipo de configuración no soportado: {type(config)}")


def parse_scalar(raw: str) -> Any:
    """
    Convierte el lado derecho de una línea key=value en un valor Python.

    Reconoce booleanos, enteros, reales y listas separadas por comas; el
    resto se conserva como texto.

    Args:
        raw: Texto del valor sin espacios alrededor

    Returns:
        Valor convertido
    """
    lowered = raw.lower()
    if lowered in ("true", "yes", "on", "si", "sí"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    if lowered in ("none", "null", ""):
        return None
    if "," in raw:
        return [parse_scalar(part.strip()) for part in raw.split(",") if part.strip()]
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def parse_key_value_text(text: str) -> Dict[str, Any]:
    """
    Parsea texto plano key=value con secciones por claves punteadas.

    Las líneas vacías y las que empiezan por ``#`` se ignoran. ``world.dt=0.05``
    queda como ``{"world": {"dt": 0.05}}``.

    Args:
        text: Contenido del archivo de configuración

    Returns:
        Diccionario anidado por sección

    Raises:
        ConfigurationError: Si una línea no tiene el formato key=value
    """
    config: Dict[str, Any] = {}
    for line_number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigurationError(f"Línea {line_number} sin '=': {stripped!r}")
        key, value = stripped.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigurationError(f"Línea {line_number} con clave vacía")
        set_dotted(config, key, parse_scalar(value.strip()))
    return config


def set_dotted(config: Dict[str, Any], dotted_key: str, value: Any) -> None:
    """
    Asigna un valor en un diccionario anidado usando una clave punteada.

    Args:
        config: Diccionario destino (se modifica)
        dotted_key: Clave como ``"controller.k"``
        value: Valor a asignar
    """
    parts: List[str] = dotted_key.split(".")
    node = config
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigurationError(f"La clave {dotted_key!r} choca con un valor escalar en {part!r}")
        node = child
    node[parts[-1]] = value
