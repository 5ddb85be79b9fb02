# coding: utf-8
"""
Helper para carga de configuración desde dict, archivo JSON o archivo key=value.
Utilidad compartida para todos los módulos.
"""

import os
import json
from typing import Any, Dict, Mapping, Optional, Union

from dotenv import dotenv_values

from shared.utils.config_parser import parse_config, parse_key_value_text, parse_scalar, set_dotted
from shared.utils.exceptions import ConfigurationError
from shared.utils.logger import get_logger

logger = get_logger("ConfigHelper")

ENV_PREFIX = "ERA__"


def load_config_from_param(config_param: Union[Dict[str, Any], str, None]) -> Dict[str, Any]:
    """
    Carga configuración desde un diccionario, una ruta a archivo o un string JSON.

    Args:
        config_param: Puede ser:
            - None: configuración vacía (se usan los valores por defecto)
            - Dict: Diccionario de configuración directamente
            - str: Ruta a archivo (.json o key=value) o string JSON

    Returns:
        Diccionario con la configuración cargada

    Raises:
        ConfigurationError: Si la configuración es inválida o el archivo no existe
    """
    if config_param is None:
        return {}

    if isinstance(config_param, dict):
        return config_param

    if not isinstance(config_param, str):
        raise ConfigurationError(f"Tipo de configuración no soportado: {type(config_param)}")

    if os.path.isfile(config_param):
        with open(config_param, "r", encoding="utf-8") as f:
            content = f.read()
        if config_param.lower().endswith(".json"):
            config = parse_config(content)
            logger.info(f"Configuración cargada desde archivo JSON: {config_param}")
            return config
        # Si falla como JSON, se interpreta como texto key=value
        try:
            config = json.loads(content)
            if isinstance(config, dict):
                logger.info(f"Configuración cargada desde archivo JSON: {config_param}")
                return config
        except json.JSONDecodeError:
            pass
        config = parse_key_value_text(content)
        logger.info(f"Configuración cargada desde archivo key=value: {config_param}")
        return config

    if config_param.strip().startswith("{"):
        config = parse_config(config_param)
        logger.info("Configuración parseada desde string JSON")
        return config

    logger.error(f"Archivo de configuración no encontrado: {config_param}")
    raise ConfigurationError(f"Archivo de configuración no encontrado: {config_param}")


def apply_env_overrides(config: Dict[str, Any],
                        environ: Optional[Mapping[str, str]] = None,
                        dotenv_path: Optional[str] = None) -> Dict[str, Any]:
    """
    Aplica sobreescrituras ``ERA__SECCION__CLAVE=valor`` desde el entorno.

    Si se indica ``dotenv_path`` y existe, sus variables se leen con
    python-dotenv y tienen menor prioridad que el entorno del proceso.

    Args:
        config: Configuración base (se modifica y se retorna)
        environ: Variables de entorno (default: os.environ)
        dotenv_path: Ruta opcional a un archivo .env

    Returns:
        Configuración con las sobreescrituras aplicadas
    """
    variables: Dict[str, str] = {}
    if dotenv_path and os.path.isfile(dotenv_path):
        variables.update({k: v for k, v in dotenv_values(dotenv_path).items() if v is not None})
    variables.update(dict(os.environ if environ is None else environ))

    for name, raw in sorted(variables.items()):
        if not name.startswith(ENV_PREFIX):
            continue
        dotted = ".".join(part.lower() for part in name[len(ENV_PREFIX):].split("__") if part)
        if not dotted:
            continue
        set_dotted(config, dotted, parse_scalar(raw.strip()))
        logger.info(f"Sobreescritura de configuración desde entorno: {dotted}")
    return config


def get_section(config: Dict[str, Any], section: str) -> Dict[str, Any]:
    """
    Obtiene una sección de la configuración validando su tipo.

    Args:
        config: Diccionario de configuración
        section: Nombre de la sección (``world``, ``controller``…)

    Returns:
        Diccionario de la sección (vacío si no existe)
    """
    value = config.get(section, {})
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigurationError(f"La sección {section!r} debe ser un diccionario")
    return value
