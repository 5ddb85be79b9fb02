# coding: utf-8
"""
Sistema de logging centralizado.
Proporciona configuración estándar para todos los módulos.

Cada logger escribe en consola y, si hay configuración de logs, en dos
archivos CSV: auditoría (todos los niveles) y sistema (WARNING y superior).
Los nombres de archivo pueden contener YYYYMMDD, que se reemplaza por la
fecha actual.
"""

import logging
import os
import sys
from datetime import datetime
from typing import Any, Dict, Optional

__all__ = [
    'setup_logger',
    'get_logger',
    'establecer_configuracion_global',
    'normalizar_logs_config',
]

# Configuración global de logs (la establece la CLI al arrancar)
_logs_config_global: Optional[Dict[str, Any]] = None

_DEFAULT_LOG_CONFIG = {
    "ruta": "Logs",
    "auditoria": "_LOG_DE_AUDITORIA_YYYYMMDD.csv",
    "sistema": "_LOG_DE_ERRORES_YYYYMMDD.csv",
    "nivel": "INFO",
}

_FORMATO_CONSOLA = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
_FORMATO_CSV = '%(asctime)s,%(name)s,%(levelname)s,%(message)s'
_FORMATO_FECHA = '%Y-%m-%d %H:%M:%S'


def _reemplazar_fecha_en_nombre(nombre: str) -> str:
    """
    Reemplaza YYYYMMDD en el nombre del archivo con la fecha actual.

    Args:
        nombre: Nombre del archivo que puede contener YYYYMMDD

    Returns:
        Nombre con la fecha reemplazada
    """
    fecha_actual = datetime.now().strftime("%Y%m%d")
    return nombre.replace("YYYYMMDD", fecha_actual)


def normalizar_logs_config(logs_config: Optional[Dict[str, Any]]) -> Optional[Dict[str, Any]]:
    """
    Normaliza la sección ``logs`` de la configuración.

    Acepta las claves ``ruta``, ``auditoria``, ``sistema`` y ``nivel``. Si la
    sección no define ``ruta`` no se configuran archivos (solo consola).

    Args:
        logs_config: Sección logs de la configuración (o None)

    Returns:
        Diccionario con rutas completas de ``auditoria`` y ``sistema`` y el
        nivel, o None si no hay archivos que configurar
    """
    if not logs_config or not logs_config.get("ruta"):
        return None

    ruta = str(logs_config["ruta"])
    auditoria = logs_config.get("auditoria", _DEFAULT_LOG_CONFIG["auditoria"])
    sistema = logs_config.get("sistema", _DEFAULT_LOG_CONFIG["sistema"])
    return {
        "auditoria": os.path.normpath(os.path.join(ruta, _reemplazar_fecha_en_nombre(str(auditoria)))),
        "sistema": os.path.normpath(os.path.join(ruta, _reemplazar_fecha_en_nombre(str(sistema)))),
        "nivel": str(logs_config.get("nivel", _DEFAULT_LOG_CONFIG["nivel"])).upper(),
    }


def _agregar_handler_archivo(logger: logging.Logger, log_file: str, level: int,
                             formatter: logging.Formatter) -> None:
    """
    Agrega un FileHandler al logger si no existe uno para el mismo archivo.

    Args:
        logger: Logger a configurar
        log_file: Ruta completa del archivo
        level: Nivel mínimo del handler
        formatter: Formato de las líneas
    """
    ruta_abs = os.path.abspath(log_file)
    ya_existe = any(
        isinstance(h, logging.FileHandler) and os.path.abspath(h.baseFilename) == ruta_abs
        for h in logger.handlers
    )
    if ya_existe:
        return

    log_dir = os.path.dirname(ruta_abs)
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)

    file_handler = logging.FileHandler(ruta_abs, encoding='utf-8', mode='a')
    file_handler.setLevel(level)
    file_handler.setFormatter(formatter)
    logger.addHandler(file_handler)


def _configurar_handlers_archivo(logger: logging.Logger,
                                 logs_config: Optional[Dict[str, Any]]) -> None:
    """
    Reconfigura los handlers de archivo CSV de un logger.

    Args:
        logger: Logger a configurar
        logs_config: Configuración ya normalizada (o None para solo consola)
    """
    for handler in [h for h in logger.handlers if isinstance(h, logging.FileHandler)]:
        handler.flush()
        handler.close()
        logger.removeHandler(handler)

    if not logs_config:
        return

    formatter = logging.Formatter(_FORMATO_CSV, datefmt=_FORMATO_FECHA)
    _agregar_handler_archivo(logger, logs_config["auditoria"], logging.DEBUG, formatter)
    _agregar_handler_archivo(logger, logs_config["sistema"], logging.WARNING, formatter)


def setup_logger(name: str, level: Optional[int] = None,
                 log_file: Optional[str] = None,
                 logs_config: Optional[Dict[str, Any]] = None) -> logging.Logger:
    """
    Configura un logger con formato estándar.

    Args:
        name: Nombre del logger
        level: Nivel de logging (default: el de la configuración global o INFO)
        log_file: Ruta opcional para archivo de log adicional
        logs_config: Configuración normalizada (default: la global)

    Returns:
        Logger configurado

    Example:
        logger = setup_logger("KnowledgeBank")
        logger.info("Banco cargado")
    """
    if logs_config is None:
        logs_config = _logs_config_global

    if level is None:
        nombre_nivel = (logs_config or {}).get("nivel", _DEFAULT_LOG_CONFIG["nivel"])
        level = logging.getLevelName(nombre_nivel)
        if not isinstance(level, int):
            level = logging.INFO

    logger = logging.getLogger(name)
    logger.setLevel(level)
    logger.propagate = False

    tiene_consola = any(
        isinstance(h, logging.StreamHandler) and not isinstance(h, logging.FileHandler)
        for h in logger.handlers
    )
    if not tiene_consola:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(logging.DEBUG)
        console_handler.setFormatter(logging.Formatter(_FORMATO_CONSOLA, datefmt=_FORMATO_FECHA))
        logger.addHandler(console_handler)

    _configurar_handlers_archivo(logger, logs_config)

    if log_file:
        formatter = logging.Formatter(_FORMATO_CONSOLA, datefmt=_FORMATO_FECHA)
        _agregar_handler_archivo(logger, log_file, logging.DEBUG, formatter)

    return logger


def establecer_configuracion_global(logs_config: Optional[Dict[str, Any]]) -> None:
    """
    Establece la configuración global de logs para que todos los loggers la usen.

    Reconfigura además los loggers ya creados por el proyecto, de modo que
    los loggers de módulo obtenidos al importar también escriban en los
    archivos CSV.

    Args:
        logs_config: Sección ``logs`` sin normalizar (o None)
    """
    global _logs_config_global
    _logs_config_global = normalizar_logs_config(logs_config)

    for nombre in list(logging.Logger.manager.loggerDict):
        existente = logging.Logger.manager.loggerDict[nombre]
        if isinstance(existente, logging.Logger) and getattr(existente, "_era_logger", False):
            setup_logger(nombre)


def get_logger(name: str, logs_config: Optional[Dict[str, Any]] = None) -> logging.Logger:
    """
    Obtiene un logger existente o crea uno nuevo.

    Args:
        name: Nombre del logger (por componente: "KnowledgeBank", "EraController"…)
        logs_config: Configuración normalizada opcional

    Returns:
        Logger configurado
    """
    logger = logging.getLogger(name)
    if not logger.handlers or logs_config is not None:
        logger = setup_logger(name, logs_config=logs_config)
    logger._era_logger = True  # type: ignore[attr-defined]
    return logger
