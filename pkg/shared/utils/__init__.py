# coding: utf-8
"""
Módulo de utilidades compartidas.
Contiene logger, validators, helpers, file_helpers, excepciones personalizadas y config_helper.
"""

from .logger import setup_logger, get_logger, establecer_configuracion_global
from .validators import (
    validate_finite,
    validate_positive,
    validate_in_range,
    validate_integer,
    validate_choice,
)
from .helpers import parse_bool, percentiles_ms, safe_mean
from .config_helper import load_config_from_param, apply_env_overrides, get_section
from .exceptions import (
    EraError,
    ConfigurationError,
    SimulationError,
    EpisodeAbortedError,
    EncoderError,
    TrainingDivergenceError,
    DynamicsFitError,
    BankError,
    DuplicateEntryError,
    UnknownEntryError,
    InvalidEntryError,
    EmptyBankError,
    StaleIndexError,
    IndexBuildError,
    BankFormatError,
    DatasetError,
    ArtifactError,
)

__all__ = [
    'setup_logger', 'get_logger', 'establecer_configuracion_global',
    'validate_finite', 'validate_positive', 'validate_in_range',
    'validate_integer', 'validate_choice',
    'parse_bool', 'percentiles_ms', 'safe_mean',
    'load_config_from_param', 'apply_env_overrides', 'get_section',
    'EraError', 'ConfigurationError', 'SimulationError', 'EpisodeAbortedError',
    'EncoderError', 'TrainingDivergenceError', 'DynamicsFitError',
    'BankError', 'DuplicateEntryError', 'UnknownEntryError', 'InvalidEntryError',
    'EmptyBankError', 'StaleIndexError', 'IndexBuildError', 'BankFormatError',
    'DatasetError', 'ArtifactError',
]
