# coding: utf-8
"""Componentes core del módulo EraNavegacion."""

from EraNavegacion.core.controller import EraController, decide
from EraNavegacion.core.dynamics import TransitionModel, fit_dynamics, lyapunov_delta, predict, project_spectral
from EraNavegacion.core.encoder import EncoderParams, encode
from EraNavegacion.core.features import FeatureScales, d_phys_env, featurize
from EraNavegacion.core.knowledge_bank import KnowledgeBank
from EraNavegacion.core.settings import (
    BankSettings,
    ControllerConfig,
    EncoderShape,
    EpisodeConfig,
    HarnessSettings,
    PretrainHyper,
    RetrievalParams,
    Settings,
    load_settings,
)

__all__ = [
    "EraController",
    "decide",
    "TransitionModel",
    "fit_dynamics",
    "lyapunov_delta",
    "predict",
    "project_spectral",
    "EncoderParams",
    "encode",
    "FeatureScales",
    "d_phys_env",
    "featurize",
    "KnowledgeBank",
    "BankSettings",
    "ControllerConfig",
    "EncoderShape",
    "EpisodeConfig",
    "HarnessSettings",
    "PretrainHyper",
    "RetrievalParams",
    "Settings",
    "load_settings",
]
