#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
PDMP model paketi.
"""

import importlib

from ..config import ModelSection
from ..exceptions import ConfigError
from .base import PdmpModel, ModelConstants
from .example import ExampleModel
from .deterministic import DeterministicResetModel


def load_plugin(spec: str, params=None) -> PdmpModel:
    """
    "paket.modul:SinifAdi" biçimindeki eklenti modelini yükle.

    Args:
        spec: Modül ve sınıf yolu
        params: Sınıf kurucusuna verilecek parametreler

    Returns:
        PdmpModel: Model örneği
    """
    module_name, sep, class_name = spec.partition(":")
    if not sep or not module_name or not class_name:
        raise ConfigError(f"eklenti 'modul:Sinif' biçiminde olmalı: {spec}")
    try:
        module = importlib.import_module(module_name)
    except ImportError as e:
        raise ConfigError(f"eklenti modülü yüklenemedi: {module_name} ({e})")
    cls = getattr(module, class_name, None)
    if cls is None or not isinstance(cls, type) or not issubclass(cls, PdmpModel):
        raise ConfigError(f"{spec} bir PdmpModel alt sınıfı değil")
    return cls(**(params or {}))


def make_example_model(v: float, alpha: float, rate_beta: float) -> PdmpModel:
    """Örnek modeli parametrelerle kur (geçersiz işaretler DomainError)."""
    return ExampleModel(v, alpha, rate_beta)


def build_model(section: ModelSection) -> PdmpModel:
    """Konfigürasyon bölümünden modeli kur."""
    if section.name == "example":
        return make_example_model(section.v, section.alpha, section.rate_beta)
    if section.name == "plugin":
        return load_plugin(section.plugin, section.params)
    raise ConfigError(f"bilinmeyen model: {section.name}")


__all__ = [
    "PdmpModel",
    "ModelConstants",
    "ExampleModel",
    "DeterministicResetModel",
    "build_model",
    "make_example_model",
    "load_plugin",
]
