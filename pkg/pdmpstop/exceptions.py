#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Hata sınıfları. Her sınıf CLI çıkış kodunu taşır.
"""


class PdmpStopError(Exception):
    """Tüm paket hatalarının temel sınıfı."""
    exit_code = 3


class ConfigError(PdmpStopError):
    """Geçersiz konfigürasyon veya parametre."""
    exit_code = 2


class DomainError(PdmpStopError):
    """Fonksiyon tanım kümesi dışında çağrı (ör. t > t*(x))."""
    exit_code = 3


class AbsentRowError(PdmpStopError):
    """Ziyaret edilmemiş (ulaşılamayan) geçiş satırı."""
    exit_code = 3


class UnsupportedModelError(PdmpStopError):
    """Model istenen işlemi desteklemiyor."""
    exit_code = 3


class NumericError(PdmpStopError):
    """Sayısal değişmez ihlali (ör. Lloyd enerjisi arttı)."""
    exit_code = 3


class SchemaError(PdmpStopError):
    """Bozuk, eksik veya doğrulamayı geçemeyen artefakt dosyası."""
    exit_code = 2


class SchemaVersionError(SchemaError):
    """Desteklenmeyen schema_version."""


class ArtifactIOError(PdmpStopError):
    """Dosya okuma/yazma hatası."""
    exit_code = 4
