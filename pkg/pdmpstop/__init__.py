#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
PDMP'ler için sayısal optimal durdurma: gömülü zincirin kuantizasyonu,
geriye doğru dinamik programlama, ε-optimal durdurma kuralı ve hata sınırları.
"""

from .config import TOOL_VERSION as __version__

__all__ = ["__version__"]
