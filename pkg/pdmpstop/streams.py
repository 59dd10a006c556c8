#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Tekrarlanabilir rastgele sayı akışları.

Bir akışın kimliği (master_seed, purpose_tag, index) üçlüsüdür. Üçlü
SHA-256 ile özetlenip numpy SeedSequence'e verilir; aynı kimlik her
makinede aynı sayı dizisini üretir.
"""

import hashlib
from dataclasses import dataclass, replace
from typing import Iterator, Tuple

import numpy as np

from . import config
from .exceptions import ConfigError


@dataclass(frozen=True)
class RngStream:
    """Rastgele akış kimliği."""
    master_seed: int
    purpose_tag: str
    index: int = 0

    def __post_init__(self):
        if not (0 <= int(self.master_seed) < 2 ** 64):
            raise ConfigError(f"master_seed u64 olmalı: {self.master_seed}")
        if not (0 <= int(self.index) < 2 ** 64):
            raise ConfigError(f"index u64 olmalı: {self.index}")

    def child(self, index: int) -> "RngStream":
        """Aynı amaç etiketiyle başka bir indeks."""
        return replace(self, index=int(index))

    def seed_words(self) -> Tuple[int, ...]:
        """Kimliğin SHA-256 özetinden 8 adet 32-bit kelime."""
        key = f"{int(self.master_seed)}|{self.purpose_tag}|{int(self.index)}".encode("utf-8")
        digest = hashlib.sha256(key).digest()
        return tuple(int(w) for w in np.frombuffer(digest, dtype="<u4"))

    def generator(self) -> np.random.Generator:
        """Bu kimliğe ait yeni bir numpy Generator."""
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(self.seed_words()))))


def block_streams(master_seed: int, purpose_tag: str, n: int,
                  block_size: int = config.MC_BLOCK_SIZE) -> Iterator[Tuple[RngStream, int]]:
    """
    n örneği sabit boyutlu bloklara böl; blok b için (seed, tag, b) akışı.

    Args:
        master_seed: Ana tohum
        purpose_tag: Amaç etiketi ("train", "weights", "eval", ...)
        n: Toplam örnek sayısı
        block_size: Blok boyutu

    Yields:
        Tuple: (akış, blok boyutu)
    """
    base = RngStream(master_seed, purpose_tag, 0)
    b = 0
    remaining = int(n)
    while remaining > 0:
        size = min(block_size, remaining)
        yield base.child(b), size
        remaining -= size
        b += 1
