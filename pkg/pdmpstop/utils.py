#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Yardımcı fonksiyonlar ve utility modülü.
"""

import sys
import math
import datetime as dt
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, List, Sequence

import numpy as np

from . import config


def log(*args):
    """Log mesajı yazdır ve hemen flush yap."""
    print(config.PRINT_PREFIX, *args)
    sys.stdout.flush()


def vlog(*args):
    """Sadece VERBOSE modunda log yaz."""
    if config.VERBOSE:
        log(*args)


def now_utc():
    """Şu anki UTC zamanını döndür."""
    return dt.datetime.now(dt.timezone.utc)


def fmt_num(x: float) -> str:
    """Float değerini en kısa geri-dönüşümlü ondalık string olarak döndür."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def clip_value(value: float, lower: float, upper: float) -> float:
    """Değeri belirli bir aralıkta kırp (clip)."""
    return max(lower, min(upper, value))


def chunked(seq, n):
    """Diziyi n boyutlu parçalara böl."""
    for i in range(0, len(seq), n):
        yield seq[i:i + n]


def as_float_array(x) -> np.ndarray:
    """Skaler veya diziyi 1-boyutlu float64 dizisine çevir."""
    return np.atleast_1d(np.asarray(x, dtype=np.float64))


def parallel_map(fn: Callable[[Any], Any], items: Sequence[Any], threads: int = 1) -> List[Any]:
    """
    fn'i öğeler üzerinde iş parçacığı havuzunda çalıştır.

    Sonuçlar her zaman girdi sırasıyla döner, böylece indirgemeler
    iş parçacığı sayısından bağımsızdır.

    Args:
        fn: Öğe başına çalışacak fonksiyon
        items: Öğeler
        threads: İş parçacığı sayısı (≤1 ise seri)

    Returns:
        List: Sıralı sonuçlar
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(fn, items))


def ordered_mean(block_values: Iterable[np.ndarray]):
    """
    Blok halinde gelen örneklerin ortalama ve standart hatasını
    sabit blok sırasıyla hesapla.

    Returns:
        Tuple: (ortalama, standart hata, örnek sayısı)
    """
    blocks = [np.asarray(b, dtype=np.float64) for b in block_values]
    n = int(sum(b.size for b in blocks))
    if n == 0:
        return float("nan"), float("nan"), 0
    total = 0.0
    for b in blocks:
        total += float(np.sum(b))
    mean = total / n
    sq = 0.0
    for b in blocks:
        sq += float(np.sum((b - mean) ** 2))
    stderr = math.sqrt(sq / (n - 1) / n) if n > 1 else 0.0
    return mean, stderr, n
