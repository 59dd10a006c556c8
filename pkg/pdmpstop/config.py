#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Konfigürasyon ayarları ve sabitler.
Varsayılan değerler modül seviyesinde tutulur, bir koşunun tüm ayarları
ise tek bir JSON belgesinden RunConfig olarak okunur.
"""

import os
import json
from pathlib import Path
from dataclasses import dataclass, field, asdict, fields, is_dataclass
from typing import Any, Dict, Optional, Tuple

from dotenv import load_dotenv

from .exceptions import ConfigError

load_dotenv()

TOOL_VERSION = "1.0.0"

# ================== GENEL ==================
SEED = 20100601
N_JUMPS = 10
X0 = 0.0
THREADS = 0  # 0 = otomatik (os.cpu_count)

# Örnek model (sabit hızla 1'e giden süreç, λ(x)=βx^α, Q=U[0,1/2])
MODEL_NAME = "example"
EXAMPLE_V = 1.0
EXAMPLE_ALPHA = 1.0
EXAMPLE_RATE_BETA = 3.0

# ================== KUANTİZASYON ==================
POINTS_PER_STAGE = 100
TRAIN_SAMPLES = 100_000
WEIGHT_SAMPLES = 100_000
EVAL_SAMPLES = 100_000
NORM_P = 2.0
COMPONENT_WEIGHTS = (1.0, 1.0)
LLOYD_MAX_ITER = 50
LLOYD_REL_TOL = 1e-6
MIN_SAMPLES_PER_POINT = 100
PROJECT_CHUNK = 4096
TIE_RTOL = 1e-12  # eşit uzaklık toleransı (en küçük indeks seçilir)
ROW_SUM_TOL = 1e-12

# ================== DP / ZAMAN IZGARASI ==================
DELTA = 0.083

# ================== DURDURMA KURALI ==================
BETA_A = 0.5
N_MC = 100_000
MIN_N_MC = 1000
MC_BLOCK_SIZE = 10_000

# ================== SAYISAL TOLERANSLAR ==================
QUAD_TOL = 1e-8
QUAD_LIMIT = 2 ** 14
ROOT_XTOL = 1e-10
GOLDEN_TOL = 1e-8
SUP_GRID_POINTS = 1000
ORACLE_STATE_MESH = 2048
ORACLE_TIME_MESH = 1024
ETA_CLAMP = 1e-6  # uygun olmayan η, min Δ·(1−ETA_CLAMP) değerine çekilir

# ================== DOSYA / ŞEMA ==================
GRID_SCHEMA_VERSION = 1
VALUES_SCHEMA_VERSION = 1
DATA_DIR = Path(os.environ.get("PDMPSTOP_DATA_DIR", Path(__file__).resolve().parent.parent / "data"))

TRAJECTORY_CSV_COLUMNS = ["traj_id", "k", "Z", "S", "T", "boundary_forced"]
TABLE1_COLUMNS = ["Pt", "QE", "Delta", "V0_hat", "V0_bar", "B1", "B2", "B3"]
EVALUATION_COLUMNS = ["n_mc", "V_bar_0", "stderr", "E_sup", "B1", "beta", "feasible"]
DEBUG_DUMP_COLUMNS = ["traj_id", "stop_stage", "tau", "reward", "reason"]
ORACLE_MESH_COLUMNS = ["k", "x", "v_k(x)"]
SVG_HASH_SALT = "pdmpstop"
SVG_DEFAULT_TRAJECTORIES = 2

# ---- LOG AYARLARI ----
PRINT_PREFIX = "🧭"
VERBOSE = False

# ===== TABLO-1 MERDİVENİ (Pt → Δ ve referans değerler) =====
TABLE1_PRESETS = {
    10: {"points_per_stage": 10, "delta": 0.151},
    50: {"points_per_stage": 50, "delta": 0.100},
    100: {"points_per_stage": 100, "delta": 0.083},
    500: {"points_per_stage": 500, "delta": 0.056},
    900: {"points_per_stage": 900, "delta": 0.049},
}

TABLE1_REFERENCE = {
    10: {"QE": 0.0943, "V0_hat": 0.7760, "V0_bar": 0.8173, "B1": 0.1705, "B2": 74.64, "B3": 897.0},
    50: {"QE": 0.0418, "V0_hat": 0.8298, "V0_bar": 0.8785, "B1": 0.1093, "B2": 43.36, "B3": 511.5},
    100: {"QE": 0.0289, "V0_hat": 0.8242, "V0_bar": 0.8850, "B1": 0.1028, "B2": 34.15, "B3": 400.3},
    500: {"QE": 0.0133, "V0_hat": 0.8432, "V0_bar": 0.8899, "B1": 0.0989, "B2": 21.03, "B3": 243.1},
    900: {"QE": 0.0102, "V0_hat": 0.8514, "V0_bar": 0.8968, "B1": 0.0910, "B2": 17.98, "B3": 206.9},
}
E_SUP_REFERENCE = 0.9878


# ================== RUN CONFIG ==================
@dataclass
class ModelSection:
    """Model bölümü: örnek model parametreleri veya eklenti sınıfı."""
    name: str = MODEL_NAME
    v: float = EXAMPLE_V
    alpha: float = EXAMPLE_ALPHA
    rate_beta: float = EXAMPLE_RATE_BETA
    x0: float = X0
    plugin: Optional[str] = None
    params: Dict[str, Any] = field(default_factory=dict)


@dataclass
class QuantizationSection:
    points_per_stage: int = POINTS_PER_STAGE
    train_samples: int = TRAIN_SAMPLES
    weight_samples: int = WEIGHT_SAMPLES
    eval_samples: int = EVAL_SAMPLES
    p: float = NORM_P
    component_weights: Tuple[float, float] = COMPONENT_WEIGHTS


@dataclass
class DpSection:
    delta: float = DELTA


@dataclass
class StoppingSection:
    a: float = BETA_A
    beta_override: Optional[float] = None
    n_mc: int = N_MC
    debug_dump: bool = False


@dataclass
class BoundsSection:
    enable_b2: bool = True
    enable_b3: bool = True
    enable_oracle: bool = True
    sharpen_with_flow: bool = False


@dataclass
class RunConfig:
    """
    Bir koşunun tam konfigürasyonu.

    Tek bir JSON belgesinden okunur; bilinmeyen anahtarlar reddedilir.
    """
    model: ModelSection = field(default_factory=ModelSection)
    N: int = N_JUMPS
    quantization: QuantizationSection = field(default_factory=QuantizationSection)
    dp: DpSection = field(default_factory=DpSection)
    stopping: StoppingSection = field(default_factory=StoppingSection)
    bounds: BoundsSection = field(default_factory=BoundsSection)
    seed: int = SEED
    out_dir: str = str(DATA_DIR)
    threads: Optional[int] = None
    trajectories: int = SVG_DEFAULT_TRAJECTORIES

    def validate(self) -> "RunConfig":
        """Değişmezleri kontrol et, ihlalde ConfigError fırlat."""
        q = self.quantization
        checks = [
            (self.N >= 1, "N ≥ 1 olmalı"),
            (q.points_per_stage >= 1, "points_per_stage pozitif olmalı"),
            (q.train_samples >= 1 and q.weight_samples >= 1 and q.eval_samples >= 1,
             "örnek sayıları pozitif olmalı"),
            (q.p >= 1, "p ≥ 1 olmalı"),
            (len(q.component_weights) == 2 and all(w > 0 for w in q.component_weights),
             "component_weights iki pozitif sayı olmalı"),
            (self.dp.delta > 0, "delta > 0 olmalı"),
            (0 < self.stopping.a < 1, "0 < a < 1 olmalı"),
            (self.stopping.n_mc >= 1, "n_mc pozitif olmalı"),
            (self.stopping.beta_override is None or self.stopping.beta_override >= 0,
             "beta_override ≥ 0 olmalı"),
            (0 <= self.seed < 2 ** 64, "seed u64 aralığında olmalı"),
            (self.trajectories >= 0, "trajectories negatif olamaz"),
            (self.threads is None or self.threads >= 0, "threads negatif olamaz"),
            (self.model.name in ("example", "plugin"), f"bilinmeyen model: {self.model.name}"),
            (self.model.name != "plugin" or bool(self.model.plugin),
             "plugin modeli için 'plugin' alanı gerekli"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        return self

    def to_dict(self) -> Dict[str, Any]:
        """Dict'e dönüştür."""
        data = asdict(self)
        data["quantization"]["component_weights"] = list(self.quantization.component_weights)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        """
        Dict'ten RunConfig oluştur.

        Args:
            data: JSON'dan okunmuş sözlük

        Returns:
            RunConfig: Doğrulanmış konfigürasyon
        """
        cfg = _build_section(cls, data, "config")
        cfg.quantization.component_weights = tuple(float(w) for w in cfg.quantization.component_weights)
        return cfg.validate()


def _build_section(section_cls, data: Any, path: str):
    """İç içe dataclass bölümünü bilinmeyen anahtar kontrolüyle kur."""
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: nesne bekleniyordu")
    known = {f.name: f for f in fields(section_cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f"{path}: bilinmeyen anahtar(lar): {', '.join(unknown)}")
    kwargs = {}
    defaults = section_cls()
    for name, value in data.items():
        default_value = getattr(defaults, name)
        if is_dataclass(default_value):
            kwargs[name] = _build_section(type(default_value), value, f"{path}.{name}")
        else:
            kwargs[name] = value
    return section_cls(**kwargs)


def load_run_config(path: Optional[str]) -> RunConfig:
    """
    JSON konfigürasyon dosyasını oku.

    Args:
        path: Dosya yolu; None ise varsayılanlar kullanılır

    Returns:
        RunConfig: Doğrulanmış konfigürasyon
    """
    if path is None:
        return RunConfig().validate()
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"konfigürasyon bulunamadı: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"konfigürasyon JSON hatası: {e}")
    return RunConfig.from_dict(data)


def apply_preset(cfg: RunConfig, pt: int) -> RunConfig:
    """Tablo-1 merdiveninden bir Pt ön ayarını uygula."""
    if pt not in TABLE1_PRESETS:
        raise ConfigError(f"bilinmeyen preset: {pt} (seçenekler: {sorted(TABLE1_PRESETS)})")
    preset = TABLE1_PRESETS[pt]
    cfg.quantization.points_per_stage = preset["points_per_stage"]
    cfg.dp.delta = preset["delta"]
    return cfg.validate()


def resolve_threads(cli_threads: Optional[int], cfg_threads: Optional[int] = None) -> int:
    """
    İş parçacığı sayısını belirle: CLI > config > PDMPSTOP_THREADS > otomatik.

    Returns:
        int: Pozitif iş parçacığı sayısı
    """
    for candidate in (cli_threads, cfg_threads):
        if candidate is not None:
            n = int(candidate)
            break
    else:
        env = os.environ.get("PDMPSTOP_THREADS")
        try:
            n = int(env) if env else THREADS
        except ValueError:
            raise ConfigError(f"PDMPSTOP_THREADS geçersiz: {env}")
    if n < 0:
        raise ConfigError("threads negatif olamaz")
    return n if n > 0 else (os.cpu_count() or 1)
