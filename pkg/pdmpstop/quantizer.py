#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Gömülü zincir Θ_n = (Z_n, S_n) için aşama bazlı kuantizasyon ızgaraları.

Lloyd (k-means) ile eğitim, en yakın komşu izdüşümü (eşitlikte en küçük
indeks), geçiş ağırlıkları, L^p kuantizasyon hataları ve JSON kalıcılığı.
"""

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from . import config
from .exceptions import (AbsentRowError, ArtifactIOError, ConfigError, NumericError,
                         SchemaError, SchemaVersionError)
from .models.base import PdmpModel
from .simulation import simulate_blocks
from .streams import RngStream
from .utils import log, vlog, parallel_map


@dataclass
class StageGrid:
    """
    Bir aşamanın kod kitabı. Noktalar (z, s) sözlük sırasındadır.

    z_values, kod kitabındaki farklı z bileşenleridir (Γ^Z_n); z_classes
    her noktanın z_values içindeki sınıf indeksidir.
    """
    stage: int
    codebook: np.ndarray
    marginal_weights: np.ndarray
    z_values: np.ndarray = field(init=False)
    z_classes: np.ndarray = field(init=False)

    def __post_init__(self):
        self.codebook = np.asarray(self.codebook, dtype=np.float64).reshape(-1, 2)
        self.marginal_weights = np.asarray(self.marginal_weights, dtype=np.float64)
        self.z_values, self.z_classes = np.unique(self.codebook[:, 0], return_inverse=True)
        self.z_classes = self.z_classes.reshape(-1)

    @classmethod
    def from_codebook(cls, stage: int, codebook, marginal_weights=None) -> "StageGrid":
        """Verilen sırayla ızgara kur (sıralama yapılmaz)."""
        codebook = np.asarray(codebook, dtype=np.float64).reshape(-1, 2)
        if marginal_weights is None:
            marginal_weights = np.full(len(codebook), 1.0 / max(len(codebook), 1))
        return cls(stage, codebook, marginal_weights)

    @property
    def size(self) -> int:
        return len(self.codebook)

    @property
    def n_classes(self) -> int:
        return len(self.z_values)

    def class_weights(self) -> np.ndarray:
        """Her z-sınıfının toplam marjinal ağırlığı."""
        return np.bincount(self.z_classes, weights=self.marginal_weights, minlength=self.n_classes)

    def to_dict(self) -> Dict[str, Any]:
        return {"stage": self.stage, "codebook": self.codebook.tolist(),
                "weights": self.marginal_weights.tolist()}


@dataclass
class ErrorTable:
    """Aşama bazlı e_Z(n), e_S(n), e_Θ(n) tahminleri."""
    e_Z: np.ndarray
    e_S: np.ndarray
    e_Theta: np.ndarray
    eval_samples: int = 0

    def __post_init__(self):
        self.e_Z = np.asarray(self.e_Z, dtype=np.float64)
        self.e_S = np.asarray(self.e_S, dtype=np.float64)
        self.e_Theta = np.asarray(self.e_Theta, dtype=np.float64)

    @property
    def qe(self) -> float:
        """QE = max_n e_Θ(n)."""
        return float(np.max(self.e_Theta))

    @classmethod
    def zeros(cls, N: int) -> "ErrorTable":
        z = np.zeros(N + 1)
        return cls(z, z.copy(), z.copy(), 0)

    def to_dict(self) -> Dict[str, Any]:
        return {"e_Z": self.e_Z.tolist(), "e_S": self.e_S.tolist(),
                "e_Theta": self.e_Theta.tolist(), "eval_samples": int(self.eval_samples)}


@dataclass
class QuantizationGridSet:
    """
    0..N aşamalarının ızgaraları, geçiş ağırlıkları ve hata tablosu.

    transitions[k] (k ≥ 1), aşama k−1'in z-sınıflarından aşama k'nin kod
    kitabı indekslerine (c_{k−1} × m_k) olasılık matrisidir; visits[k] her
    satırın ziyaret sayısıdır. transitions[0] ve visits[0] None'dır.
    """
    model_tag: str
    N: int
    x0: float
    p: float
    component_weights: Tuple[float, float]
    grids: List[StageGrid]
    transitions: List[Optional[np.ndarray]] = field(default_factory=list)
    visits: List[Optional[np.ndarray]] = field(default_factory=list)
    errors: Optional[ErrorTable] = None
    manifest: Dict[str, Any] = field(default_factory=dict)

    @property
    def has_weights(self) -> bool:
        return len(self.transitions) == self.N + 1 and all(
            self.transitions[k] is not None for k in range(1, self.N + 1))

    def row(self, k: int, z_class: int) -> np.ndarray:
        """
        π_k(z → ·) satırı.

        Args:
            k: Hedef aşama (1..N)
            z_class: Aşama k−1'deki z-sınıfı

        Returns:
            np.ndarray: Aşama k kod kitabı üzerinde olasılık vektörü
        """
        if not self.has_weights:
            raise AbsentRowError("geçiş ağırlıkları henüz tahmin edilmedi")
        if not (1 <= k <= self.N) or not (0 <= z_class < len(self.visits[k])):
            raise AbsentRowError(f"aşama {k}, z-sınıfı {z_class} yok")
        if self.visits[k][z_class] <= 0:
            raise AbsentRowError(f"aşama {k}, z-sınıfı {z_class} ziyaret edilmemiş")
        return self.transitions[k][z_class]

    def reachable(self, k: int) -> np.ndarray:
        """Aşama k'nin (k < N) ziyaret edilmiş z-sınıfları (maske)."""
        return np.asarray(self.visits[k + 1]) > 0

    def class_of(self, k: int, z: float) -> int:
        """z durumunun aşama k'deki z-sınıfı (tam eşleşme)."""
        zv = self.grids[k].z_values
        i = int(np.searchsorted(zv, z))
        if i >= len(zv) or zv[i] != z:
            raise AbsentRowError(f"z={z}, aşama {k} ızgarasında değil")
        return i

    def with_errors(self, errors: ErrorTable) -> "QuantizationGridSet":
        return replace(self, errors=errors)

    def equals(self, other: "QuantizationGridSet") -> bool:
        """Alan alan tam hassasiyetle eşitlik."""
        if (self.model_tag, self.N, self.x0, self.p, tuple(self.component_weights)) != \
                (other.model_tag, other.N, other.x0, other.p, tuple(other.component_weights)):
            return False
        if len(self.grids) != len(other.grids) or self.manifest != other.manifest:
            return False
        for a, b in zip(self.grids, other.grids):
            if a.stage != b.stage or not np.array_equal(a.codebook, b.codebook) \
                    or not np.array_equal(a.marginal_weights, b.marginal_weights):
                return False
        for seq_a, seq_b in ((self.transitions, other.transitions), (self.visits, other.visits)):
            if len(seq_a) != len(seq_b):
                return False
            for a, b in zip(seq_a, seq_b):
                if (a is None) != (b is None) or (a is not None and not np.array_equal(a, b)):
                    return False
        if (self.errors is None) != (other.errors is None):
            return False
        if self.errors is not None:
            return self.errors.to_dict() == other.errors.to_dict()
        return True


# ================== İZDÜŞÜM ==================

def _weighted_power_dist(points: np.ndarray, codebook: np.ndarray, p: float,
                         weights: Sequence[float]) -> np.ndarray:
    """Σ_c w_c |x_c − y_c|^p matrisi, (n, m)."""
    d = np.zeros((len(points), len(codebook)))
    for c in range(2):
        d += weights[c] * np.abs(points[:, c, None] - codebook[None, :, c]) ** p
    return d


def project_batch(grid: StageGrid, points, p: float = config.NORM_P,
                  component_weights: Sequence[float] = config.COMPONENT_WEIGHTS) -> np.ndarray:
    """
    Noktaları en yakın kod kitabı noktasına izdüşür.

    Uzaklık eşitliğinde (göreli TIE_RTOL içinde) en küçük indeks seçilir.

    Args:
        grid: Aşama ızgarası
        points: (n, 2) noktalar
        p: Norm derecesi
        component_weights: (w_Z, w_S)

    Returns:
        np.ndarray: Kod kitabı indeksleri
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    codebook = grid.codebook
    out = np.empty(len(points), dtype=np.int64)
    for start in range(0, len(points), config.PROJECT_CHUNK):
        block = points[start:start + config.PROJECT_CHUNK]
        d = _weighted_power_dist(block, codebook, p, component_weights)
        dmin = d.min(axis=1, keepdims=True)
        ties = d <= dmin + config.TIE_RTOL * dmin
        out[start:start + len(block)] = np.argmax(ties, axis=1)
    return out


def project(grid: StageGrid, point, p: float = config.NORM_P,
            component_weights: Sequence[float] = config.COMPONENT_WEIGHTS) -> int:
    """Tek noktanın kod kitabı indeksi."""
    return int(project_batch(grid, np.asarray(point, dtype=np.float64).reshape(1, 2),
                             p, component_weights)[0])


# ================== LLOYD ==================

def _spread_init(X: np.ndarray, m: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """k-means++ tarzı açgözlü yayılım ile başlangıç merkezleri."""
    centers = np.empty((m, 2))
    centers[0] = X[rng.integers(len(X))]
    dist = np.sum(np.abs(X - centers[0]) ** p, axis=1)
    for j in range(1, m):
        cum = np.cumsum(dist)
        idx = min(int(np.searchsorted(cum, rng.random() * cum[-1], side="right")), len(X) - 1)
        centers[j] = X[idx]
        dist = np.minimum(dist, np.sum(np.abs(X - centers[j]) ** p, axis=1))
    return centers


def lloyd(cloud: np.ndarray, m: int, p: float, component_weights: Sequence[float],
          rng: np.random.Generator, max_iter: int = config.LLOYD_MAX_ITER,
          rel_tol: float = config.LLOYD_REL_TOL):
    """
    Toplu Lloyd iterasyonları.

    Args:
        cloud: (n, 2) örnek bulutu
        m: Nokta sayısı (bulutun farklı nokta sayısından küçük)
        p: Norm derecesi
        component_weights: (w_Z, w_S)
        rng: Başlangıç için üreteç

    Returns:
        Tuple: (kod kitabı, iterasyon sayısı, son bozulma, uyarılar)
    """
    scale = np.asarray(component_weights, dtype=np.float64) ** (1.0 / p)
    X = cloud * scale
    centers = _spread_init(X, m, p, rng)
    warnings = []
    prev = None
    distortion = float("nan")
    iterations = 0
    for iterations in range(1, max_iter + 1):
        d, labels = cKDTree(centers).query(X, k=1, p=p)
        distortion = float(np.mean(d ** p))
        if prev is not None:
            if distortion > prev * (1.0 + 1e-12):
                if p == 2:
                    raise NumericError(f"Lloyd bozulması arttı: {prev} → {distortion}")
                if not warnings:
                    warnings.append(f"p={p}: Lloyd bozulması monoton değil")
            if prev == 0 or abs(prev - distortion) / prev < rel_tol:
                break
        prev = distortion
        counts = np.bincount(labels, minlength=m)
        nz = counts > 0
        for c in range(2):
            sums = np.bincount(labels, weights=X[:, c], minlength=m)
            centers[nz, c] = sums[nz] / counts[nz]
    return centers / scale, iterations, distortion, warnings


def _train_stage(cloud: np.ndarray, stage: int, m: int, p: float,
                 component_weights: Sequence[float], stream: RngStream):
    support = np.unique(cloud, axis=0)
    warnings = []
    if len(support) <= m:
        if len(support) < m:
            warnings.append(f"aşama {stage}: ızgara {m} yerine {len(support)} farklı noktaya küçüldü")
        return support, 0, 0.0, warnings
    codebook, iterations, distortion, warnings = lloyd(
        cloud, m, p, component_weights, stream.child(stage).generator())
    unique = np.unique(codebook, axis=0)  # sözlük sırası (z, s)
    if len(unique) < m:
        warnings.append(f"aşama {stage}: çakışan merkezler birleşti ({len(unique)} nokta)")
    return unique, iterations, distortion, warnings


def train_grids(model: PdmpModel, x0: float, N: int, points_per_stage: int, train_samples: int,
                p: float, stream: RngStream,
                component_weights: Sequence[float] = config.COMPONENT_WEIGHTS,
                threads: int = 1) -> QuantizationGridSet:
    """
    Her aşama için Lloyd ile kuantizasyon ızgarası eğit.

    Args:
        model: PDMP modeli
        x0: Başlangıç durumu
        N: Ufuk
        points_per_stage: Aşama başına nokta sayısı
        train_samples: Eğitim zinciri sayısı (≥ 100·points_per_stage)
        p: Norm derecesi (≥ 1)
        stream: Eğitim akışı (etiket "train")
        component_weights: (w_Z, w_S)
        threads: İş parçacığı sayısı

    Returns:
        QuantizationGridSet: Ağırlıkları henüz tahmin edilmemiş ızgaralar
    """
    if points_per_stage < 1:
        raise ConfigError("points_per_stage ≥ 1 olmalı")
    if train_samples < config.MIN_SAMPLES_PER_POINT * points_per_stage:
        raise ConfigError(f"train_samples ≥ {config.MIN_SAMPLES_PER_POINT}·points_per_stage olmalı")
    if p < 1:
        raise ConfigError(f"p ≥ 1 olmalı: {p}")
    log(f"🧮 Izgara eğitimi: N={N}, Pt={points_per_stage}, {train_samples} örnek")
    chains = simulate_blocks(model, x0, N, train_samples, stream, threads)
    init_stream = RngStream(stream.master_seed, "lloyd-init")

    def fit(stage: int):
        return _train_stage(chains.theta(stage), stage, points_per_stage, p, component_weights,
                            init_stream)

    fitted = parallel_map(fit, list(range(1, N + 1)), threads)

    grids = [StageGrid(0, np.array([[x0, 0.0]]), np.array([1.0]))]
    iterations, distortions, warnings = [0], [0.0], []
    for stage, (codebook, its, dist, warns) in enumerate(fitted, start=1):
        grid = StageGrid(stage, codebook, np.zeros(len(codebook)))
        idx = project_batch(grid, chains.theta(stage), p, component_weights)
        grid.marginal_weights = np.bincount(idx, minlength=grid.size) / len(idx)
        grids.append(grid)
        iterations.append(int(its))
        distortions.append(float(dist))
        for w in warns:
            log(f"⚠️ {w}")
        warnings.extend(warns)
        vlog(f"   aşama {stage}: {grid.size} nokta, {its} iterasyon, bozulma={dist:.3e}")

    manifest = {
        "seed": int(stream.master_seed),
        "train_samples": int(train_samples),
        "points_per_stage": int(points_per_stage),
        "lloyd_iterations": iterations,
        "lloyd_distortion": distortions,
        "warnings": warnings,
    }
    return QuantizationGridSet(model.tag, N, float(x0), float(p), tuple(component_weights),
                               grids, transitions=[None] * (N + 1), visits=[None] * (N + 1),
                               manifest=manifest)


# ================== AĞIRLIKLAR VE HATALAR ==================

def estimate_transition_weights(model: PdmpModel, grids: QuantizationGridSet, weight_samples: int,
                                stream: RngStream, threads: int = 1) -> QuantizationGridSet:
    """
    Taze zincirlerle π_k(z → j) geçiş ağırlıklarını ve marjinal ağırlıkları tahmin et.

    Satırlar aşama k−1 noktasının z bileşeni sınıfına göre anahtarlanır;
    ziyaret edilmeyen satırlar sıfır kalır ve visits ile işaretlenir.
    """
    log(f"🧮 Geçiş ağırlıkları: {weight_samples} örnek")
    chains = simulate_blocks(model, grids.x0, grids.N, weight_samples, stream, threads)
    p, cw = grids.p, grids.component_weights
    idx = [project_batch(g, chains.theta(k), p, cw) for k, g in enumerate(grids.grids)]
    transitions: List[Optional[np.ndarray]] = [None]
    visits: List[Optional[np.ndarray]] = [None]
    new_grids = [grids.grids[0]]
    for k in range(1, grids.N + 1):
        prev, cur = grids.grids[k - 1], grids.grids[k]
        counts = np.zeros((prev.n_classes, cur.size))
        np.add.at(counts, (prev.z_classes[idx[k - 1]], idx[k]), 1.0)
        row_visits = counts.sum(axis=1)
        rows = np.zeros_like(counts)
        seen = row_visits > 0
        rows[seen] = counts[seen] / row_visits[seen, None]
        transitions.append(rows)
        visits.append(row_visits.astype(np.int64))
        new_grids.append(StageGrid(k, cur.codebook, np.bincount(idx[k], minlength=cur.size) / len(idx[k])))
        unreachable = int(np.sum(~seen))
        if unreachable:
            vlog(f"   aşama {k - 1}: {unreachable} z-sınıfı ziyaret edilmedi")
    manifest = dict(grids.manifest, weight_samples=int(weight_samples))
    return replace(grids, grids=new_grids, transitions=transitions, visits=visits, manifest=manifest)


def estimate_errors(model: PdmpModel, grids: QuantizationGridSet, eval_samples: int, p: float,
                    stream: RngStream, threads: int = 1) -> ErrorTable:
    """
    Taze zincirlerle aşama bazlı L^p kuantizasyon hataları.

    e_Z ve e_S bileşen bazlı, e_Θ ağırlıklı ortak normdur.
    """
    log(f"🧮 Kuantizasyon hataları: {eval_samples} örnek, p={p}")
    chains = simulate_blocks(model, grids.x0, grids.N, eval_samples, stream, threads)
    w = grids.component_weights
    e_Z, e_S, e_T = [], [], []
    for k, grid in enumerate(grids.grids):
        pts = chains.theta(k)
        q = grid.codebook[project_batch(grid, pts, grids.p, w)]
        dz = np.abs(pts[:, 0] - q[:, 0]) ** p
        ds = np.abs(pts[:, 1] - q[:, 1]) ** p
        e_Z.append(float(np.mean(dz)) ** (1.0 / p))
        e_S.append(float(np.mean(ds)) ** (1.0 / p))
        e_T.append(float(np.mean(w[0] * dz + w[1] * ds)) ** (1.0 / p))
    table = ErrorTable(np.array(e_Z), np.array(e_S), np.array(e_T), int(eval_samples))
    log(f"🧮 QE = {table.qe:.4f}")
    return table


# ================== KALICILIK ==================

def grids_to_dict(grids: QuantizationGridSet) -> Dict[str, Any]:
    """Izgara setini JSON uyumlu sözlüğe çevir."""
    stages = []
    for k, g in enumerate(grids.grids):
        entry = g.to_dict()
        has_row = k < len(grids.transitions) and grids.transitions[k] is not None
        entry["transitions"] = grids.transitions[k].tolist() if has_row else None
        entry["visits"] = grids.visits[k].tolist() if has_row else None
        stages.append(entry)
    return {
        "schema_version": config.GRID_SCHEMA_VERSION,
        "model_tag": grids.model_tag,
        "N": grids.N,
        "x0": grids.x0,
        "p": grids.p,
        "component_weights": list(grids.component_weights),
        "stages": stages,
        "errors": grids.errors.to_dict() if grids.errors is not None else None,
        "manifest": grids.manifest,
    }


def _validate_rows(k: int, rows: np.ndarray, visits: np.ndarray):
    if np.any(rows < 0):
        raise SchemaError(f"aşama {k}: negatif geçiş ağırlığı")
    sums = rows.sum(axis=1)
    for i, (total, seen) in enumerate(zip(sums, visits)):
        if seen > 0 and abs(total - 1.0) > config.ROW_SUM_TOL:
            raise SchemaError(f"aşama {k}, satır {i}: ağırlık toplamı {total!r} ≠ 1")


def grids_from_dict(data: Dict[str, Any]) -> QuantizationGridSet:
    """
    Sözlükten ızgara seti kur ve doğrula.

    Raises:
        SchemaVersionError: Desteklenmeyen schema_version
        SchemaError: Bozuk yapı veya geçersiz ağırlıklar
    """
    if not isinstance(data, dict) or "schema_version" not in data:
        raise SchemaError("ızgara dosyası bozuk: schema_version yok")
    if data["schema_version"] != config.GRID_SCHEMA_VERSION:
        raise SchemaVersionError(f"desteklenmeyen schema_version: {data['schema_version']}")
    try:
        N = int(data["N"])
        grids, transitions, visits = [], [], []
        for k, entry in enumerate(data["stages"]):
            grid = StageGrid(int(entry["stage"]), np.array(entry["codebook"], dtype=np.float64),
                             np.array(entry["weights"], dtype=np.float64))
            grids.append(grid)
            if entry.get("transitions") is None:
                transitions.append(None)
                visits.append(None)
                continue
            rows = np.array(entry["transitions"], dtype=np.float64).reshape(-1, grid.size)
            seen = np.array(entry["visits"], dtype=np.int64)
            transitions.append(rows)
            visits.append(seen)
        errors = data.get("errors")
        result = QuantizationGridSet(
            model_tag=str(data["model_tag"]), N=N, x0=float(data["x0"]), p=float(data["p"]),
            component_weights=tuple(float(w) for w in data["component_weights"]),
            grids=grids, transitions=transitions, visits=visits,
            errors=ErrorTable(**errors) if errors is not None else None,
            manifest=dict(data.get("manifest") or {}),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"ızgara dosyası bozuk: {e}")
    if len(result.grids) != N + 1:
        raise SchemaError(f"{N + 1} aşama bekleniyordu, {len(result.grids)} bulundu")
    for k in range(1, N + 1):
        rows, seen = result.transitions[k], result.visits[k]
        if rows is None:
            continue
        if rows.shape[0] != result.grids[k - 1].n_classes or len(seen) != rows.shape[0]:
            raise SchemaError(f"aşama {k}: geçiş matrisi boyutu uyumsuz")
        _validate_rows(k, rows, seen)
    return result


def save_grids(grids: QuantizationGridSet, path) -> Path:
    """Izgara setini JSON dosyasına yaz."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(grids_to_dict(grids)), encoding="utf-8")
    except OSError as e:
        raise ArtifactIOError(f"ızgara yazılamadı: {path} ({e})")
    log(f"💾 Izgaralar kaydedildi: {path}")
    return path


def load_grids(path) -> QuantizationGridSet:
    """JSON dosyasından ızgara setini oku."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ArtifactIOError(f"ızgara dosyası bulunamadı: {path}")
    except OSError as e:
        raise ArtifactIOError(f"ızgara okunamadı: {path} ({e})")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"ızgara dosyası bozuk: {e}")
    return grids_from_dict(data)
