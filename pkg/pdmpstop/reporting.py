#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Rapor ve artefakt yazıcıları: koşu manifestosu, CSV tabloları, JSON
raporları ve yörünge SVG çizimi.
"""

import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import aiofiles
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from . import config
from .bounds import BoundReport
from .exceptions import ArtifactIOError
from .models.base import PdmpModel
from .oracle import OracleResult
from .policy import RuleEvaluation
from .simulation import ChainBatch, flow_path
from .utils import log, now_utc


def _json_ready(value):
    """numpy türlerini ve sonlu olmayan sayıları JSON'a uygun hale getir."""
    if isinstance(value, dict):
        return {str(k): _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_json_ready(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


async def write_text(path, text: str) -> Path:
    """Metni aiofiles ile yaz; klasörü gerekirse oluştur."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        async with aiofiles.open(path, "w", encoding="utf-8", newline="") as f:
            await f.write(text)
    except OSError as e:
        raise ArtifactIOError(f"yazılamadı: {path} ({e})")
    return path


async def write_json(path, data: Dict[str, Any]) -> Path:
    """Sözlüğü sıralı anahtarlarla JSON olarak yaz."""
    return await write_text(path, json.dumps(_json_ready(data), indent=2, sort_keys=True) + "\n")


async def write_frame(path, frame: pd.DataFrame) -> Path:
    """DataFrame'i başlıklı, indekssiz CSV olarak yaz (en kısa ondalık gösterim)."""
    return await write_text(path, frame.to_csv(index=False, lineterminator="\n"))


# ================== MANİFESTO ==================

@dataclass
class RunManifest:
    """
    Bir koşunun tekrar üretilebilirlik kaydı.

    Her sonuç dosyasından önce yazılır, her aşama sonunda güncellenir.
    Duvar saati süreleri içerdiği için bayt bazında deterministik değildir.
    """
    command: str
    config: Dict[str, Any]
    tool_version: str = config.TOOL_VERSION
    started_at: str = field(default_factory=lambda: now_utc().isoformat())
    finished_at: Optional[str] = None
    status: str = "running"
    failed_phase: Optional[str] = None
    error: Optional[str] = None
    phases: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    artifacts: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    seeds: Dict[str, Any] = field(default_factory=dict)
    training: Dict[str, Any] = field(default_factory=dict)
    clipping_count: int = 0
    feasibility: Dict[str, Any] = field(default_factory=dict)
    _clock: Dict[str, float] = field(default_factory=dict, repr=False)

    def begin_phase(self, name: str):
        self._clock[name] = time.perf_counter()
        self.phases[name] = {"status": "running"}

    def end_phase(self, name: str):
        elapsed = time.perf_counter() - self._clock.pop(name, time.perf_counter())
        self.phases[name] = {"status": "ok", "seconds": round(elapsed, 3)}

    def fail_phase(self, name: str, error: BaseException):
        elapsed = time.perf_counter() - self._clock.pop(name, time.perf_counter())
        self.phases[name] = {"status": "failed", "seconds": round(elapsed, 3)}
        self.status = "failed"
        self.failed_phase = name
        self.error = f"{type(error).__name__}: {error}"

    def add_artifact(self, path):
        path = str(path)
        if path not in self.artifacts:
            self.artifacts.append(path)

    def add_warnings(self, warnings: Iterable[str]):
        for w in warnings:
            if w not in self.warnings:
                self.warnings.append(w)

    def finalize(self):
        if self.status == "running":
            self.status = "ok"
        self.finished_at = now_utc().isoformat()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "tool_version": self.tool_version,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "status": self.status,
            "failed_phase": self.failed_phase,
            "error": self.error,
            "config": self.config,
            "seeds": self.seeds,
            "training": self.training,
            "clipping_count": self.clipping_count,
            "feasibility": self.feasibility,
            "phases": self.phases,
            "artifacts": self.artifacts,
            "warnings": self.warnings,
        }

    async def save(self, path) -> Path:
        return await write_json(path, self.to_dict())


# ================== TABLOLAR ==================

def table1_frame(rows: List[Dict[str, Any]]) -> pd.DataFrame:
    """Tablo-1 satırlarını "Pt,QE,Delta,V0_hat,V0_bar,B1,B2,B3" sütunlarıyla tabloya çevir."""
    return pd.DataFrame(rows, columns=config.TABLE1_COLUMNS)


def table1_row(pt: int, qe: float, delta: float, V0_hat: float,
               evaluation: Optional[RuleEvaluation], report: Optional[BoundReport]) -> Dict[str, Any]:
    """Tek Tablo-1 satırı; devre dışı bırakılan bölümler NaN olur."""
    nan = float("nan")
    return {
        "Pt": int(pt),
        "QE": float(qe),
        "Delta": float(delta),
        "V0_hat": float(V0_hat),
        "V0_bar": evaluation.V_bar_0 if evaluation is not None else nan,
        "B1": evaluation.B1 if evaluation is not None else nan,
        "B2": report.B2 if report is not None else nan,
        "B3": report.B3 if report is not None else nan,
    }


def evaluation_frame(evaluation: RuleEvaluation) -> pd.DataFrame:
    return pd.DataFrame([evaluation.row()], columns=config.EVALUATION_COLUMNS)


async def save_table1(rows: List[Dict[str, Any]], path) -> Path:
    path = await write_frame(path, table1_frame(rows))
    log(f"💾 Tablo-1 yazıldı: {path}")
    return path


async def save_evaluation(evaluation: RuleEvaluation, path, debug_path=None) -> List[Path]:
    """Değerlendirme satırını ve istenirse yol bazlı dökümü yaz."""
    written = [await write_frame(path, evaluation_frame(evaluation))]
    if debug_path is not None and evaluation.debug is not None:
        written.append(await write_frame(debug_path, evaluation.debug))
    log(f"💾 Değerlendirme yazıldı: {path}")
    return written


async def save_oracle_mesh(oracle: OracleResult, path) -> Path:
    return await write_frame(path, oracle.mesh_frame())


async def save_bound_report(report: BoundReport, path) -> Path:
    """Sınır raporunu JSON olarak yaz."""
    path = await write_json(path, report.to_dict())
    log(f"💾 Sınır raporu yazıldı: {path}")
    return path


async def save_trajectories(frame: pd.DataFrame, path) -> Path:
    return await write_frame(path, frame)


# ================== SVG ==================

def render_trajectories_svg(model: PdmpModel, batch: ChainBatch) -> str:
    """
    X(t)'yi zamana karşı çiz; sıçrama noktaları işaretlenir.

    Aynı yollar için çıktı bayt bazında aynıdır.

    Args:
        model: Akışı sağlayan model
        batch: Çizilecek yollar

    Returns:
        str: SVG belgesi
    """
    with plt.rc_context({"svg.hashsalt": config.SVG_HASH_SALT, "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(8, 4))
        try:
            for i in range(len(batch)):
                traj = batch.row(i)
                t, x = flow_path(model, traj)
                line, = ax.plot(t, x, linewidth=1.2, label=f"yol {i}")
                ax.plot(traj.T[1:], traj.Z[1:], "o", markersize=3, color=line.get_color())
            ax.set_xlabel("t")
            ax.set_ylabel("X(t)")
            if len(batch):
                ax.set_xlim(0.0, max(float(np.max(batch.T[:, -1])), 1e-12))
                ax.legend(loc="upper right")
            buf = io.StringIO()
            fig.savefig(buf, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return buf.getvalue()


async def save_trajectories_svg(model: PdmpModel, batch: ChainBatch, path) -> Path:
    path = await write_text(path, render_trajectories_svg(model, batch))
    log(f"💾 Yörünge çizimi yazıldı: {path}")
    return path
