#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Komut orkestrasyonu: simulate → train → solve → evaluate → bounds → report.

Aşamalar sırayla asyncio.to_thread içinde çalışır; her aşamanın içindeki
paralellik modülün kendisine aittir. Bir koşu çıktı klasörünün tek sahibidir.
"""

import asyncio
import math
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from . import config
from .bounds import BoundReport, build_bound_report
from .config import RunConfig, apply_preset
from .exceptions import ConfigError
from .models import build_model
from .oracle import OracleResult, continuous_oracle
from .policy import RuleEvaluation, StoppingPolicy, build_policy, choose_beta, evaluate_rule
from .quantizer import (QuantizationGridSet, estimate_errors, estimate_transition_weights,
                        load_grids, save_grids, train_grids)
from .reporting import (RunManifest, save_bound_report, save_evaluation, save_oracle_mesh,
                        save_table1, save_trajectories, save_trajectories_svg, table1_row,
                        write_json)
from .simulation import simulate_blocks, trajectories_frame
from .solver import ValueTable, backward_solve, delta_norms, load_values, min_deltas, save_values
from .streams import RngStream
from .utils import log

GRIDS_FILE = "grids.json"
VALUES_FILE = "values.json"
EVALUATION_FILE = "evaluation.csv"
DEBUG_FILE = "evaluation_debug.csv"
BOUNDS_FILE = "bounds.json"
TABLE1_FILE = "table1.csv"
SUMMARY_FILE = "summary.json"
ORACLE_FILE = "oracle_mesh.csv"
TRAJECTORY_CSV = "trajectories.csv"
TRAJECTORY_SVG = "trajectories.svg"
MANIFEST_FILE = "manifest.json"


class Run:
    """
    Tek bir komutun çalışma bağlamı: model, çıktı klasörü ve manifesto.

    Her aşama phase() üzerinden çalışır; hata durumunda manifesto başarısız
    aşamayı kaydederek yazılır ve hata yeniden fırlatılır.
    """

    def __init__(self, command: str, cfg: RunConfig, threads: int = 1):
        self.command = command
        self.cfg = cfg
        self.threads = max(int(threads), 1)
        self.out_dir = Path(cfg.out_dir)
        self.model = build_model(cfg.model)
        self.manifest = RunManifest(command, cfg.to_dict())
        self.manifest.seeds = {"master_seed": int(cfg.seed)}
        self.manifest_path = self.out_dir / MANIFEST_FILE

    def stream(self, tag: str) -> RngStream:
        return RngStream(self.cfg.seed, tag)

    def path(self, name: str) -> Path:
        return self.out_dir / name

    async def start(self):
        await self.manifest.save(self.manifest_path)

    async def phase(self, name: str, fn: Callable, *args, **kwargs):
        """fn'i iş parçacığında çalıştır ve süresini manifestoya işle."""
        self.manifest.begin_phase(name)
        try:
            result = await asyncio.to_thread(fn, *args, **kwargs)
        except BaseException as e:
            self.manifest.fail_phase(name, e)
            self.manifest.finalize()
            await self.manifest.save(self.manifest_path)
            log(f"❌ '{name}' aşaması başarısız: {e}")
            raise
        self.manifest.end_phase(name)
        await self.manifest.save(self.manifest_path)
        return result

    async def emit(self, name: str, writer, *args) -> Path:
        """Dosyayı manifestoya kaydet, sonra yaz."""
        path = self.path(name)
        self.manifest.add_artifact(path)
        await self.manifest.save(self.manifest_path)
        written = await writer(*args, path) if args else await writer(path)
        return written

    async def finish(self):
        self.manifest.finalize()
        await self.manifest.save(self.manifest_path)


# ================== AŞAMA FONKSİYONLARI ==================

def _train(run: Run) -> QuantizationGridSet:
    cfg, q = run.cfg, run.cfg.quantization
    grids = train_grids(run.model, cfg.model.x0, cfg.N, q.points_per_stage, q.train_samples, q.p,
                        run.stream("train"), q.component_weights, run.threads)
    grids = estimate_transition_weights(run.model, grids, q.weight_samples, run.stream("weights"),
                                        run.threads)
    errors = estimate_errors(run.model, grids, q.eval_samples, q.p, run.stream("eval"), run.threads)
    return grids.with_errors(errors)


def _check_artifacts(run: Run, grids: QuantizationGridSet, values: Optional[ValueTable] = None):
    if grids.model_tag != run.model.tag:
        raise ConfigError(f"ızgaralar '{grids.model_tag}' modeline ait, konfigürasyon '{run.model.tag}'")
    if values is not None and values.N != grids.N:
        raise ConfigError(f"değer tablosu ufku {values.N} ≠ ızgara ufku {grids.N}")
    if grids.errors is None:
        raise ConfigError("ızgara dosyasında hata tablosu yok; önce 'train' çalıştırın")


def _policy(run: Run, grids: QuantizationGridSet, values: ValueTable) -> StoppingPolicy:
    st = run.cfg.stopping
    md = float(min(min_deltas(values))) if values.N > 0 else math.inf
    if st.beta_override is not None:
        beta = float(st.beta_override)
        run.manifest.feasibility["beta_source"] = "override"
    else:
        choice = choose_beta(run.model.constants, grids.errors, st.a, md)
        beta = choice.beta
        run.manifest.feasibility.update({
            "beta_source": "choose_beta",
            "beta_per_stage": choice.per_stage.tolist(),
            "beta_over_a": choice.beta_over_a,
        })
    policy = build_policy(values, grids, beta)
    run.manifest.feasibility.update({"beta": policy.beta, "min_delta": policy.min_delta,
                                     "policy_feasible": policy.feasible})
    if not policy.feasible:
        run.manifest.add_warnings([f"β={policy.beta!r} ≥ min Δ={policy.min_delta!r}"])
    return policy


def _evaluate(run: Run, policy: StoppingPolicy) -> RuleEvaluation:
    st = run.cfg.stopping
    return evaluate_rule(run.model, policy, run.cfg.model.x0, st.n_mc, run.stream("rule"),
                         run.threads, st.debug_dump)


def _bounds(run: Run, grids: QuantizationGridSet, values: ValueTable) -> BoundReport:
    b = run.cfg.bounds
    report = build_bound_report(run.model.constants, grids.errors,
                                delta_norms(values, grids, grids.p), min_deltas(values),
                                run.cfg.stopping.a, sharpen=b.sharpen_with_flow,
                                enable_b3=b.enable_b3)
    run.manifest.feasibility["bounds_certified"] = report.certified
    if not report.certified:
        run.manifest.add_warnings(["min Δ koşulu bazı aşamalarda sağlanmadı: B2/B3 sertifikasız"])
    return report


def _oracle(run: Run) -> Optional[OracleResult]:
    if not run.cfg.bounds.enable_oracle:
        return None
    if not run.model.kernel_state_independent:
        log(f"⚠️ {run.model.tag}: sürekli kestirim desteklenmiyor, atlandı")
        run.manifest.add_warnings(["sürekli kestirim atlandı: çekirdek duruma bağlı"])
        return None
    return continuous_oracle(run.model, run.cfg.model.x0, run.cfg.N)


def _record_training(run: Run, grids: QuantizationGridSet):
    run.manifest.seeds.update({"train": "train", "weights": "weights", "eval": "eval",
                               "lloyd_init": "lloyd-init"})
    run.manifest.training = {k: v for k, v in grids.manifest.items() if k != "warnings"}
    run.manifest.add_warnings(grids.manifest.get("warnings", []))


def _record_values(run: Run, values: ValueTable):
    run.manifest.clipping_count = values.clipping_count
    run.manifest.add_warnings(values.warnings)


# ================== KOMUTLAR ==================

async def cmd_simulate(cfg: RunConfig, threads: int = 1) -> Path:
    """
    Yörüngeleri simüle et, CSV ve SVG olarak yaz.

    Returns:
        Path: CSV dosyası
    """
    run = Run("simulate", cfg, threads)
    await run.start()
    batch = await run.phase("simulate", simulate_blocks, run.model, cfg.model.x0, cfg.N,
                            cfg.trajectories, run.stream("simulate"), run.threads)
    csv_path = await run.emit(TRAJECTORY_CSV, save_trajectories, trajectories_frame(batch))
    await run.emit(TRAJECTORY_SVG, save_trajectories_svg, run.model, batch)
    await run.finish()
    return csv_path


async def cmd_train(cfg: RunConfig, threads: int = 1) -> Path:
    """Izgaraları eğit, ağırlıkları ve hataları tahmin et, grids.json yaz."""
    run = Run("train", cfg, threads)
    await run.start()
    grids = await run.phase("train", _train, run)
    _record_training(run, grids)
    path = await run.emit(GRIDS_FILE, _save_sync(save_grids), grids)
    await run.finish()
    return path


async def cmd_solve(cfg: RunConfig, grids_path, threads: int = 1) -> Path:
    """Kayıtlı ızgaralar üzerinde geriye doğru çözüm, values.json yaz."""
    run = Run("solve", cfg, threads)
    await run.start()
    grids = await run.phase("load", load_grids, grids_path)
    values = await run.phase("solve", backward_solve, run.model, grids, cfg.dp.delta, run.threads)
    _record_values(run, values)
    path = await run.emit(VALUES_FILE, _save_sync(save_values), values)
    await run.finish()
    return path


async def cmd_evaluate(cfg: RunConfig, grids_path, values_path, threads: int = 1) -> RuleEvaluation:
    """Kuralı kur ve Monte Carlo ile değerlendir."""
    run = Run("evaluate", cfg, threads)
    await run.start()
    grids = await run.phase("load", load_grids, grids_path)
    values = await run.phase("load-values", load_values, values_path)
    _check_artifacts(run, grids, values)
    policy = _policy(run, grids, values)
    evaluation = await run.phase("evaluate", _evaluate, run, policy)
    await _emit_evaluation(run, evaluation)
    await run.finish()
    return evaluation


async def cmd_bounds(cfg: RunConfig, grids_path, values_path, threads: int = 1) -> BoundReport:
    """Kayıtlı artefaktlardan sınır raporunu yeniden hesapla."""
    run = Run("bounds", cfg, threads)
    await run.start()
    grids = await run.phase("load", load_grids, grids_path)
    values = await run.phase("load-values", load_values, values_path)
    _check_artifacts(run, grids, values)
    report = await run.phase("bounds", _bounds, run, grids, values)
    await run.emit(BOUNDS_FILE, save_bound_report, report)
    await run.finish()
    return report


async def _emit_evaluation(run: Run, evaluation: RuleEvaluation):
    debug_path = run.path(DEBUG_FILE) if evaluation.debug is not None else None
    if debug_path is not None:
        run.manifest.add_artifact(debug_path)
    run.manifest.add_artifact(run.path(EVALUATION_FILE))
    await run.manifest.save(run.manifest_path)
    await save_evaluation(evaluation, run.path(EVALUATION_FILE), debug_path)


async def _write_summary(summary: Dict[str, Any], path) -> Path:
    return await write_json(path, summary)


def _save_sync(saver):
    """Senkron kaydediciyi emit() ile uyumlu eşzamansız yazıcıya çevir."""
    async def writer(obj, path):
        return await asyncio.to_thread(saver, obj, path)
    return writer


async def cmd_pipeline(cfg: RunConfig, threads: int = 1) -> Dict[str, Any]:
    """
    Tam zincir: eğitim → çözüm → kural → değerlendirme → sınırlar → kestirim.

    Returns:
        Dict: Tablo-1 satırı ile oracle V_0 ve yardımcı alanlar
    """
    run = Run("pipeline", cfg, threads)
    await run.start()
    log(f"Pipeline: N={cfg.N}, Pt={cfg.quantization.points_per_stage}, Δ={cfg.dp.delta}, seed={cfg.seed}")

    grids = await run.phase("train", _train, run)
    _record_training(run, grids)
    await run.emit(GRIDS_FILE, _save_sync(save_grids), grids)

    values = await run.phase("solve", backward_solve, run.model, grids, cfg.dp.delta, run.threads)
    _record_values(run, values)
    await run.emit(VALUES_FILE, _save_sync(save_values), values)

    policy = await run.phase("policy", _policy, run, grids, values)
    evaluation = await run.phase("evaluate", _evaluate, run, policy)
    await _emit_evaluation(run, evaluation)

    report = None
    if cfg.bounds.enable_b2:
        report = await run.phase("bounds", _bounds, run, grids, values)
        await run.emit(BOUNDS_FILE, save_bound_report, report)

    oracle = await run.phase("oracle", _oracle, run)
    if oracle is not None:
        await run.emit(ORACLE_FILE, save_oracle_mesh, oracle)

    row = table1_row(cfg.quantization.points_per_stage, grids.errors.qe, cfg.dp.delta,
                     values.V0_hat, evaluation, report)
    await run.emit(TABLE1_FILE, save_table1, [row])
    summary = dict(row)
    summary.update({
        "oracle_V0": oracle.V0 if oracle is not None else None,
        "stderr": evaluation.stderr,
        "E_sup": evaluation.E_sup,
        "E_sup_stderr": evaluation.E_sup_stderr,
        "beta": policy.beta,
        "policy_feasible": policy.feasible,
        "bounds_certified": report.certified if report is not None else None,
        "seed": int(cfg.seed),
    })
    await run.emit(SUMMARY_FILE, _write_summary, summary)
    await run.finish()
    log(f"📊 Pt={row['Pt']} QE={row['QE']:.4f} V̂0={row['V0_hat']:.4f} V̄0={row['V0_bar']:.4f} "
        f"B1={row['B1']:.4f} B2={row['B2']:.4g} B3={row['B3']:.4g}")
    return summary


async def cmd_report(cfg: RunConfig, presets: Optional[List[int]] = None, threads: int = 1) -> Path:
    """
    Pt merdiveninin her basamağı için pipeline çalıştır ve tam tabloyu yaz.

    Her basamak kendi alt klasörüne (pt_<Pt>) yazar.

    Returns:
        Path: Toplu table1.csv
    """
    presets = sorted(presets or config.TABLE1_PRESETS)
    base_out = Path(cfg.out_dir)
    steps = []
    for pt in presets:
        step_cfg = apply_preset(RunConfig.from_dict(cfg.to_dict()), pt)
        step_cfg.out_dir = str(base_out / f"pt_{pt}")
        if step_cfg.quantization.train_samples < config.MIN_SAMPLES_PER_POINT * pt:
            raise ConfigError(f"Pt={pt} için train_samples ≥ {config.MIN_SAMPLES_PER_POINT * pt} olmalı")
        steps.append(step_cfg)
    run = Run("report", cfg, threads)
    await run.start()
    rows = []
    for step_cfg in steps:
        summary = await cmd_pipeline(step_cfg, threads)
        rows.append({c: summary[c] for c in config.TABLE1_COLUMNS})
        run.manifest.add_artifact(Path(step_cfg.out_dir) / TABLE1_FILE)
    path = await run.emit(TABLE1_FILE, save_table1, rows)
    await run.finish()
    return path

