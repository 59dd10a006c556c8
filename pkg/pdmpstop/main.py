#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
pdmpstop komut satırı giriş noktası.

    python -m pdmpstop.main pipeline --config data/example_config.json --preset 900
"""

import asyncio
import argparse
import sys

from . import config
from .config import apply_preset, load_run_config, resolve_threads
from .exceptions import ArtifactIOError, PdmpStopError
from .pipeline import (GRIDS_FILE, VALUES_FILE, cmd_bounds, cmd_evaluate, cmd_pipeline,
                       cmd_report, cmd_simulate, cmd_solve, cmd_train)
from .utils import log, now_utc

COMMANDS = ("simulate", "train", "solve", "evaluate", "bounds", "pipeline", "report")


def parse_args(argv=None):
    """
    Komut satırı argümanlarını ayrıştır.

    Returns:
        Namespace: Ayrıştırılan argümanlar
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', '-c', default=None,
                        help='JSON konfigürasyon dosyası')
    common.add_argument('--seed', type=int, default=None,
                        help='Ana tohum (u64), konfigürasyonu ezer')
    common.add_argument('--out', '-o', default=None,
                        help='Çıktı klasörü')
    common.add_argument('--threads', '-j', type=int, default=None,
                        help='İş parçacığı sayısı (0 = otomatik)')
    common.add_argument('--preset', '-p', type=int, default=None,
                        choices=sorted(config.TABLE1_PRESETS),
                        help='Tablo-1 ön ayarı (Pt)')
    common.add_argument('--verbose', '-v', action='store_true',
                        help='Aşama bazlı ayrıntılı günlük')

    parser = argparse.ArgumentParser(description='PDMP optimal durdurma çözücüsü')
    sub = parser.add_subparsers(dest='command', required=True)

    sim = sub.add_parser('simulate', parents=[common], help='Yörünge CSV + SVG')
    sim.add_argument('--trajectories', '-n', type=int, default=None,
                     help='Yörünge sayısı (default: config)')

    sub.add_parser('train', parents=[common], help='Izgaraları eğit')

    for name, helptext in (('solve', 'Geriye doğru çözüm'),
                           ('evaluate', 'Kuralı Monte Carlo ile değerlendir'),
                           ('bounds', 'Sınır raporunu yeniden hesapla')):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument('--grids', default=None, help=f'Izgara dosyası (default: <out>/{GRIDS_FILE})')
        if name != 'solve':
            p.add_argument('--values', default=None,
                           help=f'Değer dosyası (default: <out>/{VALUES_FILE})')

    sub.add_parser('pipeline', parents=[common], help='Tam zincir ve Tablo-1 satırı')

    rep = sub.add_parser('report', parents=[common], help='Pt merdiveni için tam tablo')
    rep.add_argument('--presets', type=int, nargs='+', default=None,
                     help='Çalıştırılacak Pt değerleri (default: hepsi)')

    return parser.parse_args(argv)


def configure_from_args(args):
    """
    Konfigürasyonu yükle ve komut satırı argümanlarını uygula.

    Returns:
        Tuple: (RunConfig, iş parçacığı sayısı)
    """
    if args.verbose:
        config.VERBOSE = True
    cfg = load_run_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out_dir = args.out
    if args.preset is not None:
        apply_preset(cfg, args.preset)
    if getattr(args, 'trajectories', None) is not None:
        cfg.trajectories = args.trajectories
    cfg.validate()
    return cfg, resolve_threads(args.threads, cfg.threads)


async def main(argv=None):
    """
    Ana program akışı.
    """
    args = parse_args(argv)
    cfg, threads = configure_from_args(args)
    log(f"pdmpstop {config.TOOL_VERSION} | komut: {args.command} | seed: {cfg.seed} | {threads} iş parçacığı")
    log(f"Başlangıç zamanı: {now_utc()}")

    grids = getattr(args, 'grids', None) or f"{cfg.out_dir}/{GRIDS_FILE}"
    values = getattr(args, 'values', None) or f"{cfg.out_dir}/{VALUES_FILE}"

    if args.command == 'simulate':
        await cmd_simulate(cfg, threads)
    elif args.command == 'train':
        await cmd_train(cfg, threads)
    elif args.command == 'solve':
        await cmd_solve(cfg, grids, threads)
    elif args.command == 'evaluate':
        await cmd_evaluate(cfg, grids, values, threads)
    elif args.command == 'bounds':
        await cmd_bounds(cfg, grids, values, threads)
    elif args.command == 'pipeline':
        await cmd_pipeline(cfg, threads)
    elif args.command == 'report':
        await cmd_report(cfg, args.presets, threads)
    log("✅ Tamamlandı")


def run(argv=None) -> int:
    """Çıkış kodunu döndüren senkron sarmalayıcı."""
    try:
        asyncio.run(main(argv))
    except PdmpStopError as e:
        log(f"❌ {type(e).__name__}: {e}")
        return e.exit_code
    except KeyboardInterrupt:
        log("Durduruldu (CTRL+C)")
        return 130
    except OSError as e:
        log(f"❌ Dosya hatası: {e}")
        return ArtifactIOError.exit_code
    except Exception as e:
        log(f"❌ Kritik hata: {e}")
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(run())
