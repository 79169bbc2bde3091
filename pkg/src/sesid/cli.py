"""Command-line driver: config- or preset-described batch experiments.

Subcommands: ``run`` (generate, identify, validate), ``simulate`` (truth data
only), ``identify`` (from an existing record CSV), ``validate`` (model
playback and spectral comparison), ``sweep`` (grid over model order and
delay).  Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import runner
from .config import ConfigError, dumps_config, load_config, validate_config
from .ctsim import IntegrationDiverged
from .estimator import DegenerateFit, IdentifiedModel
from .lure import DttdlModel, SignalRecord, SimulationDiverged
from .presets import PRESET_NAMES, get_preset

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sesid",
        description="Identification of self-excited systems from input/output records",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--config", type=Path, help="experiment config JSON")
        group.add_argument("--preset", choices=PRESET_NAMES, help="built-in preset")
        p.add_argument("--out", type=Path, help="output directory (default: timestamped)")
        p.add_argument("--samples", type=int, help="shrink the record to N samples")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--n-hat", type=int, help="override the model order")
        p.add_argument("--d-hat", type=int, help="override the model delay")
        noise = p.add_mutually_exclusive_group()
        noise.add_argument("--noisy", action="store_true", help="keep sensor noise on")
        noise.add_argument("--noiseless", action="store_true", help="turn sensor noise off")
        p.add_argument(
            "--dump-config", action="store_true",
            help="print the effective config and exit",
        )

    add_common(sub.add_parser("run"))
    add_common(sub.add_parser("simulate"))

    p_ident = sub.add_parser("identify")
    add_common(p_ident)
    p_ident.add_argument("--record", type=Path, required=True, help="record CSV (k,v,y)")
    p_ident.add_argument("--sample-time", type=float, default=None)

    p_val = sub.add_parser("validate")
    add_common(p_val)
    p_val.add_argument("--model", type=Path, required=True, help="model JSON")

    p_sweep = sub.add_parser("sweep")
    add_common(p_sweep)
    p_sweep.add_argument("--n-hat-grid", type=str, help="comma-separated model orders")
    p_sweep.add_argument("--d-hat-grid", type=str, help="comma-separated delays")
    p_sweep.add_argument("--jobs", type=int, default=1)
    return parser


def _effective_config(args) -> dict:
    if args.config is not None:
        cfg = load_config(args.config)
    else:
        cfg = validate_config(get_preset(args.preset))
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.samples is not None:
        cfg["samples"] = args.samples
        window = cfg["identification"]["window"]
        window[1] = min(window[1], args.samples - 1)
        val = cfg.get("validation")
        if val is not None and val["horizon"] > args.samples:
            val["horizon"] = args.samples
            val["discard"] = min(val.get("discard", 0), args.samples // 5)
    if args.n_hat is not None:
        cfg["identification"]["n_hat"] = args.n_hat
    if args.d_hat is not None:
        cfg["identification"]["d_hat"] = args.d_hat
    if args.noiseless:
        cfg["noise"] = None
    if args.noisy and not cfg.get("noise"):
        raise ConfigError("config.noise", "--noisy needs a noise spec in the config")
    return validate_config(cfg)


def _out_dir(args, cfg) -> Path:
    if args.out is not None:
        return args.out
    stamp = time.strftime("%Y%m%d-%H%M%S")
    name = cfg.get("name") or (args.preset or "run")
    return Path("runs") / f"{name}-{stamp}"


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _effective_config(args)
        if args.dump_config:
            sys.stdout.write(dumps_config(cfg))
            return 0
        out = _out_dir(args, cfg)

        if args.command == "run":
            manifest = runner.run_experiment(cfg, out)
            metrics = manifest.get("metrics", {})
            print(f"run complete: {out}")
            if metrics:
                print(
                    f"  peak distance: {metrics['peak_distance_bins']:.2f} bins "
                    f"(truth {metrics['truth_peak_freq']:.6g}, "
                    f"model {metrics['model_peak_freq']:.6g})"
                )
        elif args.command == "simulate":
            out.mkdir(parents=True, exist_ok=True)
            record = runner.generate_record(cfg)
            record.save_csv(out / "record.csv")
            print(f"record written: {out / 'record.csv'} ({len(record)} samples)")
        elif args.command == "identify":
            out.mkdir(parents=True, exist_ok=True)
            ts = args.sample_time
            if ts is None:
                ts = cfg.get("sampling", {}).get("sample_time", 1.0)
            record = SignalRecord.load_csv(args.record, sample_time=ts)
            ident = runner.identify_from_config(cfg, record)
            ident.save(out / "model.json")
            d = ident.diagnostics
            print(f"model written: {out / 'model.json'}")
            print(f"  J_LS={d['J_LS']:.6g}  J_A={d['J_A']:.6g}  rank={d['rank']}")
        elif args.command == "validate":
            out.mkdir(parents=True, exist_ok=True)
            model = DttdlModel.load(args.model)
            ident = IdentifiedModel(model=model, path="loaded", beta_choice=model.beta)
            record_clean = runner.generate_record(cfg)
            result = runner.validate_model(cfg, ident, record_clean)
            result["truth_record"].save_csv(out / "validation_truth.csv")
            result["model_record"].save_csv(out / "validation_model.csv")
            result["psd_truth"].save_csv(out / "psd_truth.csv")
            result["psd_model"].save_csv(out / "psd_model.csv")
            m = result["metrics"]
            print(f"validation written: {out}")
            print(f"  peak distance: {m['peak_distance_bins']:.2f} bins, "
                  f"alignment shift {m['alignment_shift']}")
        elif args.command == "sweep":
            n_grid = _parse_grid(args.n_hat_grid, cfg, "n_hat")
            d_grid = _parse_grid(args.d_hat_grid, cfg, "d_hat")
            rows = runner.run_sweep(cfg, out, n_grid, d_grid, jobs=args.jobs)
            ok = sum(1 for r in rows if r["status"] == "ok")
            print(f"sweep complete: {out} ({ok}/{len(rows)} cells ok)")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationDiverged, IntegrationDiverged, DegenerateFit,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def _parse_grid(text, cfg, key) -> list:
    if text:
        try:
            return [int(x) for x in text.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"sweep.{key}", f"bad grid {text!r}")
    sweep = cfg.get("sweep", {})
    if key in sweep:
        return [int(x) for x in sweep[key]]
    return [cfg["identification"][key]]


if __name__ == "__main__":
    sys.exit(main())
