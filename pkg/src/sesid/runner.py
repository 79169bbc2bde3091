"""Experiment pipeline: data generation, identification, validation, artifacts.

A run writes, under one output directory: the identification record CSV (and
the noiseless copy when sensor noise is enabled), the identified model JSON,
validation playback CSVs for the truth system and the model, PSD and
frequency-response CSVs, optional phase-portrait CSVs, and a manifest JSON
with the config hash, seeds, diagnostics and comparison metrics.  Outputs are
byte-identical across reruns of the same config and seed.
"""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, _kernels, analysis, ctsim, estimator
from .config import ConfigError, config_digest, grid_array
from .cpl import sample_from_function
from .lure import DttdlModel, SignalRecord, init_constant, init_gaussian, simulate
from .nonlin import feedback_from_dict


def build_feedback_map(spec: dict):
    if spec["kind"] == "cpl_from_map":
        inner = build_feedback_map(spec["map"])
        return sample_from_function(inner, grid_array(spec["c"]), spec["r"])
    return feedback_from_dict(spec)


def build_truth(cfg: dict):
    truth = cfg["truth"]
    kind = truth["kind"]
    if kind == "dttdl":
        return DttdlModel(
            a=truth["a"], b=truth["b"], beta=truth["beta"], d=truth["d"],
            nonlinearity=build_feedback_map(truth["nonlinearity"]),
        )
    if kind == "cttdl":
        Af, Bf, Cf, Df = ctsim.washout_realization(truth["washout_tau"])
        return ctsim.CttdlSystem(
            A=truth["A"], B=truth["B"], C=truth["C"],
            Af=Af, Bf=Bf, Cf=Cf, Df=Df,
            beta=truth["beta"], delay_time=truth["delay_time"],
            nonlinearity=build_feedback_map(truth["nonlinearity"]),
        )
    if kind == "van_der_pol":
        return ctsim.van_der_pol(truth["mu0"])
    if kind == "lotka_volterra":
        return ctsim.lotka_volterra(
            truth["zeta"], truth["rho"], truth["xi"], truth["phi"]
        )
    raise ConfigError("truth.kind", f"unhandled kind {kind!r}")


def _input_function(spec: dict, seed: int, sample_time: float):
    if spec["kind"] == "constant":
        value = float(spec["value"])
        return lambda t: value
    if spec["kind"] == "zoh_gaussian":
        return ctsim.piecewise_constant_input(seed, spec["mean"], spec["std"], sample_time)
    raise ConfigError("input.kind", f"{spec['kind']!r} not usable for continuous truth")


def generate_record(cfg: dict) -> SignalRecord:
    """Simulate the configured truth system and return the sampled record."""
    truth = build_truth(cfg)
    kind = cfg["truth"]["kind"]
    seed = cfg["seed"]
    samples = cfg["samples"]
    inp = cfg["input"]

    if kind == "dttdl":
        rng = np.random.default_rng(seed)
        if inp["kind"] == "constant":
            v = np.full(samples, float(inp["value"]))
        else:  # per-step Gaussian (zoh at unit sample time is the same thing)
            v = rng.normal(inp["mean"], inp["std"], size=samples)
        y_init_spec = cfg["truth"]["y_init"]
        if y_init_spec["kind"] == "constant":
            y_init = init_constant(truth, y_init_spec["value"])
        else:
            y_init = init_gaussian(truth, seed + 1, y_init_spec.get("std", 1.0))
        y = simulate(truth, v, y_init)
        return SignalRecord(v=v, y=y, sample_time=1.0)

    sampling = cfg["sampling"]
    Ts = sampling["sample_time"]
    bias = sampling.get("bias", 0.0)
    t_end = (samples - 1) * Ts
    if kind == "cttdl":
        v_fn = _input_function(inp, seed, Ts)
        traj = ctsim.integrate_dde(
            truth, v_fn, cfg["truth"].get("y0", 0.0), t_end, cfg["truth"]["step"]
        )
        return ctsim.sample(traj, Ts, bias=bias, v=v_fn)

    if inp["kind"] != "constant":
        raise ConfigError("input.kind", f"{kind} runs take a constant nominal input")
    h = Ts / sampling.get("steps_per_sample", 160)
    if kind == "van_der_pol":
        state0 = [cfg["truth"]["y0"], cfg["truth"].get("ydot0", 0.0)]
    else:
        state0 = [cfg["truth"]["y0"], cfg["truth"]["x0"]]
    traj = ctsim.integrate_ode(truth, state0, t_end, h)
    return ctsim.sample(traj, Ts, bias=bias, v=float(inp["value"]))


def identify_from_config(cfg: dict, record: SignalRecord) -> estimator.IdentifiedModel:
    ident = cfg["identification"]
    l_l, l_u = ident["window"]
    l_u = min(l_u, len(record) - 1)
    if l_u < l_l:
        raise ConfigError("identification.window", "record shorter than the window start")
    solver = ident["solver"]
    return estimator.identify(
        record,
        n_hat=ident["n_hat"],
        d_hat=ident["d_hat"],
        c_hat=grid_array(ident["c_hat"]),
        beta_choice=ident["beta_choice"],
        constant_input=ident["constant_input"],
        l_l=l_l,
        l_u=l_u,
        solver=solver["kind"],
        p0=solver.get("p0", 1e6),
        forgetting=solver.get("forgetting", 1.0),
    )


def _truth_validation_record(cfg: dict, record_clean: SignalRecord) -> SignalRecord:
    val = cfg["validation"]
    kind = cfg["truth"]["kind"]
    horizon = val["horizon"]
    if kind == "dttdl":
        truth = build_truth(cfg)
        value = float(val["input"]["value"])
        v = np.full(horizon, value)
        y_init = init_constant(truth, val["truth_init"]["value"])
        return SignalRecord(v=v, y=simulate(truth, v, y_init), sample_time=1.0)
    if kind == "cttdl":
        truth = build_truth(cfg)
        Ts = cfg["sampling"]["sample_time"]
        value = float(val["input"]["value"])
        traj = ctsim.integrate_dde(
            truth, lambda t: value, 0.0, (horizon - 1) * Ts,
            cfg["truth"]["step"], xf0=0.0,
        )
        return ctsim.sample(traj, Ts, bias=0.0, v=value)
    # self-oscillating sampled systems: the record itself is the reference
    return record_clean


def validate_model(cfg: dict, ident: estimator.IdentifiedModel,
                   record_clean: SignalRecord) -> dict:
    """Play the identified model back and compare against the truth reference.

    Returns validation records, spectra and scalar metrics; raises the
    underlying numerical error if the playback diverges.
    """
    val = cfg["validation"]
    horizon = val["horizon"]
    discard = int(val.get("discard", horizon // 5))
    model = ident.model
    Ts = record_clean.sample_time

    value = float(val["input"]["value"])
    v = np.full(horizon, value)
    y_init = np.full(model.order + model.d + 1, float(val.get("model_init", 0.0)))
    y_model = simulate(model, v, y_init)
    model_rec = SignalRecord(v=v, y=y_model, sample_time=Ts)

    truth_rec = _truth_validation_record(cfg, record_clean)

    seg = int(val.get("psd_segment", analysis.DEFAULT_SEGMENT_LEN))
    y_t = truth_rec.y[min(discard, len(truth_rec) // 2):]
    y_m = model_rec.y[min(discard, len(model_rec) // 2):]
    psd_truth = analysis.psd(y_t, Ts, segment_len=seg)
    psd_model = analysis.psd(y_m, Ts, segment_len=seg)
    f_truth = analysis.dominant_frequency(psd_truth)
    f_model = analysis.dominant_frequency(psd_model)
    bin_width = psd_truth.bin_width

    metrics = {
        "truth_peak_freq": f_truth,
        "model_peak_freq": f_model,
        "bin_width": bin_width,
        "peak_distance_bins": abs(f_truth - f_model) / bin_width,
        "model_output_min": float(y_m.min()),
        "model_output_max": float(y_m.max()),
        "model_output_std": float(y_m.std()),
        "model_nonconstant": bool(y_m.std() > 1e-9 * max(1.0, abs(float(y_m.mean())))),
        "range_overlap_fraction": analysis.range_overlap_fraction(y_t, y_m),
        "alignment_shift": analysis.best_alignment_shift(y_t, y_m),
    }
    out = {
        "truth_record": truth_rec,
        "model_record": model_rec,
        "psd_truth": psd_truth,
        "psd_model": psd_model,
        "metrics": metrics,
    }
    if val.get("phase_portrait"):
        out["phase_truth"] = analysis.phase_portrait(truth_rec)
        out["phase_model"] = analysis.phase_portrait(model_rec)
    return out


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_experiment(cfg: dict, out_dir) -> dict:
    """Full pipeline; writes artifacts under ``out_dir`` and returns the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifacts = []

    record_clean = generate_record(cfg)
    noise_info = {}
    record = record_clean
    if cfg.get("noise"):
        spec = cfg["noise"]
        record, achieved = analysis.add_noise(
            record_clean,
            target_snr_db=spec.get("target_snr_db"),
            std=spec.get("std"),
            seed=cfg["seed"] + 2,
        )
        noise_info = {"achieved_snr_db": achieved}
        record_clean.save_csv(out / "record_clean.csv")
        artifacts.append("record_clean.csv")
    record.save_csv(out / "record.csv")
    artifacts.append("record.csv")

    ident = identify_from_config(cfg, record)
    ident.save(out / "model.json")
    artifacts.append("model.json")

    metrics = {}
    if cfg.get("validation"):
        result = validate_model(cfg, ident, record_clean)
        result["truth_record"].save_csv(out / "validation_truth.csv")
        result["model_record"].save_csv(out / "validation_model.csv")
        result["psd_truth"].save_csv(out / "psd_truth.csv")
        result["psd_model"].save_csv(out / "psd_model.csv")
        artifacts += ["validation_truth.csv", "validation_model.csv",
                      "psd_truth.csv", "psd_model.csv"]
        fr_model = analysis.frequency_response(ident.model.a, ident.model.b)
        fr_model.save_csv(out / "freq_response_model.csv")
        artifacts.append("freq_response_model.csv")
        if cfg["truth"]["kind"] == "dttdl":
            fr_truth = analysis.frequency_response(cfg["truth"]["a"], cfg["truth"]["b"])
            fr_truth.save_csv(out / "freq_response_truth.csv")
            artifacts.append("freq_response_truth.csv")
        if "phase_truth" in result:
            analysis.save_phase_portrait_csv(out / "phase_truth.csv", *result["phase_truth"])
            analysis.save_phase_portrait_csv(out / "phase_model.csv", *result["phase_model"])
            artifacts += ["phase_truth.csv", "phase_model.csv"]
        metrics = result["metrics"]

    manifest = {
        "schema_version": cfg["schema_version"],
        "name": cfg.get("name", ""),
        "config": cfg,
        "config_sha256": config_digest(cfg),
        "seed": cfg["seed"],
        "sesid_version": __version__,
        "kernel_backend": _kernels.BACKEND,
        "identification": ident.diagnostics,
        "noise": noise_info,
        "metrics": metrics,
        "artifacts": sorted(artifacts),
    }
    _write_json(out / "manifest.json", manifest)
    return manifest


def _sweep_cell(args):
    cfg, n_hat, d_hat, record_payload, out_dir = args
    record = SignalRecord(*record_payload)
    cell_cfg = json.loads(json.dumps(cfg))
    cell_cfg["identification"]["n_hat"] = n_hat
    cell_cfg["identification"]["d_hat"] = d_hat
    cell = Path(out_dir) / f"n{n_hat}_d{d_hat}"
    cell.mkdir(parents=True, exist_ok=True)
    row = {"n_hat": n_hat, "d_hat": d_hat, "status": "ok"}
    try:
        ident = identify_from_config(cell_cfg, record)
        ident.save(cell / "model.json")
        result = validate_model(cell_cfg, ident, record)
        result["psd_truth"].save_csv(cell / "psd_truth.csv")
        result["psd_model"].save_csv(cell / "psd_model.csv")
        row.update(
            J_LS=ident.diagnostics["J_LS"],
            J_A=ident.diagnostics["J_A"],
            peak_distance_bins=result["metrics"]["peak_distance_bins"],
            model_output_std=result["metrics"]["model_output_std"],
        )
    except Exception as exc:  # a diverging cell must not kill the sweep
        row.update(status=f"failed: {type(exc).__name__}: {exc}")
    return row


def run_sweep(cfg: dict, out_dir, n_grid, d_grid, jobs: int = 1) -> list:
    """Identify and validate over a grid of model orders and delays.

    Cells run as isolated pipelines on the shared identification record; a
    summary CSV collects one row per cell.  Failed cells are recorded, not
    fatal.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    record_clean = generate_record(cfg)
    record = record_clean
    if cfg.get("noise"):
        spec = cfg["noise"]
        record, _ = analysis.add_noise(
            record_clean, target_snr_db=spec.get("target_snr_db"),
            std=spec.get("std"), seed=cfg["seed"] + 2,
        )
    record.save_csv(out / "record.csv")
    payload = (np.asarray(record.v), np.asarray(record.y), record.sample_time)

    tasks = [(cfg, n, d, payload, str(out)) for n in n_grid for d in d_grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_cell, tasks))
    else:
        rows = [_sweep_cell(t) for t in tasks]

    import csv as _csv

    fields = ["n_hat", "d_hat", "status", "J_LS", "J_A",
              "peak_distance_bins", "model_output_std"]
    with open(out / "summary.csv", "w", newline="", encoding="utf-8") as fh:
        writer = _csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in fields})
    return rows
