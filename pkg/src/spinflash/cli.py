"""Command-line harness.

    spinflash [--config PATH] [--seed N] [--jobs N] [--out DIR] COMMAND ...

Every invocation writes one timestamped directory under ``--out`` holding the
config snapshot, a log and the command's CSV/JSON outputs.  Exit codes: 0 on
success, 1 on a simulation error or a failed report check, 2 on a config or
usage error.
"""

import argparse
import csv
import datetime
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from .adc import N_LEVELS, run_conventional, run_interleaved, write_conversion_log
from .config import load_config
from .device import critical_current
from .errors import AboveCurie, ConfigError, InfeasibleWidth, SpinAdcError
from .llg import MagnetizationState, integrate
from .metrics import (dnl_inl, measure_transfer, monte_carlo_switching, throughput_and_power,
                      trial_rngs)
from .switching import AP, classify, single_switch_waveform

log = logging.getLogger("spinflash")

MIN_COMPARE_SAMPLES = 10


def _make_run_dir(base, command):
    stamp = datetime.datetime.now().strftime("%Y%m%d-%H%M%S")
    base = Path(base)
    base.mkdir(parents=True, exist_ok=True)
    run = base / f"{stamp}_{command}"
    k = 1
    while run.exists():
        run = base / f"{stamp}_{command}_{k}"
        k += 1
    run.mkdir()
    return run


def _write_json(path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _grid(text, scale=1.0):
    """``start:stop:n`` or a single value."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return np.array([float(parts[0]) * scale])
        start, stop, n = float(parts[0]), float(parts[1]), int(parts[2])
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"bad range {text!r}; expected start:stop:n") from exc
    if n < 1:
        raise ConfigError(f"range {text!r} is empty")
    return np.linspace(start, stop, n) * scale


def cmd_switch(args, cfg, run):
    dev = cfg.device_config()
    icfg = cfg.integrator_config()
    wf = single_switch_waveform(i_sot=args.isot, v_bias=args.vbias, t_end=args.t_end)
    thermal = cfg.thermal_model()
    if args.thermal is not None:
        thermal = type(thermal)(enabled=args.thermal == "on", temperature=thermal.temperature,
                                bias_heating=thermal.bias_heating)
    noisy = thermal.active(dev)
    rngs = trial_rngs(cfg.seed, args.trials)
    summary = {"i_sot_A": args.isot, "v_bias_V": args.vbias, "thermal": noisy,
               "trials": args.trials, "runs": []}
    for i in range(args.trials):
        state = MagnetizationState(m=[0.0, 0.0, -1.0], rng=rngs[i])
        traj = integrate(state, dev, wf, icfg, thermal=thermal)
        name = f"trajectory_{i:04d}.csv"
        traj.to_csv(run / name)
        mz = float(traj.m[-1, 2])
        state_name = classify(mz)
        summary["runs"].append({
            "file": name,
            "switched": state_name == AP,
            "switch_time_s": traj.last_crossing,
            "mz_start": float(traj.m[0, 2]),
            "mz_end": mz,
            "final_state": state_name,
        })
    states = [r["final_state"] for r in summary["runs"]]
    summary["outcomes"] = {s: states.count(s) for s in sorted(set(states))}
    _write_json(run / "summary.json", summary)
    for r in summary["runs"][:5]:
        t = r["switch_time_s"]
        print(f"{r['file']}: final {r['final_state']:<13} m_z {r['mz_end']:+.4f}  "
              f"last crossing {'none' if t is None else f'{t * 1e9:.3f} ns'}")
    print("outcomes:", summary["outcomes"])
    return 0


def cmd_sweep_ic(args, cfg, run):
    dev = cfg.device_config()
    widths = _grid(args.widths)
    biases = _grid(args.biases)
    failures = 0
    with open(run / "ic_sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["width_nm", "vbias_V", "ic_uA", "error"])
        for v in biases:
            for wn in widths:
                try:
                    if not 10.0 <= wn <= 500.0:
                        raise InfeasibleWidth(f"width {wn:g} nm outside [10, 500] nm")
                    ic = critical_current(dev, v, w_hm=wn * 1e-9)
                    w.writerow([f"{wn:.6g}", f"{v:.6g}", f"{ic * 1e6:.12g}", ""])
                except (InfeasibleWidth, AboveCurie) as exc:
                    failures += 1
                    w.writerow([f"{wn:.6g}", f"{v:.6g}", "", type(exc).__name__])
                    log.warning("row width=%g nm bias=%g V: %s", wn, v, exc)
    print(f"wrote {len(widths) * len(biases)} rows to {run / 'ic_sweep.csv'}"
          f" ({failures} failed)")
    return 0


def cmd_ramp(args, cfg, run):
    if args.mismatch is not None:
        cfg.bank.mismatch_sigma = args.mismatch
    adc = cfg.flash_adc(jobs=args.jobs, thermal=args.thermal)
    i_stop = cfg.bank.i_max + (cfg.bank.i_max - cfg.bank.i_min) / (N_LEVELS - 1)
    curve = measure_transfer(adc, 0.0, i_stop, args.steps)
    report = dnl_inl(curve)
    schedule = cfg.phase_schedule(args.arch)
    samples = list(np.linspace(0.0, i_stop, args.samples))
    runner = run_conventional if args.arch == "conventional" else run_interleaved
    records = runner(samples, adc, schedule)
    write_conversion_log(records, run / "conversion.csv")
    summary = throughput_and_power(records)
    out = {"architecture": args.arch, "mismatch_sigma": cfg.bank.mismatch_sigma,
           "mismatch_seed": cfg.bank.mismatch_seed,
           "thresholds_A": curve.thresholds, "dnl_inl": report.to_dict(),
           "throughput": summary.to_dict()}
    _write_json(run / "report.json", out)
    print(report.to_text())
    print(summary.to_text())
    return 0 if report.ok else 1


def cmd_montecarlo(args, cfg, run):
    dev = cfg.device_config()
    i_sot = args.isot if args.isot is not None else args.overdrive * critical_current(dev, 0.0)
    rep = monte_carlo_switching(dev, i_sot, args.vbias, args.trials, cfg.seed,
                                temperature=args.temperature, protocol=cfg.switch_protocol(),
                                cfg=cfg.integrator_config(), jobs=args.jobs)
    (run / "montecarlo.json").write_text(rep.to_json() + "\n")
    print(rep.to_text())
    return 0 if rep.ok else 1


def sampled_sinusoid(n, i_min, i_max, cycles=3):
    mid = 0.5 * (i_min + i_max)
    amp = 0.5 * (i_max - i_min)
    k = np.arange(n)
    return list(mid + amp * np.sin(2 * math.pi * cycles * (k + 0.5) / n))


def cmd_compare_arch(args, cfg, run):
    adc = cfg.flash_adc(jobs=args.jobs)
    i_stop = cfg.bank.i_max + (cfg.bank.i_max - cfg.bank.i_min) / (N_LEVELS - 1)
    samples = sampled_sinusoid(args.samples, 0.0, i_stop)
    conv = run_conventional(samples, adc, cfg.phase_schedule("conventional"))
    inter = run_interleaved(samples, adc, cfg.phase_schedule("interleaved"))
    sc, si = throughput_and_power(conv), throughput_and_power(inter)
    agree = sum(a.binary == b.binary for a, b in zip(conv, inter)) / len(samples)
    out = {"samples": len(samples),
           "conventional": sc.to_dict(), "interleaved": si.to_dict(),
           "throughput_ratio": si.throughput / sc.throughput,
           "code_agreement": agree,
           "errors_conventional": sum(len(r.errors) for r in conv),
           "errors_interleaved": sum(len(r.errors) for r in inter)}
    _write_json(run / "compare.json", out)
    write_conversion_log(conv, run / "conversion_conventional.csv")
    write_conversion_log(inter, run / "conversion_interleaved.csv")
    print(f"{'':<14}{'conventional':>16}{'interleaved':>16}")
    print(f"{'rate (MS/s)':<14}{sc.throughput / 1e6:>16.2f}{si.throughput / 1e6:>16.2f}")
    print(f"{'power (uW)':<14}{sc.average_power * 1e6:>16.2f}{si.average_power * 1e6:>16.2f}")
    print(f"throughput ratio {out['throughput_ratio']:.4f}, code agreement {agree * 100:.1f}%")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="spinflash", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON or TOML run configuration")
    p.add_argument("--seed", type=int, help="master seed (overrides config and SPINADC_SEED)")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker threads")
    p.add_argument("--out", help="output root directory (default: config out_dir)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("switch", help="single-device switching trajectory")
    s.add_argument("--isot", type=float, default=40e-6, help="SOT current (A)")
    s.add_argument("--vbias", type=float, default=0.0, help="MTJ bias (V)")
    s.add_argument("--thermal", choices=("on", "off"), help="override the config noise switch")
    s.add_argument("--trials", type=int, default=1)
    s.add_argument("--t-end", type=float, default=5e-9, help="simulated time (s)")
    s.set_defaults(func=cmd_switch)

    s = sub.add_parser("sweep-ic", help="critical current over width and bias")
    s.add_argument("--widths", default="50:350:7", help="nm, start:stop:n")
    s.add_argument("--biases", default="0:0.4:5", help="V, start:stop:n")
    s.set_defaults(func=cmd_sweep_ic)

    s = sub.add_parser("ramp", help="transfer curve, DNL/INL and a conversion log")
    s.add_argument("--arch", choices=("conventional", "interleaved"), default="interleaved")
    s.add_argument("--steps", type=int, default=512, help="ramp points (>= 64 per code)")
    s.add_argument("--samples", type=int, default=64, help="pipeline samples in the log")
    s.add_argument("--mismatch", type=float, help="relative width sigma (overrides config)")
    s.add_argument("--thermal", action="store_true", help="keep the config's thermal noise")
    s.set_defaults(func=cmd_ramp)

    s = sub.add_parser("montecarlo", help="thermal switching error rate")
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--overdrive", type=float, default=1.2, help="drive in units of Ic(0)")
    s.add_argument("--isot", type=float, help="absolute drive (A); overrides --overdrive")
    s.add_argument("--vbias", type=float, default=0.0)
    s.add_argument("--temperature", type=float, help="K (default: device T0)")
    s.set_defaults(func=cmd_montecarlo)

    s = sub.add_parser("compare-arch", help="conventional vs interleaved on a sinusoid")
    s.add_argument("--samples", type=int, default=100)
    s.set_defaults(func=cmd_compare_arch)
    return p


def _validate(args, parser):
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    if args.command in ("switch", "montecarlo") and args.trials < 1:
        parser.error("--trials must be >= 1")
    if args.command == "compare-arch" and args.samples < MIN_COMPARE_SAMPLES:
        parser.error(f"--samples must be >= {MIN_COMPARE_SAMPLES}")
    if args.command == "ramp" and args.samples < 2:
        parser.error("--samples must be >= 2")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(args, parser)
    console = logging.StreamHandler()
    console.setLevel(logging.DEBUG if args.verbose else logging.WARNING)
    console.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    log.addHandler(console)
    log.propagate = False
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        run = _make_run_dir(args.out or cfg.out_dir, args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    handler = logging.FileHandler(run / "run.log")
    handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO)
    (run / "config.json").write_text(cfg.to_json() + "\n")
    log.info("command %s, seed %d", args.command, cfg.seed)
    try:
        code = args.func(args, cfg, run)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        print(f"config error: {exc}", file=sys.stderr)
        code = 2
    except SpinAdcError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        print(f"simulation error ({type(exc).__name__}): {exc}", file=sys.stderr)
        code = 1
    finally:
        log.removeHandler(handler)
        handler.close()
    print(f"outputs in {run}")
    return code


if __name__ == "__main__":
    sys.exit(main())
