"""Command-line interface.

Subcommands:
    simulate       run the configured pointing maneuver, write a trace file
    linearize      error-state matrix and blocks at an equilibrium
    eigen          eigenvalues/eigenvectors, admissibility, classification
    estimate-freq  nutation-frequency prediction (optional FFT cross-check)
    flow           batch forward/backward flows from equilibrium seeds
    fft            spectral peak of a trace-file column

Every command accepts --config for a YAML run configuration; omitted
fields use the stock setup. Exit codes: 0 success, 1 runtime failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .dynamics import BodyState, ReferenceSample, equilibria
from .flows import (antipodal_frame, convergence_check, run_flow_batch,
                    seeds_desired, seeds_saddle)
from .linearization import assemble_A, constraint_row
from .simulate import run_maneuver
from .spectral import classify_equilibrium, eig6, fft_peak, nutation_freq_estimate
from .traceio import read_trace, write_trace

__all__ = ["main", "build_parser"]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _equilibrium_state(cfg: RunConfig, which: str):
    ref = ReferenceSample.static_pointing(np.eye(3), cfg.gains.spin_rate)
    if which == "desired":
        state = BodyState(R=ref.R_d.copy(), w=ref.w_d.copy())
    else:
        state = BodyState(R=antipodal_frame(ref.R_d), w=-ref.w_d)
    return state, ref


def _eigen_report(cfg: RunConfig, which: str) -> tuple[str, object]:
    state, ref = _equilibrium_state(cfg, which)
    lin = assemble_A(state, ref, cfg.gains)
    es = classify_equilibrium(eig6(lin.A), constraint_row(state.q))
    lines = [f"equilibrium: {which}", f"classification: {es.classification}"]
    for k in range(6):
        lam = es.eigenvalues[k]
        flag = "admissible" if es.admissible[k] else "inadmissible"
        lines.append(f"lambda_{k+1} = {lam.real:+.6e} {lam.imag:+.6e}j  [{flag}]")
        vec = " ".join(f"{c.real:+.4e}{c.imag:+.4e}j" for c in es.eigenvectors[:, k])
        lines.append(f"    v_{k+1} = {vec}")
    return "\n".join(lines) + "\n", es


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if args.h is not None:
        cfg.integrator.h = args.h
    if args.decimation is not None:
        cfg.integrator.record_decimation = args.decimation
    trace = run_maneuver(cfg)
    out = Path(args.out) if args.out else cfg.output_dir / "maneuver.csv"
    write_trace(trace, out, cfg.hash)
    print(f"wrote {out} ({len(trace)} samples)")
    return 0


def cmd_linearize(args) -> int:
    cfg = load_config(args.config)
    state, ref = _equilibrium_state(cfg, args.equilibrium)
    lin = assemble_A(state, ref, cfg.gains)
    lines = [f"# spinpoint-matrix equilibrium={args.equilibrium} config={cfg.hash}"]
    for name, M in (("A", lin.A), ("tilt_tilt", lin.tilt_tilt),
                    ("tilt_rate", lin.tilt_rate), ("rate_tilt", lin.rate_tilt),
                    ("rate_rate", lin.rate_rate),
                    ("constraint", constraint_row(state.q)[None, :])):
        lines.append(name)
        for row in M:
            lines.append(",".join(_fmt(x) for x in row))
    _write_or_print("\n".join(lines) + "\n", args.out)
    return 0


def cmd_eigen(args) -> int:
    cfg = load_config(args.config)
    text, _ = _eigen_report(cfg, args.equilibrium)
    _write_or_print(text, args.out)
    return 0


def cmd_estimate_freq(args) -> int:
    cfg = load_config(args.config)
    if args.spin_rate is not None:
        cfg.gains.spin_rate = args.spin_rate
    _, es = _eigen_report(cfg, "desired")
    f_n = nutation_freq_estimate(cfg.gains.spin_rate, es)
    print(f"nutation frequency estimate: {f_n:.4f} Hz")
    if args.fft_trace:
        cols, _ = read_trace(args.fft_trace)
        if args.fft_column not in cols:
            raise ValueError(f"column {args.fft_column!r} not in {args.fft_trace}")
        t, sig = cols["t"], cols[args.fft_column]
        keep = np.isfinite(sig)
        t, sig = t[keep], sig[keep]
        fs = 1.0 / float(np.median(np.diff(t)))
        f_meas, mag = fft_peak(sig, fs)
        print(f"fft cross-check ({args.fft_column}): {f_meas:.4f} Hz (magnitude {mag:.4e})")
        print(f"difference: {abs(f_meas - f_n):.4f} Hz")
    return 0


def cmd_flow(args) -> int:
    cfg = load_config(args.config)
    ref = ReferenceSample.static_pointing(np.eye(3), cfg.gains.spin_rate)
    spec = cfg.seeds
    if args.seeds is not None:
        spec.angles = 2.0 * np.pi * np.arange(args.seeds) / args.seeds
    if args.equilibrium == "antipodal":
        state, _ = _equilibrium_state(cfg, "antipodal")
        lin = assemble_A(state, ref, cfg.gains)
        es = classify_equilibrium(eig6(lin.A), constraint_row(state.q))
        seeds, degenerate = seeds_saddle(spec, es, ref)
        if any(degenerate):
            sys.stderr.write("warning: degenerate seeds (equal to the equilibrium) "
                             f"at indices {[i for i, d in enumerate(degenerate) if d]}\n")
    else:
        seeds = seeds_desired(ref, eps=spec.eps, spin_eps=spec.spin_eps,
                              angles=spec.angles)
    traces = run_flow_batch(seeds, args.direction, args.T, cfg.integrator,
                            ref, cfg.gains)
    out_dir = Path(args.out_dir) if args.out_dir else cfg.output_dir
    for k, tr in enumerate(traces):
        path = out_dir / f"flow_{args.equilibrium}_{args.direction}_{k:02d}.csv"
        write_trace(tr, path, cfg.hash)
        line = f"wrote {path} ({len(tr)} samples"
        if tr.truncated:
            line += ", truncated"
        if args.direction == "forward":
            v = convergence_check(tr, "desired")
            line += f", final d_desired={v.final_distance:.3e}"
        print(line + ")")
    return 0


def cmd_fft(args) -> int:
    cols, _ = read_trace(args.trace)
    if args.column not in cols:
        raise ValueError(f"column {args.column!r} not found; "
                         f"available: {', '.join(cols)}")
    t, sig = cols["t"], cols[args.column]
    mask = np.isfinite(sig)
    if args.t_min is not None:
        mask &= t >= args.t_min
    if args.t_max is not None:
        mask &= t <= args.t_max
    t, sig = t[mask], sig[mask]
    if t.size < 2:
        raise ValueError("selected window holds fewer than two samples")
    fs = 1.0 / float(np.median(np.diff(t)))
    f_peak, mag = fft_peak(sig, fs)
    print(f"peak: {f_peak:.4f} Hz  magnitude: {mag:.6e}  "
          f"(n={t.size}, fs={fs:.1f} Hz)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spinpoint",
                                description="spinning-rotor pointing control analysis")
    p.add_argument("--config", help="YAML run configuration", default=None)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run the configured pointing maneuver")
    s.add_argument("--out", help="trace file path (default maneuver.csv)")
    s.add_argument("--h", type=float, help="integrator step override [s]")
    s.add_argument("--decimation", type=int, help="recording decimation override")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("linearize", help="error-state matrix at an equilibrium")
    s.add_argument("--equilibrium", choices=("desired", "antipodal"), default="desired")
    s.add_argument("--out", help="matrix file path (default stdout)")
    s.set_defaults(func=cmd_linearize)

    s = sub.add_parser("eigen", help="eigen-structure report")
    s.add_argument("--equilibrium", choices=("desired", "antipodal"), default="desired")
    s.add_argument("--out", help="report path (default stdout)")
    s.set_defaults(func=cmd_eigen)

    s = sub.add_parser("estimate-freq", help="nutation-frequency estimate")
    s.add_argument("--spin-rate", type=float, help="spin rate override [rad/s]")
    s.add_argument("--fft-trace", help="trace file for an FFT cross-check")
    s.add_argument("--fft-column", default="nutation_rate",
                   help="trace column for the cross-check")
    s.set_defaults(func=cmd_estimate_freq)

    s = sub.add_parser("flow", help="batch flows from equilibrium seeds")
    s.add_argument("--equilibrium", choices=("desired", "antipodal"), required=True)
    s.add_argument("--direction", choices=("forward", "backward"), required=True)
    s.add_argument("--seeds", type=int, help="number of ring seeds")
    s.add_argument("--T", type=float, default=0.05, help="horizon [s]")
    s.add_argument("--out-dir", help="output directory")
    s.set_defaults(func=cmd_flow)

    s = sub.add_parser("fft", help="spectral peak of a trace column")
    s.add_argument("trace", help="trace file")
    s.add_argument("--column", required=True)
    s.add_argument("--t-min", type=float, help="window start [s]")
    s.add_argument("--t-max", type=float, help="window end [s]")
    s.set_defaults(func=cmd_fft)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError, RuntimeError,
            FloatingPointError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
