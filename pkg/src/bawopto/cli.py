"""``bawopto`` command line.

Exit status: 0 success, 1 invalid config or inputs, 2 file or trace I/O problems.
"""
from __future__ import annotations

import argparse
import sys

from . import coupling, readout
from .config import ConfigError, load_config
from .effmass import ConvergenceError, ModeShapeSpec, QuadratureSpec, effective_mass, gaussian_mass_closed_form
from .fitting import FitError, fit_lorentzian, lorentzian
from .model import Spectrum, SystemConfig
from .report import cmd_check, format_machine, format_text, write_report
from .traceio import TraceFormatError, read_trace_csv, write_trace_csv

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class UsageError(ValueError):
    pass


def _sci(x) -> str:
    return "-" if x is None else f"{x:.5e}"


def _table(header, rows) -> str:
    cells = [tuple(header)] + [tuple(r) for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells)


def run_check(args) -> int:
    config = load_config(args.config)
    report = cmd_check(config)
    if args.out:
        write_report(report, args.out, args.format)
    else:
        sys.stdout.write(format_machine(report) if args.format == "machine" else format_text(report))
    return EXIT_OK


def run_coupling(args) -> int:
    config = load_config(args.config)
    kappa = config.cavity.kappa_c
    rows = []
    for entry in config.modes:
        m = entry.mode
        x = coupling.zero_point_fluctuation(m.f_m, m.m_eff, config.constants)
        g = coupling.pull_factor(entry.pull_samples) if entry.pull_samples else entry.pull_factor_g
        g0_meas = coupling.coupling_rate(g, x) if g is not None else None
        g0_tab = config.reference(f"{m.label}.g0")
        g0 = g0_meas if g0_meas is not None else g0_tab
        c0 = coupling.cooperativity(g0, m.gamma_m, kappa) if g0 is not None else None
        k_m = entry.bvd.k_m if entry.bvd is not None else None
        rows.append((m.label, _sci(m.f_m), _sci(m.m_eff), _sci(x), _sci(x / 2), _sci(k_m),
                     _sci(g), _sci(g0_meas), _sci(g0_tab), _sci(c0)))
    print(_table(("mode", "f_m[Hz]", "m_eff[kg]", "x_zpf[m]", "x_zpf_conv[m]", "k_m[C/m]",
                  "G[Hz/m]", "g0_G[Hz]", "g0_table[Hz]", "C0"), rows))
    print(f"kappa_c = {_sci(kappa)} Hz   q_unloaded = {_sci(config.cavity.q_unloaded)}")
    if config.overlap is not None:
        print(f"overlap_ratio = {coupling.overlap_ratio(*config.overlap):.6g}")
    return EXIT_OK


def run_effmass(args) -> int:
    config = load_config(args.config)
    quad = QuadratureSpec(args.radial_points, args.axial_points)
    rows = []
    for entry in config.modes:
        m = entry.mode
        r0 = args.r0 if args.r0 is not None else entry.envelope_waist_r0
        if r0 is None:
            continue
        n = entry.overtone_n or m.indices[0] or 1
        spec = ModeShapeSpec(n, r0)
        quad_mass = effective_mass(spec, config.geometry, config.material, quad)
        closed = gaussian_mass_closed_form(spec, config.geometry, config.material)
        rows.append((m.label, str(n), _sci(r0), _sci(quad_mass), _sci(closed), _sci(m.m_eff),
                     f"{quad_mass / m.m_eff:.4g}"))
    if not rows:
        raise UsageError("no mode carries envelope_waist_r0; pass --r0")
    print(_table(("mode", "n", "r0[m]", "m_eff_quad[kg]", "closed_form[kg]", "m_eff_table[kg]",
                  "model/table"), rows))
    return EXIT_OK


def _mode_for(config: SystemConfig, label: str | None):
    if label is None:
        if len(config.modes) != 1:
            raise UsageError("config has several modes; choose one with --mode")
        return config.modes[0]
    try:
        return config.mode(label)
    except KeyError as exc:
        raise UsageError(str(exc)) from None


def run_simulate(args) -> int:
    config = load_config(args.config)
    entry = _mode_for(config, args.mode)
    mode = entry.mode

    if args.kind == "sidebands":
        x = coupling.zero_point_fluctuation(mode.f_m, mode.m_eff, config.constants)
        g = _pull_factor_or_implied(config, entry, x)
        k_m = _k_m(entry)
        voltage = args.voltage if args.voltage is not None else (config.readout.drive_voltage or 1.0)
        amp, _ = readout.driven_response(mode, k_m, readout.DriveSpec(voltage, mode.f_m))
        deviation = args.peak_deviation if args.peak_deviation is not None else g * amp
        max_order = args.max_order or int(deviation / mode.f_m) + 20
        spectrum = readout.fm_sideband_spectrum(config.cavity.f_c, deviation, mode.f_m, max_order)
        write_trace_csv(spectrum, args.out)
        return EXIT_OK

    k_m = _k_m(entry)
    x = coupling.zero_point_fluctuation(mode.f_m, mode.m_eff, config.constants)
    g = _pull_factor_or_implied(config, entry, x)
    k_phi = args.k_phi if args.k_phi is not None else (config.readout.k_phi or 1.0)
    disc = readout.DiscriminatorSpec(k_phi, config.cavity.q_loaded, config.cavity.f_c)
    voltage = args.voltage if args.voltage is not None else (config.readout.drive_voltage or 1.0)
    if args.grid:
        freqs = read_trace_csv(args.grid).frequencies
    else:
        freqs = readout.default_grid(mode, args.points, args.span)
    trace = readout.mixer_output_trace(mode, k_m, disc, g, readout.drive_sweep(voltage, freqs),
                                       noise=args.noise, seed=args.seed)
    write_trace_csv(trace, args.out)
    return EXIT_OK


def _k_m(entry) -> float:
    if entry.bvd is None or entry.bvd.k_m is None:
        raise UsageError(f"mode {entry.label} has no r_m; k_m cannot be formed")
    return entry.bvd.k_m


def _pull_factor_or_implied(config: SystemConfig, entry, x_zpf: float) -> float:
    if entry.pull_samples:
        return coupling.pull_factor(entry.pull_samples)
    if entry.pull_factor_g is not None:
        return entry.pull_factor_g
    g0 = config.reference(f"{entry.label}.g0")
    if g0 is not None:
        return g0 / x_zpf
    raise UsageError(f"mode {entry.label} has neither pull_factor_g nor a reference g0")


def run_fit(args) -> int:
    trace = read_trace_csv(args.infile, convention=args.convention)
    result = fit_lorentzian(trace)
    print(f"f0        = {result.f0:.10g} Hz")
    print(f"fwhm      = {result.fwhm:.6g} Hz")
    print(f"q_loaded  = {result.q_loaded:.6g}")
    print(f"amplitude = {result.amplitude:.6g}")
    print(f"baseline  = {result.baseline:.6g}")
    print(f"residual  = {result.residual_rms:.3g}")
    print(f"converged = {result.converged} ({result.iterations} iterations, {result.convention} line shape)")
    if args.config:
        config = load_config(args.config)
        entry = _mode_for(config, args.mode)
        q_m = entry.mode.q_m
        print(f"config q_m = {q_m:.6g}  (fit/config = {result.q_loaded / q_m:.6g})")
    if args.out:
        fitted = lorentzian(trace.frequencies, *result.params, convention=result.convention)
        write_trace_csv(Spectrum(trace.frequencies, fitted), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bawopto", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="compare recomputed quantities with reference values")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("text", "machine"), default="text")
    p.set_defaults(func=run_check)

    p = sub.add_parser("coupling", help="x_zpf, k_m, G, g0 and C0 per mode")
    p.add_argument("--config", required=True)
    p.set_defaults(func=run_coupling)

    p = sub.add_parser("effmass", help="effective mass of the Gaussian trapped-mode model")
    p.add_argument("--config", required=True)
    p.add_argument("--r0", type=float, help="override envelope waist (m) for every mode")
    p.add_argument("--radial-points", type=int, default=256)
    p.add_argument("--axial-points", type=int, default=256)
    p.set_defaults(func=run_effmass)

    p = sub.add_parser("simulate", help="write a simulated mixer trace or FM sideband spectrum")
    p.add_argument("--config", required=True)
    p.add_argument("--mode")
    p.add_argument("--out", required=True)
    p.add_argument("--in", dest="grid", help="CSV whose freq_hz column is the sweep grid")
    p.add_argument("--kind", choices=("mixer", "sidebands"), default="mixer")
    p.add_argument("--voltage", type=float)
    p.add_argument("--k-phi", type=float)
    p.add_argument("--noise", type=float, default=0.0, help="noise std as a fraction of the peak")
    p.add_argument("--seed", type=int)
    p.add_argument("--points", type=int, default=2001)
    p.add_argument("--span", type=float, default=10.0, help="half-span in linewidths")
    p.add_argument("--max-order", type=int, help="default: modulation index + 20")
    p.add_argument("--peak-deviation", type=float, help="Hz; default from the drive response")
    p.set_defaults(func=run_simulate)

    p = sub.add_parser("fit", help="fit a Lorentzian line to a trace CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", help="write the fitted curve here")
    p.add_argument("--config")
    p.add_argument("--mode")
    p.add_argument("--convention", choices=("power", "amplitude"), default="amplitude",
                   help="amplitude for voltage-magnitude traces (simulate output)")
    p.set_defaults(func=run_fit)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", None) is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except (OSError, TraceFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, UsageError, FitError, ConvergenceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
