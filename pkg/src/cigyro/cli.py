"""Command-line entry point: ``cigyro <command> [--config FILE] [--out DIR] [--svg]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 oracle failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import analytic, interferometry as itf
from .beams import PhaseTarget, RotationModel, gaussian_profile
from .config import DEFAULTS_TOML, ConfigError, RunConfig, load_config, sweep_positions
from .core_dynamics import compare_adiabatic
from .io import CsvTable, write_svg
from .wavepacket import MomentumGrid, NumericalFailure, init_gaussian_packet, populations, propagate

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_ORACLE = 0, 2, 3, 4


def _out(cfg: RunConfig) -> Path:
    return Path(cfg["output"]["directory"])


def _provenance(cfg: RunConfig, command: str) -> dict[str, str]:
    return {"command": command, "config_digest": cfg.digest}


def _grid(cfg: RunConfig) -> MomentumGrid:
    g = cfg["grid"]
    return MomentumGrid.symmetric(cfg.params, g["span_hk"], g["n_p"])


def _setup(cfg: RunConfig):
    b = cfg["beam"]
    if b["kind"] == "bci":
        return itf.BciSetup(cfg.params, b["delta_tau_over_tau"], PhaseTarget(b["phase_target"]))
    return itf.CiSetup(cfg.params, b["delta_l_over_l"], b["n_slices"], b["window_half_width_L"], b["scan_length_L"])


def _model(cfg: RunConfig, omega_rot: float | None = None) -> RotationModel:
    r = cfg["rotation"]
    return RotationModel(omega_rot=r["omega_rot"] if omega_rot is None else omega_rot, axis_x=r["axis_x"])


def _emit(cfg: RunConfig, table: CsvTable, name: str, xcol: str, ycols) -> None:
    path = table.write(_out(cfg) / f"{name}.csv")
    print(f"wrote {path}")
    if cfg["output"]["emit_svg"]:
        x = table.column(xcol)
        for col in ycols:
            y = table.column(col)
            if any(v is not None for v in y):
                svg = write_svg(_out(cfg) / f"{name}_{col}.svg", x, y, xcol, col, title=name)
                print(f"wrote {svg}")


def cmd_bci_analytic(cfg: RunConfig) -> int:
    a = cfg["analytic"]
    p = cfg.params
    if p.omega0 <= 0:
        raise ConfigError("omega0 > 0 required for the pulsed interferometer")
    tau = math.pi / p.omega0
    d0 = a["delta_phi0"]
    table = CsvTable(["delta_tau_over_tau", "eta", "alpha", "q"], provenance=_provenance(cfg, "bci-analytic"))
    for f in np.linspace(-0.5, 0.5, a["count"]):
        f = round(float(f), 12)
        dt = f * tau
        table.add_row([
            f,
            analytic.eta_mbci(d0, p.omega0, dt),
            analytic.signal_amplitude_mbci(p.omega0, dt),
            analytic.quality_factor_mbci(d0, p.omega0, dt),
        ])
    _emit(cfg, table, "bci_analytic", "delta_tau_over_tau", ["eta", "alpha", "q"])
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    p = cfg.params
    setup = _setup(cfg)
    schedule = setup(cfg["beam"]["phi"])
    grid = _grid(cfg)
    packet = init_gaussian_packet(grid, p)
    final, record = propagate(packet, schedule, _model(cfg), p, cfg["output"]["record_every"] or 1,
                              cfg["beam"]["doppler"])
    prov = _provenance(cfg, "simulate")
    cols = ["x_m", "centroid_a_um", "centroid_b_um", "pop_a", "pop_b", "omega_profile_arb"]
    table = CsvTable(cols, provenance=prov, nullable=frozenset({"centroid_a_um", "centroid_b_um"}))
    if cfg["beam"]["kind"] == "bci":
        edges = np.cumsum(schedule.widths) + schedule.window[0]

        def profile(x):
            i = min(int(np.searchsorted(edges, x - 1e-12 * p.L)), len(schedule) - 1)
            return schedule.slices[i].omega_eff / p.omega0
    else:
        def profile(x):
            return float(gaussian_profile(p, x) / p.omega0) if p.omega0 > 0 else 0.0
    for s in record.samples:
        table.add_row([s.x, s.centroid_a * 1e6, s.centroid_b * 1e6, s.pop_a, s.pop_b, profile(s.x)])
    _emit(cfg, table, "trajectory", "x_m", ["centroid_a_um", "centroid_b_um", "pop_b"])

    pa, pb = populations(final)
    summary = CsvTable(["pop_a", "pop_b", "norm", "transit_time_s"], provenance=prov)
    summary.add_row([pa, pb, pa + pb, final.t_elapsed])
    path = summary.write(_out(cfg) / "final_state.csv")
    print(f"wrote {path}")
    print(f"final populations: a={pa:.9f} b={pb:.9f}")
    return EXIT_OK


def cmd_scan(cfg: RunConfig) -> int:
    p = cfg.params
    setup = _setup(cfg)
    s = cfg["scan"]
    kw = dict(n_phi=s["n_phi"], grid=_grid(cfg), include_doppler=cfg["beam"]["doppler"], phase_offset=s["phase_offset"])
    static = itf.run_phase_scan(setup, _model(cfg, 0.0), p, **kw)
    rotating = itf.run_phase_scan(setup, _model(cfg), p, **kw)
    table = CsvTable(["phi_rad", "p_b_static", "p_b_rotating"], provenance=_provenance(cfg, "scan"))
    for row in zip(static.phi_values, static.p_b_values, rotating.p_b_values):
        table.add_row([float(v) for v in row])
    _emit(cfg, table, "scan", "phi_rad", ["p_b_static", "p_b_rotating"])
    fs = itf.fit_fringe(static)
    print(f"static fit: alpha={fs.amplitude_alpha:.9f} phi_min={fs.phi_min:.9f} rad residual_rms={fs.residual_rms:.3e}")
    if cfg["rotation"]["omega_rot"] != 0:
        fr = itf.fit_fringe(rotating)
        shift = itf.fringe_shift(fr, fs)
        area = itf.effective_area(shift, cfg["rotation"]["omega_rot"], p)
        print(f"fringe shift={shift:.9f} rad  A_eff={area:.6e} m^2  eta={area / analytic.bci_area(p):.6f}")
    return EXIT_OK


def run_sweep(cfg: RunConfig) -> tuple[CsvTable, list[itf.SweepPoint]]:
    p = cfg.params
    b, s = cfg["beam"], cfg["scan"]
    positions = sweep_positions(cfg)
    if b["kind"] == "bci":
        kind, xcol, extra = "mbci", "delta_tau_over_tau", {}
    else:
        kind, xcol = "ci", "delta_l_over_l"
        extra = dict(n_slices=b["n_slices"], window_half_width_L=b["window_half_width_L"], scan_length_L=b["scan_length_L"])
    points = itf.sweep_phase_start(
        p, positions, kind=kind, omega_rot=cfg["rotation"]["omega_rot"], S0=s["S0"], n_phi=s["n_phi"],
        grid=_grid(cfg), include_doppler=b["doppler"], workers=cfg["sweep"]["workers"], **extra,
    )
    cols = [xcol, "alpha", "area_eff_m2", "eta", "q", "omega_mm_rad_s", "error"]
    table = CsvTable(cols, provenance=_provenance(cfg, "sweep"),
                     nullable=frozenset(cols[1:6]), text=frozenset({"error"}))
    for pt in points:
        r = pt.report
        if r is None:
            table.add_row([pt.position, None, None, None, None, None, pt.error])
            continue
        err = "" if math.isfinite(r.omega_mm) else "omega_mm undefined: zero effective area"
        table.add_row([pt.position, r.alpha, r.area_eff, r.eta, r.quality_q,
                       r.omega_mm if math.isfinite(r.omega_mm) else None, err])
    return table, points


def cmd_sweep(cfg: RunConfig) -> int:
    table, points = run_sweep(cfg)
    _emit(cfg, table, "sweep", table.header[0], ["alpha", "area_eff_m2", "eta", "q"])
    failed = [pt for pt in points if pt.report is None]
    for pt in failed:
        print(f"point {pt.position}: {pt.error}", file=sys.stderr)
    if points and len(failed) == len(points):
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_oracle_check(cfg: RunConfig) -> int:
    o = cfg["oracle"]
    table = CsvTable(
        ["delta0_over_omega1", "pop_b_two_level", "pop_b_three_level", "discrepancy", "max_xi2", "max_xi2_estimate"],
        provenance=_provenance(cfg, "oracle-check"),
    )
    ladder = sorted(o["ladder"])
    rows = []
    for ratio in ladder:
        c = compare_adiabatic(cfg.params, ratio, n_slices=o["n_slices"],
                              window_half_width=cfg["beam"]["window_half_width_L"] * cfg.params.L)
        rows.append(c)
        table.add_row([ratio, c.pop_b_two_level, c.pop_b_three_level, c.discrepancy, c.max_xi2, c.max_xi2_estimate])
        print(f"delta0/Omega1={ratio:g}: discrepancy={c.discrepancy:.3e} max|xi|^2={c.max_xi2:.3e} (estimate {c.max_xi2_estimate:.3e})")
    _emit(cfg, table, "oracle_check", "delta0_over_omega1", ["discrepancy"])
    if rows[-1].discrepancy > o["threshold"]:
        print(f"oracle failure: far-detuned discrepancy {rows[-1].discrepancy:.3e} > {o['threshold']:g}", file=sys.stderr)
        return EXIT_ORACLE
    return EXIT_OK


def cmd_report(cfg: RunConfig) -> int:
    """Analytic tables, the phase-start sweep and the oracle ladder in one go."""
    code = cmd_bci_analytic(cfg)
    table, points = run_sweep(cfg)
    _emit(cfg, table, "sweep", table.header[0], ["alpha", "area_eff_m2", "eta", "q"])
    good = [pt for pt in points if pt.report is not None]
    if good:
        best = max(good, key=lambda pt: pt.report.alpha)
        print(f"max contrast {best.report.alpha:.4f} at {table.header[0]}={best.position:+.2f}")
        worst = min(good, key=lambda pt: pt.report.quality_q)
        print(f"min Q {worst.report.quality_q:.4f} at {table.header[0]}={worst.position:+.2f}")
    oracle = cmd_oracle_check(cfg)
    return max(code, oracle, EXIT_OK if good else EXIT_NUMERICAL)


COMMANDS = {
    "bci-analytic": cmd_bci_analytic,
    "simulate": cmd_simulate,
    "scan": cmd_scan,
    "sweep": cmd_sweep,
    "oracle-check": cmd_oracle_check,
    "report": cmd_report,
}


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", metavar="PATH", default=d, help="TOML configuration file")
    parser.add_argument("--out", metavar="DIR", default=d, help="output directory (overrides output.directory)")
    parser.add_argument("--svg", action="store_true", default=argparse.SUPPRESS if suppress else False,
                        help="also write SVG line charts")
    parser.add_argument("--seedless", action="store_true", default=argparse.SUPPRESS if suppress else False,
                        help=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cigyro", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    parser.add_argument("--print-defaults", action="store_true", help="print the default configuration and exit")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    for name, fn in COMMANDS.items():
        sp = sub.add_parser(name, help=(fn.__doc__ or "").strip().splitlines()[0] if fn.__doc__ else None)
        _global_flags(sp, suppress=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_defaults:
        sys.stdout.write(DEFAULTS_TOML)
        return EXIT_OK
    if args.seedless:
        print("error: --seedless is reserved; the simulation uses no random numbers", file=sys.stderr)
        return EXIT_CONFIG
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        overrides = {}
        if args.out is not None:
            overrides["directory"] = args.out
        if args.svg:
            overrides["emit_svg"] = True
        if overrides:
            cfg = cfg.with_overrides("output", **overrides)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
