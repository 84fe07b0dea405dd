# -*- coding: utf-8 -*-
"""Application entry point: argument parsing, logging setup, dispatch.

Exit codes: 0 success, 2 configuration error, 3 numerical error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from typing import Dict, Optional, Sequence

import numpy as np

from spin_sbs import config
from spin_sbs.core.ensemble import run_experiment
from spin_sbs.core.errors import ConfigError, OutputError, ValidationError
from spin_sbs.core.measurement_limit import (
    CoherentGammaParams,
    extract_axial_coefficients,
    gamma_general,
    gamma_pure,
)
from spin_sbs.core.model import (
    BOUND_COLUMNS,
    GAMMA_GENERAL_COLUMNS,
    GAMMA_PURE_COLUMNS,
    SHORT_TIME_COLUMNS,
    THERMAL_COLUMNS,
    ResultTable,
    complex_rows,
    ensemble_table,
    extension,
)
from spin_sbs.core.sbs import (
    ThermalEnvironment,
    fidelity_short_time,
    gamma_short_time,
    macrofraction_fidelity,
    quantum_fisher_information,
    sbs_bound,
    sz_variance_thermal,
    total_decoherence_factor,
)
from spin_sbs.core.settings import (
    ScenarioConfig,
    ScenarioMode,
    config_to_dict,
    key_of,
    parse_config,
    read_ini,
    save_config,
)
from spin_sbs.core.spin import SpinState, SystemState, spin_coherent_state, thermal_state
from spin_sbs.core.thermal import ThermalParams, fidelity_thermal, gamma_thermal
from spin_sbs.io.run_writer import RunWriter
from spin_sbs.utils.logging_setup import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

# (flag, ScenarioConfig key, help); every value is parsed by the scenario schema
_PHYSICS_FLAGS = (
    ("--seed", "scenario/seed", "base seed (unsigned 64-bit)"),
    ("--out", "scenario/out", "output directory"),
    ("--format", "scenario/format", "csv | json-lines"),
    ("--j-s", "spin/j_s", "central spin, e.g. 1/2"),
    ("--j", "spin/j", "environment spin for single-spin commands"),
    ("--j-list", "spin/j_list", "environment spins, e.g. \"1/2 1 3/2\""),
    ("--m", "spin/m", "pointer magnetic number m"),
    ("--m-prime", "spin/m_prime", "pointer magnetic number m'"),
    ("--theta", "spin/theta", "coherent-state polar angle (rad)"),
    ("--phi", "spin/phi", "coherent-state azimuth (rad)"),
    ("--beta-omega", "environment/beta_omega", "beta * Omega"),
    ("--g", "environment/g", "coupling g / Omega for single-spin commands"),
    ("--tunneling", "environment/tunneling", "per-spin Omega_k / Omega, space separated"),
    ("--g-low", "coupling/low", "lower bound of uniform couplings"),
    ("--g-high", "coupling/high", "upper bound of uniform couplings"),
    ("--unobserved-size", "layout/unobserved_size", "spins in E_unobs"),
    ("--fraction-size", "layout/fraction_size", "spins per macrofraction"),
    ("--fractions", "layout/fractions", "number of macrofractions"),
    ("--realizations", "ensemble/realizations", "number of coupling draws"),
    ("--realization-offset", "ensemble/realization_offset", "first realization index"),
    ("--workers", "ensemble/workers", "worker threads"),
    ("--sample-realization", "ensemble/sample_realization", "realization shown as the sample curve"),
    ("--t", "time/t", "single time (overrides the grid)"),
    ("--t-start", "time/start", "grid start"),
    ("--t-stop", "time/stop", "grid stop"),
    ("--t-points", "time/points", "grid points"),
)

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def _dest(flag: str) -> str:
    return "opt_" + flag.lstrip("-").replace("-", "_")


# ----- commands -----

def _emit(table: ResultTable, name: str, cfg: ScenarioConfig, writer: RunWriter) -> str:
    text = table.render(cfg.format)
    if cfg.t is not None:
        sys.stdout.write(text)
    return writer.write_text(name + extension(cfg.format), text)


def _svg(args, writer: RunWriter, name: str, x, series, title: str, y_label: str) -> None:
    if not args.svg:
        return
    from spin_sbs.ui.svg_chart import write_svg_chart
    writer.adopt(write_svg_chart(writer.path(name + ".svg"), x, series, title=title, y_label=y_label))


def cmd_gamma_pure(cfg: ScenarioConfig, args, writer: RunWriter) -> None:
    t = cfg.time_grid()
    params = CoherentGammaParams(j=cfg.j, theta=cfg.theta, g=cfg.g, t=t, delta_m=cfg.m - cfg.m_prime)
    values = np.atleast_1d(gamma_pure(params))
    table = ResultTable(GAMMA_PURE_COLUMNS)
    complex_rows(table, t, cfg.j, values, cfg.theta)
    _emit(table, "gamma_pure", cfg, writer)
    _svg(args, writer, "gamma_pure", t, [(f"j={cfg.j}", np.abs(values))], "coherent environment", "|gamma|")


def initial_state(kind: str, cfg: ScenarioConfig) -> SpinState:
    if kind == "mixed":
        return SpinState.maximally_mixed(cfg.j)
    if kind == "thermal-z":
        return thermal_state(cfg.j, cfg.beta_omega, axis="z")
    if kind == "thermal-x":
        return thermal_state(cfg.j, cfg.beta_omega)
    if kind == "coherent":
        return spin_coherent_state(cfg.j, cfg.theta, cfg.phi)
    raise ValidationError(f"unknown initial state {kind!r}")


def cmd_gamma_general(cfg: ScenarioConfig, args, writer: RunWriter) -> None:
    t = cfg.time_grid()
    coeffs = extract_axial_coefficients(initial_state(args.state, cfg))
    values = np.atleast_1d(gamma_general(coeffs, cfg.g, t, cfg.m - cfg.m_prime))
    table = ResultTable(GAMMA_GENERAL_COLUMNS)
    complex_rows(table, t, cfg.j, values)
    _emit(table, "gamma_general", cfg, writer)
    _svg(args, writer, "gamma_general", t, [(f"j={cfg.j}", np.abs(values))], args.state, "|gamma|")


def cmd_thermal(cfg: ScenarioConfig, args, writer: RunWriter) -> None:
    t = cfg.time_grid()
    params = ThermalParams(j=cfg.j, beta_omega=cfg.beta_omega, g_over_omega=cfg.g,
                           m=cfg.m, m_prime=cfg.m_prime, t=t, j_s=cfg.j_s)
    gam = np.atleast_1d(gamma_thermal(params))
    fid = np.atleast_1d(fidelity_thermal(params))
    table = ResultTable(THERMAL_COLUMNS)
    for ti, gv, fv in zip(t, gam, fid):
        gv = complex(gv)
        table.add_row(float(ti), cfg.j, gv.real, gv.imag, abs(gv), float(fv))
    _emit(table, "thermal", cfg, writer)
    _svg(args, writer, "thermal", t, [("|gamma|", np.abs(gam)), ("F", fid)],
         f"thermal environment j={cfg.j}", "")


def _averaged_charts(args, writer: RunWriter, run, prefix: str) -> None:
    t = run.time_grid
    _svg(args, writer, prefix + "_decoherence", t,
         [(f"j={j}", s.mean_abs_gamma) for j, s in run.series.items()], "averaged |Gamma|", "|Gamma|")
    _svg(args, writer, prefix + "_fidelity", t,
         [(f"j={j}", s.mean_fidelity[0]) for j, s in run.series.items()], "averaged F mac", "F")


def cmd_ensemble(cfg: ScenarioConfig, args, writer: RunWriter) -> None:
    run = run_experiment(cfg.experiment())
    table = ensemble_table(run, realizations=range(len(run.realization_indices)), average=True)
    _emit(table, "ensemble", cfg, writer)
    _averaged_charts(args, writer, run, "ensemble")


def cmd_demo(cfg: ScenarioConfig, args, writer: RunWriter) -> None:
    run = run_experiment(cfg.experiment())
    fmt = cfg.format
    sample = ensemble_table(run, realizations=[cfg.sample_realization], average=False)
    writer.write_text("fig1_sample" + extension(fmt), sample.render(fmt))
    writer.write_text("fig1_average" + extension(fmt), ensemble_table(run).render(fmt))
    _averaged_charts(args, writer, run, "fig1_average")


def _sample_layout(cfg: ScenarioConfig):
    exp = cfg.experiment()
    return exp.layout(exp.realization_offset + cfg.sample_realization)


def cmd_sbs_bound(cfg: ScenarioConfig, args, writer: RunWriter) -> None:
    t = cfg.time_grid()
    layout = _sample_layout(cfg)
    system = SystemState.equal_superposition(cfg.j_s, cfg.m, cfg.m_prime)
    table = ResultTable(BOUND_COLUMNS)
    curves = []
    for j in cfg.j_list:
        report = sbs_bound(system, layout, ThermalEnvironment(j, cfg.beta_omega), t)
        abs_gamma = np.atleast_1d(report.per_pair[(cfg.m, cfg.m_prime)].abs_gamma)
        dec = np.atleast_1d(report.decoherence_term)
        dis = np.atleast_1d(report.distinguishability_term)
        for k, ti in enumerate(t):
            table.add_row(float(ti), j, float(abs_gamma[k]), float(dec[k]), float(dis[k]),
                          float(dec[k] + dis[k]))
        curves.append((f"j={j}", dec + dis))
    _emit(table, "sbs_bound", cfg, writer)
    _svg(args, writer, "sbs_bound", t, curves, "SBS distance bound", "bound")


def cmd_short_time(cfg: ScenarioConfig, args, writer: RunWriter) -> None:
    t = cfg.time_grid()
    layout = _sample_layout(cfg)
    dm = cfg.m - cfg.m_prime
    frac = layout.macrofractions[0]
    g2_unobs, g2_mac = layout.mean_g2(layout.unobserved), layout.mean_g2(frac)
    table = ResultTable(SHORT_TIME_COLUMNS)
    for j in cfg.j_list:
        env = ThermalEnvironment(j, cfg.beta_omega)
        exact_g = np.atleast_1d(np.abs(total_decoherence_factor(layout, env, cfg.m, cfg.m_prime, t)))
        exact_f = np.atleast_1d(macrofraction_fidelity(layout, env, 0, cfg.m, cfg.m_prime, t))
        short_g = np.atleast_1d(gamma_short_time(len(layout.unobserved), g2_unobs, dm, t, j, cfg.beta_omega))
        short_f = np.atleast_1d(fidelity_short_time(len(frac), g2_mac, dm, t, j, cfg.beta_omega))
        sz2 = sz_variance_thermal(j, cfg.beta_omega)
        qfi = quantum_fisher_information(j, cfg.beta_omega)
        for k, ti in enumerate(t):
            table.add_row(float(ti), j, float(exact_g[k]), float(short_g[k]),
                          float(exact_f[k]), float(short_f[k]), sz2, qfi)
    _emit(table, "short_time", cfg, writer)


_COMMANDS = {
    "gamma-pure": (ScenarioMode.MEASUREMENT_LIMIT, cmd_gamma_pure,
                   "decoherence factor of a spin-coherent environment (measurement limit)"),
    "gamma-general": (ScenarioMode.MEASUREMENT_LIMIT, cmd_gamma_general,
                      "decoherence factor of an arbitrary environment state (measurement limit)"),
    "thermal": (ScenarioMode.THERMAL, cmd_thermal, "gamma and F of one thermal environment spin"),
    "ensemble": (ScenarioMode.ENSEMBLE, cmd_ensemble, "random-coupling ensemble over j and t"),
    "sbs-bound": (ScenarioMode.SBS_BOUND, cmd_sbs_bound, "SBS distance bound for one coupling draw"),
    "short-time": (ScenarioMode.SHORT_TIME, cmd_short_time, "short-time Gaussian formulas vs exact"),
    "demo": (ScenarioMode.ENSEMBLE, cmd_demo, "regenerate reference datasets"),
}


# ----- parsing -----

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    run = common.add_argument_group("run")
    run.add_argument("--config", default=None, help="INI scenario file")
    run.add_argument("--svg", action="store_true", help="also write quick-look SVG charts")
    run.add_argument("--log-dir", default=None, help="directory of the rotating log file")
    run.add_argument("--log-level", default="INFO", choices=_LOG_LEVELS)
    phys = common.add_argument_group("scenario overrides")
    for flag, key, help_text in _PHYSICS_FLAGS:
        phys.add_argument(flag, dest=_dest(flag), default=None, metavar="VALUE", help=f"{help_text} [{key}]")

    parser = argparse.ArgumentParser(prog=config.APP_NAME,
                                     description="Central spin with spin-j environments: decoherence, "
                                                 "fidelities and spectrum broadcast structure bounds.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {config.APP_VERSION}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    for name, (mode, handler, help_text) in _COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(mode=mode, handler=handler)
        if name == "gamma-general":
            sp.add_argument("--state", default="mixed", choices=("mixed", "thermal-z", "thermal-x", "coherent"),
                            help="initial environment state")
        if name == "demo":
            sp.add_argument("name", choices=("fig1",), help="dataset to regenerate")

    tpl = sub.add_parser("config-template", parents=[common], help="write a fully populated scenario file")
    tpl.add_argument("path", help="INI file to write")
    tpl.set_defaults(mode=None, handler=None)
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, str]:
    out = {key: getattr(args, _dest(flag)) for flag, key, _ in _PHYSICS_FLAGS
           if getattr(args, _dest(flag), None) is not None}
    if args.mode is not None:
        out["scenario/mode"] = args.mode
    return out


def _report_config_error(e: ConfigError) -> None:
    for key, msg in e.problems:
        logger.error("config %s: %s", key, msg)


def _warn_mode_conflict(args: argparse.Namespace) -> None:
    """The subcommand sets the mode; a different one in the scenario file is ignored."""
    if not (args.config and args.mode):
        return
    file_mode = read_ini(args.config).get(key_of("mode"), "").strip()
    if file_mode and file_mode != args.mode:
        logger.warning("scenario file has mode=%s, running %s as mode=%s", file_mode, args.command, args.mode)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)

    try:
        setup_logging(getattr(logging, args.log_level), args.log_dir)
    except OSError as e:
        print(f"{config.APP_NAME}: cannot open log file: {e}", file=sys.stderr)
        return EXIT_IO

    try:
        cfg = parse_config(args.config, overrides_from_args(args))
    except ConfigError as e:
        _report_config_error(e)
        return EXIT_CONFIG
    _warn_mode_conflict(args)

    if args.command == "config-template":
        try:
            save_config(cfg, args.path)
        except (OutputError, OSError) as e:
            logger.error("%s", e)
            return EXIT_IO
        logger.info("scenario template written to %s", args.path)
        return EXIT_OK

    started = time.perf_counter()
    try:
        with RunWriter(cfg.out) as writer:
            args.handler(cfg, args, writer)
            writer.adopt(save_config(cfg, writer.path(config.SCENARIO_COPY_NAME)))
            writer.write_manifest(
                command=[config.APP_NAME] + argv,
                scenario=config_to_dict(cfg),
                seed=cfg.seed,
                wall_time_s=time.perf_counter() - started,
            )
    except ConfigError as e:
        _report_config_error(e)
        return EXIT_CONFIG
    except ValidationError as e:
        logger.error("invalid input: %s", e)
        return EXIT_CONFIG
    except ArithmeticError as e:  # NumericalError and OverflowError
        logger.error("numerical failure: %s", e)
        return EXIT_NUMERICAL
    except (OutputError, OSError) as e:
        logger.error("output failure: %s", e)
        return EXIT_IO

    logger.info("%s finished in %.2f s, outputs in %s", args.command, time.perf_counter() - started,
                writer.out_dir)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
