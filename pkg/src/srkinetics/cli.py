"""Command-line front end.

Usage::

    srkinetics <command> [options]

Commands: graph, simulate, power, yield, scan, optimize, pump, montecarlo.
Options may also come from an INI file (``--config``, section ``[srkinetics]``,
keys named like the long options with ``_`` for ``-``); flags win over the file.
Relative output paths are resolved against ``$SRKINETICS_OUTPUT_DIR`` when set,
and without ``--output`` the artifact goes to ``$SRKINETICS_OUTPUT_DIR/<command>.<ext>``
or, when that is unset, to stdout.

Exit codes: 0 success, 2 usage or invalid input, 3 numerical failure. Errors
are reported on stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as sio
from .errors import (DegenerateFormulaError, IntegrationError, NumericalFailure,
                     SRKineticsError, UnsupportedGraphError, ValidationError)
from .kinetics import default_time_grid, radiated_power, solve_cascade, solve_numeric
from .model import RateSet, graph_to_dict, superradiant_graph
from .pump import build_pumped_graph, steady_state
from .stochastic import binned_power, simulate_ensemble
from .yields import (baseline_yield, maximize_rqe, scan_rqe, yield_closed_form_two,
                     yield_markov, yield_time_integral)

ENV_OUTPUT_DIR = "SRKINETICS_OUTPUT_DIR"
CONFIG_SECTION = "srkinetics"
COMMANDS = ("graph", "simulate", "power", "yield", "scan", "optimize", "pump", "montecarlo")


class UsageError(SRKineticsError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    command: str
    n_emitters: int = 2
    ratio: float = 1.0
    pump_ratio: float = 0.0
    gamma_r: float = 1.0
    graph_kind: str = "explicit"
    output: str | None = None
    format: str = "csv"
    seed: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def rates(self) -> RateSet:
        return RateSet.from_ratio(self.ratio, self.pump_ratio, self.gamma_r)

    def echo(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k not in ("extra", "output")}
        d.update(self.extra)
        return d


def _add_common(p: argparse.ArgumentParser, pump_ratio: float = 0.0) -> None:
    p.add_argument("--config", help="INI file with a [srkinetics] section")
    p.add_argument("--n", dest="n_emitters", type=int, default=2, help="number of emitters")
    p.add_argument("--ratio", type=float, default=1.0, help="gamma / gamma_r")
    p.add_argument("--pump-ratio", type=float, default=pump_ratio, help="gamma_p / gamma_r")
    p.add_argument("--gamma-r", type=float, default=1.0,
                   help="radiative rate in physical units (sets the raw time axis)")
    p.add_argument("--graph-kind", choices=("explicit", "general"), default="explicit")
    p.add_argument("-o", "--output", help="output path (stdout if omitted)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="srkinetics", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help, **kw):
        p = sub.add_parser(name, help=help)
        _add_common(p, **kw)
        return p

    add("graph", "transition graph as JSON")
    for name in ("simulate", "power"):
        p = add(name, "populations and radiated power versus time")
        p.add_argument("--t-max", type=float, default=10.0, help="end time in units of 1/gamma_r")
        p.add_argument("--points", type=int, default=2000)
        p.add_argument("--solver", choices=("cascade", "numeric"), default="cascade")
    add("yield", "photon yield and RQE by every route")
    p = add("scan", "RQE versus gamma/gamma_r")
    p.add_argument("--ratio-min", type=float, default=0.0)
    p.add_argument("--ratio-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=200)
    p = add("optimize", "maximise RQE over gamma/gamma_r")
    p.add_argument("--ratio-min", type=float, default=0.01)
    p.add_argument("--ratio-max", type=float, default=20.0)
    p = add("pump", "pumped two-emitter steady state", pump_ratio=1.0)
    p.add_argument("--pump-min", type=float, help="sweep start for gamma_p/gamma_r")
    p.add_argument("--pump-max", type=float, help="sweep end for gamma_p/gamma_r")
    p.add_argument("--points", type=int, default=50)
    p = add("montecarlo", "stochastic jump simulation")
    p.add_argument("--trajectories", type=int, default=100_000)
    p.add_argument("--bins", type=int, default=200)
    p.add_argument("--t-max", type=float, default=10.0, help="binning window in units of 1/gamma_r")
    p.add_argument("--workers", type=int, default=1)
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, path: str) -> None:
    cfg = configparser.ConfigParser()
    if not cfg.read(path):
        raise UsageError(f"cannot read config file {path!r}")
    if not cfg.has_section(CONFIG_SECTION):
        raise UsageError(f"config file {path!r} has no [{CONFIG_SECTION}] section")
    values = dict(cfg.items(CONFIG_SECTION))
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sp in subparsers.choices.values():
        defaults = {}
        for action in sp._actions:
            for key in (action.dest, *(o.lstrip("-").replace("-", "_") for o in action.option_strings)):
                if key in values:
                    raw = values[key]
                    try:
                        defaults[action.dest] = action.type(raw) if action.type else raw
                    except ValueError as exc:
                        raise UsageError(f"config key {key}: {exc}") from exc
                    break
        sp.set_defaults(**defaults)


def parse_config(argv=None) -> RunConfig:
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        _apply_config_file(parser, known.config)
    ns = vars(parser.parse_args(argv))
    base = {k: ns.pop(k) for k in ("command", "n_emitters", "ratio", "pump_ratio", "gamma_r",
                                   "graph_kind", "output", "format", "seed")}
    ns.pop("config", None)
    return RunConfig(**base, extra=ns)


def _resolve_output(cfg: RunConfig, ext: str) -> Path | None:
    env = os.environ.get(ENV_OUTPUT_DIR)
    if cfg.output:
        p = Path(cfg.output)
        return Path(env) / p if env and not p.is_absolute() else p
    if env:
        return Path(env) / f"{cfg.command}.{ext}"
    return None


def _emit(cfg: RunConfig, text: str, ext: str, summary: str, extra_files=()) -> None:
    path = _resolve_output(cfg, ext)
    if path is None:
        sys.stdout.write(text)
        for _, body in extra_files:
            sys.stdout.write(body)
        print(summary, file=sys.stderr)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    for suffix, body in extra_files:
        path.with_name(path.stem + suffix).write_text(body)
    print(summary)


def _time_grid(cfg: RunConfig) -> np.ndarray:
    gr = cfg.gamma_r
    return default_time_grid(RateSet(gr), cfg.extra["points"], cfg.extra["t_max"] / gr)


def cmd_graph(cfg):
    if cfg.pump_ratio:
        graph = build_pumped_graph(cfg.n_emitters, cfg.rates)
    else:
        graph = superradiant_graph(cfg.n_emitters, cfg.rates, cfg.graph_kind)
    text = json.dumps(graph_to_dict(graph), indent=2) + "\n"
    summary = (f"N={cfg.n_emitters} graph={graph.name} classes={len(graph.classes)} "
               f"transitions={len(graph.transitions)}")
    _emit(cfg, text, "json", summary)


def cmd_simulate(cfg):
    if cfg.pump_ratio:
        graph = build_pumped_graph(cfg.n_emitters, cfg.rates)
    else:
        graph = superradiant_graph(cfg.n_emitters, cfg.rates, cfg.graph_kind)
    t = _time_grid(cfg)
    if cfg.extra["solver"] == "cascade" and not graph.has_pump:
        traj = solve_cascade(graph, t)
    else:
        traj = solve_numeric(graph, t)
    power = radiated_power(graph, traj)
    k = int(np.argmax(power.power))
    summary = (f"N={cfg.n_emitters} ratio={cfg.ratio:g} peak_power={power.power[k]:.6g} "
               f"at t_gr={t[k] * cfg.gamma_r:.4g} ground_end={traj.ground[-1]:.6f}")
    if cfg.format == "json":
        cols, rows = sio.trajectory_table(traj, power)
        text = sio.json_text(cfg.command, cfg.echo(),
                             {"columns": cols, "rows": [list(r) for r in rows]})
        _emit(cfg, text, "json", summary)
    else:
        cols, rows = sio.trajectory_table(traj, power)
        _emit(cfg, sio.csv_text("trajectory", cols, rows, _meta(cfg)), "csv", summary)


def _meta(cfg):
    return {"command": cfg.command, "n": cfg.n_emitters, "ratio": cfg.ratio,
            "pump_ratio": cfg.pump_ratio, "gamma_r": cfg.gamma_r, "graph_kind": cfg.graph_kind}


def cmd_yield(cfg):
    rates = cfg.rates
    if rates.gamma_p:
        raise ValidationError("yield is defined without pump; use the pump command")
    graph = superradiant_graph(cfg.n_emitters, rates, cfg.graph_kind)
    reports = [yield_markov(graph), yield_time_integral(graph)]
    if cfg.n_emitters == 2:
        reports.append(yield_closed_form_two(rates))
    q0 = baseline_yield(cfg.n_emitters, rates)
    main = reports[0]
    summary = (f"N={cfg.n_emitters} ratio={cfg.ratio:g} Q={float(main.q_photon):.6f} "
               f"Q0={float(q0.q_photon):.6f} R={float(main.rqe):.4f}")
    if cfg.format == "json":
        text = sio.json_text(cfg.command, cfg.echo(), [r.as_dict() for r in reports])
        _emit(cfg, text, "json", summary)
    else:
        rows = [(r.method.value, r.n_emitters, r.ratio, r.q_photon, r.q_phonon,
                 r.q_baseline, r.rqe) for r in reports]
        cols = ["method", "n", "ratio", "Q", "Q_phonon", "Q0", "R"]
        _emit(cfg, sio.csv_text("yield", cols, rows, _meta(cfg)), "csv", summary)


def cmd_scan(cfg):
    lo, hi, pts = cfg.extra["ratio_min"], cfg.extra["ratio_max"], cfg.extra["points"]
    if pts < 2 or lo < 0 or hi <= lo:
        raise ValidationError("scan needs 0 <= ratio-min < ratio-max and points >= 2")
    reports = scan_rqe(cfg.n_emitters, np.linspace(lo, hi, pts), cfg.graph_kind)
    best = max(reports, key=lambda r: r.rqe)
    summary = f"N={cfg.n_emitters} ratio={best.ratio:.4g} R={float(best.rqe):.4f} (scan maximum)"
    cols, rows = sio.scan_table(reports)
    if cfg.format == "json":
        text = sio.json_text(cfg.command, cfg.echo(), {"columns": cols, "rows": rows})
        _emit(cfg, text, "json", summary)
    else:
        _emit(cfg, sio.csv_text("scan", cols, rows, _meta(cfg)), "csv", summary)


def cmd_optimize(cfg):
    opt = maximize_rqe(cfg.n_emitters, (cfg.extra["ratio_min"], cfg.extra["ratio_max"]),
                       kind=cfg.graph_kind)
    result = {"n_emitters": opt.n_emitters, "ratio_star": opt.ratio, "r_star": opt.rqe,
              "flat": opt.flat, "unimodal": opt.unimodal, "message": opt.message}
    summary = f"N={cfg.n_emitters} ratio_star={opt.ratio:.6f} R={opt.rqe:.6f}"
    if opt.flat:
        summary += " (flat objective)"
    if cfg.format == "json":
        _emit(cfg, sio.json_text(cfg.command, cfg.echo(), result), "json", summary)
    else:
        cols = ["n", "ratio_star", "r_star", "flat", "unimodal"]
        rows = [(opt.n_emitters, opt.ratio, opt.rqe, opt.flat, opt.unimodal)]
        _emit(cfg, sio.csv_text("optimize", cols, rows, _meta(cfg)), "csv", summary)


def cmd_pump(cfg):
    lo, hi = cfg.extra.get("pump_min"), cfg.extra.get("pump_max")
    if (lo is None) != (hi is None):
        raise ValidationError("--pump-min and --pump-max go together")
    if lo is None:
        ss = steady_state(build_pumped_graph(cfg.n_emitters, cfg.rates))
        summary = (f"N={cfg.n_emitters} ratio={cfg.ratio:g} pump_ratio={cfg.pump_ratio:g} "
                   f"power={ss.power:.6g} efficiency={ss.efficiency:.6g}")
        if cfg.format == "json":
            _emit(cfg, sio.json_text(cfg.command, cfg.echo(), ss.as_dict()), "json", summary)
            return
        states = [(cfg.pump_ratio, ss)]
    else:
        pts = cfg.extra["points"]
        if pts < 2 or lo < 0 or hi <= lo:
            raise ValidationError("sweep needs 0 <= pump-min < pump-max and points >= 2")
        states = [(p, steady_state(build_pumped_graph(
            cfg.n_emitters, RateSet.from_ratio(cfg.ratio, p, cfg.gamma_r))))
            for p in np.linspace(lo, hi, pts)]
        best = max(states, key=lambda s: s[1].power)
        summary = (f"N={cfg.n_emitters} ratio={cfg.ratio:g} sweep points={pts} "
                   f"max_power={best[1].power:.6g} at pump_ratio={best[0]:.4g}")
        if cfg.format == "json":
            result = [{"pump_ratio": p, **s.as_dict()} for p, s in states]
            _emit(cfg, sio.json_text(cfg.command, cfg.echo(), result), "json", summary)
            return
    labels = list(states[0][1].populations)
    cols = ["pump_ratio", *labels, "power", "phonon_rate", "pump_rate", "efficiency",
            "baseline_power", "baseline_efficiency"]
    rows = [(p, *s.populations.values(), s.power, s.phonon_rate, s.pump_quanta_rate,
             s.efficiency, s.baseline_power, s.baseline_efficiency) for p, s in states]
    _emit(cfg, sio.csv_text("pump", cols, rows, _meta(cfg)), "csv", summary)


def cmd_montecarlo(cfg):
    if cfg.rates.gamma_p:
        raise ValidationError("Monte Carlo runs only without pump")
    graph = superradiant_graph(cfg.n_emitters, cfg.rates, cfg.graph_kind)
    ens = simulate_ensemble(graph, cfg.extra["trajectories"], cfg.seed,
                            n_bins=cfg.extra["bins"], t_max=cfg.extra["t_max"] / cfg.gamma_r,
                            workers=cfg.extra["workers"])
    exact = yield_markov(graph)
    q = float(exact.q_photon)
    z = (ens.mean_photons - q) / ens.sem_photons if ens.sem_photons > 0 else 0.0
    summary = (f"N={cfg.n_emitters} ratio={cfg.ratio:g} mean_photons={ens.mean_photons:.6f}"
               f"+-{ens.sem_photons:.6f} exact={q:.6f} z={z:.2f} "
               f"R={ens.mean_photons / float(exact.q_baseline):.4f}")
    rate_cols, rate_rows = sio.rate_table(ens, binned_power(graph, ens.bin_edges))
    hist_cols, hist_rows = sio.histogram_table(ens)
    meta = {**_meta(cfg), "seed": cfg.seed, "trajectories": ens.n_trajectories}
    if cfg.format == "json":
        result = {"mean_photons": ens.mean_photons, "sem_photons": ens.sem_photons,
                  "exact_photons": q, "histogram": {"columns": hist_cols, "rows": hist_rows},
                  "rate": {"columns": rate_cols, "rows": rate_rows}}
        _emit(cfg, sio.json_text(cfg.command, cfg.echo(), result), "json", summary)
    else:
        _emit(cfg, sio.csv_text("rate", rate_cols, rate_rows, meta), "csv", summary,
              extra_files=[("_hist.csv", sio.csv_text("histogram", hist_cols, hist_rows, meta))])


HANDLERS = {
    "graph": cmd_graph, "simulate": cmd_simulate, "power": cmd_simulate, "yield": cmd_yield,
    "scan": cmd_scan, "optimize": cmd_optimize, "pump": cmd_pump, "montecarlo": cmd_montecarlo,
}


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        HANDLERS[cfg.command](cfg)
    except (UsageError, ValidationError) as exc:
        return _fail(type(exc).__name__, str(exc), 2)
    except (IntegrationError, NumericalFailure, DegenerateFormulaError,
            UnsupportedGraphError, SRKineticsError) as exc:
        return _fail(type(exc).__name__, str(exc), 3)
    return 0


if __name__ == "__main__":
    sys.exit(main())
