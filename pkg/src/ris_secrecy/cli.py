"""Experiment runner for the four figure reproductions and ad-hoc sweeps.

Configuration is flat ``key=value`` text with dotted keys, e.g.::

    experiment=fig2
    params.rho_db=20
    fig2.n_ris=36,100,256
    n_trials=10000

Command-line ``--set key=value`` pairs override file values. Every run writes
its CSV files plus ``manifest.txt``; feeding that manifest back through
``--config`` reproduces the same numbers.
"""

import argparse
import csv
import logging
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from . import analysis, montecarlo
from .geometry import SystemParams
from .specfun import Truncation

log = logging.getLogger(__name__)

EXPERIMENTS = ("fig1", "fig2", "fig3", "fig4", "sweep")
SWEEP_VARIABLES = ("rho_db", "n_ris", "n_ant", "radius")
CAPACITY_METHODS = ("adaptive", "gauss_chebyshev")

_INT_PARAMS = {"n_ris", "n_ant", "ris_rows", "ris_cols"}
_PARAM_NAMES = {f.name for f in fields(SystemParams)}

# experiment-specific options and their defaults (all stored as text)
OPTION_DEFAULTS = {
    "fig1.x_min": "0.001",
    "fig1.x_max": "1000",
    "fig1.points": "200",
    "fig2.rho_db": "0,5,10,15,20,25,30",
    "fig2.n_ris": "36,100,256",
    "fig3.n_ant": "50,100,200,400",
    "fig4.radius": "10,20,30,40,50",
    "fig4.n_ris": "36,100,256",
}


class ConfigError(ValueError):
    def __init__(self, errors):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


@dataclass
class ExperimentConfig:
    experiment: str = "fig1"
    params: SystemParams = field(default_factory=SystemParams)
    trunc: Truncation = field(default_factory=Truncation)
    n_trials: int = 10_000
    seed: int = 1
    workers: int = 1
    mode: str = "single"
    sweep_variable: str = None
    sweep_values: list = field(default_factory=list)
    output_dir: str = "results"
    capacity_method: str = "adaptive"
    radius_hold: str = "count"
    options: dict = field(default_factory=lambda: dict(OPTION_DEFAULTS))

    def option_list(self, key, cast=float):
        return [cast(v) for v in _split_list(self.options[key])]

    def to_flat(self):
        """Every resolved setting as dotted key -> text, in a stable order."""
        flat = {
            "experiment": self.experiment,
            "n_trials": str(self.n_trials),
            "seed": str(self.seed),
            "workers": str(self.workers),
            "mode": self.mode,
            "output_dir": self.output_dir,
            "capacity_method": self.capacity_method,
            "radius_hold": self.radius_hold,
            "trunc.n_bar": str(self.trunc.n_bar),
            "trunc.w_nodes": str(self.trunc.w_nodes),
        }
        if self.sweep_variable is not None:
            flat["sweep_variable"] = self.sweep_variable
            flat["sweep_values"] = ",".join(_fmt(v) for v in self.sweep_values)
        for name, value in self.params.as_dict().items():
            flat[f"params.{name}"] = _fmt(value)
        flat.update(self.options)
        return flat


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _split_list(text):
    return [v.strip() for v in str(text).split(",") if v.strip()]


def parse_config_text(text, source="<config>"):
    """Parse ``key=value`` lines; '#' starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError([f"{source}:{lineno}: expected key=value, got {raw!r}"])
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _parse_int(key, text, errors):
    try:
        value = float(text)
        if value != int(value):
            raise ValueError
        return int(value)
    except (TypeError, ValueError, OverflowError):
        errors.append(f"{key}: expected an integer, got {text!r}")
        return None


def _parse_float(key, text, errors):
    try:
        return float(text)
    except (TypeError, ValueError):
        errors.append(f"{key}: expected a number, got {text!r}")
        return None


def validate_config(raw):
    """Resolve a flat key/value mapping into an :class:`ExperimentConfig`.

    Returns ``(config, errors)``. All violations are collected; ``config`` is
    ``None`` whenever ``errors`` is non-empty. Absent keys take the defaults.
    """
    errors = []
    cfg = ExperimentConfig()
    param_overrides = {}
    trunc_kw = {}

    for key, text in raw.items():
        if key.startswith("meta."):
            continue
        if key.startswith("params."):
            name = key[len("params."):]
            if name not in _PARAM_NAMES:
                errors.append(f"{key}: unknown system parameter")
                continue
            if text in ("", "None"):
                param_overrides[name] = None
                continue
            parse = _parse_int if name in _INT_PARAMS else _parse_float
            value = parse(key, text, errors)
            if value is not None:
                param_overrides[name] = value
        elif key in ("trunc.n_bar", "trunc.w_nodes"):
            value = _parse_int(key, text, errors)
            if value is not None:
                trunc_kw[key.split(".", 1)[1]] = value
        elif key in ("n_trials", "seed", "workers"):
            value = _parse_int(key, text, errors)
            if value is not None:
                setattr(cfg, key, value)
        elif key in ("experiment", "mode", "output_dir", "capacity_method", "radius_hold",
                     "sweep_variable"):
            setattr(cfg, key, text)
        elif key == "sweep_values":
            values = [_parse_float(key, v, errors) for v in _split_list(text)]
            cfg.sweep_values = [v for v in values if v is not None]
        elif key in OPTION_DEFAULTS:
            cfg.options[key] = text
        else:
            errors.append(f"{key}: unknown configuration key")

    if cfg.experiment not in EXPERIMENTS:
        errors.append(f"experiment: must be one of {', '.join(EXPERIMENTS)}, got {cfg.experiment!r}")
    if cfg.mode not in montecarlo.MODES:
        errors.append(f"mode: must be 'single' or 'multi', got {cfg.mode!r}")
    if cfg.capacity_method not in CAPACITY_METHODS:
        errors.append(f"capacity_method: must be one of {', '.join(CAPACITY_METHODS)}")
    if cfg.radius_hold not in ("count", "density"):
        errors.append(f"radius_hold: must be 'count' or 'density', got {cfg.radius_hold!r}")
    if cfg.n_trials is not None and cfg.n_trials < 1:
        errors.append(f"n_trials: must be >= 1, got {cfg.n_trials}")
    if cfg.seed is not None and cfg.seed < 0:
        errors.append(f"seed: must be >= 0, got {cfg.seed}")
    if cfg.workers is not None and cfg.workers < 1:
        errors.append(f"workers: must be >= 1, got {cfg.workers}")

    try:
        cfg.trunc = Truncation(**trunc_kw)
    except ValueError as exc:
        errors.append(f"trunc: {exc}")

    try:
        params = SystemParams().updated(**param_overrides)
    except (TypeError, ValueError) as exc:
        errors.append(f"params: {exc}")
    else:
        errors.extend(f"params.{name}: {msg}" for name, msg in params.errors())
        cfg.params = params

    if cfg.experiment == "sweep":
        if cfg.sweep_variable is None:
            errors.append("sweep_variable: required for the sweep experiment")
        elif cfg.sweep_variable not in SWEEP_VARIABLES:
            errors.append(f"sweep_variable: must be one of {', '.join(SWEEP_VARIABLES)}")
        if not cfg.sweep_values:
            errors.append("sweep_values: required (non-empty) for the sweep experiment")
    errors.extend(_check_options(cfg))
    if not errors and cfg.experiment == "sweep":
        for value in cfg.sweep_values:
            for name, msg in _sweep_params(cfg, value).errors():
                errors.append(f"sweep_values: {cfg.sweep_variable}={_fmt(value)} gives params.{name}: {msg}")

    return (None, errors) if errors else (cfg, [])


def _check_options(cfg):
    errors = []
    casts = {"fig1.points": int, "fig2.n_ris": int, "fig3.n_ant": int, "fig4.n_ris": int}
    for key, text in cfg.options.items():
        cast = casts.get(key, float)
        try:
            values = [cast(v) for v in _split_list(text)]
        except ValueError:
            errors.append(f"{key}: could not parse {text!r}")
            continue
        if not values:
            errors.append(f"{key}: must not be empty")
        elif key != "fig2.rho_db" and any(v <= 0 for v in values):
            errors.append(f"{key}: values must be positive")
    return errors


def _sweep_params(cfg, value):
    var = cfg.sweep_variable
    if var == "radius":
        return cfg.params.with_radius(float(value), cfg.radius_hold)
    if var in _INT_PARAMS:
        return cfg.params.updated(**{var: int(round(value))})
    return cfg.params.updated(**{var: float(value)})


# ---------------------------------------------------------------- experiments


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    return path


def _capacity_row(cfg, params, mode, records):
    cs = analysis.analytic_secrecy_capacity(params, mode, cfg.trunc, cfg.capacity_method)
    mc, se = montecarlo.mc_secrecy_capacity(records)
    return [cs, mc, se]


def _trials(cfg, params, mode):
    return montecarlo.run_trials(params, mode, cfg.n_trials, cfg.seed, cfg.workers)


def _fig1(cfg, out):
    x = np.logspace(math.log10(float(cfg.options["fig1.x_min"])),
                    math.log10(float(cfg.options["fig1.x_max"])),
                    int(cfg.options["fig1.points"]))
    files, ks_rows = [], []
    for mode in montecarlo.MODES:
        params = cfg.params.updated(n_ant=1) if mode == "single" else cfg.params
        bob, eve = analysis.analytic_cdfs(params, mode, cfg.trunc)
        bob_s, eve_s, _ = montecarlo.records_to_arrays(_trials(cfg, params, mode))
        bob_mc = montecarlo.empirical_cdf(bob_s)
        eve_mc = montecarlo.empirical_cdf(eve_s)
        rows = zip(x.tolist(), bob(x).tolist(), bob_mc(x).tolist(), eve(x).tolist(), eve_mc(x).tolist())
        files.append(_write_csv(out / f"fig1_{mode}.csv",
                                ["x", "cdf_bob_analytic", "cdf_bob_mc", "cdf_eve_analytic", "cdf_eve_mc"],
                                rows))
        ks_rows.append([mode, "bob", montecarlo.ks_distance(bob_mc, bob)])
        ks_rows.append([mode, "eve", montecarlo.ks_distance(eve_mc, eve)])
    files.append(_write_csv(out / "fig1_ks.csv", ["mode", "curve", "ks_distance"], ks_rows))
    return files


def _rho_curve(cfg, params, rho_values):
    base = _trials(cfg, params, "single")
    rows = []
    for rho_db in rho_values:
        p = params.updated(rho_db=float(rho_db))
        scaled = montecarlo.scale_records(base, 10.0 ** ((rho_db - params.rho_db) / 10.0))
        rows.append([float(rho_db)] + _capacity_row(cfg, p, "single", scaled))
    return rows


def _fig2(cfg, out):
    files = []
    rho_values = cfg.option_list("fig2.rho_db")
    for n in cfg.option_list("fig2.n_ris", int):
        log.info("fig2: N=%d", n)
        rows = _rho_curve(cfg, cfg.params.updated(n_ris=n), rho_values)
        files.append(_write_csv(out / f"fig2_N{n}.csv",
                                ["rho_db", "cs_analytic", "cs_mc", "cs_mc_stderr"], rows))
    return files


def _fig3(cfg, out):
    rows = []
    for k in cfg.option_list("fig3.n_ant", int):
        log.info("fig3: K=%d", k)
        p = cfg.params.updated(n_ant=k)
        rows.append([k] + _capacity_row(cfg, p, "multi", _trials(cfg, p, "multi")))
    return [_write_csv(out / "fig3.csv", ["n_ant", "cs_analytic", "cs_mc", "cs_mc_stderr"], rows)]


def _fig4(cfg, out):
    files = []
    for n in cfg.option_list("fig4.n_ris", int):
        rows = []
        for radius in cfg.option_list("fig4.radius"):
            log.info("fig4: N=%d R=%g", n, radius)
            p = cfg.params.updated(n_ris=n).with_radius(radius, cfg.radius_hold)
            rows.append([radius, p.eve_density] + _capacity_row(cfg, p, "single", _trials(cfg, p, "single")))
        files.append(_write_csv(out / f"fig4_N{n}.csv",
                                ["radius", "eve_density", "cs_analytic", "cs_mc", "cs_mc_stderr"], rows))
    return files


def _sweep(cfg, out):
    rows = []
    for value in cfg.sweep_values:
        p = _sweep_params(cfg, value)
        if cfg.mode == "single":
            p = p.updated(n_ant=1) if cfg.sweep_variable != "n_ant" else p
        rows.append([value] + _capacity_row(cfg, p, cfg.mode, _trials(cfg, p, cfg.mode)))
    return [_write_csv(out / "sweep.csv",
                       [cfg.sweep_variable, "cs_analytic", "cs_mc", "cs_mc_stderr"], rows)]


_RUNNERS = {"fig1": _fig1, "fig2": _fig2, "fig3": _fig3, "fig4": _fig4, "sweep": _sweep}


def write_manifest(cfg, out, files):
    lines = [f"{k}={v}" for k, v in cfg.to_flat().items()]
    lines.append(f"meta.library_version={__version__}")
    lines.append("meta.files=" + ",".join(p.name for p in files))
    path = out / "manifest.txt"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def run_experiment(cfg):
    """Run ``cfg.experiment`` and return the paths written (CSV files + manifest)."""
    if isinstance(cfg, dict):
        cfg, errors = validate_config(cfg)
        if errors:
            raise ConfigError(errors)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = _RUNNERS[cfg.experiment](cfg, out)
    files.append(write_manifest(cfg, out, files))
    return files


# ---------------------------------------------------------------- command line


def build_parser():
    parser = argparse.ArgumentParser(prog="ris-secrecy",
                                     description="Secrecy analysis of an RIS link with Poisson UAV eavesdroppers.")
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", type=Path, help="key=value configuration file")
    parser.add_argument("--seed", type=str)
    parser.add_argument("--trials", type=str, help="Monte-Carlo trials per point")
    parser.add_argument("--out", type=str, help="output directory")
    parser.add_argument("--workers", type=str, help="worker processes for the Monte-Carlo runs")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        raw = {}
        if args.config is not None:
            raw.update(parse_config_text(args.config.read_text(encoding="utf-8"), str(args.config)))
        raw["experiment"] = args.experiment
        for key, value in (("seed", args.seed), ("n_trials", args.trials),
                           ("output_dir", args.out), ("workers", args.workers)):
            if value is not None:
                raw[key] = value
        for item in args.set:
            if "=" not in item:
                raise ConfigError([f"--set: expected KEY=VALUE, got {item!r}"])
            key, value = item.split("=", 1)
            raw[key.strip()] = value.strip()
        cfg, errors = validate_config(raw)
        if errors:
            raise ConfigError(errors)
        files = run_experiment(cfg)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    for path in files:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
