"""Command line front end.

Subcommands::

    simocorr eval QUANTITY key=value ...
    simocorr fig {1..5} [--out PATH] [--sim] [--param key=value ...]
    simocorr simulate [key=value ...] [--config PATH] [--out PATH] [--dump PATH]
    simocorr compare --config PATH [--out PATH]

Exit status: 0 on success, 1 on usage or configuration errors, 2 when
``compare`` finds an estimate more than 4 standard errors from the closed form.
Every file written with ``--out`` gets a ``<file>.manifest.json`` next to it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import analytic as an
from . import mcsim, specfun
from .figures import SimOptions, make_figure
from .tables import format_float

__all__ = ["main", "RunManifest", "ConfigError", "load_scenario", "Scenario"]

Z_LIMIT = 4.0
EXIT_OK, EXIT_USAGE, EXIT_STAT = 0, 1, 2

_ALIASES = {
    "Δ": "Delta", "δ": "delta", "θ": "theta", "θ₁": "theta1", "θ1": "theta1",
    "θ₂": "theta2", "θ2": "theta2", "λ": "lam", "lambda": "lam", "α": "alpha",
    "bias-budget": "bias_budget", "num_realizations": "realizations",
}


class ConfigError(ValueError):
    """Bad key/value input; the message is shown to the user verbatim."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _canon(key: str) -> str:
    key = key.strip()
    return _ALIASES.get(key, key)


def parse_pairs(items) -> dict[str, str]:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"expected key=value, got {item!r}")
        out[_canon(key)] = value.strip()
    return out


def _number(kv: dict, key: str, kind=float):
    raw = kv[key]
    try:
        val = kind(raw)
    except ValueError:
        raise ConfigError(f"parameter {key}: cannot parse {raw!r} as {kind.__name__}") from None
    if kind is float and not math.isfinite(val):
        raise ConfigError(f"parameter {key}: must be finite, got {raw!r}")
    return val


# ---------------------------------------------------------------- eval

def _params_from(kv: dict) -> an.NormalizedParams:
    physical = {"lam", "r", "alpha"} & kv.keys()
    if physical:
        missing = {"lam", "r", "alpha"} - kv.keys()
        if missing:
            raise ConfigError(f"physical parameters need lambda, r and alpha; missing "
                              f"{', '.join(sorted(missing))}")
        if {"Delta", "delta"} & kv.keys():
            raise ConfigError("give either (Delta, delta) or (lambda, r, alpha), not both")
        return an.ModelParams(_number(kv, "lam"), _number(kv, "r"),
                              _number(kv, "alpha")).normalized()
    missing = {"Delta", "delta"} - kv.keys()
    if missing:
        raise ConfigError(f"missing parameter(s): {', '.join(sorted(missing))}")
    return an.NormalizedParams(_number(kv, "Delta"), _number(kv, "delta"))


_MODEL_KEYS = ("Delta", "delta", "lam", "r", "alpha")

# name -> (callable, argument spec); "p" is the parameter set, others are read from kv
_QUANTITIES = {
    "log_gamma": (specfun.log_gamma, [("x", float)]),
    "beta": (specfun.beta, [("x", float), ("y", float)]),
    "diversity_poly": (specfun.diversity_poly, [("n", int), ("x", float)]),
    "diversity_poly_coefficients": (specfun.diversity_poly_coefficients, [("n", int)]),
    "diversity_poly_derivative": (specfun.diversity_poly_derivative, [("n", int), ("x", float)]),
    "diversity_poly_bounds": (specfun.diversity_poly_bounds, [("n", int), ("x", float)]),
    "single_success_prob": (an.single_success_prob, ["p", ("theta", float)]),
    "joint_success_prob": (an.joint_success_prob, ["p", ("n", int), ("theta", float)]),
    "independent_joint_prob": (an.independent_joint_prob, ["p", ("n", int), ("theta", float)]),
    "joint_prob_bounds": (an.joint_prob_bounds, ["p", ("n", int), ("theta", float)]),
    "diversity_loss": (an.diversity_loss, [("n", int), ("delta", float)]),
    "conditional_success_prob": (an.conditional_success_prob,
                                 ["p", ("k", int), ("theta", float)]),
    "indicator_correlation": (an.indicator_correlation, ["p", ("theta", float)]),
    "selection_combining_prob": (an.selection_combining_prob,
                                 ["p", ("n", int), ("theta", float)]),
    "independent_selection_prob": (an.independent_selection_prob,
                                   ["p", ("n", int), ("theta", float)]),
    "joint_two_antenna_success": (an.joint_two_antenna_success,
                                  ["p", ("theta1", float), ("theta2", float)]),
    "joint_two_antenna_cdf": (an.joint_two_antenna_cdf,
                              ["p", ("theta1", float), ("theta2", float)]),
    "independent_two_antenna_success": (an.independent_two_antenna_success,
                                        ["p", ("theta1", float), ("theta2", float)]),
}


def format_value(v) -> str:
    if isinstance(v, (list, tuple)):
        return " ".join(format_value(x) for x in v)
    if isinstance(v, Fraction):
        return str(v)
    return format(float(v), ".13g")


def evaluate(quantity: str, kv: dict):
    if quantity not in _QUANTITIES:
        raise ConfigError(f"unknown quantity {quantity!r}; choose from "
                          f"{', '.join(sorted(_QUANTITIES))}")
    fn, spec = _QUANTITIES[quantity]
    allowed = set()
    args = []
    for item in spec:
        if item == "p":
            allowed.update(_MODEL_KEYS)
            args.append(_params_from(kv))
            continue
        name, kind = item
        allowed.add(name)
        if name not in kv:
            raise ConfigError(f"{quantity} needs parameter {name}")
        args.append(_number(kv, name, kind))
    extra = set(kv) - allowed
    if extra:
        raise ConfigError(f"unknown parameter(s) for {quantity}: {', '.join(sorted(extra))}")
    return fn(*args)


# ------------------------------------------------------------ scenarios

_QUANTITY_NAMES = ("joint", "selection", "correlation", "two_antenna", "tail")
_SCENARIO_KEYS = {"Delta", "delta", "lam", "r", "alpha", "theta", "thresholds", "theta2", "n",
                  "quantities", "realizations", "seed", "bias_budget", "disk_radius",
                  "far_field", "method"}


@dataclass
class Scenario:
    params: an.NormalizedParams
    model: an.ModelParams
    thresholds: tuple
    orders: tuple
    quantities: tuple = ("joint", "selection")
    theta2: float | None = None
    realizations: int = 100_000
    seed: int = 42
    bias_budget: float = 1e-4
    disk_radius: float | None = None
    far_field: str = "mean"
    method: str = "conditioned"

    def sim_config(self) -> mcsim.SimConfig:
        n_ant = max(self.orders)
        if {"correlation", "two_antenna"} & set(self.quantities):
            n_ant = max(n_ant, 2)
        thetas = self.thresholds + ((self.theta2,) if self.theta2 else ())
        return mcsim.SimConfig(model=self.model, n_antennas=n_ant, thresholds=thetas,
                               num_realizations=self.realizations, seed=self.seed,
                               truncation_bias_budget=self.bias_budget,
                               disk_radius=self.disk_radius, far_field=self.far_field)

    def resolved(self) -> dict:
        cfg = self.sim_config()
        return {
            "Delta": self.params.Delta, "delta": self.params.delta,
            "lam": self.model.lam, "r": self.model.r, "alpha": self.model.alpha,
            "thresholds": list(self.thresholds), "n": list(self.orders),
            "quantities": list(self.quantities), "theta2": self.theta2,
            "realizations": self.realizations, "seed": self.seed,
            "bias_budget": self.bias_budget, "disk_radius": cfg.radius,
            "far_field": self.far_field, "method": self.method,
            "block_size": mcsim.BLOCK_SIZE,
        }


def read_config(path) -> list[tuple[int, str, str]]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    entries = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {line!r}")
        entries.append((lineno, _canon(key), value.strip()))
    return entries


def _list(raw: str, kind, where: str) -> tuple:
    items = [s.strip() for s in raw.split(",") if s.strip()]
    try:
        return tuple(kind(s) for s in items)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r} as a list of {kind.__name__}") from None


def load_scenario(entries, overrides: dict | None = None, source: str = "<args>") -> Scenario:
    """Build a :class:`Scenario` from ``(lineno, key, value)`` entries."""
    kv, where = {}, {}
    for lineno, key, value in entries:
        loc = f"{source}:{lineno}" if lineno else source
        if key not in _SCENARIO_KEYS:
            raise ConfigError(f"{loc}: unknown key {key!r}")
        kv[key] = value
        where[key] = loc
    for key, value in (overrides or {}).items():
        if value is not None:
            kv[key] = str(value)
            where[key] = f"--{key.replace('_', '-')}"

    def field_error(key, exc):
        return ConfigError(f"{where.get(key, source)}: {key}: {exc}")

    try:
        params = _params_from({k: kv[k] for k in _MODEL_KEYS if k in kv})
    except (ConfigError, ValueError) as exc:
        raise ConfigError(f"{source}: {exc}") from None
    if {"lam", "r", "alpha"} & kv.keys():
        model = an.ModelParams(float(kv["lam"]), float(kv["r"]), float(kv["alpha"]))
    else:
        model = params.to_model()

    raw_theta = kv.get("thresholds", kv.get("theta", "1"))
    thresholds = _list(raw_theta, float, where.get("thresholds", where.get("theta", source)))
    if not thresholds or any(t <= 0 for t in thresholds):
        raise field_error("thresholds", "need at least one positive threshold")
    if "n" not in kv:
        raise ConfigError(f"{source}: missing key 'n' (comma-separated antenna counts)")
    orders = _list(kv["n"], int, where["n"])
    if not orders:
        raise field_error("n", "the list of antenna counts is empty")
    if any(n < 1 for n in orders):
        raise field_error("n", "antenna counts must be positive")
    quantities = _list(kv.get("quantities", "joint,selection"), str,
                       where.get("quantities", source))
    bad = [q for q in quantities if q not in _QUANTITY_NAMES]
    if bad or not quantities:
        raise field_error("quantities", f"choose from {', '.join(_QUANTITY_NAMES)}")
    sc = Scenario(params=params, model=model, thresholds=thresholds, orders=orders,
                  quantities=quantities)
    try:
        if "theta2" in kv:
            sc.theta2 = float(kv["theta2"])
        if "realizations" in kv:
            sc.realizations = int(kv["realizations"])
        if "seed" in kv:
            sc.seed = int(kv["seed"])
        if "bias_budget" in kv:
            sc.bias_budget = float(kv["bias_budget"])
        if "disk_radius" in kv:
            sc.disk_radius = float(kv["disk_radius"])
        if "far_field" in kv:
            sc.far_field = kv["far_field"]
        if "method" in kv:
            sc.method = kv["method"]
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    if "two_antenna" in quantities and sc.theta2 is None:
        raise field_error("quantities", "two_antenna needs theta2")
    if sc.method not in ("conditioned", "naive"):
        raise field_error("method", "must be 'conditioned' or 'naive'")
    try:
        sc.sim_config()
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return sc


_COLUMNS = ["quantity", "n", "theta", "theta2", "analytic", "estimate", "std_error", "z"]


def scenario_rows(sc: Scenario, workers: int = 1) -> list[dict]:
    """Analytic value and Monte Carlo estimate for every requested quantity."""
    cfg = sc.sim_config()
    p = sc.params
    rows = []

    def add(quantity, n, theta, exact, est, theta2=None):
        rows.append({"quantity": quantity, "n": n, "theta": theta, "theta2": theta2,
                     "analytic": exact, "estimate": est.mean, "std_error": est.std_error,
                     "z": est.z_score(exact)})

    for theta in sc.thresholds:
        for quantity in sc.quantities:
            if quantity == "joint":
                for n in sc.orders:
                    est = mcsim.estimate_joint_success(cfg, n, theta, sc.method, workers)
                    add(quantity, n, theta, an.joint_success_prob(p, n, theta), est)
            elif quantity == "selection":
                for n in sc.orders:
                    est = mcsim.estimate_selection_combining(cfg, n, theta, sc.method, workers)
                    add(quantity, n, theta, an.selection_combining_prob(p, n, theta), est)
            elif quantity == "tail":
                tail = mcsim.estimate_first_success_tail(cfg, theta, max(sc.orders), workers)
                for n in sc.orders:
                    exact = 1.0 - an.selection_combining_prob(p, n, theta)
                    add(quantity, n, theta, exact, tail[n])
            elif quantity == "correlation":
                est = mcsim.estimate_indicator_correlation(cfg, theta, sc.method, workers)
                add(quantity, 2, theta, an.indicator_correlation(p, theta), est)
            elif quantity == "two_antenna":
                est = mcsim.estimate_two_antenna_joint(cfg, theta, sc.theta2, sc.method, workers)
                add(quantity, 2, theta, an.joint_two_antenna_success(p, theta, sc.theta2), est,
                    sc.theta2)
    return rows


def rows_to_csv(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        out = []
        for c in columns:
            v = row.get(c)
            if v is None:
                out.append("")
            elif isinstance(v, float):
                out.append(format_float(v))
            else:
                out.append(str(v))
        w.writerow(out)
    return buf.getvalue()


# ------------------------------------------------------------- manifest

@dataclass
class RunManifest:
    argv: list
    command: str
    config: dict
    seed: int | None
    version: str = __version__
    duration_s: float = 0.0
    outputs: list = field(default_factory=list)

    def write(self, path) -> Path:
        path = Path(str(path) + ".manifest.json")
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
        return path


def _emit(text: str, out, manifest: RunManifest | None, started: float) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).write_text(text, encoding="utf-8")
    if manifest is not None:
        manifest.outputs = [str(out)]
        manifest.duration_s = time.perf_counter() - started
        manifest.write(out)


# ------------------------------------------------------------- commands

def cmd_eval(args) -> int:
    kv = parse_pairs(args.params)
    value = evaluate(args.quantity, kv)
    print(format_value(value))
    return EXIT_OK


def cmd_fig(args, argv, started) -> int:
    sim = None
    if args.sim:
        sim = SimOptions(realizations=args.realizations, seed=args.seed,
                         bias_budget=args.bias_budget, workers=args.workers)
    overrides = parse_pairs(args.param)
    try:
        table = make_figure(args.figure, sim, **overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    config = {"figure": args.figure, "overrides": overrides, "sim": args.sim}
    if sim is not None:
        config.update(realizations=sim.realizations, bias_budget=sim.bias_budget)
    manifest = RunManifest(argv=argv, command="fig", config=config,
                           seed=args.seed if args.sim else None)
    _emit(table.to_csv(), args.out, manifest, started)
    return EXIT_OK


def _scenario_from_args(args) -> Scenario:
    entries = read_config(args.config) if args.config else []
    source = args.config or "<args>"
    entries += [(0, k, v) for k, v in parse_pairs(getattr(args, "params", [])).items()]
    overrides = {"realizations": args.realizations, "seed": args.seed,
                 "bias_budget": args.bias_budget}
    return load_scenario(entries, overrides, source)


def cmd_simulate(args, argv, started) -> int:
    sc = _scenario_from_args(args)
    rows = scenario_rows(sc, args.workers)
    cols = ["quantity", "n", "theta", "theta2", "estimate", "std_error"]
    manifest = RunManifest(argv=argv, command="simulate", config=sc.resolved(), seed=sc.seed)
    if args.dump:
        with open(args.dump, "w", encoding="utf-8", newline="") as fh:
            mcsim.dump_realizations(sc.sim_config(), fh)
    _emit(rows_to_csv(rows, cols), args.out, manifest, started)
    return EXIT_OK


def cmd_compare(args, argv, started) -> int:
    sc = _scenario_from_args(args)
    rows = scenario_rows(sc, args.workers)
    manifest = RunManifest(argv=argv, command="compare", config=sc.resolved(), seed=sc.seed)
    _emit(rows_to_csv(rows, _COLUMNS), args.out, manifest, started)
    worst = max(abs(r["z"]) for r in rows)
    if worst > Z_LIMIT:
        print(f"compare: max |z| = {worst:.3g} exceeds {Z_LIMIT:g}", file=sys.stderr)
        return EXIT_STAT
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="simocorr", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ev = sub.add_parser("eval", help="evaluate a closed-form quantity")
    ev.add_argument("quantity")
    ev.add_argument("params", nargs="*", metavar="key=value")

    def sim_flags(p, *, default_none: bool):
        d = (lambda v: None) if default_none else (lambda v: v)
        p.add_argument("--realizations", type=int, default=d(100_000))
        p.add_argument("--seed", type=int, default=d(42))
        p.add_argument("--bias-budget", type=float, default=d(1e-4))
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--out", metavar="PATH")

    fg = sub.add_parser("fig", help="write the data behind one figure as CSV")
    fg.add_argument("figure", type=int, choices=range(1, 6))
    fg.add_argument("--sim", action="store_true", help="append Monte Carlo columns")
    fg.add_argument("--param", action="append", default=[], metavar="key=value",
                    help="override a default figure parameter (recorded in the output)")
    sim_flags(fg, default_none=False)

    sm = sub.add_parser("simulate", help="Monte Carlo estimates for a scenario")
    sm.add_argument("params", nargs="*", metavar="key=value")
    sm.add_argument("--config", metavar="PATH")
    sm.add_argument("--dump", metavar="PATH", help="write per-realization records as CSV")
    sim_flags(sm, default_none=True)

    cp = sub.add_parser("compare", help="closed form versus Monte Carlo with z-scores")
    cp.add_argument("--config", metavar="PATH", required=True)
    sim_flags(cp, default_none=True)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        if args.command == "eval":
            return cmd_eval(args)
        if args.command == "fig":
            return cmd_fig(args, argv, started)
        if args.command == "simulate":
            return cmd_simulate(args, argv, started)
        return cmd_compare(args, argv, started)
    except (ConfigError, ValueError, ArithmeticError, OSError) as exc:
        print(f"simocorr {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
