"""Data tables for the five standard figures.

Each ``figure<k>`` function returns a :class:`~simocorr.tables.CurveTable`
with the analytic curves at fixed default parameters.
Keyword arguments override those parameters; overridden names are listed in
the table metadata.  Passing ``sim=SimOptions(...)`` appends Monte Carlo
estimate and standard-error columns (``<series>_mc`` / ``<series>_se``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import analytic as an
from . import mcsim
from .specfun import diversity_poly, log_gamma
from .tables import CurveTable

__all__ = [
    "SimOptions",
    "FIGURES",
    "figure1",
    "figure2",
    "figure3",
    "figure4",
    "figure4_delta",
    "figure5",
    "make_figure",
]

FIG1_ORDERS = (1, 2, 4, 8)
FIG1_GRID = np.linspace(0.0, 1.0, 101)
FIG3_DELTA_GRID = np.linspace(0.01, 0.99, 99)
FIG3_CONTENTIONS = (0.1, 1.0, 10.0)
FIG4_ALPHA_GRID = np.linspace(2.1, 8.0, 61)
FIG4_ORDERS = (2, 4, 16)


@dataclass(frozen=True)
class SimOptions:
    realizations: int = 100_000
    seed: int = 42
    bias_budget: float = 1e-4
    workers: int = 1


def _meta(defaults: dict, given: dict, extra: dict | None = None):
    unknown = set(given) - set(defaults)
    if unknown:
        raise ValueError(f"unknown figure parameter(s): {', '.join(sorted(unknown))}")
    # CLI overrides arrive as strings
    given = {k: type(defaults[k])(v) for k, v in given.items()}
    params = {**defaults, **given}
    meta = {k: repr(v) if isinstance(v, float) else str(v) for k, v in params.items()}
    overridden = sorted(k for k in given if given[k] != defaults[k])
    if overridden:
        meta["overridden"] = ",".join(overridden)
    if extra:
        meta.update(extra)
    return params, meta


def _sim_meta(meta: dict, sim: SimOptions | None) -> None:
    if sim is not None:
        meta["sim"] = (f"realizations={sim.realizations} seed={sim.seed} "
                       f"bias_budget={sim.bias_budget!r} estimator=conditioned")


def _sim_config(params: an.NormalizedParams, n: int, theta: float, sim: SimOptions):
    return mcsim.SimConfig.from_normalized(
        params, n_antennas=n, thresholds=(theta,), num_realizations=sim.realizations,
        seed=sim.seed, truncation_bias_budget=sim.bias_budget)


def _add_estimates(table: CurveTable, label: str, estimates) -> None:
    table.add_series(f"{label}_mc", [e.mean for e in estimates])
    table.add_series(f"{label}_se", [e.std_error for e in estimates])


def figure1(sim: SimOptions | None = None) -> CurveTable:
    """Diversity polynomials with the bounds n^x and n^x / Gamma(1+x).

    There is nothing random here; ``sim`` is accepted and ignored.
    """
    labels = []
    for n in FIG1_ORDERS:
        labels += [f"D_{n}", f"lower_{n}", f"upper_{n}"]
    rows = []
    for x in FIG1_GRID:
        x = float(x)
        vals = []
        for n in FIG1_ORDERS:
            lower = float(n) ** x
            vals += [diversity_poly(n, x), lower, lower * math.exp(-log_gamma(1.0 + x))]
        rows.append((x, vals))
    meta = {"orders": ",".join(map(str, FIG1_ORDERS)), "grid": "101 points on [0, 1]"}
    return CurveTable("Diversity polynomial D_n(x) with lower bound n^x and upper bound "
                      "n^x/Gamma(1+x)", "x", labels, rows, meta)


def figure2(sim: SimOptions | None = None, **overrides) -> CurveTable:
    """Joint success P_n(theta) versus n with its bounds and the independent baseline."""
    defaults = {"Delta": 0.25, "delta": 0.5, "theta": 1.0, "n_max": 25}
    params, meta = _meta(defaults, overrides)
    p = an.NormalizedParams(params["Delta"], params["delta"])
    theta = float(params["theta"])
    ns = range(1, int(params["n_max"]) + 1)
    rows = []
    for n in ns:
        lo, up = an.joint_prob_bounds(p, n, theta)
        rows.append((n, [an.joint_success_prob(p, n, theta), lo, up,
                         an.independent_joint_prob(p, n, theta)]))
    table = CurveTable("Joint success probability P_n versus n with bounds and the "
                       "independent-interference value", "n",
                       ["P_n", "lower_bound", "upper_bound", "independent"], rows, meta)
    if sim is not None:
        cfg = _sim_config(p, max(ns), theta, sim)
        q = mcsim.sample_conditional(cfg, (theta,), sim.workers)[:, 0]
        _add_estimates(table, "P_n", [mcsim.Estimate.from_samples(q ** n) for n in ns])
        _sim_meta(table.meta, sim)
    return table


def figure3(sim: SimOptions | None = None, **overrides) -> CurveTable:
    """Success-indicator correlation versus delta for several contention levels."""
    defaults = {"theta": 1.0, "Delta_values": "0.1,1,10"}
    params, meta = _meta(defaults, overrides)
    theta = float(params["theta"])
    deltas_c = [float(v) for v in str(params["Delta_values"]).split(",")]
    labels = [f"zeta_Delta={c:g}" for c in deltas_c]
    rows = []
    for d in FIG3_DELTA_GRID:
        d = float(d)
        rows.append((d, [an.indicator_correlation(an.NormalizedParams(c, d), theta)
                         for c in deltas_c]))
    meta["grid"] = "99 points on [0.01, 0.99]"
    table = CurveTable("Correlation coefficient of the success indicators versus delta",
                       "delta", labels, rows, meta)
    if sim is not None:
        for c, label in zip(deltas_c, labels):
            ests = [mcsim.estimate_indicator_correlation(
                        _sim_config(an.NormalizedParams(c, float(d)), 2, theta, sim), theta,
                        workers=sim.workers)
                    for d in FIG3_DELTA_GRID]
            _add_estimates(table, label, ests)
        _sim_meta(table.meta, sim)
    return table


def figure4_delta(alpha: float, contention_scale: float = 1.0 / 3.0) -> float:
    """Delta used in the selection-combining outage figure: Gamma(1+d)Gamma(1-d)/3."""
    d = 2.0 / alpha
    return contention_scale * math.exp(log_gamma(1.0 + d) + log_gamma(1.0 - d))


def figure4(sim: SimOptions | None = None, **overrides) -> CurveTable:
    """Selection-combining outage versus the path loss exponent."""
    defaults = {"theta": 1.0, "contention_scale": 1.0 / 3.0, "orders": "2,4,16"}
    params, meta = _meta(defaults, overrides)
    theta = float(params["theta"])
    scale = float(params["contention_scale"])
    orders = [int(v) for v in str(params["orders"]).split(",")]
    labels = (["Delta"] + [f"outage_{n}" for n in orders]
              + [f"outage_indep_{n}" for n in orders])
    rows = []
    for alpha in FIG4_ALPHA_GRID:
        alpha = float(alpha)
        p = an.NormalizedParams(figure4_delta(alpha, scale), 2.0 / alpha)
        outage = an.selection_outage_curve(p, max(orders), theta)
        vals = [p.Delta]
        vals += [outage[n - 1] for n in orders]
        vals += [an.independent_selection_outage(p, n, theta) for n in orders]
        rows.append((alpha, vals))
    meta["grid"] = "61 points on [2.1, 8.0]"
    table = CurveTable("Selection combining outage 1 - p_n versus alpha, actual and with "
                       "independent interference", "alpha", labels, rows, meta)
    if sim is not None:
        per_order = {n: [] for n in orders}
        for alpha in FIG4_ALPHA_GRID:
            alpha = float(alpha)
            p = an.NormalizedParams(figure4_delta(alpha, scale), 2.0 / alpha)
            tail = mcsim.estimate_first_success_tail(
                _sim_config(p, max(orders), theta, sim), theta, max(orders), sim.workers)
            for n in orders:
                per_order[n].append(tail[n])
        for n in orders:
            _add_estimates(table, f"outage_{n}", per_order[n])
        _sim_meta(table.meta, sim)
    return table


def figure5(sim: SimOptions | None = None, **overrides) -> CurveTable:
    """Selection-combining success versus the number of antennas."""
    defaults = {"Delta": 0.5, "delta": 0.5, "theta": 1.0, "n_max": 128}
    params, meta = _meta(defaults, overrides)
    p = an.NormalizedParams(params["Delta"], params["delta"])
    theta = float(params["theta"])
    n_max = int(params["n_max"])
    curve = an.selection_combining_curve(p, n_max, theta)
    rows = [(n, [math.log10(n), curve[n - 1], an.independent_selection_prob(p, n, theta)])
            for n in range(1, n_max + 1)]
    table = CurveTable("Selection combining success probability versus the number of "
                       "antennas", "n", ["log10_n", "p_n", "p_indep_n"], rows, meta)
    if sim is not None:
        tail = mcsim.estimate_first_success_tail(_sim_config(p, n_max, theta, sim), theta,
                                                 n_max, sim.workers)
        ests = [mcsim.Estimate(1.0 - e.mean, e.std_error, e.count) for e in tail[1:]]
        _add_estimates(table, "p_n", ests)
        _sim_meta(table.meta, sim)
    return table


FIGURES = {1: figure1, 2: figure2, 3: figure3, 4: figure4, 5: figure5}


def make_figure(number: int, sim: SimOptions | None = None, **overrides) -> CurveTable:
    if number not in FIGURES:
        raise ValueError(f"figure must be one of 1..5, got {number!r}")
    if number == 1:
        if overrides:
            raise ValueError("figure 1 takes no parameters")
        return figure1(sim)
    return FIGURES[number](sim, **overrides)
