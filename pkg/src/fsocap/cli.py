"""Batch front end: scenario sweeps, the Table-I style error report, fits and MC runs."""

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, replace

from fsocap import __version__
from fsocap.approx_iid import fit_iid_sum
from fsocap.approx_inid import adapt_shapes, beta_omegas, compute_weights, quantile_omegas
from fsocap.capacity import (
    audit_closed_form,
    awgn_capacity,
    capacity_iid_closed,
    capacity_iid_highsnr,
    capacity_iid_quadrature,
    capacity_inid_closed,
    capacity_inid_highsnr,
    capacity_inid_quadrature,
    db_to_linear,
    gamma0,
    linear_to_db,
)
from fsocap.channel import GammaGammaParams, gg_shape_params, scintillation_index
from fsocap.config import SNR_AXES, build_scenario, load_scenario
from fsocap.errors import ConfigurationError, FsoCapError
from fsocap.montecarlo import mc_capacity_sweep
from fsocap.specfun import ContourConfig

log = logging.getLogger("fsocap")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_AUDIT = 0, 2, 3, 4
CSV_COLUMNS = ("sweep_axis", "sweep_value", "method", "capacity_bits", "err_estimate", "status")

# Reference gap values (bits/s/Hz) for the comparison grid, columns ordered as TABLE1_APERTURES.
TABLE1_GAMMA_BAR_DB = (-5.0, -2.0, 1.0, 4.0, 7.0, 10.0)
TABLE1_APERTURES = ((1, 2), (2, 2), (2, 4))
PUBLISHED_OURS = {
    -5.0: (1.00e-03, 5.00e-04, 5.00e-04),
    -2.0: (8.00e-04, 8.00e-04, 1.30e-03),
    1.0: (1.00e-04, 3.00e-04, 7.00e-04),
    4.0: (1.10e-03, 2.10e-03, 9.00e-04),
    7.0: (6.00e-04, 2.30e-03, 8.00e-04),
    10.0: (8.00e-04, 1.60e-03, 1.20e-03),
}
PUBLISHED_PRIOR = {
    -5.0: (4.70e-03, 2.22e-02, 2.61e-02),
    -2.0: (1.21e-02, 3.12e-02, 2.82e-02),
    1.0: (2.13e-02, 3.75e-02, 3.04e-02),
    4.0: (3.11e-02, 4.40e-02, 3.11e-02),
    7.0: (3.83e-02, 4.71e-02, 3.17e-02),
    10.0: (4.47e-02, 4.81e-02, 3.15e-02),
}
TABLE1_BAND = 5e-3
TABLE1_COLUMNS = (
    "M",
    "N",
    "gamma_bar_db",
    "closed_form_bits",
    "monte_carlo_bits",
    "mc_std_error",
    "abs_gap",
    "published_ours",
    "published_prior",
    "within_band",
    "beats_prior",
)


def fmt(x):
    """Fixed 13-significant-digit scientific notation (stable across runs)."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if x is None or not math.isfinite(x):
        return "nan"
    return f"{x:.12e}"


@dataclass(frozen=True)
class Row:
    sweep_axis: str
    sweep_value: float
    method: str
    capacity_bits: float
    err_estimate: float
    status: str = "ok"


@dataclass
class ResultTable:
    rows: list
    metadata: dict

    @property
    def failed_rows(self):
        return [r for r in self.rows if r.status.startswith("error")]

    @property
    def audit_passed(self):
        audit = self.metadata.get("audit")
        return audit is None or audit.get("passed", True)

    def exit_code(self):
        if not self.audit_passed:
            return EXIT_AUDIT
        if self.failed_rows:
            return EXIT_NUMERIC
        return EXIT_OK


# ---------------------------------------------------------------- models


@dataclass(frozen=True)
class PointModel:
    """Everything needed to evaluate one sweep value."""

    a: float
    b: float
    omegas: tuple
    gamma0: float
    gamma_bar: float
    route: str
    fit: object = None
    weights: object = None

    @property
    def channels(self):
        return [GammaGammaParams(self.a, self.b, w) for w in self.omegas]

    def describe(self):
        d = {
            "a": self.a,
            "b": self.b,
            "scintillation_index": scintillation_index(self.a, self.b),
            "omega": list(self.omegas),
            "gamma0": self.gamma0,
            "gamma_bar_db": linear_to_db(self.gamma_bar),
            "route": self.route,
        }
        if self.fit is not None:
            d["fit"] = {
                "alpha": self.fit.alpha,
                "mu": self.fit.mu,
                "r_hat": self.fit.r_hat,
                "residual": self.fit.residual,
            }
        if self.weights is not None:
            wt = self.weights
            d["weights"] = {
                "digest": wt.digest(),
                "k": wt.context.k,
                "m": list(wt.context.m),
                "omega": list(wt.context.omega),
                "condition": wt.condition,
                "normalization": wt.normalization,
                "status": wt.status,
                "adaptation": wt.context.adaptation,
            }
        return d


def _omegas(sc, beta):
    L = sc.L
    if sc.mode == "iid":
        return (1.0,) * L
    if sc.inid_omega is not None:
        return tuple(sc.inid_omega)
    if sc.inid_spread is not None:
        return quantile_omegas(L, sc.inid_spread)
    return beta_omegas(L, beta)


def _point_inputs(sc, value):
    link, beta = sc.link, sc.inid_beta
    axis = sc.sweep_axis
    if axis == "cn2":
        link = replace(link, cn2=value)
    elif axis == "D":
        link = replace(link, aperture=value)
    elif axis == "L":
        link = replace(link, distance=value)
    elif axis == "beta":
        beta = value
    if axis in SNR_AXES:
        snr_axis, snr_db = axis, value
    else:
        snr_axis, snr_db = sc.snr_axis, sc.snr_value
    return link, beta, snr_axis, snr_db


def _channel_model(sc, link, beta):
    a, b = gg_shape_params(link)
    omegas = _omegas(sc, beta)
    if len(set(omegas)) == 1:
        # equal mean powers: identical links, the alpha-mu route applies
        fit = fit_iid_sum(sc.L, GammaGammaParams(a, b, omegas[0]))
        return a, b, omegas, "iid", fit, None
    wt = compute_weights(adapt_shapes(a, b, omegas, sc.integer_shape))
    return a, b, omegas, "inid", None, wt


def build_models(sc):
    """One PointModel per sweep value (channel models shared where inputs coincide)."""
    cache = {}
    models = []
    for value in sc.sweep_values:
        link, beta, snr_axis, snr_db = _point_inputs(sc, value)
        key = (link, beta)
        if key not in cache:
            cache[key] = _channel_model(sc, link, beta)
        a, b, omegas, route, fit, wt = cache[key]
        ibar = math.fsum(omegas)
        if snr_axis == "rho_db":
            g0 = gamma0(sc.M, sc.N, sc.eta, db_to_linear(snr_db))
        else:
            g0 = db_to_linear(snr_db) / ibar**2
        models.append(PointModel(a, b, omegas, g0, g0 * ibar**2, route, fit, wt))
    return models


# ---------------------------------------------------------------- evaluation


def _evaluate(method, model, tol, cfg):
    if method == "closed_form":
        if model.route == "iid":
            return capacity_iid_closed(model.fit, model.gamma0, cfg)
        return capacity_inid_closed(model.weights, model.gamma0, cfg)
    if method == "quadrature":
        if model.route == "iid":
            return capacity_iid_quadrature(model.fit, model.gamma0, tol)
        return capacity_inid_quadrature(model.weights, model.gamma0, tol)
    if method == "high_snr":
        if model.route == "iid":
            return capacity_iid_highsnr(model.fit, model.gamma0)
        return capacity_inid_highsnr(model.weights, model.gamma0)
    raise ConfigurationError(f"method {method!r} is not evaluated pointwise")


def _error_status(exc):
    return f"error: {type(exc).__name__}: {exc}".replace("\n", " ")


def _mc_results(sc, models):
    """Monte-Carlo points; sweep values sharing a channel set share one sample pass."""
    groups = {}
    for idx, m in enumerate(models):
        groups.setdefault((m.a, m.b, m.omegas), []).append(idx)
    out = {}
    for (a, b, omegas), idxs in groups.items():
        chans = [GammaGammaParams(a, b, w) for w in omegas]
        pts = mc_capacity_sweep(chans, [models[i].gamma0 for i in idxs], sc.mc)
        out.update(zip(idxs, pts))
    return out


def run_loaded(sc):
    """Evaluate a Scenario; numeric failures become error rows, never exceptions."""
    cfg = ContourConfig(tolerance=min(1e-11, sc.tolerance))
    meta = {
        "library": "fsocap",
        "version": __version__,
        "scenario": sc.name,
        "config_digest": sc.digest,
        "mode": sc.mode,
        "M": sc.M,
        "N": sc.N,
        "eta": sc.eta,
        "sweep_axis": sc.sweep_axis,
        "methods": list(sc.methods),
        "tolerance": sc.tolerance,
        "contour_tolerance": cfg.tolerance,
        "mc": {"samples": sc.mc.samples, "seed": sc.mc.seed},
    }
    try:
        models = build_models(sc)
    except (FsoCapError, ArithmeticError, ValueError) as exc:
        status = _error_status(exc)
        rows = [
            Row(sc.sweep_axis, v, m, math.nan, math.nan, status) for v in sc.sweep_values for m in sc.methods
        ]
        meta["error"] = status
        return ResultTable(rows, meta)
    meta["points"] = [dict(sweep_value=v, **m.describe()) for v, m in zip(sc.sweep_values, models)]

    mc = {}
    if "monte_carlo" in sc.methods:
        try:
            mc = _mc_results(sc, models)
        except (FsoCapError, ArithmeticError, ValueError) as exc:
            mc = {i: exc for i in range(len(models))}

    rows = []
    computed = {}
    for idx, (value, model) in enumerate(zip(sc.sweep_values, models)):
        for method in sc.methods:
            try:
                if method == "monte_carlo":
                    pt = mc[idx]
                    if isinstance(pt, Exception):
                        raise pt
                elif method == "awgn":
                    rows.append(Row(sc.sweep_axis, value, method, awgn_capacity(model.gamma_bar), 0.0))
                    continue
                else:
                    pt = _evaluate(method, model, sc.tolerance, cfg)
                computed[(idx, method)] = pt
                rows.append(Row(sc.sweep_axis, value, method, pt.capacity_bits, pt.err_estimate, pt.status))
            except (FsoCapError, ArithmeticError, ValueError) as exc:
                log.warning("row %s=%g %s failed: %s", sc.sweep_axis, value, method, exc)
                rows.append(Row(sc.sweep_axis, value, method, math.nan, math.nan, _error_status(exc)))

    if "closed_form" in sc.methods:
        meta["audit"] = _self_audit(sc, models, computed, cfg)
    return ResultTable(rows, meta)


def _self_audit(sc, models, computed, cfg):
    """Check the closed form against quadrature at the middle sweep point."""
    idx = len(models) // 2
    closed = computed.get((idx, "closed_form"))
    if closed is None:
        return {"index": idx, "passed": False, "reason": "closed form failed at the audit point"}
    ref = computed.get((idx, "quadrature"))
    try:
        if ref is None:
            ref = _evaluate("quadrature", models[idx], sc.tolerance, cfg)
    except (FsoCapError, ArithmeticError, ValueError) as exc:
        return {"index": idx, "passed": False, "reason": _error_status(exc)}
    return {
        "index": idx,
        "closed_form": closed.capacity_bits,
        "quadrature": ref.capacity_bits,
        "discrepancy": abs(closed.capacity_bits - ref.capacity_bits),
        "passed": audit_closed_form(closed, ref, sc.tolerance),
    }


def run_scenario(path, overrides=None):
    """Load a scenario file and evaluate it (see README for the key reference)."""
    return run_loaded(load_scenario(path, overrides))


# ---------------------------------------------------------------- comparison grid


@dataclass(frozen=True)
class Table1Cell:
    M: int
    N: int
    gamma_bar_db: float
    closed_form: float
    monte_carlo: float
    mc_std_error: float
    published_ours: float
    published_prior: float

    @property
    def gap(self):
        return abs(self.closed_form - self.monte_carlo)

    @property
    def within_band(self):
        return self.gap <= TABLE1_BAND

    @property
    def beats_prior(self):
        return self.gap < self.published_prior


def table1_report(samples=10**7, seed=0, tolerance=1e-9, workers=1):
    """Closed-form vs Monte-Carlo gaps on the comparison grid, next to the reference gaps.

    Default strong-turbulence link; gamma_bar = gamma0 (M N)^2 with unit mean per branch.
    """
    if not samples or samples < 2:
        raise ConfigurationError("table1 compares against Monte-Carlo; samples must be >= 2")
    base = {
        "M": 1,
        "N": 1,
        "mode": "iid",
        "sweep.axis": "gamma_bar_db",
        "sweep.start": TABLE1_GAMMA_BAR_DB[0],
        "sweep.stop": TABLE1_GAMMA_BAR_DB[-1],
        "sweep.steps": len(TABLE1_GAMMA_BAR_DB),
        "methods": ("closed_form", "monte_carlo"),
        "tolerance": tolerance,
        "mc.samples": int(samples),
        "mc.seed": int(seed),
        "mc.workers": int(workers),
    }
    cells = []
    meta = {
        "library": "fsocap",
        "version": __version__,
        "report": "table1",
        "mc": {"samples": int(samples), "seed": int(seed)},
        "band": TABLE1_BAND,
        "configs": [],
    }
    for col, (M, N) in enumerate(TABLE1_APERTURES):
        sc = build_scenario(dict(base, M=M, N=N, name=f"table1_{M}x{N}"))
        res = run_loaded(sc)
        if res.failed_rows:
            raise FsoCapError(f"table1 {M}x{N}: {res.failed_rows[0].status}")
        meta["configs"].append({"M": M, "N": N, "config_digest": sc.digest, "points": res.metadata["points"]})
        by = {(r.sweep_value, r.method): r for r in res.rows}
        for g in TABLE1_GAMMA_BAR_DB:
            val = min(by, key=lambda k: abs(k[0] - g))[0]
            c = by[(val, "closed_form")]
            m = by[(val, "monte_carlo")]
            cells.append(
                Table1Cell(M, N, g, c.capacity_bits, m.capacity_bits, m.err_estimate,
                           PUBLISHED_OURS[g][col], PUBLISHED_PRIOR[g][col])
            )
    return cells, meta


# ---------------------------------------------------------------- output


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _meta_lines(meta):
    text = json.dumps(_clean(meta), sort_keys=True, separators=(",", ":"))
    return [f"# fsocap {__version__}", f"# metadata: {text}"]


def table_to_csv(table):
    buf = io.StringIO()
    for line in _meta_lines(table.metadata):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in table.rows:
        w.writerow([r.sweep_axis, fmt(r.sweep_value), r.method, fmt(r.capacity_bits), fmt(r.err_estimate), r.status])
    return buf.getvalue()


def table_to_json(table):
    rows = [
        {
            "sweep_axis": r.sweep_axis,
            "sweep_value": r.sweep_value,
            "method": r.method,
            "capacity_bits": r.capacity_bits,
            "err_estimate": r.err_estimate,
            "status": r.status,
        }
        for r in table.rows
    ]
    return json.dumps(_clean({"metadata": table.metadata, "rows": rows}), sort_keys=True, indent=2) + "\n"


def table1_to_csv(cells, meta):
    buf = io.StringIO()
    for line in _meta_lines(meta):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE1_COLUMNS)
    for c in cells:
        w.writerow([
            c.M, c.N, fmt(c.gamma_bar_db), fmt(c.closed_form), fmt(c.monte_carlo), fmt(c.mc_std_error),
            fmt(c.gap), fmt(c.published_ours), fmt(c.published_prior), fmt(c.within_band), fmt(c.beats_prior),
        ])
    return buf.getvalue()


def table1_to_json(cells, meta):
    out = [
        {
            "M": c.M,
            "N": c.N,
            "gamma_bar_db": c.gamma_bar_db,
            "closed_form_bits": c.closed_form,
            "monte_carlo_bits": c.monte_carlo,
            "mc_std_error": c.mc_std_error,
            "abs_gap": c.gap,
            "published_ours": c.published_ours,
            "published_prior": c.published_prior,
            "within_band": c.within_band,
            "beats_prior": c.beats_prior,
        }
        for c in cells
    ]
    return json.dumps(_clean({"metadata": meta, "cells": out}), sort_keys=True, indent=2) + "\n"


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- entry point


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--tolerance", type=float, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--samples", type=int, default=None)
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="fso-cap", description="Ergodic capacity of MIMO FSO links over gamma-gamma fading")
    p.add_argument("--version", action="version", version=f"fso-cap {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="evaluate a scenario sweep")
    r.add_argument("config")
    sub.add_parser("table1", parents=[common], help="closed form vs Monte-Carlo error table")
    f = sub.add_parser("fit", parents=[common], help="print the fitted alpha-mu law or weight table")
    f.add_argument("--config", required=True)
    m = sub.add_parser("mc", parents=[common], help="Monte-Carlo only sweep")
    m.add_argument("config")
    return p


def _overrides(args, methods=None):
    ov = {"tolerance": args.tolerance, "mc.seed": args.seed, "mc.samples": args.samples, "mc.workers": args.workers}
    if methods is not None:
        ov["methods"] = methods
    return ov


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "table1":
            cells, meta = table1_report(
                samples=args.samples if args.samples is not None else 10**7,
                seed=args.seed if args.seed is not None else 0,
                tolerance=args.tolerance if args.tolerance is not None else 1e-9,
                workers=args.workers or 1,
            )
            _emit(table1_to_json(cells, meta) if args.format == "json" else table1_to_csv(cells, meta), args.out)
            return EXIT_OK if all(c.within_band and c.beats_prior for c in cells) else EXIT_AUDIT
        if args.command == "fit":
            sc = load_scenario(args.config, _overrides(args))
            models = build_models(sc)
            points = [dict(sweep_value=v, **m.describe()) for v, m in zip(sc.sweep_values, models)]
            _emit(json.dumps(_clean({"scenario": sc.name, "points": points}), sort_keys=True, indent=2) + "\n", args.out)
            return EXIT_OK
        methods = ("monte_carlo",) if args.command == "mc" else None
        table = run_scenario(args.config, _overrides(args, methods))
        _emit(table_to_json(table) if args.format == "json" else table_to_csv(table), args.out)
        for r in table.failed_rows:
            print(f"row {r.sweep_axis}={r.sweep_value:g} {r.method}: {r.status}", file=sys.stderr)
        if not table.audit_passed:
            print(f"self-audit failed: {table.metadata['audit']}", file=sys.stderr)
        return table.exit_code()
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FsoCapError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
