"""Command-line front end.

Subcommands fall into three groups:

* object inspection -- ``simulate`` (write sampled cycles to CSV), ``greeks``
  (print estimated and, where available, exact cycle parameters), ``couple``
  (write one coupled path, its Gaussian approximant, and the eight error
  terms on an evaluation grid);
* closed-form calculators -- ``bounds`` evaluates a single named tail bound
  and prints one CSV row, ``certify`` runs the Monte-Carlo / exact cross-check
  for a named bound and reports PASS or FAIL;
* experiments -- ``rate``, ``tail``, ``phis``, ``maxima`` parse a config file
  (or use the kind's defaults), run the experiment, and persist results,
  plot data, a canonical config snapshot, a report, and a manifest line
  under ``--out``.

Exit codes: 0 on success, 1 when a verdict-bearing subcommand (``certify``,
``maxima``) reports FAIL, 2 on usage, parse, or validation errors.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from .config import (ConfigParseError, ConfigValidationError, build_config,
                     parse_config)
from .coupling import build_bundle, phi_decomposition
from .greeks import (DegenerateTauError, GreeksUnavailableError,
                     InsufficientDataError, check_greek_identities,
                     estimate_greeks)
from .harness import (certify_bound, fit_constant_a,
                      maxima_scaling_experiment, replication_stream,
                      run_phi_diagnostics, run_rate_experiment,
                      run_tail_experiment)
from .models import InvalidParameterError, reference_greeks, true_greeks
from .paths import write_cycle_csv, write_events_csv
from .reporting import (append_manifest, atomic_write_text, format_value,
                        write_csv, write_report)
from .rng import RngStream

# Stream area for the one-shot subcommands, disjoint from every experiment
# kind (the harness uses kind ids 0..4, each spanning 2**34 stream indices).
_CLI_STREAM_BASE = 5 * 2 ** 34
_SIMULATE_OFFSET = 0
_GREEKS_OFFSET = 1


def _version() -> str:
    try:
        from importlib.metadata import version
        return version("regenlab")
    except Exception:
        return "0.1.0"


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------

def _load_config(config_path: str | None, kind: str):
    if config_path is None:
        return build_config(kind)
    return parse_config(config_path, kind)


def _prepare_out(out: str) -> Path:
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


def _write_snapshot(out_dir: Path, cfg) -> None:
    atomic_write_text(out_dir / "config.snapshot", cfg.render())


def _record_run(out_dir: Path, subcommand: str, config_path: str | None,
                root_seed: int, **extra) -> None:
    record = {"subcommand": subcommand,
              "config": config_path if config_path else "<defaults>",
              "out_dir": str(out_dir),
              "root_seed": root_seed,
              "version": _version()}
    record.update(extra)
    append_manifest(out_dir, record)


def _run_section(cfg) -> dict:
    return {"family": cfg.family,
            "kind": cfg.kind,
            "mode": cfg.mode if cfg.mode is not None else "none",
            "p": cfg.p,
            "replications": cfg.replications,
            "root_seed": cfg.root_seed,
            "version": _version()}


def _t_label(t: float) -> str:
    return str(int(t)) if float(t).is_integer() else repr(float(t)).replace(".", "p")


def _verdict(passed: bool) -> str:
    return "PASS" if passed else "FAIL"


# ---------------------------------------------------------------------------
# simulate / greeks / couple
# ---------------------------------------------------------------------------

def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config, "maxima")
    model = cfg.build_model()
    stream = RngStream(cfg.root_seed, _CLI_STREAM_BASE + _SIMULATE_OFFSET)
    path = model.sample_path(args.cycles, stream)
    out_dir = _prepare_out(args.out)
    write_cycle_csv(str(out_dir / "cycles.csv"), path.tau, path.xi, path.eta())
    if args.events:
        write_events_csv(str(out_dir / "events.csv"), path)
    _write_snapshot(out_dir, cfg)
    _record_run(out_dir, "simulate", args.config, cfg.root_seed,
                cycles=args.cycles)
    total = float(path.renewal_times[-1])
    print(f"simulate: {args.cycles} cycles of {cfg.family} "
          f"(total duration {total:.6g}) -> {out_dir / 'cycles.csv'}")
    return 0


def _matrix_entries(prefix: str, matrix: np.ndarray) -> dict:
    out = {}
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    for i in range(m.shape[0]):
        for j in range(m.shape[1]):
            out[f"{prefix}_{i + 1}{j + 1}"] = m[i, j]
    return out


def _greeks_section(g) -> dict:
    section = {"mu": g.mu, "gamma": g.gamma, "lam": g.lam}
    for name in ("kappa", "beta", "alpha"):
        vec = np.atleast_1d(np.asarray(getattr(g, name), dtype=float))
        for j, value in enumerate(vec):
            section[f"{name}_{j + 1}"] = value
    section.update(_matrix_entries("sigma", g.sigma))
    section.update(_matrix_entries("v", g.v))
    return section


def _cmd_greeks(args) -> int:
    cfg = _load_config(args.config, "maxima")
    model = cfg.build_model()
    stream = RngStream(cfg.root_seed, _CLI_STREAM_BASE + _GREEKS_OFFSET)
    batch = model.sample_cycles(args.cycles, stream)
    estimated = estimate_greeks(batch, cfg.p)
    sections = {"estimated": _greeks_section(estimated)}
    try:
        exact = true_greeks(model, cfg.p)
        sections["exact"] = _greeks_section(exact)
    except (GreeksUnavailableError, DegenerateTauError) as exc:
        sections["exact"] = {"available": False, "reason": str(exc)}
    residuals = check_greek_identities(estimated)
    sections["identities"] = dict(residuals)
    sections["run"] = {"family": cfg.family, "cycles": args.cycles,
                       "p": cfg.p, "root_seed": cfg.root_seed,
                       "version": _version()}
    from .reporting import render_report
    sys.stdout.write(render_report(sections))
    return 0


def _cmd_couple(args) -> int:
    cfg = _load_config(args.config, "phis")
    model = cfg.build_model()
    greeks = reference_greeks(model, cfg.p)
    t = float(args.t) if args.t is not None else float(cfg.t_grid[0])
    stream = replication_stream(cfg.root_seed, "phis", 0, cfg.replications, 0)
    path, bundle = build_bundle(model, greeks, t, cfg.mode, stream)
    dec = phi_decomposition(path, bundle, t, grid_step=cfg.grid_step)
    d = path.d
    header = (["u"]
              + [f"S_{j + 1}" for j in range(d)]
              + [f"W_{j + 1}" for j in range(d)]
              + [f"phi{q}_{j + 1}" for q in range(1, 9) for j in range(d)]
              + ["deviation"])
    rows = []
    for i in range(dec.grid.size):
        row = [dec.grid[i]]
        row.extend(dec.s_values[i])
        row.extend(dec.w_values[i])
        for q in range(8):
            row.extend(dec.phi[q][i])
        row.append(dec.deviation[i])
        rows.append(row)
    out_dir = _prepare_out(args.out)
    write_csv(out_dir / "couple.csv", header, rows)
    _write_snapshot(out_dir, cfg)
    _record_run(out_dir, "couple", args.config, cfg.root_seed, t=t,
                mode=cfg.mode)
    sup_dev = float(dec.deviation.max())
    print(f"couple: mode={cfg.mode} t={t:g} grid={dec.grid.size} points "
          f"sup-deviation={sup_dev:.6g} identity-residual={dec.residual:.3g} "
          f"(tolerance {dec.tolerance:.3g}) -> {out_dir / 'couple.csv'}")
    return 0


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------

def _parse_laplace(text: str):
    """Duration Laplace transform from a compact descriptor string.

    ``exp:RATE`` for exponential durations, ``gamma:SHAPE,SCALE`` for gamma
    durations, ``point:TAU`` for a deterministic duration.
    """
    kind, _, rest = text.partition(":")
    if kind == "exp":
        rate = float(rest)
        if rate <= 0:
            raise ValueError(f"exponential rate must be positive, got {rate}")
        return lambda b: rate / (rate + b)
    if kind == "gamma":
        shape_text, _, scale_text = rest.partition(",")
        shape, scale = float(shape_text), float(scale_text)
        if shape <= 0 or scale <= 0:
            raise ValueError(
                f"gamma shape and scale must be positive, got {shape}, {scale}")
        return lambda b: (1.0 + scale * b) ** (-shape)
    if kind == "point":
        tau0 = float(rest)
        if tau0 <= 0:
            raise ValueError(f"point duration must be positive, got {tau0}")
        return lambda b: math.exp(-b * tau0)
    raise ValueError(
        f"unknown laplace descriptor {text!r}; use exp:RATE, gamma:SHAPE,SCALE, "
        "or point:TAU")


def _need(params: dict, key: str) -> str:
    if key not in params:
        raise ValueError(f"missing required parameter --{key.replace('_', '-')}")
    return params[key]


def _f(params: dict, key: str, default: float | None = None) -> float:
    if key not in params:
        if default is None:
            raise ValueError(
                f"missing required parameter --{key.replace('_', '-')}")
        return default
    return float(params[key])


def _moments(params: dict, need_laplace: bool = False) -> bounds_mod.TailMoments:
    laplace_at_1 = None
    if "laplace_at_1" in params:
        laplace_at_1 = float(params["laplace_at_1"])
    elif "laplace" in params:
        laplace_at_1 = float(_parse_laplace(params["laplace"])(1.0))
    elif need_laplace:
        raise ValueError(
            "missing duration transform: give --laplace-at-1 VALUE or "
            "--laplace DESC")
    return bounds_mod.TailMoments(
        n=int(float(_need(params, "n"))), p=_f(params, "p"),
        abs_moment=_f(params, "abs_moment"), variance=_f(params, "variance"),
        laplace_at_1=laplace_at_1)


def _bound_poisson_inverse(params):
    res = bounds_mod.poisson_inverse_tail(
        _f(params, "t"), _f(params, "x"), _f(params, "gamma"))
    return res.value, res.region, dict(res.constants_used)


def _bound_renewal_count(params):
    res = bounds_mod.renewal_count_tail(
        _f(params, "t"), _f(params, "x"), _f(params, "mu"),
        _parse_laplace(_need(params, "laplace")))
    return res.value, res.region, dict(res.constants_used)


def _bound_grid_increment(params):
    res = bounds_mod.brownian_grid_increment_tail(_f(params, "t"),
                                                  _f(params, "x"))
    return res.value, res.region, dict(res.constants_used)


def _bound_nagaev(params):
    res = bounds_mod.nagaev_tail(_moments(params), _f(params, "x"))
    return res.value, res.region, dict(res.constants_used)


def _bound_block_maximal(params):
    res = bounds_mod.block_maximal_tail(_moments(params), _f(params, "x"),
                                        c=_f(params, "c", 1.0))
    return res.value, res.region, dict(res.constants_used)


def _bound_random_sum_m0(params):
    if "laplace_at_1" in params:
        laplace = lambda b: float(params["laplace_at_1"])  # noqa: E731
    else:
        laplace = _parse_laplace(_need(params, "laplace"))
    m0 = bounds_mod.random_sum_M0(laplace)
    return float(m0), "none", {"M0": m0}


def _bound_random_sum_nagaev(params):
    res = bounds_mod.random_sum_nagaev_tail(
        _f(params, "t"), _f(params, "x"), _moments(params, need_laplace=True))
    return res.value, res.region, dict(res.constants_used)


def _bound_brownian_sup(params):
    res = bounds_mod.brownian_sup_tail(_f(params, "t"), _f(params, "x"),
                                       int(_f(params, "d", 1.0)))
    return res.value, res.region, dict(res.constants_used)


def _bound_exp_to_power(params):
    c, a0 = bounds_mod.exp_to_power(_f(params, "A"), _f(params, "B"),
                                    _f(params, "C"), _f(params, "p"))
    return a0, "none", {"c": c, "a0": a0}


BOUND_CALCULATORS = {
    "poisson-inverse-tail": _bound_poisson_inverse,
    "renewal-count-tail": _bound_renewal_count,
    "brownian-grid-increment-tail": _bound_grid_increment,
    "nagaev-tail": _bound_nagaev,
    "block-maximal-tail": _bound_block_maximal,
    "random-sum-m0": _bound_random_sum_m0,
    "random-sum-nagaev-tail": _bound_random_sum_nagaev,
    "brownian-sup-tail": _bound_brownian_sup,
    "exp-to-power": _bound_exp_to_power,
}


def _collect_params(pairs: list[str], extra: list[str]) -> dict:
    """Parameters from repeated ``--param k=v`` plus free ``--key value``."""
    params: dict[str, str] = {}

    def put(key: str, value: str) -> None:
        key = key.replace("-", "_")
        if key in params:
            raise ValueError(f"duplicate parameter {key!r}")
        params[key] = value

    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ValueError(f"--param needs KEY=VALUE, got {pair!r}")
        put(key, value)
    i = 0
    while i < len(extra):
        token = extra[i]
        if not token.startswith("--") or len(token) <= 2:
            raise ValueError(f"unexpected argument {token!r}")
        body = token[2:]
        if "=" in body:
            key, _, value = body.partition("=")
            put(key, value)
            i += 1
            continue
        if i + 1 >= len(extra):
            raise ValueError(f"flag --{body} is missing a value")
        put(body, extra[i + 1])
        i += 2
    return params


def _cmd_bounds(args, extra: list[str]) -> int:
    name = args.name
    if name not in BOUND_CALCULATORS:
        known = ", ".join(sorted(BOUND_CALCULATORS))
        raise ValueError(f"unknown bound {name!r}; known bounds: {known}")
    params = _collect_params(args.param, extra)
    value, region, constants = BOUND_CALCULATORS[name](params)
    constant_text = ";".join(
        f"{key}={format_value(val)}" for key, val in constants.items())
    print(f"{name},{format_value(value)},{region or 'none'},{constant_text}")
    return 0


# ---------------------------------------------------------------------------
# certify
# ---------------------------------------------------------------------------

def _cmd_certify(args, extra: list[str]) -> int:
    raw = _collect_params(args.param, extra)
    params = {}
    for key, value in raw.items():
        number = float(value)
        params[key] = int(number) if number == int(number) else number
    record = certify_bound(args.name, params=params or None,
                           root_seed=args.seed, workers=args.workers)
    width = max((len(row.label) for row in record.rows), default=8)
    for row in record.rows:
        print(f"  {row.label:<{width}}  lhs={row.lhs:.6g}  se={row.se:.3g}  "
              f"bound={row.bound:.6g}  {_verdict(row.passed)}")
    print(f"certify {record.name}: {_verdict(record.passed)}")
    if args.out:
        out_dir = _prepare_out(args.out)
        sections = {
            "run": {"name": record.name, "root_seed": args.seed,
                    "passed": record.passed, "version": _version()},
            "details": dict(record.details),
        }
        for k, row in enumerate(record.rows):
            sections[f"row_{k}"] = {"label": row.label, "lhs": row.lhs,
                                    "se": row.se, "bound": row.bound,
                                    "passed": row.passed}
        write_report(out_dir / "report.txt", sections)
        write_csv(out_dir / "results.csv",
                  ["label", "lhs", "se", "bound", "passed"],
                  [[row.label, row.lhs, row.se, row.bound, row.passed]
                   for row in record.rows])
        _record_run(out_dir, "certify", None, args.seed, name=record.name,
                    passed=record.passed)
    return 0 if record.passed else 1


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def _cmd_rate(args) -> int:
    cfg = _load_config(args.config, "rate")
    fit = run_rate_experiment(cfg, workers=args.workers)
    out_dir = _prepare_out(args.out)
    _write_snapshot(out_dir, cfg)
    write_csv(out_dir / "results.csv",
              ["t", "replications", "median", "ci_low", "ci_high", "mean",
               "q90"],
              [[s.t, s.n, s.median, s.ci_low, s.ci_high, s.mean, s.q90]
               for s in fit.per_t])
    write_csv(out_dir / "plotdata_rate.csv", ["t", "median"],
              [[s.t, s.median] for s in fit.per_t])
    write_report(out_dir / "report.txt", {
        "run": _run_section(cfg),
        "fit": {"slope": fit.slope,
                "intercept": fit.intercept,
                "slope_ci_low": fit.slope_ci[0],
                "slope_ci_high": fit.slope_ci[1],
                "threshold": fit.threshold,
                "passed": fit.passed},
    })
    _record_run(out_dir, "rate", args.config, cfg.root_seed)
    print(f"rate: slope={fit.slope:.4f} "
          f"ci=({fit.slope_ci[0]:.4f}, {fit.slope_ci[1]:.4f}) "
          f"threshold={fit.threshold:.4f} {_verdict(fit.passed)} -> {out_dir}")
    return 0


def _cmd_tail(args) -> int:
    cfg = _load_config(args.config, "tail")
    estimates = run_tail_experiment(cfg, workers=args.workers)
    a_hat = fit_constant_a(estimates)
    out_dir = _prepare_out(args.out)
    _write_snapshot(out_dir, cfg)
    write_csv(out_dir / "results.csv",
              ["t", "x", "region", "replications", "hits", "p_hat", "ci_low",
               "ci_high", "normalized", "normalized_high"],
              [[e.t, e.x, e.region, e.n, e.hits, e.p_hat, e.ci_low, e.ci_high,
                e.normalized, e.normalized_high] for e in estimates])
    fit_section = {"a_hat": a_hat}
    per_t: dict[float, list] = {}
    for e in estimates:
        per_t.setdefault(e.t, []).append(e)
    for t, group in per_t.items():
        label = _t_label(t)
        write_csv(out_dir / f"plotdata_tail_t{label}.csv",
                  ["x", "normalized_high"],
                  [[e.x, e.normalized_high] for e in group])
        fit_section[f"a_hat_t{label}"] = max(e.normalized_high for e in group)
    horizon_maxima = [fit_section[f"a_hat_t{_t_label(t)}"] for t in per_t]
    fit_section["horizon_spread"] = (max(horizon_maxima)
                                     / max(min(horizon_maxima), 1e-300))
    write_report(out_dir / "report.txt", {
        "run": _run_section(cfg),
        "fit": fit_section,
    })
    _record_run(out_dir, "tail", args.config, cfg.root_seed)
    print(f"tail: a_hat={a_hat:.6g} over {len(estimates)} (t, x) cells, "
          f"horizon spread {fit_section['horizon_spread']:.3g}x -> {out_dir}")
    return 0


def _cmd_phis(args) -> int:
    cfg = _load_config(args.config, "phis")
    diag = run_phi_diagnostics(cfg, workers=args.workers)
    out_dir = _prepare_out(args.out)
    _write_snapshot(out_dir, cfg)
    rows = []
    for q in range(1, 9):
        for e in diag.per_term[q - 1]:
            rows.append([q, e.t, e.x, e.region, e.n, e.hits, e.p_hat,
                         e.ci_low, e.ci_high, e.normalized])
    for e in diag.deviation_table:
        rows.append([0, e.t, e.x, e.region, e.n, e.hits, e.p_hat, e.ci_low,
                     e.ci_high, e.normalized])
    write_csv(out_dir / "results.csv",
              ["q", "t", "x", "region", "replications", "hits", "p_hat",
               "ci_low", "ci_high", "normalized"], rows)
    for q in range(1, 9):
        write_csv(out_dir / f"plotdata_phi{q}.csv", ["x", "p_hat"],
                  [[e.x, e.p_hat] for e in diag.per_term[q - 1]])
    write_csv(out_dir / "plotdata_phi_total.csv", ["x", "p_hat"],
              [[e.x, e.p_hat] for e in diag.deviation_table])
    diagnostics = {
        "t": diag.t,
        "passage_exceed_freq": diag.passage_exceed_freq,
        "passage_exceed_bound": diag.passage_exceed_bound,
        "count_exceed_freq": diag.count_exceed_freq,
        "eta_pth_moment": diag.eta_pth_moment,
        "triangle_max_violation": diag.triangle_max_violation,
        "max_residual": diag.max_residual,
        "dominant_term": 1 + int(np.argmax(diag.term_sup_medians)),
    }
    for q in range(1, 9):
        diagnostics[f"term_sup_median_{q}"] = diag.term_sup_medians[q - 1]
    structure = {}
    for k, (x, lhs, rhs) in enumerate(diag.structure_rows):
        structure[f"x_{k}"] = x
        structure[f"empirical_{k}"] = lhs
        structure[f"bound_{k}"] = rhs
        structure[f"holds_{k}"] = bool(lhs <= rhs)
    write_report(out_dir / "report.txt", {
        "run": _run_section(cfg),
        "diagnostics": diagnostics,
        "structure": structure,
    })
    _record_run(out_dir, "phis", args.config, cfg.root_seed)
    print(f"phis: t={diag.t:g} dominant term phi{diagnostics['dominant_term']} "
          f"max identity residual {diag.max_residual:.3g} -> {out_dir}")
    return 0


def _cmd_maxima(args) -> int:
    cfg = _load_config(args.config, "maxima")
    trend = maxima_scaling_experiment(cfg, workers=args.workers)
    out_dir = _prepare_out(args.out)
    _write_snapshot(out_dir, cfg)
    write_csv(out_dir / "results.csv",
              ["n", "replications", "median", "ci_low", "ci_high"],
              [[n, row.n, row.median, row.ci_low, row.ci_high]
               for n, row in zip(trend.n_values, trend.rows)])
    write_csv(out_dir / "plotdata_maxima.csv", ["n", "median"],
              [[n, row.median] for n, row in zip(trend.n_values, trend.rows)])
    trend_section = {"passed": trend.passed,
                     "first_median": trend.rows[0].median,
                     "last_median": trend.rows[-1].median,
                     "decay_ratio": trend.rows[-1].median
                     / max(trend.rows[0].median, 1e-300)}
    write_report(out_dir / "report.txt", {
        "run": _run_section(cfg),
        "trend": trend_section,
    })
    _record_run(out_dir, "maxima", args.config, cfg.root_seed)
    print(f"maxima: medians "
          f"{[round(row.median, 4) for row in trend.rows]} "
          f"{_verdict(trend.passed)} -> {out_dir}")
    return 0 if trend.passed else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regenlab",
        description="Simulation laboratory for Gaussian coupling of "
                    "cumulative processes with regeneration.",
        allow_abbrev=False)
    parser.add_argument("--version", action="version",
                        version=f"regenlab {_version()}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", allow_abbrev=False, help="sample cycles and write CSV")
    sim.add_argument("--config", default=None)
    sim.add_argument("--cycles", type=int, default=1000)
    sim.add_argument("--out", required=True)
    sim.add_argument("--events", action="store_true",
                     help="also write intra-cycle events")
    sim.set_defaults(handler=_cmd_simulate)

    grk = sub.add_parser("greeks", allow_abbrev=False, help="print cycle parameters")
    grk.add_argument("--config", default=None)
    grk.add_argument("--cycles", type=int, default=100_000)
    grk.set_defaults(handler=_cmd_greeks)

    cpl = sub.add_parser("couple", allow_abbrev=False,
                         help="write one coupled path and its error terms")
    cpl.add_argument("--config", default=None)
    cpl.add_argument("--t", type=float, default=None,
                     help="horizon (default: first grid entry)")
    cpl.add_argument("--out", required=True)
    cpl.set_defaults(handler=_cmd_couple)

    bnd = sub.add_parser("bounds", allow_abbrev=False, help="evaluate one closed-form tail bound")
    bnd.add_argument("name")
    bnd.add_argument("--param", action="append", default=[],
                     metavar="KEY=VALUE")
    bnd.set_defaults(handler=_cmd_bounds, takes_extra=True)

    crt = sub.add_parser("certify", allow_abbrev=False,
                         help="cross-check one bound against Monte Carlo "
                              "or exact probabilities")
    crt.add_argument("name")
    crt.add_argument("--param", action="append", default=[],
                     metavar="KEY=VALUE")
    crt.add_argument("--seed", type=int, default=0)
    crt.add_argument("--workers", type=int, default=1)
    crt.add_argument("--out", default=None)
    crt.set_defaults(handler=_cmd_certify, takes_extra=True)

    for kind, handler, description in (
            ("rate", _cmd_rate,
             "median sup-deviation growth across horizons"),
            ("tail", _cmd_tail,
             "deviation exceedance probabilities over a (t, x) grid"),
            ("phis", _cmd_phis,
             "per-term decomposition diagnostics at one horizon"),
            ("maxima", _cmd_maxima,
             "scaling of cycle maxima against n^(1/p)")):
        exp = sub.add_parser(kind, allow_abbrev=False, help=description)
        exp.add_argument("--config", default=None)
        exp.add_argument("--out", required=True)
        exp.add_argument("--workers", type=int, default=1)
        exp.set_defaults(handler=handler)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args, extra = parser.parse_known_args(argv)
    takes_extra = getattr(args, "takes_extra", False)
    if extra and not takes_extra:
        parser.error(f"unrecognized arguments: {' '.join(extra)}")
    try:
        if takes_extra:
            return args.handler(args, extra)
        return args.handler(args)
    except (ConfigParseError, ConfigValidationError, InvalidParameterError,
            InsufficientDataError, DegenerateTauError, ValueError, KeyError,
            OSError) as exc:
        message = exc.args[0] if exc.args else str(exc)
        print(f"error: {message}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
