"""Command line front end: ``leoh {analytic,simulate,compare,sweep,gen,moment-match,config}``.

Exit codes: 0 success, 1 a comparison point failed at 3 sigma, 2 bad
configuration or arguments, 3 numerical or domain failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import analytics as an
from . import config as cf
from . import simulator as sm
from .constellation import ecef_rows, sample_cox, sample_polar
from .errors import ConfigError, DomainError, QuadratureFailure

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
Z_LIMIT = 3.0
DEFAULT_DELAY_POINTS = 20

CSV_COLUMNS = ["sweep_var", "value", "analytic", "sim_mean", "sim_ci", "trials", "seed"]
COMPARE_COLUMNS = CSV_COLUMNS + ["z", "status"]


@dataclass(frozen=True)
class Metric:
    analytic: Callable[[cf.ExperimentConfig], float]
    simulate: Callable[[cf.ExperimentConfig], sm.MetricEstimate]
    probability: bool = False


def _delay_sim(cfg: cf.ExperimentConfig, d: float) -> sm.MetricEstimate:
    return sm.estimate_delay_cdf(cfg.cox_params(), cfg.orbit_geometry(), cfg.motion_params(), [d],
                                 cfg.sim_config())[0]


METRICS: dict[str, Metric] = {
    "visible_orbits": Metric(
        lambda c: an.expected_visible_orbits(c.cox_params(), c.orbit_geometry().xi),
        lambda c: sm.estimate_visible_orbits(c.cox_params(), c.orbit_geometry(), c.sim_config())),
    "visible_sats": Metric(
        lambda c: an.expected_visible_satellites(c.cox_params(), c.orbit_geometry(), c.quad_spec()),
        lambda c: sm.estimate_visible_count(c.cox_params(), c.orbit_geometry(), c.sim_config())),
    "time_fraction": Metric(
        lambda c: an.harvest_time_fraction(c.cox_params(), c.orbit_geometry(), c.quad_spec()),
        lambda c: sm.estimate_time_fraction(c.cox_params(), c.orbit_geometry(), c.sim_config()),
        probability=True),
    "data_per_pass": Metric(
        lambda c: an.data_per_pass(c.pass_inclination(), c.orbit_geometry(), c.link_budget(), c.fading(),
                                   c.motion_params(), c.modulation(), c.quad_spec()),
        lambda c: sm.simulate_pass(c.pass_inclination(), c.orbit_geometry(), c.link_budget(), c.fading(),
                                   c.motion_params(), c.modulation(), c.sim_config())),
    "capacity": Metric(
        lambda c: an.harvesting_capacity(c.cox_params(), c.orbit_geometry(), c.link_budget(), c.fading(),
                                         c.quad_spec()),
        lambda c: sm.estimate_capacity(c.cox_params(), c.orbit_geometry(), c.link_budget(), c.fading(),
                                       c.sim_config())),
    "delay_cdf": Metric(
        lambda c: an.delay_cdf(c.cox_params(), c.orbit_geometry(), c.motion_params(), c.delay.d, c.quad_spec()),
        lambda c: _delay_sim(c, c.delay.d),
        probability=True),
    "p_zero_delay": Metric(
        lambda c: an.zero_delay_probability(c.cox_params(), c.orbit_geometry(), c.quad_spec()),
        lambda c: _delay_sim(c, 0.0),
        probability=True),
    "p_inf_delay": Metric(
        lambda c: an.infinite_delay_probability(c.cox_params(), c.orbit_geometry()),
        lambda c: sm.estimate_infinite_delay(c.cox_params(), c.orbit_geometry(), c.motion_params(),
                                             c.sim_config()),
        probability=True),
}


# --- evaluation ----------------------------------------------------------------


@dataclass(frozen=True)
class Row:
    sweep_var: str
    value: Optional[float]
    analytic: Optional[float] = None
    estimate: Optional[sm.MetricEstimate] = None

    def z_score(self, probability: bool) -> float:
        diff = self.estimate.mean - self.analytic
        se = self.estimate.std_error
        if probability:
            # an all-zero or all-one Bernoulli sample has no spread; fall back on the analytic variance
            p = min(max(self.analytic, 0.0), 1.0)
            se = max(se, math.sqrt(p * (1.0 - p) / self.estimate.trials))
        if se == 0.0:
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / se


def sweep_points(cfg: cf.ExperimentConfig, metric: str) -> list[tuple[str, Optional[float], cf.ExperimentConfig]]:
    """``(name, value, config)`` for every point; a single unnamed point without a sweep.

    ``delay_cdf`` without an explicit sweep runs over ``delay.d_grid``, or 20
    evenly spaced delays below the wraparound limit when that is empty.
    """
    if cfg.sweep.parameter:
        name, values = cfg.sweep.parameter, cfg.sweep.values
    elif metric == "delay_cdf":
        name, values = "delay.d", cfg.delay.d_grid
        if not values:
            limit = an.wraparound_limit(cfg.orbit_geometry(), cfg.motion_params())
            values = tuple(limit * k / DEFAULT_DELAY_POINTS for k in range(DEFAULT_DELAY_POINTS))
    else:
        return [("", None, cfg)]
    return [(name, float(v), cf.with_override(cfg, name, v)) for v in values]


def evaluate(cfg: cf.ExperimentConfig, metric: str, analytic: bool, simulate: bool) -> list[Row]:
    m = METRICS[metric]
    rows = []
    for name, value, point in sweep_points(cfg, metric):
        a = m.analytic(point) if analytic else None
        e = m.simulate(point) if simulate else None
        rows.append(Row(name, value, a, e))
    return rows


# --- output ----------------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def rows_to_csv(rows: Sequence[Row], compare: bool = False, probability: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COMPARE_COLUMNS if compare else CSV_COLUMNS)
    for r in rows:
        e = r.estimate
        line = [r.sweep_var, _fmt(r.value), _fmt(r.analytic),
                _fmt(e.mean if e else None), _fmt(e.half_width if e else None),
                _fmt(e.trials if e else None), _fmt(e.seed if e else None)]
        if compare:
            z = r.z_score(probability)
            line += [_fmt(z), "PASS" if abs(z) <= Z_LIMIT else "FAIL"]
        w.writerow(line)
    return buf.getvalue()


def _emit_csv(text: str, cfg: cf.ExperimentConfig, out: Optional[str]) -> None:
    path = out or cfg.output.path
    if path:
        Path(path).write_text(text, encoding="utf-8")


def _describe(rows: Sequence[Row], compare: bool, probability: bool) -> str:
    """Human-readable summary of a single-point run."""
    r = rows[0]
    parts = []
    if r.analytic is not None:
        parts.append(f"analytic {r.analytic:.10g}")
    if r.estimate is not None:
        e = r.estimate
        parts.append(f"simulated {e.mean:.10g} +/- {e.half_width:.3g} "
                     f"({e.confidence_level:.0%} CI, {e.trials} trials, seed {e.seed})")
    if compare:
        z = r.z_score(probability)
        parts.append(f"z {z:.3g} {'PASS' if abs(z) <= Z_LIMIT else 'FAIL'}")
    return "; ".join(parts)


# --- commands ----------------------------------------------------------------------


def _load(args) -> cf.ExperimentConfig:
    cfg = cf.load(args.config) if args.config else cf.loads(cf.default_text())
    return cf.with_sim(cfg, trials=args.trials, seed=args.seed)


def _run_metric(args, analytic: bool, simulate: bool) -> int:
    cfg = _load(args)
    if getattr(args, "param", None):
        values = tuple(float(v) for v in args.values.split(",")) if args.values else ()
        cfg = cf.from_dict({**cf.to_dict(cfg), "sweep": {"parameter": args.param, "values": list(values)}})
    compare = analytic and simulate
    probability = METRICS[args.metric].probability
    rows = evaluate(cfg, args.metric, analytic, simulate)
    text = rows_to_csv(rows, compare, probability)
    if rows[0].sweep_var == "" and not args.csv:
        if analytic and not simulate:
            print(format(rows[0].analytic, ".17g"))
        else:
            print(_describe(rows, compare, probability))
    else:
        sys.stdout.write(text)
    _emit_csv(text, cfg, args.out)
    if compare and any(abs(r.z_score(probability)) > Z_LIMIT for r in rows):
        return EXIT_FAIL
    return EXIT_OK


def cmd_analytic(args) -> int:
    return _run_metric(args, analytic=True, simulate=False)


def cmd_simulate(args) -> int:
    return _run_metric(args, analytic=False, simulate=True)


def cmd_compare(args) -> int:
    return _run_metric(args, analytic=True, simulate=True)


def cmd_sweep(args) -> int:
    cfg = _load(args)
    if not (cfg.sweep.parameter or args.param or args.metric == "delay_cdf"):
        raise ConfigError("sweep: no [sweep] table in the config and no --param given")
    modes = {"analytic": (True, False), "simulate": (False, True), "compare": (True, True)}
    args.csv = True
    return _run_metric(args, *modes[args.mode])


def cmd_gen(args) -> int:
    cfg = _load(args)
    rng = np.random.default_rng(cfg.sim.seed)
    geom = cfg.orbit_geometry()
    if args.kind == "cox":
        c = sample_cox(geom, cfg.cox.lam, cfg.cox.mu, rng)
    else:
        c = sample_polar(geom, cfg.polar.n_orbits, cfg.polar.n_sats_per_orbit, rng, cfg.polar.spacing)
    out = args.out or cfg.output.path
    if not out:
        raise ConfigError("gen: an output path is required (--out or output.path)")
    Path(out).write_text(c.dumps(), encoding="utf-8")
    if args.ecef:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["orbit", "x_m", "y_m", "z_m"])
        for k, x, y, z in ecef_rows(c):
            w.writerow([k, _fmt(x), _fmt(y), _fmt(z)])
        Path(args.ecef).write_text(buf.getvalue(), encoding="utf-8")
    print(f"{len(c.orbits)} orbits, {len(c.satellites)} satellites -> {out}")
    return EXIT_OK


def cmd_moment_match(args) -> int:
    cfg = _load(args)
    geom = cfg.orbit_geometry()
    n, k = cfg.polar.n_orbits, cfg.polar.n_sats_per_orbit
    matched = an.moment_match_polar_to_cox(n, k, geom, cfg.quad_spec())
    r_orbits, r_sats = an.moment_match_residuals(n, k, matched, geom, cfg.quad_spec())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["polar_orbits", "polar_sats_per_orbit", "lambda_bar", "mu_bar",
                "residual_orbits", "residual_sats"])
    w.writerow([n, k, _fmt(matched.lam), _fmt(matched.mu), _fmt(r_orbits), _fmt(r_sats)])
    sys.stdout.write(buf.getvalue())
    _emit_csv(buf.getvalue(), cfg, args.out)
    return EXIT_OK


def cmd_config(args) -> int:
    sys.stdout.write(cf.dumps(_load(args)))
    return EXIT_OK


# --- argument parsing ----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse already exits 2; keep its message format
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _pos_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML experiment file (default: built-in defaults)")
    common.add_argument("--out", metavar="PATH", help="write CSV/JSON output here")
    common.add_argument("--seed", type=_nonneg_int, help="override sim.seed")
    common.add_argument("--trials", type=_pos_int, help="override sim.trials")

    metric = argparse.ArgumentParser(add_help=False)
    metric.add_argument("--metric", required=True, choices=sorted(METRICS), metavar="NAME",
                        help="one of: " + ", ".join(sorted(METRICS)))
    metric.add_argument("--param", metavar="TABLE.KEY", help="sweep this setting (overrides [sweep])")
    metric.add_argument("--values", metavar="V1,V2,...", help="comma-separated sweep values")
    metric.add_argument("--csv", action="store_true", help="print CSV even for a single point")

    p = _Parser(prog="leoh", description="LEO satellite data harvesting analytics and simulation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, fn, text in [("analytic", cmd_analytic, "evaluate a closed-form metric"),
                           ("simulate", cmd_simulate, "Monte Carlo estimate of a metric"),
                           ("compare", cmd_compare, "closed form vs simulation at 3 sigma")]:
        sp = sub.add_parser(name, parents=[common, metric], help=text)
        sp.set_defaults(func=fn)
    sp = sub.add_parser("sweep", parents=[common, metric], help="CSV over the sweep values")
    sp.add_argument("--mode", choices=["analytic", "simulate", "compare"], default="compare")
    sp.set_defaults(func=cmd_sweep)
    sp = sub.add_parser("gen", parents=[common], help="sample a constellation to JSON")
    sp.add_argument("--kind", choices=["cox", "polar"], default="cox")
    sp.add_argument("--ecef", metavar="PATH", help="also write satellite ECEF positions as CSV")
    sp.set_defaults(func=cmd_gen)
    sp = sub.add_parser("moment-match", parents=[common], help="Cox intensities matching the polar constellation")
    sp.set_defaults(func=cmd_moment_match)
    sp = sub.add_parser("config", parents=[common], help="print the effective configuration")
    sp.set_defaults(func=cmd_config)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadratureFailure as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except DomainError as e:
        print(f"domain error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ArithmeticError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
