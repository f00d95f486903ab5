"""Command-line front end.

Exit codes: 0 ok, 2 configuration error (nothing written), 3 censoring
failure, 4 calibration failure.
"""

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import replace

from . import calibrate as cal
from .batch import SchemeConfig
from .centralized import CentralizedEngine, run_to_decision
from .config import (CSV_COLUMNS, ConfigError, format_number, json_value, load_config,
                     summary_record, validate_result_document)
from .experiment import _thresholds, compare_schemes, grid_points, resolve_scheme, run_sweep
from .lts import simulate_lts
from .model import Hypothesis, TruthPoint, make_problem
from .rng import derive_key
from .uniform import inf_quantized_kl, minimax_lambda, quantized_kl, run_uniform

log = logging.getLogger("ltsgsprt")

EXIT_OK, EXIT_CONFIG, EXIT_CENSORED, EXIT_CALIBRATION = 0, 2, 3, 4
TRACE_COLUMNS = ("scheme", "event", "time", "sensor", "bit", "fusion", "local_gllr", "count")
_DEFAULT_POINTS = {"mean_shift": (0.4, 0.0), "variance": (2.0, 1.0)}


def _emit_rows(rows, fmt, out):
    if fmt == "json":
        json.dump({k: json_value(v) for k, v in rows}, out, indent=2)
        out.write("\n")
    else:
        for name, value in rows:
            out.write(f"{name}\t{format_number(value)}\n")


def _problem_from_args(args):
    try:
        return make_problem(args.model, tuple(args.null) if args.null else None,
                            tuple(args.alt) if args.alt else None, args.sigma2)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _truth(problem, value):
    hyp = Hypothesis.H1 if value in problem.alt_set else Hypothesis.H0
    return TruthPoint(hyp, value)


def _lambda(problem, T0, value):
    if value is None or value == "minimax":
        return minimax_lambda(problem, T0)[0]
    try:
        return float(value)
    except ValueError as exc:
        raise ConfigError(f"lambda must be a number or 'minimax', got {value!r}") from exc


def cmd_kl(args, out):
    problem = _problem_from_args(args)
    theta_default, gamma_default = _DEFAULT_POINTS[args.model]
    theta = args.theta if args.theta is not None else theta_default
    gamma = args.gamma if args.gamma is not None else gamma_default
    try:
        rows = [
            ("D(f_theta||h_gamma)", problem.kl_divergence(theta, gamma)),
            ("D(h_gamma||f_theta)", problem.kl_divergence(gamma, theta)),
            ("inf_gamma D(f_theta||h_gamma)", problem.inf_kl(TruthPoint(Hypothesis.H1, theta))),
            ("inf_theta D(h_gamma||f_theta)", problem.inf_kl(TruthPoint(Hypothesis.H0, gamma))),
        ]
        if args.T0 is not None or args.lam is not None:
            T0 = args.T0 or 1
            lam = _lambda(problem, T0, args.lam)
            rows += [
                ("T0", T0), ("lambda", lam),
                ("D(p_theta||p_gamma)/T0", quantized_kl(problem, theta, gamma, T0, lam) / T0),
                ("D(p_gamma||p_theta)/T0", quantized_kl(problem, gamma, theta, T0, lam) / T0),
                ("inf_gamma D(p_theta||p_gamma)/T0",
                 inf_quantized_kl(problem, TruthPoint(Hypothesis.H1, theta), T0, lam) / T0),
                ("inf_theta D(p_gamma||p_theta)/T0",
                 inf_quantized_kl(problem, TruthPoint(Hypothesis.H0, gamma), T0, lam) / T0),
            ]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    _emit_rows(rows, args.format, out)
    return EXIT_OK


def cmd_quantizer(args, out):
    problem = _problem_from_args(args)
    try:
        lam, worst = minimax_lambda(problem, args.T0, resolution=args.resolution)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = [("T0", args.T0), ("lambda", lam), ("lambda/T0", lam / args.T0),
            ("worst_case_kl", worst), ("worst_case_kl/T0", worst / args.T0)]
    _emit_rows(rows, args.format, out)
    return EXIT_OK


def _error_thresholds(args):
    A = args.A if args.A is not None else -math.log(args.alpha)
    B = args.B if args.B is not None else -math.log(args.beta)
    return A, B


def cmd_predict(args, out):
    problem = _problem_from_args(args)
    truth_value = args.truth if args.truth is not None else _DEFAULT_POINTS[args.model][0]
    A, B = _error_thresholds(args)
    T0 = lam = None
    if args.scheme == "uniform":
        T0 = args.T0 or 1
        lam = _lambda(problem, T0, args.lam)
    try:
        p = cal.predict(problem, args.scheme, _truth(problem, truth_value), args.L, A, B, T0, lam)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = [("scheme", p.scheme), ("A", A), ("B", B), ("expected_size_h0", p.expected_size_h0),
            ("expected_size_h1", p.expected_size_h1), ("log_alpha", p.log_alpha),
            ("log_beta", p.log_beta)]
    _emit_rows(rows, args.format, out)
    return EXIT_OK


def cmd_calibrate(args, out):
    problem = _problem_from_args(args)
    if args.target_period is None and args.scheme is None:
        raise ConfigError("calibrate needs --target-period and/or --scheme")
    rows = []
    a, b = args.a, args.b
    if args.target_period is not None:
        local = cal.calibrate_local_thresholds(problem, args.target_period, seed=args.seed,
                                               tolerance=args.tolerance)
        a, b = local.a, local.b
        rows += [("a", a), ("b", b), ("mean_period", local.mean_period)]
    status = EXIT_OK
    if args.scheme is not None:
        lam = None
        if args.scheme == "uniform":
            lam = _lambda(problem, args.T0, args.lam)
        try:
            scheme = SchemeConfig(args.scheme, T0=args.T0, lam=lam, a=a, b=b)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not scheme.resolved:
            raise ConfigError("lts calibration needs --a/--b or --target-period")
        g = cal.calibrate_global_thresholds(problem, scheme, args.L, args.alpha, args.beta,
                                            seed=args.seed, budget=args.budget, steps=args.steps)
        rows += [("A", g.A), ("B", g.B), ("alpha_hat", g.alpha_hat),
                 ("alpha_ci_lo", g.alpha_ci[0]), ("alpha_ci_hi", g.alpha_ci[1]),
                 ("beta_hat", g.beta_hat), ("beta_ci_lo", g.beta_ci[0]),
                 ("beta_ci_hi", g.beta_ci[1]), ("converged", g.converged)]
        if g.warning:
            log.warning(g.warning)
        if not g.converged and g.history:
            status = EXIT_CALIBRATION
    _emit_rows(rows, args.format, out)
    return status


def _warn_regime(summary):
    if summary.scheme == "lts" and summary.a:
        if summary.A / summary.a < 5 or summary.B / summary.b < 5:
            log.warning("point %d: A/a=%.3g, B/b=%.3g; below 5 the asymptotic predictions are loose",
                        summary.point_id, summary.A / summary.a, summary.B / summary.b)


def render_results(config, results):
    records = [summary_record(s) for res in results for s in res]
    if config.format == "json":
        doc = {"config": config.raw,
               "results": [{k: json_value(v) for k, v in r.items()} for r in records]}
        if len(config.specs) > 1:
            rows = compare_schemes(config.specs, results)
            doc["comparison"] = [{k: json_value(v) for k, v in r.items()} for r in rows]
        validate_result_document(doc)
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([format_number(r[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def _write(text, path, out):
    if path in (None, "-"):
        out.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _load(args):
    config = load_config(args.config)
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        config.specs = [replace(s, threads=args.threads) for s in config.specs]
    if getattr(args, "format", None):
        config.format = args.format
    return config


def cmd_run(args, out):
    config = _load(args)
    results = []
    for spec in config.specs:
        res = run_sweep(spec, progress=_warn_regime)
        for s in res:
            log.info("point %d %s: mean T %.6g (censored %d)", s.point_id, s.scheme,
                     s.mean_stopping_time, s.censored_count)
        results.append(res)
    _write(render_results(config, results), args.output or config.output, out)
    failed = [s for res in results for s in res if s.failed]
    for s in failed:
        log.error("point %d %s: %s", s.point_id, s.scheme, s.note)
    return EXIT_CENSORED if failed else EXIT_OK


def trace_events(spec):
    """Event records for replication 0 of the first grid point (same stream as the batch run)."""
    scheme = resolve_scheme(spec)
    point = grid_points(spec)[0]
    A, B, _ = _thresholds(spec, scheme, point)
    problem, L = spec.problem, point.L
    key = derive_key(spec.seed, point.point_id, 0, 0)
    events = []

    def record(event, time, sensor, bit, fusion, local, count):
        events.append({"scheme": scheme.name, "event": event, "time": time, "sensor": sensor,
                       "bit": bit, "fusion": fusion, "local_gllr": local, "count": count})

    if scheme.name == "centralized":
        engine = CentralizedEngine(problem, L, A, B)
        verdict = run_to_decision(
            engine, point.truth, key, spec.cap,
            trace=lambda t, e: record("sample", t, None, None, e.statistic, None, e.stat.n))
        final = engine.statistic
    elif scheme.name == "uniform":
        fusion_ref = []

        def on_bit(t, sensor, bit, fusion):
            fusion_ref[:] = [fusion]
            record("bit", t, sensor, bit, fusion.statistic, None, fusion.r0 + fusion.r1)

        verdict = run_uniform(problem, L, scheme.T0, scheme.lam, A, B, point.truth, key,
                              spec.cap, trace=on_bit)
        final = fusion_ref[0].statistic if fusion_ref else 0.0
    else:
        fusion_ref = []

        def on_message(msg, fusion):
            fusion_ref[:] = [fusion]
            record("message", msg.time, msg.sensor, msg.bit, fusion.v, msg.local_gllr,
                   fusion.messages_received)

        verdict, _ = simulate_lts(problem, L, scheme.a, scheme.b, A, B, point.truth, key,
                                  spec.cap, trace=on_message)
        final = fusion_ref[0].v if fusion_ref else 0.0
    decision = None if verdict.decision is None else int(verdict.decision)
    record("decision", verdict.stopping_time, None, decision, final, None, verdict.messages_sent)
    return events


def cmd_trace(args, out):
    config = _load(args)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for spec in config.specs:
        for ev in trace_events(spec):
            writer.writerow([format_number(ev[c]) for c in TRACE_COLUMNS])
    _write(buf.getvalue(), args.output or None, out)
    return EXIT_OK


def _model_args(p):
    p.add_argument("--model", choices=("mean_shift", "variance"), default="mean_shift")
    p.add_argument("--sigma2", type=float, default=1.0, help="noise variance (mean_shift)")
    p.add_argument("--null", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--alt", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--format", choices=("table", "json"), default="table")


def _probability(text):
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"{text} is not in (0, 1)")
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog="ltsgsprt", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kl", help="raw and quantized KL divergences")
    _model_args(p)
    p.add_argument("--theta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--T0", type=int)
    p.add_argument("--lambda", dest="lam", help="quantizer threshold or 'minimax'")
    p.set_defaults(func=cmd_kl)

    p = sub.add_parser("quantizer", help="minimax one-bit quantizer threshold")
    _model_args(p)
    p.add_argument("--T0", type=int, default=1)
    p.add_argument("--resolution", type=float, default=1e-4)
    p.set_defaults(func=cmd_quantizer)

    p = sub.add_parser("predict", help="asymptotic expected sample sizes")
    _model_args(p)
    p.add_argument("--scheme", choices=cal.PREDICTION_SCHEMES, default="centralized")
    p.add_argument("--truth", type=float)
    p.add_argument("--L", type=int, default=1)
    p.add_argument("--alpha", type=_probability, default=1e-3)
    p.add_argument("--beta", type=_probability, default=1e-3)
    p.add_argument("--A", type=float)
    p.add_argument("--B", type=float)
    p.add_argument("--T0", type=int)
    p.add_argument("--lambda", dest="lam")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("calibrate", help="Monte Carlo threshold calibration")
    _model_args(p)
    p.add_argument("--target-period", type=float, help="target mean local period (sets a=b)")
    p.add_argument("--tolerance", type=float, default=0.05)
    p.add_argument("--scheme", choices=("centralized", "uniform", "lts"))
    p.add_argument("--L", type=int, default=1)
    p.add_argument("--alpha", type=_probability, default=1e-2)
    p.add_argument("--beta", type=_probability, default=1e-2)
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--T0", type=int, default=1)
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--steps", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_calibrate)

    for name, func, text in (("run", cmd_run, "run a configured sweep"),
                             ("trace", cmd_trace, "event log of one trajectory")):
        p = sub.add_parser(name, help=text)
        p.add_argument("config")
        p.add_argument("-o", "--output")
        p.add_argument("--threads", type=int)
        if name == "run":
            p.add_argument("--format", choices=("csv", "json"))
        p.set_defaults(func=func)
    return parser


def main(argv=None, out=None):
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except cal.CalibrationError as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
