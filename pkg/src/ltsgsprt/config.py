"""Run configuration files (TOML) and result records.

Validation is strict: unknown keys, wrong types and out-of-range values are
rejected before anything is computed.
"""

import math
from dataclasses import dataclass
from typing import List, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .batch import SCHEMES, SchemeConfig
from .experiment import SWEEP_AXES, THRESHOLD_SOURCES, ExperimentSpec
from .model import DEFAULT_SETS, Hypothesis, TruthPoint, make_problem
from .uniform import minimax_lambda


class ConfigError(ValueError):
    pass


_TOP = {"seed": int, "replications": int, "cap": int, "threads": int, "L": int,
        "output": str, "format": str, "error_probes": bool,
        "model": dict, "truth": dict, "thresholds": dict, "sweep": dict, "schemes": list}
_MODEL = {"kind": str, "sigma2": float, "null": list, "alt": list}
_TRUTH = {"value": float, "hypothesis": str}
_THRESHOLDS = {"source": str, "alpha": float, "beta": float, "A": float, "B": float,
               "budget": int, "steps": int}
_SWEEP = {"axis": str, "grid": list}
_SCHEME = {"name": str, "T0": int, "lambda": (float, str), "a": float, "b": float,
           "target_period": float}
_REQUIRED_TOP = ("seed", "replications", "L", "model", "truth", "schemes")

CSV_COLUMNS = (
    "point_id", "scheme", "L", "target_alpha", "target_beta", "A", "B", "a", "b", "T0",
    "lambda", "truth", "mean_T", "stderr_T", "emp_alpha", "alpha_ci_lo", "alpha_ci_hi",
    "emp_beta", "beta_ci_lo", "beta_ci_hi", "mean_messages", "mean_tau", "censored", "pred_T",
)
_INT_COLUMNS = {"point_id", "L", "T0", "censored"}


def _check_table(table, schema, where):
    if not isinstance(table, dict):
        raise ConfigError(f"{where}: expected a table")
    for key, value in table.items():
        if key not in schema:
            raise ConfigError(f"{where}: unknown key {key!r}")
        expected = schema[key]
        types = expected if isinstance(expected, tuple) else (expected,)
        ok = False
        for t in types:
            if t is float and isinstance(value, (int, float)) and not isinstance(value, bool):
                ok = True
            elif t is int and isinstance(value, int) and not isinstance(value, bool):
                ok = True
            elif t not in (int, float) and isinstance(value, t):
                ok = True
        if not ok:
            names = "/".join(t.__name__ for t in types)
            raise ConfigError(f"{where}.{key}: expected {names}, got {type(value).__name__}")


def _pair(value, where):
    if (not isinstance(value, list) or len(value) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        raise ConfigError(f"{where}: expected [lo, hi]")
    return float(value[0]), float(value[1])


@dataclass
class RunConfig:
    raw: dict
    specs: List[ExperimentSpec]
    output: Optional[str]
    format: str


def load_config(path):
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(raw)


def parse_config(raw):
    _check_table(raw, _TOP, "config")
    for key in _REQUIRED_TOP:
        if key not in raw:
            raise ConfigError(f"config: missing required key {key!r}")
    for key in ("replications", "L", "threads", "cap"):
        if key in raw and raw[key] < 1:
            raise ConfigError(f"config.{key}: must be >= 1")
    if raw["seed"] < 0:
        raise ConfigError("config.seed: must be nonnegative")
    fmt = raw.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError("config.format: must be 'csv' or 'json'")

    model = raw["model"]
    _check_table(model, _MODEL, "model")
    if "kind" not in model:
        raise ConfigError("model: missing 'kind'")
    if model["kind"] == "variance" and "sigma2" in model:
        raise ConfigError("model.sigma2: only valid for the mean_shift model")
    if model["kind"] not in DEFAULT_SETS:
        raise ConfigError(f"model.kind: unknown model {model['kind']!r}")
    null = _pair(model["null"], "model.null") if "null" in model else None
    alt = _pair(model["alt"], "model.alt") if "alt" in model else None
    try:
        problem = make_problem(model["kind"], null, alt, float(model.get("sigma2", 1.0)))
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from exc

    truth_tab = raw["truth"]
    _check_table(truth_tab, _TRUTH, "truth")
    if "value" not in truth_tab:
        raise ConfigError("truth: missing 'value'")
    value = float(truth_tab["value"])
    if "hypothesis" in truth_tab:
        if truth_tab["hypothesis"] not in ("H0", "H1"):
            raise ConfigError("truth.hypothesis: must be 'H0' or 'H1'")
        hyp = Hypothesis[truth_tab["hypothesis"]]
    else:
        hyp = Hypothesis.H1 if value in problem.alt_set else Hypothesis.H0
    truth = TruthPoint(hyp, value)

    thr = raw.get("thresholds", {})
    _check_table(thr, _THRESHOLDS, "thresholds")
    source = thr.get("source", "asymptotic")
    if source not in THRESHOLD_SOURCES:
        raise ConfigError(f"thresholds.source: must be one of {THRESHOLD_SOURCES}")
    for key in ("alpha", "beta"):
        if key in thr and not 0 < thr[key] < 1:
            raise ConfigError(f"thresholds.{key}: must lie in (0, 1)")
    for key in ("A", "B"):
        if key in thr and not thr[key] > 0:
            raise ConfigError(f"thresholds.{key}: must be positive")
    if source == "explicit" and not ("A" in thr and "B" in thr):
        raise ConfigError("thresholds: explicit source needs A and B")

    sweep = raw.get("sweep")
    axis, grid = None, ()
    if sweep is not None:
        _check_table(sweep, _SWEEP, "sweep")
        axis = sweep.get("axis")
        if axis not in SWEEP_AXES:
            raise ConfigError(f"sweep.axis: must be one of {SWEEP_AXES}")
        grid = sweep.get("grid", [])
        if not grid or not all(isinstance(g, (int, float)) and not isinstance(g, bool) for g in grid):
            raise ConfigError("sweep.grid: expected a nonempty list of numbers")
        if axis in ("alpha", "beta") and not all(0 < g < 1 for g in grid):
            raise ConfigError("sweep.grid: error targets must lie in (0, 1)")
        grid = tuple(float(g) for g in grid)

    schemes = raw["schemes"]
    if not schemes:
        raise ConfigError("schemes: need at least one scheme")
    specs = []
    for i, sc in enumerate(schemes):
        where = f"schemes[{i}]"
        _check_table(sc, _SCHEME, where)
        name = sc.get("name")
        if name not in SCHEMES:
            raise ConfigError(f"{where}.name: must be one of {SCHEMES}")
        T0 = sc.get("T0", 1)
        if T0 < 1:
            raise ConfigError(f"{where}.T0: must be >= 1")
        lam = sc.get("lambda")
        if name == "uniform":
            if lam is None or lam == "minimax":
                lam = minimax_lambda(problem, T0)[0]
            elif isinstance(lam, str):
                raise ConfigError(f"{where}.lambda: expected a number or 'minimax'")
            lam = float(lam)
        a, b = sc.get("a"), sc.get("b")
        target_period = sc.get("target_period")
        if name == "lts":
            if target_period is None and (a is None or b is None):
                raise ConfigError(f"{where}: lts needs a and b, or target_period")
            if target_period is not None and target_period < 1:
                raise ConfigError(f"{where}.target_period: must be >= 1")
            for key, v in (("a", a), ("b", b)):
                if v is not None and not v > 0:
                    raise ConfigError(f"{where}.{key}: must be positive")
        if name == "lts" and target_period is not None and (a is not None or b is not None):
            raise ConfigError(f"{where}: give either a and b or target_period, not both")
        try:
            scheme = SchemeConfig(name, T0=T0, lam=lam if name == "uniform" else None,
                                  a=float(a) if a is not None else None,
                                  b=float(b) if b is not None else None)
            specs.append(ExperimentSpec(
                problem=problem, scheme=scheme, L=raw["L"], truth=truth,
                target_alpha=float(thr.get("alpha", 1e-3)), target_beta=float(thr.get("beta", 1e-3)),
                threshold_source=source, A=thr.get("A"), B=thr.get("B"),
                sweep_axis=axis, grid=grid, replications=raw["replications"], seed=raw["seed"],
                cap=raw.get("cap", 10_000_000), error_probes=raw.get("error_probes", True),
                local_target_period=target_period,
                calibration_budget=thr.get("budget", 10_000), calibration_steps=thr.get("steps", 4),
                threads=raw.get("threads", 1)))
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    return RunConfig(raw, specs, raw.get("output"), fmt)


def summary_record(s):
    """Flatten an McSummary into the fixed CSV/JSON column set."""
    return {
        "point_id": s.point_id, "scheme": s.scheme, "L": s.L,
        "target_alpha": s.target_alpha, "target_beta": s.target_beta, "A": s.A, "B": s.B,
        "a": s.a, "b": s.b, "T0": s.T0, "lambda": s.lam, "truth": s.truth,
        "mean_T": s.mean_stopping_time, "stderr_T": s.stderr,
        "emp_alpha": s.empirical_alpha, "alpha_ci_lo": s.alpha_ci[0], "alpha_ci_hi": s.alpha_ci[1],
        "emp_beta": s.empirical_beta, "beta_ci_lo": s.beta_ci[0], "beta_ci_hi": s.beta_ci[1],
        "mean_messages": s.mean_messages, "mean_tau": s.mean_inter_comm_period,
        "censored": s.censored_count, "pred_T": s.predicted_stopping_time,
    }


def format_number(value):
    """Locale-independent text with 12 significant digits; empty for missing values."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool,)):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if math.isnan(value):
        return ""
    return format(value, ".12g")


def json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, float):
        return float(format(value, ".12g"))
    return value


def validate_result_document(doc):
    """Check a JSON result document: config re-parses and every record has the fixed columns."""
    if not isinstance(doc, dict) or set(doc) - {"config", "results", "comparison"}:
        raise ConfigError("result document: unexpected structure")
    parse_config(doc["config"])
    for rec in doc["results"]:
        if tuple(rec) != CSV_COLUMNS:
            raise ConfigError("result record: columns differ from the fixed schema")
        for key, value in rec.items():
            if key == "scheme":
                if value not in SCHEMES:
                    raise ConfigError(f"result record: bad scheme {value!r}")
            elif key in _INT_COLUMNS:
                if value is not None and not isinstance(value, int):
                    raise ConfigError(f"result record: {key} must be an integer")
            elif value is not None and not isinstance(value, (int, float)):
                raise ConfigError(f"result record: {key} must be numeric")
    return True
