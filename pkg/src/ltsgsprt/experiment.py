"""Monte Carlo sweeps over error targets, true parameter values and sensor counts."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import batch
from .calibrate import AsymptoticPrediction, calibrate_global_thresholds, calibrate_local_thresholds, predict
from .centralized import DEFAULT_CAP
from .model import Hypothesis, TruthPoint
from .rng import derive_key
from .stats import mean_stderr, wilson_interval

log = logging.getLogger(__name__)

SWEEP_AXES = ("alpha", "beta", "truth", "L")
THRESHOLD_SOURCES = ("asymptotic", "explicit", "calibrated")
MAX_CENSORED_FRACTION = 0.01

# run ids inside a point's key path
_TRUTH_RUN, _NULL_RUN, _ALT_RUN = 0, 1, 2


@dataclass(frozen=True)
class ExperimentSpec:
    problem: object
    scheme: batch.SchemeConfig
    L: int
    truth: TruthPoint
    target_alpha: float = 1e-3
    target_beta: float = 1e-3
    threshold_source: str = "asymptotic"
    A: Optional[float] = None
    B: Optional[float] = None
    sweep_axis: Optional[str] = None
    grid: Tuple[float, ...] = ()
    replications: int = 1000
    seed: int = 0
    cap: int = DEFAULT_CAP
    error_probes: bool = True
    local_target_period: Optional[float] = None
    calibration_budget: int = 10_000
    calibration_steps: int = 4
    threads: int = 1

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.L < 1:
            raise ValueError("L must be >= 1")
        if self.threshold_source not in THRESHOLD_SOURCES:
            raise ValueError(f"unknown threshold source {self.threshold_source!r}")
        if self.threshold_source == "explicit" and (self.A is None or self.B is None):
            raise ValueError("explicit thresholds need A and B")
        if self.sweep_axis is not None:
            if self.sweep_axis not in SWEEP_AXES:
                raise ValueError(f"unknown sweep axis {self.sweep_axis!r}")
            if not self.grid:
                raise ValueError("sweep grid must be nonempty")
        self.problem.check_truth(self.truth)


@dataclass(frozen=True)
class Point:
    point_id: int
    L: int
    truth: TruthPoint
    target_alpha: float
    target_beta: float


@dataclass
class McSummary:
    point_id: int
    scheme: str
    L: int
    target_alpha: float
    target_beta: float
    A: float
    B: float
    a: Optional[float]
    b: Optional[float]
    T0: Optional[int]
    lam: Optional[float]
    truth: float
    hypothesis: Hypothesis
    replications: int
    mean_stopping_time: float
    stderr: float
    empirical_alpha: float
    alpha_ci: Tuple[float, float]
    empirical_beta: float
    beta_ci: Tuple[float, float]
    mean_messages: float
    mean_inter_comm_period: float
    censored_count: int
    prediction: AsymptoticPrediction
    failed: bool = False
    note: str = ""

    @property
    def predicted_stopping_time(self):
        return self.prediction.expected_size(self.hypothesis)


def grid_points(spec):
    """Resolve the sweep into concrete points (one point when there is no sweep)."""
    base = dict(L=spec.L, truth=spec.truth, target_alpha=spec.target_alpha,
                target_beta=spec.target_beta)
    if spec.sweep_axis is None:
        return [Point(0, **base)]
    points = []
    for i, value in enumerate(spec.grid):
        p = dict(base)
        if spec.sweep_axis == "alpha":
            p["target_alpha"] = float(value)
        elif spec.sweep_axis == "beta":
            p["target_beta"] = float(value)
        elif spec.sweep_axis == "L":
            if int(value) != value or value < 1:
                raise ValueError(f"sensor counts must be positive integers, got {value!r}")
            p["L"] = int(value)
        else:
            hyp = Hypothesis.H1 if value in spec.problem.alt_set else Hypothesis.H0
            p["truth"] = TruthPoint(hyp, float(value))
            spec.problem.check_truth(p["truth"])
        points.append(Point(i, **p))
    return points


def resolve_scheme(spec):
    """Fill in LTS local thresholds from the target mean period when they are not given."""
    sc = spec.scheme
    if not sc.resolved:
        if spec.local_target_period is None:
            raise ValueError("lts scheme needs a and b or a target mean period")
        cal = calibrate_local_thresholds(spec.problem, spec.local_target_period, seed=spec.seed)
        log.info("local thresholds a=b=%.6g give mean period %.4g", cal.a, cal.mean_period)
        return replace(sc, a=cal.a, b=cal.b)
    return sc


def _run_chunked(problem, scheme, L, A, B, truth, keys, cap, threads):
    if threads <= 1 or len(keys) < 2 * threads:
        return batch.run_scheme(problem, scheme, L, A, B, truth, keys, cap)
    chunks = np.array_split(keys, threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(
            lambda k: batch.run_scheme(problem, scheme, L, A, B, truth, k, cap), chunks))
    fields_ = ("decision", "stopping_time", "messages", "tau_sum", "tau_count",
               "plus_emissions", "minus_emissions")
    merged = {}
    for name in fields_:
        values = [getattr(p, name) for p in parts]
        merged[name] = None if values[0] is None else np.concatenate(values)
    return batch.BatchResult(**merged)


def _thresholds(spec, scheme, point):
    if spec.threshold_source == "explicit":
        return spec.A, spec.B, ""
    if spec.threshold_source == "asymptotic":
        return -math.log(point.target_alpha), -math.log(point.target_beta), ""
    cal = calibrate_global_thresholds(
        spec.problem, scheme, point.L, point.target_alpha, point.target_beta,
        seed=spec.seed + 7919 * point.point_id, budget=spec.calibration_budget,
        steps=spec.calibration_steps, cap=spec.cap)
    return cal.A, cal.B, cal.warning


def run_point(spec, point, scheme=None):
    scheme = scheme if scheme is not None else resolve_scheme(spec)
    problem = spec.problem
    A, B, note = _thresholds(spec, scheme, point)
    reps = np.arange(spec.replications, dtype=np.uint64)

    def run(run_id, truth):
        keys = derive_key(spec.seed, point.point_id, run_id, reps)
        return _run_chunked(problem, scheme, point.L, A, B, truth, keys, spec.cap, spec.threads)

    main = run(_TRUTH_RUN, point.truth)
    censored = main.censored
    n_cens = int(censored.sum())
    ok = ~censored
    mean_T, se_T = mean_stderr(main.stopping_time[ok])
    mean_msgs = float(main.messages[ok].mean()) if ok.any() else math.nan
    mean_tau = math.nan
    if main.tau_count is not None and main.tau_count.sum() > 0:
        mean_tau = float(main.tau_sum.sum() / main.tau_count.sum())
    elif scheme.name == "uniform":
        mean_tau = float(scheme.T0)
    elif scheme.name == "centralized":
        mean_tau = 1.0

    null_probe, alt_probe = problem.null_probe(), problem.alt_probe()
    if spec.error_probes:
        r_null = main if point.truth == null_probe else run(_NULL_RUN, null_probe)
        r_alt = main if point.truth == alt_probe else run(_ALT_RUN, alt_probe)
    else:
        r_null = main if point.truth.hypothesis == Hypothesis.H0 else None
        r_alt = main if point.truth.hypothesis == Hypothesis.H1 else None

    def error_rate(result, wrong):
        if result is None:
            return math.nan, (math.nan, math.nan)
        k = int((result.decision == wrong).sum())
        return k / len(result), wilson_interval(k, len(result))

    emp_alpha, alpha_ci = error_rate(r_null, 1)
    emp_beta, beta_ci = error_rate(r_alt, 0)

    prediction = predict(problem, scheme.name, point.truth, point.L, A, B, scheme.T0, scheme.lam)
    failed = False
    if n_cens == spec.replications:
        failed, note = True, "all replications censored"
    elif n_cens > MAX_CENSORED_FRACTION * spec.replications:
        failed, note = True, f"censored fraction {n_cens / spec.replications:.3g} exceeds 1%"
    return McSummary(
        point_id=point.point_id, scheme=scheme.name, L=point.L,
        target_alpha=point.target_alpha, target_beta=point.target_beta, A=A, B=B,
        a=scheme.a, b=scheme.b,
        T0=scheme.T0 if scheme.name == "uniform" else None,
        lam=scheme.lam if scheme.name == "uniform" else None,
        truth=point.truth.value, hypothesis=point.truth.hypothesis, replications=spec.replications,
        mean_stopping_time=mean_T, stderr=se_T,
        empirical_alpha=emp_alpha, alpha_ci=alpha_ci,
        empirical_beta=emp_beta, beta_ci=beta_ci,
        mean_messages=mean_msgs, mean_inter_comm_period=mean_tau,
        censored_count=n_cens, prediction=prediction, failed=failed, note=note)


def run_sweep(spec, progress: Optional[Callable[[McSummary], None]] = None) -> List[McSummary]:
    scheme = resolve_scheme(spec)
    out = []
    for point in grid_points(spec):
        summary = run_point(spec, point, scheme)
        if progress is not None:
            progress(summary)
        out.append(summary)
    return out


def compare_schemes(specs: Sequence[ExperimentSpec], results=None, progress=None):
    """Per-point ratios of mean stopping times and message counts against the centralized run.

    ``results`` may carry precomputed run_sweep outputs aligned with ``specs``.
    The first centralized spec is the baseline (the first spec if none is).
    """
    if len(specs) < 2:
        raise ValueError("need at least two specs to compare")
    ref = specs[0]
    for s in specs[1:]:
        if (s.sweep_axis, tuple(s.grid)) != (ref.sweep_axis, tuple(ref.grid)):
            raise ValueError("specs must share the sweep axis and grid")
        if s.L != ref.L or s.problem.describe() != ref.problem.describe():
            raise ValueError("specs must share the model and sensor count")
    if results is None:
        results = [run_sweep(s, progress) for s in specs]
    base_idx = next((i for i, s in enumerate(specs) if s.scheme.name == "centralized"), 0)
    base = results[base_idx]
    rows = []
    for k, point in enumerate(grid_points(ref)):
        row = {"point_id": point.point_id, "baseline": specs[base_idx].scheme.name}
        b = base[k]
        for i, (s, res) in enumerate(zip(specs, results)):
            label = s.scheme.name if [x.scheme.name for x in specs].count(s.scheme.name) == 1 \
                else f"{s.scheme.name}#{i}"
            r = res[k]
            row[f"{label}.mean_T"] = r.mean_stopping_time
            row[f"{label}.mean_messages"] = r.mean_messages
            row[f"{label}.T_ratio"] = r.mean_stopping_time / b.mean_stopping_time
            row[f"{label}.message_ratio"] = r.mean_messages / b.mean_messages
        rows.append(row)
    return rows
