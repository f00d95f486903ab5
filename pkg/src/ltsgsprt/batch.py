"""Vectorized Monte Carlo over many replications at once.

Replication ``i`` draws sensor ``l``'s t-th sample from stream key
``derive_key(keys[i], l)`` at counter ``t - 1``, exactly as the single
trajectory engines do, so each replication's outcome is independent of the
batch it runs in. The loops advance all live replications one tick at a time
and drop finished ones.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .centralized import DEFAULT_CAP, check_thresholds
from .rng import derive_key
from .uniform import BernoulliGllrTable

CENSORED = -1


@dataclass
class BatchResult:
    decision: np.ndarray  # 1 = H1, 0 = H0, CENSORED = -1
    stopping_time: np.ndarray
    messages: np.ndarray
    tau_sum: Optional[np.ndarray] = None
    tau_count: Optional[np.ndarray] = None
    plus_emissions: Optional[np.ndarray] = None
    minus_emissions: Optional[np.ndarray] = None

    @property
    def censored(self):
        return self.decision == CENSORED

    def __len__(self):
        return len(self.decision)


def _sensor_keys(keys, L):
    keys = np.asarray(keys, dtype=np.uint64)
    return derive_key(keys[:, None], np.arange(L, dtype=np.uint64)[None, :])


def _decide(v, A, B):
    return np.where(v >= A, 1, np.where(v <= -B, 0, CENSORED))


def simulate_centralized(problem, L, A, B, truth, keys, cap=DEFAULT_CAP):
    check_thresholds(A, B)
    problem.check_truth(truth)
    skeys = _sensor_keys(keys, L)
    N = len(skeys)
    decision = np.full(N, CENSORED, dtype=np.int8)
    T = np.full(N, cap, dtype=np.int64)
    live = np.arange(N)
    acc = np.zeros(N)
    t = 0
    while live.size and t < cap:
        t += 1
        y = problem.draw(truth.value, skeys[live], t - 1)
        a = acc[live]
        for l in range(L):
            a = a + problem.statistic(y[:, l])
        acc[live] = a
        d = _decide(problem.gllr_arrays(a, L * t), A, B)
        done = d != CENSORED
        decision[live[done]] = d[done]
        T[live[done]] = t
        live = live[~done]
    return BatchResult(decision, T, L * T)


def simulate_uniform(problem, L, T0, lam, A, B, truth, keys, cap=DEFAULT_CAP, table=None):
    check_thresholds(A, B)
    problem.check_truth(truth)
    table = table if table is not None else BernoulliGllrTable(problem, T0, lam)
    skeys = _sensor_keys(keys, L)
    N = len(skeys)
    decision = np.full(N, CENSORED, dtype=np.int8)
    T = np.full(N, cap, dtype=np.int64)
    messages = np.zeros(N, dtype=np.int64)
    live = np.arange(N)
    block = np.zeros((N, L))
    r1 = np.zeros(N, dtype=np.int64)
    t = 0
    while live.size and t < cap:
        t += 1
        y = problem.draw(truth.value, skeys[live], t - 1)
        block[live] = block[live] + problem.statistic(y)
        if t % T0:
            continue
        blocks = t // T0
        r1[live] += (block[live] > lam).sum(axis=1)
        block[live] = 0.0
        messages[live] = L * blocks
        ones = r1[live]
        uniq, inverse = np.unique(ones, return_inverse=True)
        g = np.array([table(k, L * blocks - k) for k in uniq])[inverse]
        d = _decide(g, A, B)
        done = d != CENSORED
        decision[live[done]] = d[done]
        T[live[done]] = t
        live = live[~done]
    return BatchResult(decision, T, messages)


def simulate_lts(problem, L, a, b, A, B, truth, keys, cap=DEFAULT_CAP):
    check_thresholds(A, B)
    problem.check_truth(truth)
    skeys = _sensor_keys(keys, L)
    N = len(skeys)
    decision = np.full(N, CENSORED, dtype=np.int8)
    T = np.full(N, cap, dtype=np.int64)
    up = np.zeros(N, dtype=np.int64)
    down = np.zeros(N, dtype=np.int64)
    tau_sum = np.zeros(N, dtype=np.int64)
    tau_count = np.zeros(N, dtype=np.int64)
    plus = np.zeros(N, dtype=np.int64)
    minus = np.zeros(N, dtype=np.int64)
    acc = np.zeros((N, L))
    cnt = np.zeros((N, L), dtype=np.int64)
    last = np.zeros((N, L), dtype=np.int64)
    live = np.arange(N)
    t = 0
    while live.size and t < cap:
        t += 1
        y = problem.draw(truth.value, skeys[live], t - 1)
        acc_l = acc[live] + problem.statistic(y)
        cnt_l = cnt[live] + 1
        g = problem.gllr_arrays(acc_l, cnt_l)
        is_up = g >= a
        is_down = g <= -b
        emit = is_up | is_down
        # local bookkeeping happens for every emission in this tick
        last_l = last[live]
        tau_sum[live] += np.where(emit, t - last_l, 0).sum(axis=1)
        tau_count[live] += emit.sum(axis=1)
        plus[live] += is_up.sum(axis=1)
        minus[live] += is_down.sum(axis=1)
        last[live] = np.where(emit, t, last_l)
        acc[live] = np.where(emit, 0.0, acc_l)
        cnt[live] = np.where(emit, 0, cnt_l)
        # deliveries in ascending sensor order, stopping at the first crossing
        open_ = np.ones(live.size, dtype=bool)
        u = up[live]
        s = down[live]
        for l in range(L):
            deliver = open_ & emit[:, l]
            u = u + (deliver & is_up[:, l])
            s = s + (deliver & is_down[:, l])
            d = _decide(u * a - s * b, A, B)
            crossed = deliver & (d != CENSORED)
            decision[live[crossed]] = d[crossed]
            open_ &= ~crossed
        up[live] = u
        down[live] = s
        done = ~open_
        T[live[done]] = t
        live = live[~done]
    return BatchResult(decision, T, up + down, tau_sum, tau_count, plus, minus)


def local_periods(problem, a, b, truth, keys, cap=DEFAULT_CAP):
    """First-emission time of a single local GSPRT, one per key."""
    problem.check_truth(truth)
    keys = np.asarray(keys, dtype=np.uint64)
    skeys = _sensor_keys(keys, 1)[:, 0]
    N = len(skeys)
    tau = np.full(N, cap, dtype=np.int64)
    acc = np.zeros(N)
    live = np.arange(N)
    t = 0
    while live.size and t < cap:
        t += 1
        a_l = acc[live] + problem.statistic(problem.draw(truth.value, skeys[live], t - 1))
        acc[live] = a_l
        g = problem.gllr_arrays(a_l, t)
        done = (g >= a) | (g <= -b)
        tau[live[done]] = t
        live = live[~done]
    return tau


SCHEMES = ("centralized", "uniform", "lts")


@dataclass(frozen=True)
class SchemeConfig:
    name: str
    T0: int = 1
    lam: Optional[float] = None
    a: Optional[float] = None
    b: Optional[float] = None

    def __post_init__(self):
        if self.name not in SCHEMES:
            raise ValueError(f"unknown scheme {self.name!r}")
        if self.name == "uniform" and (self.lam is None or self.T0 < 1):
            raise ValueError("uniform scheme needs T0 >= 1 and a quantizer threshold")
        if self.name == "lts":
            # both missing means "calibrate later"; see ``resolved``
            if (self.a is None) != (self.b is None):
                raise ValueError("lts scheme needs both local thresholds or neither")
            if self.a is not None and not (self.a > 0 and self.b > 0):
                raise ValueError("lts scheme needs positive local thresholds a, b")

    @property
    def resolved(self):
        return self.name != "lts" or self.a is not None


def run_scheme(problem, scheme, L, A, B, truth, keys, cap=DEFAULT_CAP):
    if scheme.name == "centralized":
        return simulate_centralized(problem, L, A, B, truth, keys, cap)
    if scheme.name == "uniform":
        return simulate_uniform(problem, L, scheme.T0, scheme.lam, A, B, truth, keys, cap)
    if not scheme.resolved:
        raise ValueError("lts local thresholds have not been set")
    return simulate_lts(problem, L, scheme.a, scheme.b, A, B, truth, keys, cap)
