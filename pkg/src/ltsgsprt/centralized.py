"""Centralized GSPRT: the fusion center sees every raw sample from all L sensors."""

from dataclasses import dataclass
from typing import Optional

from .model import Hypothesis, SuffStat
from .rng import Stream, derive_key

DEFAULT_CAP = 10_000_000


@dataclass(frozen=True)
class Verdict:
    decision: Optional[Hypothesis]  # None when censored
    stopping_time: int
    messages_sent: int
    censored: bool = False


def threshold_decision(value, A, B):
    """Closed stopping region: H1 at value >= A, H0 at value <= -B, else None."""
    if value >= A:
        return Hypothesis.H1
    if value <= -B:
        return Hypothesis.H0
    return None


def check_thresholds(A, B):
    if not (A > 0 and B > 0):
        raise ValueError(f"thresholds must be positive, got A={A}, B={B}")


def sensor_streams(key, L):
    return [Stream(derive_key(key, sensor)) for sensor in range(L)]


class CentralizedEngine:
    def __init__(self, problem, L, A, B):
        if L < 1:
            raise ValueError("need at least one sensor")
        check_thresholds(A, B)
        self.problem = problem
        self.L = L
        self.A = A
        self.B = B
        self.stat = SuffStat()
        self.t = 0
        self.statistic = 0.0
        self.verdict = None

    def step(self, samples):
        """Pool one sample per sensor; return a Verdict on stopping, else None."""
        if self.verdict is not None:
            raise RuntimeError("engine already stopped")
        if len(samples) != self.L:
            raise ValueError(f"expected {self.L} samples, got {len(samples)}")
        acc = self.stat.acc
        for y in samples:
            acc = acc + self.problem.statistic(y)
        self.stat = SuffStat(acc, self.stat.n + self.L)
        self.t += 1
        self.statistic = self.problem.gllr(self.stat)
        decision = threshold_decision(self.statistic, self.A, self.B)
        if decision is not None:
            self.verdict = Verdict(decision, self.t, self.L * self.t)
        return self.verdict


def run_to_decision(engine, truth, key, cap=DEFAULT_CAP, trace=None):
    """Drive a fresh engine with samples from per-sensor streams until it stops or hits ``cap``.

    ``trace``, when given, is called with (t, engine) after every step.
    """
    if engine.t != 0:
        raise RuntimeError("run_to_decision needs a fresh engine")
    engine.problem.check_truth(truth)
    streams = sensor_streams(key, engine.L)
    while engine.t < cap:
        verdict = engine.step([engine.problem.sample(truth, s) for s in streams])
        if trace is not None:
            trace(engine.t, engine)
        if verdict is not None:
            return verdict
    return Verdict(None, cap, engine.L * cap, censored=True)
