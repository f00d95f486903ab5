"""Level-triggered sampling: repeated local GSPRTs emitting one-bit messages.

Each sensor runs a GSPRT on the samples since its last emission, sends +1 or
-1 when the local GLLR leaves (-b, a), and starts over. The fusion center
moves a lattice walk by +a or -b per message and stops when it leaves (-B, A).
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional

from .centralized import DEFAULT_CAP, Verdict, check_thresholds, sensor_streams, threshold_decision
from .model import Hypothesis, SuffStat


@dataclass(frozen=True)
class Message:
    sensor: int
    time: int
    bit: int
    local_gllr: float = math.nan  # statistic at emission, overshoot included


class LtsSensor:
    def __init__(self, sensor_id, problem, a, b):
        if not (a > 0 and b > 0):
            raise ValueError("local thresholds must be positive")
        self.id = sensor_id
        self.problem = problem
        self.a = a
        self.b = b
        self.stat = SuffStat()
        self.t = 0
        self.last_emission = 0
        self.emissions = 0

    def sensor_step(self, y):
        """Ingest one sample; return a Message if the local test stops, else None."""
        self.t += 1
        self.stat = self.problem.accumulate(self.stat, y)
        g = self.problem.gllr(self.stat)
        if g >= self.a:
            bit = 1
        elif g <= -self.b:
            bit = -1
        else:
            return None
        self.stat = SuffStat()
        self.last_emission = self.t
        self.emissions += 1
        return Message(self.id, self.t, bit, g)


class LtsFusion:
    def __init__(self, a, b, A, B):
        check_thresholds(A, B)
        self.a = a
        self.b = b
        self.A = A
        self.B = B
        self.up = 0
        self.down = 0
        self.verdict = None

    @property
    def v(self):
        # recomputed from the counts so the lattice invariant holds exactly
        return self.up * self.a - self.down * self.b

    @property
    def messages_received(self):
        return self.up + self.down

    def fusion_ingest(self, msg):
        if self.verdict is not None:
            raise RuntimeError("fusion already stopped")
        if msg.bit == 1:
            self.up += 1
        elif msg.bit == -1:
            self.down += 1
        else:
            raise ValueError(f"bit must be +1 or -1, got {msg.bit!r}")
        decision = threshold_decision(self.v, self.A, self.B)
        if decision is not None:
            self.verdict = Verdict(decision, msg.time, self.messages_received)
        return self.verdict


@dataclass
class LtsDiagnostics:
    periods: List[List[int]]  # inter-communication periods per sensor
    plus_emissions: int = 0
    minus_emissions: int = 0
    truth: Optional[Hypothesis] = None
    overshoots: List[float] = field(default_factory=list)

    @property
    def mean_period(self):
        flat = [tau for per_sensor in self.periods for tau in per_sensor]
        return sum(flat) / len(flat) if flat else math.nan

    @property
    def alpha_tilde(self):
        """Fraction of +1 emissions; an estimate of the local type-I error under H0."""
        total = self.plus_emissions + self.minus_emissions
        if self.truth != Hypothesis.H0 or total == 0:
            return math.nan
        return self.plus_emissions / total

    @property
    def beta_tilde(self):
        total = self.plus_emissions + self.minus_emissions
        if self.truth != Hypothesis.H1 or total == 0:
            return math.nan
        return self.minus_emissions / total


def simulate_lts(problem, L, a, b, A, B, truth, key, cap=DEFAULT_CAP, trace=None):
    """One LTS trajectory on a synchronous clock.

    At each tick every sensor takes one sample. Emissions from the same tick
    reach the fusion center in ascending sensor order, with a threshold check
    after each message. ``trace`` is called as trace(msg, fusion) per delivery.
    """
    problem.check_truth(truth)
    sensors = [LtsSensor(l, problem, a, b) for l in range(L)]
    streams = sensor_streams(key, L)
    fusion = LtsFusion(a, b, A, B)
    diag = LtsDiagnostics([[] for _ in range(L)], truth=truth.hypothesis)
    for t in range(1, cap + 1):
        outbox = []
        for sensor, stream in zip(sensors, streams):
            prev = sensor.last_emission
            msg = sensor.sensor_step(problem.sample(truth, stream))
            if msg is not None:
                outbox.append(msg)
                diag.periods[sensor.id].append(t - prev)
                diag.overshoots.append(msg.local_gllr - (a if msg.bit == 1 else -b))
                if msg.bit == 1:
                    diag.plus_emissions += 1
                else:
                    diag.minus_emissions += 1
        for msg in outbox:
            verdict = fusion.fusion_ingest(msg)
            if trace is not None:
                trace(msg, fusion)
            if verdict is not None:
                return verdict, diag
    return Verdict(None, cap, fusion.messages_received, censored=True), diag


def reference_exact_fusion_llr(messages, alpha_tilde, beta_tilde):
    """Exact log-likelihood ratio of the received bits for known local error rates.

    Diagnostic only: the fusion center itself uses the +a / -b lattice walk.
    """
    if not (0.0 < alpha_tilde < 1.0 and 0.0 < beta_tilde < 1.0):
        raise ValueError("local error probabilities must lie in (0, 1)")
    up = math.log((1.0 - beta_tilde) / alpha_tilde)
    down = math.log(beta_tilde / (1.0 - alpha_tilde))
    total = 0.0
    for msg in messages:
        bit = msg.bit if isinstance(msg, Message) else msg
        total += up if bit == 1 else down
    return total
