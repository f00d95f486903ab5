"""Distributed sequential composite hypothesis testing with level-triggered sampling."""

from .model import Hypothesis, MeanShiftProblem, ParameterInterval, TruthPoint, VarianceProblem, make_problem
from .centralized import CentralizedEngine, Verdict, run_to_decision
from .uniform import BernoulliFusion, UniformSensor, minimax_lambda, run_uniform
from .lts import LtsFusion, LtsSensor, simulate_lts
from .calibrate import calibrate_global_thresholds, calibrate_local_thresholds, predict
from .experiment import ExperimentSpec, compare_schemes, run_point, run_sweep

__all__ = [
    "Hypothesis", "MeanShiftProblem", "ParameterInterval", "TruthPoint", "VarianceProblem",
    "make_problem", "CentralizedEngine", "Verdict", "run_to_decision", "BernoulliFusion",
    "UniformSensor", "minimax_lambda", "run_uniform", "LtsFusion", "LtsSensor", "simulate_lts",
    "calibrate_global_thresholds", "calibrate_local_thresholds", "predict", "ExperimentSpec",
    "compare_schemes", "run_point", "run_sweep",
]
