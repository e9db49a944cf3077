"""Unimodular sequence sets with low peak sidelobe level, and a MIMO radar
imaging simulator to evaluate them."""
from .correlation import (CorrelationTable, LagConstraint, LagConstraintSet, SequenceSet,
                          correlate_all_fft, correlate_brute, isl, metrics, psl, psl_argmax)
from .errors import NumericError
from .mda import MdaConfig, MdaResult, mda_solve
from .radar import (ArrayGeometry, RadarScene, ReceivedData, estimate_capon, estimate_ls,
                    matched_filter, simulate_received, steering_vectors)
from .solver import SolverConfig, SolverTrace, design, init_random
from .surrogate import SurrogateSystem, build_surrogate

__all__ = [
    "ArrayGeometry", "CorrelationTable", "LagConstraint", "LagConstraintSet", "MdaConfig",
    "MdaResult", "NumericError", "RadarScene", "ReceivedData", "SequenceSet", "SolverConfig",
    "SolverTrace", "SurrogateSystem", "build_surrogate", "correlate_all_fft", "correlate_brute",
    "design", "estimate_capon", "estimate_ls", "init_random", "isl", "matched_filter",
    "mda_solve", "metrics", "psl", "psl_argmax", "simulate_received", "steering_vectors",
]
