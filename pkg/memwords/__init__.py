"""Markov order and memory-word estimation from a single sample path."""
from .estimator import EstimatorParams, empirical_conditional, empirical_discrepancy, order_estimate, order_trajectory
from .markov_oracle import ExplicitChain, load_chain, make_chain, memory_word_report
from .seqcore import ContextIndex, Sequence, count, occurrence_times

__all__ = [
    "ContextIndex",
    "EstimatorParams",
    "ExplicitChain",
    "Sequence",
    "count",
    "empirical_conditional",
    "empirical_discrepancy",
    "load_chain",
    "make_chain",
    "memory_word_report",
    "occurrence_times",
    "order_estimate",
    "order_trajectory",
]
