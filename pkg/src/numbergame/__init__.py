"""Exact Bayesian number-game engine and behavioral-fit harness."""

from .registry import (
    BIGELOW16,
    TENENBAUM99,
    CandidateList,
    Domain,
    Hypothesis,
    HypothesisSpace,
    build_intervals,
    build_rules,
    build_space,
    candidate_list,
    parse_label,
)
from .engine import likelihood, posterior, posterior_entropy, predictive

__all__ = [
    "BIGELOW16",
    "TENENBAUM99",
    "CandidateList",
    "Domain",
    "Hypothesis",
    "HypothesisSpace",
    "build_intervals",
    "build_rules",
    "build_space",
    "candidate_list",
    "likelihood",
    "parse_label",
    "posterior",
    "posterior_entropy",
    "predictive",
]
