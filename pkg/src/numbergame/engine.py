"""Exact posterior and posterior-predictive computation.

Implements the two-parameter family over the rule-and-interval space:
p(h|X) is proportional to 1[X in h] * p(h)^alpha * |h|^(-beta*|X|),
with the predictive curve obtained by hypothesis averaging.  All products
are computed in log space with max-subtraction for stability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DegenerateInputError, InputError, NoCompatibleHypothesisError
from .registry import Domain, Hypothesis, HypothesisSpace


def validate_examples(examples: Iterable[int], domain: Domain) -> tuple:
    """Check the observed-example invariants and return X as a tuple."""
    xs = tuple(examples)
    if not xs:
        raise InputError("examples must be non-empty")
    if len(set(xs)) != len(xs):
        raise InputError(f"duplicate examples: {xs}")
    for x in xs:
        if x not in domain:
            raise InputError(f"example {x} outside domain 1..{domain.size}")
    return xs


def likelihood(h: Hypothesis, examples: Iterable[int], beta: float) -> float:
    """Sampling likelihood |h|^(-beta*|X|); zero if X is not inside h.

    beta=1 is strong sampling (the size principle), beta=0 weak sampling.
    """
    xs = tuple(examples)
    if not set(xs) <= h.support:
        return 0.0
    return h.size ** (-beta * len(xs))


@dataclass(frozen=True)
class Posterior:
    """Normalized posterior mass over a space's hypotheses."""

    space: HypothesisSpace
    examples: tuple
    alpha: float
    beta: float
    mass: np.ndarray          # aligned with space.hypotheses, sums to 1

    def map_hypothesis(self) -> Hypothesis:
        return self.space.hypotheses[int(np.argmax(self.mass))]


def posterior(space: HypothesisSpace, examples: Iterable[int],
              alpha: float = 1.0, beta: float = 1.0) -> Posterior:
    """Exact posterior over the space for observed examples X."""
    if alpha < 0 or beta < 0:
        raise InputError("alpha and beta must be non-negative")
    xs = validate_examples(examples, space.domain)
    xset = set(xs)

    log_w = np.full(len(space), -np.inf)
    for i, (h, p) in enumerate(zip(space.hypotheses, space.prior)):
        if xset <= h.support:
            log_w[i] = alpha * math.log(p) - beta * len(xs) * math.log(h.size)
    if not np.isfinite(log_w).any():
        raise NoCompatibleHypothesisError(f"no hypothesis contains X={sorted(xs)}")

    log_w -= log_w.max()
    mass = np.exp(log_w)
    mass /= mass.sum()
    return Posterior(space=space, examples=xs, alpha=alpha, beta=beta, mass=mass)


def predictive(post: Posterior) -> np.ndarray:
    """Hypothesis-averaged curve q(y) = sum_h 1[y in h] p(h|X), length d."""
    d = post.space.domain.size
    curve = np.zeros(d)
    for h, m in zip(post.space.hypotheses, post.mass):
        if m > 0.0:
            idx = np.fromiter(h.support, dtype=int) - 1
            curve[idx] += m
    return np.clip(curve, 0.0, 1.0)


def posterior_entropy(curve: np.ndarray) -> float:
    """Shannon entropy (bits) of the curve normalized to a distribution."""
    curve = np.asarray(curve, dtype=float)
    total = curve.sum()
    if total <= 0.0:
        raise DegenerateInputError("curve has no positive mass")
    p = curve / total
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())
