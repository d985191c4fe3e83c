"""Synthetic readout generators with known ground truth.

Agents emit the same readout records the ingest layer consumes, so they
serve as oracles for fitter recovery and projection-equivalence tests.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .engine import posterior, predictive
from .errors import InputError, NoCompatibleHypothesisError
from .readouts import GENERATION, PREDICTION, LabelEntry, LabelReadout, \
    PredictionReadout, RecordKey
from .registry import HypothesisSpace
from .stimuli import StimulusPresentation

BAYESIAN = "bayesian"
MAP_ONLY = "map-only"
NARROWEST = "narrowest-compatible"
UNIFORM_NOISE = "uniform-noise"
AGENT_KINDS = (BAYESIAN, MAP_ONLY, NARROWEST, UNIFORM_NOISE)


@dataclass(frozen=True)
class AgentSpec:
    kind: str = BAYESIAN
    alpha: float = 1.0
    beta: float = 1.0
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in AGENT_KINDS:
            raise InputError(f"unknown agent kind: {self.kind}")
        if not 0.0 <= self.noise <= 0.5:
            raise InputError(f"noise amplitude must be in [0, 0.5], got {self.noise}")


def _presentation_rng(agent: AgentSpec, presentation: StimulusPresentation):
    # per-presentation stream derived from (seed, stimulus id, prefix length)
    tag = zlib.crc32(presentation.stimulus_id.encode())
    return np.random.default_rng([agent.seed, tag, presentation.n])


def _record_key(presentation: StimulusPresentation, space: HypothesisSpace,
                measurement: str) -> RecordKey:
    return RecordKey(
        task=space.task, d=space.domain.size,
        stimulus_id=presentation.stimulus_id, n=presentation.n,
        measurement=measurement, condition="default", thinking=False,
    )


def emit_prediction(agent: AgentSpec, space: HypothesisSpace,
                    presentation: StimulusPresentation) -> Optional[PredictionReadout]:
    """Curve readout for one presentation; None if X fits no hypothesis."""
    try:
        post = posterior(space, presentation.examples,
                         alpha=agent.alpha, beta=agent.beta)
    except NoCompatibleHypothesisError:
        return None

    if agent.kind == BAYESIAN:
        curve = predictive(post)
    elif agent.kind == MAP_ONLY:
        curve = _indicator(post.map_hypothesis().support, space.domain.size)
    elif agent.kind == NARROWEST:
        compat = [h for h, m in zip(space.hypotheses, post.mass) if m > 0.0]
        narrowest = min(compat, key=lambda h: (h.size, h.label))
        curve = _indicator(narrowest.support, space.domain.size)
    else:  # uniform-noise: flat 0.5 baseline perturbed below
        curve = np.full(space.domain.size, 0.5)

    if agent.noise > 0.0:
        rng = _presentation_rng(agent, presentation)
        curve = curve + rng.uniform(-agent.noise, agent.noise, size=curve.size)
        curve = np.clip(curve, 0.0, 1.0)
    return PredictionReadout(
        key=_record_key(presentation, space, PREDICTION),
        curve=curve, provenance="synthetic", examples=presentation.examples,
    )


def _indicator(support: frozenset, d: int) -> np.ndarray:
    curve = np.zeros(d)
    curve[np.fromiter(support, dtype=int) - 1] = 1.0
    return curve


def emit_labels(agent: AgentSpec, space: HypothesisSpace,
                presentation: StimulusPresentation, k: int) -> Optional[LabelReadout]:
    """Top-k posterior hypotheses as weighted labels (bayesian kinds)."""
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    try:
        post = posterior(space, presentation.examples,
                         alpha=agent.alpha, beta=agent.beta)
    except NoCompatibleHypothesisError:
        return None

    ranked = sorted(
        ((m, h) for h, m in zip(space.hypotheses, post.mass) if m > 0.0),
        key=lambda pair: (-pair[0], pair[1].size, pair[1].label))
    top = ranked[:k]
    total = sum(m for m, _ in top)
    entries = [
        LabelEntry(label=h.label, raw_confidence=float(m),
                   weight=float(m / total), support=h.support, kind=h.kind)
        for m, h in top
    ]
    return LabelReadout(
        key=_record_key(presentation, space, GENERATION),
        entries=entries, unmatched=[], matched_mass=1.0, unmatched_mass=0.0,
        examples=presentation.examples,
    )
