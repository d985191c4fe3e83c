"""Stimulus sets, sequential prefix expansion, and structural classification.

A stimulus set is the full set of unique numbers for one trial; the model
sees them one at a time, so a set with k numbers expands into
min(k, 4) observed-example presentations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Iterable, Optional

from .errors import InputError
from .registry import Domain, HypothesisSpace

MAX_PREFIX = 4

SINGLETON = "singleton"
RULE_LIKE = "rule-like"
SIMILARITY_LIKE = "similarity-like"
OTHER = "other"

# Structural-classifier defaults; exposed as configuration because the
# published category counts are calibration targets, not definitions.
RULE_FRACTION_THRESHOLD = 0.5
SIMILARITY_SPREAD_THRESHOLD = 15


@dataclass(frozen=True)
class StimulusSet:
    id: str
    source: str
    numbers: tuple
    category: Optional[str] = None

    def __post_init__(self):
        if not self.numbers:
            raise InputError(f"stimulus {self.id} has no numbers")
        if len(set(self.numbers)) != len(self.numbers):
            raise InputError(f"stimulus {self.id} has duplicate numbers")


@dataclass(frozen=True)
class StimulusPresentation:
    stimulus_id: str
    source: str
    n: int
    examples: tuple
    category: Optional[str] = None


def classify(stimulus: StimulusSet, space: HypothesisSpace,
             rule_fraction: float = RULE_FRACTION_THRESHOLD,
             spread: int = SIMILARITY_SPREAD_THRESHOLD) -> str:
    """Structural category of a stimulus set.

    Singleton sets are their own category; otherwise a set is rule-like if
    some rule hypothesis with small support fraction contains every number,
    similarity-like if the numbers span a narrow range, else other.
    """
    numbers = set(stimulus.numbers)
    for x in numbers:
        if x not in space.domain:
            raise InputError(f"stimulus number {x} outside domain 1..{space.domain.size}")
    if len(numbers) == 1:
        return SINGLETON
    for h in space.rules:
        if numbers <= h.support and h.support_fraction(space.domain) < rule_fraction:
            return RULE_LIKE
    if max(numbers) - min(numbers) <= spread:
        return SIMILARITY_LIKE
    return OTHER


def classify_all(stimuli: Iterable[StimulusSet], space: HypothesisSpace,
                 **thresholds) -> list:
    return [replace(s, category=classify(s, space, **thresholds)) for s in stimuli]


def expand_prefixes(stimuli: Iterable[StimulusSet], max_n: int = MAX_PREFIX) -> list:
    """Expand each stimulus into its ordered example-prefix presentations."""
    out = []
    for s in stimuli:
        for n in range(1, min(len(s.numbers), max_n) + 1):
            out.append(
                StimulusPresentation(
                    stimulus_id=s.id,
                    source=s.source,
                    n=n,
                    examples=s.numbers[:n],
                    category=s.category,
                )
            )
    return out


# ---------------------------------------------------------------------------
# Embedded tenenbaum99 stimuli
# ---------------------------------------------------------------------------

TENENBAUM99_SETS = [
    StimulusSet("t99-01", "tenenbaum99", (16,)),
    StimulusSet("t99-02", "tenenbaum99", (60,)),
    StimulusSet("t99-03", "tenenbaum99", (16, 8, 2, 64)),
    StimulusSet("t99-04", "tenenbaum99", (60, 80, 10, 30)),
    StimulusSet("t99-05", "tenenbaum99", (81, 25, 4, 36)),
    StimulusSet("t99-06", "tenenbaum99", (16, 23, 19, 20)),
    StimulusSet("t99-07", "tenenbaum99", (60, 52, 57, 55)),
    StimulusSet("t99-08", "tenenbaum99", (81, 86, 93, 89)),
]


def tenenbaum99_sets(space: Optional[HypothesisSpace] = None) -> list:
    """The eight embedded stimulus sets, classified when a space is given."""
    if space is None:
        return list(TENENBAUM99_SETS)
    return classify_all(TENENBAUM99_SETS, space)


# ---------------------------------------------------------------------------
# Stimulus files
# ---------------------------------------------------------------------------

def load_stimulus_file(path) -> list:
    """Read a stimulus JSON document: {source, stimuli: [{id, numbers}]}."""
    with open(path) as f:
        doc = json.load(f)
    source = doc["source"]
    out = []
    for rec in doc["stimuli"]:
        out.append(StimulusSet(str(rec["id"]), source, tuple(rec["numbers"])))
    return out


def save_stimulus_file(stimuli: list, path) -> None:
    sources = {s.source for s in stimuli}
    if len(sources) != 1:
        raise InputError(f"one source per stimulus file, got {sorted(sources)}")
    doc = {
        "source": sources.pop(),
        "stimuli": [{"id": s.id, "numbers": list(s.numbers)} for s in stimuli],
    }
    with open(path, "w") as f:
        json.dump(doc, f)
