"""Rule and interval hypothesis registries for the number game.

Builds the deduplicated rule-and-interval hypothesis space for each
configured (task, domain-size) cell, assigns the rule/interval prior, and
implements the canonical label grammar used for prompting and for matching
free-text hypothesis labels back to executable supports.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .errors import ConfigurationError, ConstructionError, InputError

TENENBAUM99 = "tenenbaum99"
BIGELOW16 = "bigelow16"

# (task, d) cells the registry is calibrated for.
CONFIGURED_CELLS = {(TENENBAUM99, 100), (TENENBAUM99, 200), (BIGELOW16, 100)}

RULE_MASS = 0.6667          # lambda: total prior mass on rule hypotheses
ERLANG_SCALE = 10.0         # sigma: scale of the interval size density
INTERVAL_GRID_STEP = 5

# Supports smaller than this are pruned from the rule registry.  The
# thresholds are calibrated to the published registry sizes for each task
# (31/32 rules for tenenbaum99, 128 for bigelow16).
MIN_RULE_SUPPORT = {TENENBAUM99: 4, BIGELOW16: 3}

OTHER_LABEL = "other"
ALL_NUMBERS_LABEL = "all numbers"


@dataclass(frozen=True)
class Domain:
    """The finite integer domain {1, ..., size}."""

    size: int

    def __post_init__(self):
        if self.size < 2:
            raise InputError(f"domain size must be >= 2, got {self.size}")

    def __contains__(self, n) -> bool:
        return isinstance(n, int) and 1 <= n <= self.size

    def elements(self) -> range:
        return range(1, self.size + 1)


@dataclass(frozen=True)
class Hypothesis:
    """A named subset of the domain, either a rule or an interval."""

    label: str
    kind: str                      # "rule" or "interval"
    support: frozenset
    family: str
    transform: Optional[str] = None

    @property
    def size(self) -> int:
        return len(self.support)

    def support_fraction(self, domain: Domain) -> float:
        return len(self.support) / domain.size


# ---------------------------------------------------------------------------
# Base rule families
# ---------------------------------------------------------------------------

def _sieve_primes(limit: int) -> set:
    is_prime = bytearray([1]) * (limit + 1)
    is_prime[0:2] = b"\x00\x00"
    for p in range(2, int(limit ** 0.5) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = b"\x00" * len(is_prime[p * p :: p])
    return {n for n in range(2, limit + 1) if is_prime[n]}


def _is_power_of(n: int, k: int) -> bool:
    if n == 1:
        return True
    while n % k == 0:
        n //= k
    return n == 1


def _family_support(family: str, domain: Domain) -> frozenset:
    """In-domain extension of a base rule family."""
    d = domain.size
    dom = range(1, d + 1)
    if family == "even numbers":
        return frozenset(n for n in dom if n % 2 == 0)
    if family == "odd numbers":
        return frozenset(n for n in dom if n % 2 == 1)
    if family == "squares":
        return frozenset(n * n for n in dom if n * n <= d)
    if family == "cubes":
        return frozenset(n ** 3 for n in dom if n ** 3 <= d)
    if family == "primes":
        return frozenset(_sieve_primes(d))
    m = re.fullmatch(r"multiples of (\d+)", family)
    if m:
        k = int(m.group(1))
        return frozenset(n for n in dom if n % k == 0)
    m = re.fullmatch(r"powers of (\d+)", family)
    if m:
        k = int(m.group(1))
        return frozenset(n for n in dom if _is_power_of(n, k))
    m = re.fullmatch(r"ends in (\d)", family)
    if m:
        k = int(m.group(1))
        return frozenset(n for n in dom if n % 10 == k)
    m = re.fullmatch(r"(\d+) n plus (\d+)", family)
    if m:
        k, j = int(m.group(1)), int(m.group(2))
        return frozenset(n for n in dom if n % k == j % k)
    raise InputError(f"unknown rule family: {family!r}")


def _tenenbaum99_families() -> list:
    fams = ["even numbers", "odd numbers", "squares", "cubes", "primes"]
    fams += [f"multiples of {k}" for k in range(3, 13)]
    fams += [f"powers of {k}" for k in range(2, 11)]
    fams += [f"ends in {k}" for k in range(10)]
    fams += [f"5 n plus {k}" for k in range(1, 5)]
    return fams


def _bigelow16_families() -> list:
    fams = ["even numbers", "odd numbers", "squares", "cubes", "primes"]
    fams += [f"multiples of {k}" for k in range(3, 13)]
    return fams


# Element-wise transforms applied to base extensions (bigelow16 only).
# Order matters for dedup tie-breaking: identity first, then the configured
# transforms in their listed order.
TRANSFORMS: list = [
    ("n+1", lambda n: n + 1),
    ("n-1", lambda n: n - 1),
    ("n+2", lambda n: n + 2),
    ("n-2", lambda n: n - 2),
    ("2n", lambda n: 2 * n),
    ("3n", lambda n: 3 * n),
    ("2n+1", lambda n: 2 * n + 1),
    ("3n-1", lambda n: 3 * n - 1),
    ("3n+1", lambda n: 3 * n + 1),
    ("2^n", lambda n: 2 ** n),
    ("2^(n+1)", lambda n: 2 ** (n + 1)),
    ("2^n+1", lambda n: 2 ** n + 1),
    ("2^n-1", lambda n: 2 ** n - 1),
]
TRANSFORM_MAP = dict(TRANSFORMS)


def _apply_transform(base: frozenset, transform: Optional[str], domain: Domain) -> frozenset:
    if transform is None:
        return base
    f = TRANSFORM_MAP[transform]
    out = set()
    for n in sorted(base):
        # 2^n grows past any domain quickly; cap to avoid huge ints
        if transform.startswith("2^") and n > 64:
            break
        v = f(n)
        if 1 <= v <= domain.size:
            out.add(v)
    return frozenset(out)


def _rule_label(family: str, transform: Optional[str]) -> str:
    if transform is None:
        return family
    return f"{family}, {transform}"


def build_rules(task: str, domain: Domain) -> list:
    """Enumerate, transform, deduplicate, and prune the rule hypotheses."""
    if (task, domain.size) not in CONFIGURED_CELLS:
        raise ConfigurationError(f"unconfigured cell: ({task}, d={domain.size})")
    if task == TENENBAUM99:
        candidates = [(fam, None) for fam in _tenenbaum99_families()]
    else:
        candidates = [
            (fam, tr)
            for fam in _bigelow16_families()
            for tr in [None] + [name for name, _ in TRANSFORMS]
        ]

    min_size = MIN_RULE_SUPPORT[task]
    seen = set()
    rules = []
    for family, transform in candidates:
        base = _family_support(family, domain)
        support = _apply_transform(base, transform, domain)
        if len(support) < min_size:
            continue
        if support in seen:
            continue
        seen.add(support)
        rules.append(
            Hypothesis(
                label=_rule_label(family, transform),
                kind="rule",
                support=support,
                family=family,
                transform=transform,
            )
        )
    return rules


# ---------------------------------------------------------------------------
# Natural intervals
# ---------------------------------------------------------------------------

def interval_grid(domain: Domain) -> list:
    """Endpoint grid {1} union {5, 10, ..., d}."""
    return [1] + list(range(INTERVAL_GRID_STEP, domain.size + 1, INTERVAL_GRID_STEP))


def _interval_hypothesis(a: int, b: int) -> Hypothesis:
    return Hypothesis(
        label=f"interval {a}..{b}",
        kind="interval",
        support=frozenset(range(a, b + 1)),
        family="interval",
    )


def build_intervals(domain: Domain) -> list:
    """All grid-endpoint intervals [a, b], excluding the full domain [1, d]."""
    grid = interval_grid(domain)
    intervals = []
    for i, a in enumerate(grid):
        for b in grid[i:]:
            if a == 1 and b == domain.size:
                continue
            intervals.append(_interval_hypothesis(a, b))
    return intervals


def erlang_density(size: int, scale: float = ERLANG_SCALE) -> float:
    """Erlang-2 size density (unnormalized) used for the interval prior."""
    return (size / scale ** 2) * math.exp(-size / scale)


# ---------------------------------------------------------------------------
# Hypothesis space
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HypothesisSpace:
    """Deduplicated rule + interval registry with its normalized prior."""

    task: str
    domain: Domain
    hypotheses: tuple
    prior: tuple

    def __len__(self) -> int:
        return len(self.hypotheses)

    @property
    def rules(self) -> list:
        return [h for h in self.hypotheses if h.kind == "rule"]

    @property
    def intervals(self) -> list:
        return [h for h in self.hypotheses if h.kind == "interval"]

    def index_of_label(self, label: str) -> Optional[int]:
        for i, h in enumerate(self.hypotheses):
            if h.label == label:
                return i
        return None

    def find_by_support(self, support: frozenset) -> Optional[Hypothesis]:
        for h in self.hypotheses:
            if h.support == support:
                return h
        return None


def build_space(task: str, domain: Domain) -> HypothesisSpace:
    """Merge rules and intervals and assign the configured prior.

    Rule hypotheses share RULE_MASS uniformly; the remaining mass is spread
    across intervals proportional to the Erlang density of their length.
    """
    rules = build_rules(task, domain)
    intervals = build_intervals(domain)
    if not rules or not intervals:
        raise ConstructionError(f"empty family after pruning for ({task}, d={domain.size})")

    prior = []
    rule_each = RULE_MASS / len(rules)
    prior.extend(rule_each for _ in rules)

    weights = [erlang_density(h.size) for h in intervals]
    total = sum(weights)
    interval_mass = 1.0 - RULE_MASS
    prior.extend(interval_mass * w / total for w in weights)

    return HypothesisSpace(
        task=task,
        domain=domain,
        hypotheses=tuple(rules) + tuple(intervals),
        prior=tuple(prior),
    )


# ---------------------------------------------------------------------------
# Example-conditioned candidate lists K(X)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CandidateEntry:
    label: str
    support: Optional[frozenset]   # None for the residual "other" entry


@dataclass(frozen=True)
class CandidateList:
    """Prompt-visible candidate hypotheses for one example set."""

    entries: tuple

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def labels(self) -> list:
        return [e.label for e in self.entries]

    @property
    def displayed_labels(self) -> list:
        """Unique labels after collapsing repeated interval labels."""
        out = []
        for e in self.entries:
            if e.label not in out:
                out.append(e.label)
        return out


def _round_outward(lo: int, hi: int, step: int, domain: Domain) -> tuple:
    a = (lo // step) * step
    b = math.ceil(hi / step) * step
    return max(a, 1), min(b, domain.size)


def candidate_list(space: HypothesisSpace, examples: Iterable[int]) -> CandidateList:
    """The compact candidate list K(X) shown in the evaluation probe."""
    xs = list(examples)
    if not xs:
        raise InputError("examples must be non-empty")
    for x in xs:
        if x not in space.domain:
            raise InputError(f"example {x} outside domain 1..{space.domain.size}")

    entries = []
    if space.task == TENENBAUM99:
        for h in space.rules:
            entries.append(CandidateEntry(h.label, h.support))
    else:
        # bigelow16 rules are grouped back to their 15 base-family labels
        for family in _bigelow16_families():
            entries.append(CandidateEntry(family, _family_support(family, space.domain)))

    lo, hi = min(xs), max(xs)
    for step in (10, 5):
        a, b = _round_outward(lo, hi, step, space.domain)
        entries.append(CandidateEntry(f"interval {a}..{b}", frozenset(range(a, b + 1))))
    entries.append(CandidateEntry(f"interval {lo}..{hi}", frozenset(range(lo, hi + 1))))
    entries.append(
        CandidateEntry(ALL_NUMBERS_LABEL, frozenset(space.domain.elements()))
    )
    entries.append(CandidateEntry(OTHER_LABEL, None))
    return CandidateList(entries=tuple(entries))


# ---------------------------------------------------------------------------
# Label grammar
# ---------------------------------------------------------------------------

_FAMILY_RE = re.compile(
    r"even numbers|odd numbers|squares|cubes|primes"
    r"|multiples of \d+|powers of \d+|ends in \d|\d+ n plus \d+"
)


def parse_label(text: str, domain: Domain) -> Optional[Hypothesis]:
    """Map a canonical label to its executable hypothesis.

    Returns None for text outside the label grammar (the unmatched marker).
    """
    text = text.strip().lower()
    if text == ALL_NUMBERS_LABEL:
        return Hypothesis(
            label=ALL_NUMBERS_LABEL,
            kind="interval",
            support=frozenset(domain.elements()),
            family="interval",
        )
    m = re.fullmatch(r"interval (\d+)\.\.(\d+)", text)
    if m:
        a, b = int(m.group(1)), int(m.group(2))
        if not (1 <= a <= b <= domain.size):
            return None
        return _interval_hypothesis(a, b)

    family, transform = text, None
    if ", " in text:
        family, tag = text.split(", ", 1)
        if tag not in TRANSFORM_MAP:
            return None
        transform = tag
    if not _FAMILY_RE.fullmatch(family):
        return None
    try:
        base = _family_support(family, domain)
    except InputError:
        return None
    support = _apply_transform(base, transform, domain)
    if not support:
        return None
    return Hypothesis(
        label=_rule_label(family, transform),
        kind="rule",
        support=support,
        family=family,
        transform=transform,
    )


def format_label(h: Hypothesis) -> str:
    return h.label


# ---------------------------------------------------------------------------
# Space serialization
# ---------------------------------------------------------------------------

SPACE_FORMAT_VERSION = 1


def _support_runs(support: frozenset) -> list:
    """Encode a support as sorted inclusive [a, b] runs."""
    runs = []
    for n in sorted(support):
        if runs and n == runs[-1][1] + 1:
            runs[-1][1] = n
        else:
            runs.append([n, n])
    return runs


def _runs_to_support(runs: list) -> frozenset:
    out = set()
    for a, b in runs:
        out.update(range(a, b + 1))
    return frozenset(out)


def space_to_json(space: HypothesisSpace) -> dict:
    return {
        "version": SPACE_FORMAT_VERSION,
        "task": space.task,
        "d": space.domain.size,
        "hypotheses": [
            {
                "label": h.label,
                "kind": h.kind,
                "family": h.family,
                "transform": h.transform,
                "support_runs": _support_runs(h.support),
                "prior": p,
            }
            for h, p in zip(space.hypotheses, space.prior)
        ],
    }


def space_from_json(doc: dict) -> HypothesisSpace:
    if doc.get("version") != SPACE_FORMAT_VERSION:
        raise InputError(f"unsupported space format version: {doc.get('version')}")
    hyps = []
    prior = []
    for rec in doc["hypotheses"]:
        hyps.append(
            Hypothesis(
                label=rec["label"],
                kind=rec["kind"],
                support=_runs_to_support(rec["support_runs"]),
                family=rec["family"],
                transform=rec["transform"],
            )
        )
        prior.append(rec["prior"])
    return HypothesisSpace(
        task=doc["task"],
        domain=Domain(doc["d"]),
        hypotheses=tuple(hyps),
        prior=tuple(prior),
    )


def save_space(space: HypothesisSpace, path) -> None:
    with open(path, "w") as f:
        json.dump(space_to_json(space), f)


def load_space(path) -> HypothesisSpace:
    with open(path) as f:
        return space_from_json(json.load(f))
